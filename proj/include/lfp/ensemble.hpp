#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "lfp/polynomial.hpp"
#include "lfp/vec3.hpp"

namespace lfp {

/// N particles, each carrying M+1 gPC coefficient vectors, stored particle-major.
class GalerkinEnsemble {
 public:
  GalerkinEnsemble() = default;
  GalerkinEnsemble(std::size_t particles, std::shared_ptr<const GalerkinSpace> space)
      : particles_(particles), space_(std::move(space)), coeffs_(particles_ * space_->modes()) {}

  std::size_t particles() const noexcept { return particles_; }
  std::size_t modes() const noexcept { return space_->modes(); }
  int order() const noexcept { return space_->order(); }
  const GalerkinSpace& space() const noexcept { return *space_; }
  std::shared_ptr<const GalerkinSpace> space_ptr() const noexcept { return space_; }

  std::span<Vec3> particle(std::size_t i) noexcept { return {coeffs_.data() + i * modes(), modes()}; }
  std::span<const Vec3> particle(std::size_t i) const noexcept {
    return {coeffs_.data() + i * modes(), modes()};
  }
  std::span<const Vec3> coefficients() const noexcept { return coeffs_; }

  /// Velocities of all particles at quadrature node q.
  std::vector<Vec3> at_node(std::size_t q) const;
  /// Mode-0 coefficients (the z-mean of each particle).
  std::vector<Vec3> mean_velocities() const;

  /// Copy truncated (or zero-padded) to another order on the same quadrature.
  GalerkinEnsemble with_order(std::shared_ptr<const GalerkinSpace> space) const;

 private:
  std::size_t particles_ = 0;
  std::shared_ptr<const GalerkinSpace> space_;
  std::vector<Vec3> coeffs_;
};

}  // namespace lfp
