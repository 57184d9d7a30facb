#include "lfp/ensemble.hpp"

#include <algorithm>

#include "lfp/galerkin.hpp"

namespace lfp {

std::vector<Vec3> GalerkinEnsemble::at_node(std::size_t q) const {
  std::vector<Vec3> out(particles_);
  for (std::size_t i = 0; i < particles_; ++i) out[i] = eval_at_node(particle(i), *space_, q);
  return out;
}

std::vector<Vec3> GalerkinEnsemble::mean_velocities() const {
  std::vector<Vec3> out(particles_);
  for (std::size_t i = 0; i < particles_; ++i) out[i] = particle(i)[0];
  return out;
}

GalerkinEnsemble GalerkinEnsemble::with_order(std::shared_ptr<const GalerkinSpace> space) const {
  GalerkinEnsemble out(particles_, std::move(space));
  const std::size_t keep = std::min(modes(), out.modes());
  for (std::size_t i = 0; i < particles_; ++i) {
    auto src = particle(i);
    auto dst = out.particle(i);
    std::copy_n(src.begin(), keep, dst.begin());
  }
  return out;
}

}  // namespace lfp
