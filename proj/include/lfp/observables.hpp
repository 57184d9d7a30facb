#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lfp/ensemble.hpp"
#include "lfp/polynomial.hpp"
#include "lfp/vec3.hpp"

namespace lfp {

/// Sample moments of a velocity ensemble. T and T_dir are centered on the sample mean; M4 is the
/// raw per-axis fourth moment sum_d <v_d^4> about zero.
struct MomentSet {
  Vec3 m1{};
  double temperature = 0.0;
  Vec3 t_dir{};
  double m4 = 0.0;

  double anisotropy() const noexcept { return t_dir.x - t_dir.z; }
};

/// Throws std::invalid_argument for fewer than two velocities.
MomentSet moments(std::span<const Vec3> v);
/// Moments of the sG ensemble evaluated at quadrature node q.
MomentSet moments_at_node(const GalerkinEnsemble& ens, std::size_t q);

/// Neumaier-compensated sums over particles, in index order.
Vec3 total_momentum(std::span<const Vec3> v) noexcept;
double total_energy(std::span<const Vec3> v) noexcept;
/// sum_i v_hat_{i,k} for each mode k.
std::vector<Vec3> mode_momentum(const GalerkinEnsemble& ens);

/// Histogram of one velocity component on [-L, L].
class Marginal1D {
 public:
  Marginal1D(double half_width, std::size_t bins, int axis = 0);

  void add(const Vec3& v, double weight = 1.0) noexcept;
  void add(std::span<const Vec3> v, double weight = 1.0) noexcept;

  std::size_t bins() const noexcept { return counts_.size(); }
  double bin_width() const noexcept { return 2.0 * half_width_ / static_cast<double>(counts_.size()); }
  double center(std::size_t b) const noexcept;
  /// Normalized by the total weight added, including out-of-range samples.
  std::vector<double> density() const;
  double out_of_range_fraction() const noexcept;

 private:
  double half_width_;
  int axis_;
  std::vector<double> counts_;
  double total_ = 0.0;
  double outside_ = 0.0;
};

/// Histogram of the full velocity on the cube [-L, L]^3.
class Histogram3D {
 public:
  Histogram3D(double half_width, std::size_t bins_per_axis);

  void add(const Vec3& v) noexcept;
  void add(std::span<const Vec3> v) noexcept;

  std::size_t bins_per_axis() const noexcept { return bins_; }
  double bin_width() const noexcept { return 2.0 * half_width_ / static_cast<double>(bins_); }
  double bin_volume() const noexcept;
  Vec3 center(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept;
  double density(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept;
  double out_of_range_fraction() const noexcept;
  std::size_t samples() const noexcept { return total_; }

 private:
  double half_width_;
  std::size_t bins_;
  std::vector<std::uint32_t> counts_;
  std::size_t total_ = 0;
  std::size_t outside_ = 0;
};

struct ZStatistics {
  double expectation = 0.0;
  double variance = 0.0;
};

/// E = sum_q w_q g_q, Var = sum_q w_q g_q^2 - E^2.
ZStatistics z_statistics(std::span<const double> field, const Quadrature& quad);

/// Relative discrete L2 error of the histogram against an exact density sampled at bin centers.
double l2_error_velocity(const Histogram3D& hist, const std::function<double(const Vec3&)>& exact);
/// Same for a marginal and a 1-D reference density.
double l2_error_marginal(std::span<const double> density, std::span<const double> reference);

/// sqrt(sum_q w_q (g - g_ref)^2).
double l2p_error_z(std::span<const double> g, std::span<const double> g_ref, const Quadrature& quad);

struct RateFit {
  double tau = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t used = 0;
};

/// Least-squares fit of ln(values) against times over [t_begin, t_end]; tau = -1/slope.
/// Nonpositive values are skipped. Throws std::invalid_argument with fewer than two usable
/// points or a nonnegative slope.
RateFit fit_rate(std::span<const double> times, std::span<const double> values, double t_begin,
                 double t_end);

}  // namespace lfp
