#include "lfp/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lfp/galerkin.hpp"

namespace lfp {

namespace {

// Neumaier summation.
struct Compensated {
  double sum = 0.0;
  double c = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const noexcept { return sum + c; }
};

}  // namespace

MomentSet moments(std::span<const Vec3> v) {
  if (v.size() < 2) throw std::invalid_argument("moments: need at least two velocities");
  const double n = static_cast<double>(v.size());
  Compensated sx, sy, sz;
  for (const auto& u : v) {
    sx.add(u.x);
    sy.add(u.y);
    sz.add(u.z);
  }
  MomentSet m;
  m.m1 = {sx.value() / n, sy.value() / n, sz.value() / n};
  Compensated vx, vy, vz, q4;
  for (const auto& u : v) {
    const Vec3 d = u - m.m1;
    vx.add(d.x * d.x);
    vy.add(d.y * d.y);
    vz.add(d.z * d.z);
    const double x2 = u.x * u.x, y2 = u.y * u.y, z2 = u.z * u.z;
    q4.add(x2 * x2 + y2 * y2 + z2 * z2);
  }
  m.t_dir = {vx.value() / n, vy.value() / n, vz.value() / n};
  m.temperature = (m.t_dir.x + m.t_dir.y + m.t_dir.z) / 3.0;
  m.m4 = q4.value() / n;
  return m;
}

MomentSet moments_at_node(const GalerkinEnsemble& ens, std::size_t q) { return moments(ens.at_node(q)); }

Vec3 total_momentum(std::span<const Vec3> v) noexcept {
  Compensated sx, sy, sz;
  for (const auto& u : v) {
    sx.add(u.x);
    sy.add(u.y);
    sz.add(u.z);
  }
  return {sx.value(), sy.value(), sz.value()};
}

double total_energy(std::span<const Vec3> v) noexcept {
  Compensated s;
  for (const auto& u : v) s.add(norm2(u));
  return s.value();
}

std::vector<Vec3> mode_momentum(const GalerkinEnsemble& ens) {
  const std::size_t modes = ens.modes();
  std::vector<Compensated> acc(3 * modes);
  for (std::size_t i = 0; i < ens.particles(); ++i) {
    const auto p = ens.particle(i);
    for (std::size_t k = 0; k < modes; ++k) {
      acc[3 * k].add(p[k].x);
      acc[3 * k + 1].add(p[k].y);
      acc[3 * k + 2].add(p[k].z);
    }
  }
  std::vector<Vec3> out(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    out[k] = {acc[3 * k].value(), acc[3 * k + 1].value(), acc[3 * k + 2].value()};
  }
  return out;
}

// ---------------------------------------------------------------------------

Marginal1D::Marginal1D(double half_width, std::size_t bins, int axis)
    : half_width_(half_width), axis_(axis), counts_(bins, 0.0) {
  if (!(half_width > 0.0) || bins == 0 || axis < 0 || axis > 2) {
    throw std::invalid_argument("Marginal1D: need L > 0, bins > 0 and axis in {0,1,2}");
  }
}

void Marginal1D::add(const Vec3& v, double weight) noexcept {
  total_ += weight;
  const double x = v[axis_];
  const double pos = (x + half_width_) / bin_width();
  if (!(pos >= 0.0) || pos >= static_cast<double>(counts_.size())) {
    outside_ += weight;
    return;
  }
  counts_[static_cast<std::size_t>(pos)] += weight;
}

void Marginal1D::add(std::span<const Vec3> v, double weight) noexcept {
  for (const auto& u : v) add(u, weight);
}

double Marginal1D::center(std::size_t b) const noexcept {
  return -half_width_ + (static_cast<double>(b) + 0.5) * bin_width();
}

std::vector<double> Marginal1D::density() const {
  std::vector<double> d(counts_.size(), 0.0);
  if (total_ <= 0.0) return d;
  const double scale = 1.0 / (total_ * bin_width());
  for (std::size_t b = 0; b < d.size(); ++b) d[b] = counts_[b] * scale;
  return d;
}

double Marginal1D::out_of_range_fraction() const noexcept { return total_ > 0.0 ? outside_ / total_ : 0.0; }

Histogram3D::Histogram3D(double half_width, std::size_t bins_per_axis)
    : half_width_(half_width), bins_(bins_per_axis), counts_(bins_per_axis * bins_per_axis * bins_per_axis, 0) {
  if (!(half_width > 0.0) || bins_per_axis == 0) throw std::invalid_argument("Histogram3D: need L > 0 and bins > 0");
}

void Histogram3D::add(const Vec3& v) noexcept {
  ++total_;
  const double w = bin_width();
  const double n = static_cast<double>(bins_);
  std::size_t idx[3];
  for (int d = 0; d < 3; ++d) {
    const double pos = (v[d] + half_width_) / w;
    if (!(pos >= 0.0) || pos >= n) {
      ++outside_;
      return;
    }
    idx[d] = static_cast<std::size_t>(pos);
  }
  ++counts_[(idx[0] * bins_ + idx[1]) * bins_ + idx[2]];
}

void Histogram3D::add(std::span<const Vec3> v) noexcept {
  for (const auto& u : v) add(u);
}

double Histogram3D::bin_volume() const noexcept {
  const double w = bin_width();
  return w * w * w;
}

Vec3 Histogram3D::center(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept {
  const double w = bin_width();
  return {-half_width_ + (static_cast<double>(ix) + 0.5) * w, -half_width_ + (static_cast<double>(iy) + 0.5) * w,
          -half_width_ + (static_cast<double>(iz) + 0.5) * w};
}

double Histogram3D::density(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept {
  if (total_ == 0) return 0.0;
  return static_cast<double>(counts_[(ix * bins_ + iy) * bins_ + iz]) /
         (static_cast<double>(total_) * bin_volume());
}

double Histogram3D::out_of_range_fraction() const noexcept {
  return total_ ? static_cast<double>(outside_) / static_cast<double>(total_) : 0.0;
}

// ---------------------------------------------------------------------------

ZStatistics z_statistics(std::span<const double> field, const Quadrature& quad) {
  if (field.size() != quad.size()) throw std::invalid_argument("z_statistics: field/quadrature size mismatch");
  double e = 0.0;
  for (std::size_t q = 0; q < field.size(); ++q) e += quad.weights[q] * field[q];
  double var = 0.0;
  for (std::size_t q = 0; q < field.size(); ++q) var += quad.weights[q] * (field[q] - e) * (field[q] - e);
  return {e, var};
}

double l2_error_velocity(const Histogram3D& hist, const std::function<double(const Vec3&)>& exact) {
  const std::size_t n = hist.bins_per_axis();
  double num = 0.0, den = 0.0;
  for (std::size_t ix = 0; ix < n; ++ix) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t iz = 0; iz < n; ++iz) {
        const double f = exact(hist.center(ix, iy, iz));
        const double d = hist.density(ix, iy, iz) - f;
        num += d * d;
        den += f * f;
      }
    }
  }
  // The common bin volume cancels in the ratio.
  return std::sqrt(num / den);
}

double l2_error_marginal(std::span<const double> density, std::span<const double> reference) {
  if (density.size() != reference.size()) throw std::invalid_argument("l2_error_marginal: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < density.size(); ++b) {
    const double d = density[b] - reference[b];
    num += d * d;
    den += reference[b] * reference[b];
  }
  return std::sqrt(num / den);
}

double l2p_error_z(std::span<const double> g, std::span<const double> g_ref, const Quadrature& quad) {
  if (g.size() != quad.size() || g_ref.size() != quad.size()) {
    throw std::invalid_argument("l2p_error_z: field/quadrature size mismatch");
  }
  double s = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const double d = g[q] - g_ref[q];
    s += quad.weights[q] * d * d;
  }
  return std::sqrt(s);
}

RateFit fit_rate(std::span<const double> times, std::span<const double> values, double t_begin, double t_end) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_rate: size mismatch");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_begin || times[i] > t_end || !(values[i] > 0.0)) continue;
    const double y = std::log(values[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_rate: fewer than two positive points in the window");
  const double dn = static_cast<double>(n);
  const double denom = dn * stt - st * st;
  if (!(denom > 0.0)) throw std::invalid_argument("fit_rate: degenerate time window");
  RateFit fit;
  fit.slope = (dn * sty - st * sy) / denom;
  fit.intercept = (sy - fit.slope * st) / dn;
  fit.used = n;
  double t_lo = t_end, t_hi = t_begin;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_begin || times[i] > t_end || !(values[i] > 0.0)) continue;
    t_lo = std::min(t_lo, times[i]);
    t_hi = std::max(t_hi, times[i]);
  }
  // A slope at roundoff level over the window is a constant series.
  if (!(fit.slope * (t_hi - t_lo) < -1e-12)) throw std::invalid_argument("fit_rate: series does not decay");
  fit.tau = -1.0 / fit.slope;
  return fit;
}

}  // namespace lfp
