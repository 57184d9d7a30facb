#include "lfp/kinetics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lfp {

namespace {

constexpr double kPi = std::numbers::pi;

// 1 - L(A), with L the Langevin function coth(A) - 1/A.
double one_minus_langevin(double a) noexcept {
  if (a < 0.1) {
    const double a2 = a * a;
    const double series =
        a * (1.0 / 3.0 + a2 * (-1.0 / 45.0 + a2 * (2.0 / 945.0 + a2 * (-1.0 / 4725.0 + a2 * (2.0 / 93555.0)))));
    return 1.0 - series;
  }
  return 1.0 / a - 2.0 / std::expm1(2.0 * a);
}

// L'(A) = 1/A^2 - 1/sinh^2(A) > 0.
double langevin_slope(double a) noexcept {
  if (a < 0.1) {
    const double a2 = a * a;
    return 1.0 / 3.0 + a2 * (-1.0 / 15.0 + a2 * (2.0 / 189.0 + a2 * (-1.0 / 675.0 + a2 * (2.0 / 10395.0))));
  }
  const double s = std::sinh(a);
  return 1.0 / (a * a) - 1.0 / (s * s);
}

}  // namespace

void KernelSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("kernel: epsilon must be positive");
  }
  if (const auto* m = std::get_if<Maxwell>(&interaction)) {
    if (!(m->c0 > 0.0)) throw std::invalid_argument("kernel: Maxwell C0 must be positive");
  } else {
    const auto& c = std::get<Coulomb>(interaction);
    if (!(c.log_lambda > 0.0)) throw std::invalid_argument("kernel: log_lambda must be positive");
    if (!(c.permittivity > 0.0)) throw std::invalid_argument("kernel: permittivity must be positive");
    if (!(c.reduced_mass > 0.0)) throw std::invalid_argument("kernel: reduced_mass must be positive");
    if (c.charge == 0.0) throw std::invalid_argument("kernel: charge must be nonzero");
  }
}

const char* to_string(Surrogate s) noexcept {
  switch (s) {
    case Surrogate::D1: return "D1";
    case Surrogate::D2: return "D2";
    case Surrogate::D3: return "D3";
  }
  return "?";
}

Surrogate parse_surrogate(const char* name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "D1") return Surrogate::D1;
  if (s == "D2") return Surrogate::D2;
  if (s == "D3") return Surrogate::D3;
  throw std::invalid_argument("unknown surrogate kernel '" + std::string(name) + "' (expected D1, D2 or D3)");
}

double tau0(const KernelSpec& spec, double q_norm) {
  if (const auto* m = std::get_if<Maxwell>(&spec.interaction)) {
    return 4.0 * kPi * m->c0 * spec.epsilon / 2.0;
  }
  const auto& c = std::get<Coulomb>(spec.interaction);
  const double q = std::max(q_norm, kCoulombSpeedFloor);
  const double b = c.charge * c.charge / (4.0 * kPi * c.permittivity * c.reduced_mass);
  return 4.0 * kPi * b * b * c.log_lambda / (q * q * q) * spec.epsilon / 2.0;
}

bool tau0_floored(const KernelSpec& spec, double q_norm) noexcept {
  return std::holds_alternative<Coulomb>(spec.interaction) && q_norm < kCoulombSpeedFloor;
}

double solve_a(double tau0) {
  if (!(tau0 > 0.0)) throw std::domain_error("solve_a: tau0 must be positive");
  // Work with 1 - L(A) = 1 - exp(-2 tau0), which keeps full precision for large A.
  const double target = -std::expm1(-2.0 * tau0);
  auto residual = [target](double a) { return one_minus_langevin(a) - target; };

  if (residual(kAMin) <= 0.0) return kAMin;
  if (residual(kAMax) >= 0.0) return kAMax;

  // Newton in log(A), safeguarded by bisection on [lo, hi] where residual(lo) > 0 > residual(hi).
  double lo = std::log(kAMin);
  double hi = std::log(kAMax);
  double a = target < 0.5 ? 1.0 / target : 3.0 * std::exp(-2.0 * tau0);
  a = std::clamp(a, kAMin, kAMax);
  double x = std::log(a);
  for (int it = 0; it < 200; ++it) {
    const double f = residual(a);
    if (std::abs(f) < kAResidual) break;
    if (f > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = -a * langevin_slope(a);
    double next = x - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
    a = std::exp(x);
  }
  return a;
}

double sin_from_cos(double cos_theta) noexcept {
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  return std::sqrt((1.0 - c) * (1.0 + c));
}

double sample_cos_theta(Surrogate surrogate, double tau0, double r1) {
  double c = 1.0;
  switch (surrogate) {
    case Surrogate::D1: {
      if (tau0 <= 0.0) break;
      const double a = solve_a(tau0);
      // (1/A) ln(e^{-A} + 2 r1 sinh A) rewritten as 1 + ln(1 + (1 - r1)(e^{-2A} - 1)) / A, which
      // stays finite for large A.
      c = 1.0 + std::log1p((1.0 - r1) * std::expm1(-2.0 * a)) / a;
      if (!std::isfinite(c)) c = -1.0;
      break;
    }
    case Surrogate::D2:
      c = tau0 <= 1.0 ? 1.0 - 2.0 * tau0 : -1.0;
      break;
    case Surrogate::D3:
      c = 1.0 - 2.0 * std::tanh(tau0);
      break;
  }
  return std::clamp(c, -1.0, 1.0);
}

double azimuth(double r2) noexcept { return 2.0 * kPi * r2; }

ScatteringAngles sample_angles(Surrogate surrogate, double tau0, double r1, double r2) {
  return {sample_cos_theta(surrogate, tau0, r1), azimuth(r2)};
}

namespace {

Vec3 h_vector_direct(const Vec3& q, double q_norm, double q_perp, double cos_phi, double sin_phi) noexcept {
  return {q_perp * cos_phi, -(q.y * q.x * cos_phi + q_norm * q.z * sin_phi) / q_perp,
          -(q.z * q.x * cos_phi - q_norm * q.y * sin_phi) / q_perp};
}

}  // namespace

Vec3 h_vector(const Vec3& q, double phi) noexcept {
  const double q_norm = norm(q);
  if (q_norm == 0.0) return {};
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  const double q_perp = std::sqrt(q.y * q.y + q.z * q.z);
  if (q_perp >= kDegenerateAxis * q_norm) return h_vector_direct(q, q_norm, q_perp, cos_phi, sin_phi);
  // q lies along x: rotate the frame (x,y,z) -> (y,z,x), evaluate, rotate back.
  const Vec3 p{q.y, q.z, q.x};
  const Vec3 hp = h_vector_direct(p, q_norm, std::sqrt(p.y * p.y + p.z * p.z), cos_phi, sin_phi);
  return {hp.z, hp.x, hp.y};
}

Vec3 collision_transfer(const Vec3& q, const ScatteringAngles& angles) noexcept {
  const double one_minus_cos = 1.0 - angles.cos_theta;
  const double sin_theta = sin_from_cos(angles.cos_theta);
  const Vec3 h = h_vector(q, angles.phi);
  return {q.x * one_minus_cos + h.x * sin_theta, q.y * one_minus_cos + h.y * sin_theta,
          q.z * one_minus_cos + h.z * sin_theta};
}

VelocityPair collide(const Vec3& v_i, const Vec3& v_j, const ScatteringAngles& angles) noexcept {
  if (v_i == v_j) return {v_i, v_j};
  const Vec3 half = 0.5 * collision_transfer(v_i - v_j, angles);
  return {v_i - half, v_j + half};
}

}  // namespace lfp
