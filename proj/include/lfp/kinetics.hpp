#pragma once

#include <numbers>
#include <variant>

#include "lfp/vec3.hpp"

namespace lfp {

enum class Surrogate { D1, D2, D3 };

/// Maxwell molecules (gamma = 0): constant transfer cross section 4*pi*C0.
/// The default C0 = 1/(4 pi) gives tau0 = eps/2, the normalization under which the anisotropy
/// relaxes with tau = 2/(3 rho).
struct Maxwell {
  double c0 = 0.25 / std::numbers::pi;
};

/// Rutherford scattering with a Coulomb-logarithm cutoff (gamma = -3).
struct Coulomb {
  double charge = 1.0;
  double permittivity = 1.0;
  double reduced_mass = 0.5;
  double log_lambda = 0.5;
};

using Interaction = std::variant<Maxwell, Coulomb>;

struct KernelSpec {
  Surrogate surrogate = Surrogate::D3;
  Interaction interaction = Maxwell{};
  double epsilon = 0.1;

  /// Throws std::invalid_argument unless epsilon, C0, log(Lambda) and the Coulomb constants are
  /// positive.
  void validate() const;
};

const char* to_string(Surrogate s) noexcept;
/// Accepts "D1", "D2", "D3" (case-insensitive). Throws std::invalid_argument otherwise.
Surrogate parse_surrogate(const char* name);

/// Relative speeds below this are clamped before evaluating the Coulomb tau0.
inline constexpr double kCoulombSpeedFloor = 1e-10;
/// Threshold on q_perp / |q| that triggers the permuted frame in h_vector.
inline constexpr double kDegenerateAxis = 1e-12;
/// Bracket used by solve_a.
inline constexpr double kAMin = 1e-8;
inline constexpr double kAMax = 1e8;
inline constexpr double kAResidual = 1e-12;

/// tau0 = (eps/2) |q| sigma_tr(|q|).
double tau0(const KernelSpec& spec, double q_norm);
/// True when the Coulomb floor on |q| is active for this speed.
bool tau0_floored(const KernelSpec& spec, double q_norm) noexcept;

/// Solves coth(A) - 1/A = exp(-2 tau0) for A on [kAMin, kAMax].
/// Throws std::domain_error for tau0 <= 0. Returns kAMin when the root lies below the bracket and
/// kAMax when it lies above it.
double solve_a(double tau0);

/// Polar deflection cos(theta) for the surrogate at tau0; r1 is consumed by D1 only.
double sample_cos_theta(Surrogate surrogate, double tau0, double r1);

struct ScatteringAngles {
  double cos_theta = 1.0;
  double phi = 0.0;
};

/// phi = 2 pi r2.
double azimuth(double r2) noexcept;

/// Deflection for the chosen surrogate at tau0, from the two uniform draws r1 (polar, used by D1
/// only) and r2 (azimuth).
ScatteringAngles sample_angles(Surrogate surrogate, double tau0, double r1, double r2);
inline ScatteringAngles sample_angles(const KernelSpec& spec, double tau0, double r1, double r2) {
  return sample_angles(spec.surrogate, tau0, r1, r2);
}

/// sin(theta) >= 0 from cos(theta), without cancellation near cos = +-1.
double sin_from_cos(double cos_theta) noexcept;

/// Vector perpendicular to q with |h| = |q| at azimuth phi. Zero for q = 0.
Vec3 h_vector(const Vec3& q, double phi) noexcept;

/// Velocity increment q (1 - cos) + h sin shared by both collision partners (with opposite signs
/// and a factor 1/2).
Vec3 collision_transfer(const Vec3& q, const ScatteringAngles& angles) noexcept;

struct VelocityPair {
  Vec3 first;
  Vec3 second;
};

/// Binary collision rule; returns the inputs unchanged when v_i == v_j.
VelocityPair collide(const Vec3& v_i, const Vec3& v_j, const ScatteringAngles& angles) noexcept;

}  // namespace lfp
