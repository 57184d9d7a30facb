#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lfp/ensemble.hpp"
#include "lfp/rng.hpp"
#include "lfp/vec3.hpp"

namespace lfp {

// ---------------------------------------------------------------------------
// BKW exact solution for Maxwell molecules

/// K(t) = T (1 - (2/5) e^{-t/2}).
double bkw_k(double t, double temperature) noexcept;
double bkw_density(const Vec3& v, double t, double temperature) noexcept;
/// Sum over axes of <v_d^4>: 9 K (2T - K).
double bkw_m4(double t, double temperature) noexcept;
/// Radial fourth moment int |v|^4 f dv: 15 K (2T - K).
double bkw_radial_m4(double t, double temperature) noexcept;

/// Exact sampler of the t = 0 BKW profile: uniform direction, r^2 / K chi-squared with 5 degrees of
/// freedom. Particle i uses its own counter stream.
std::vector<Vec3> sample_bkw0(double temperature, std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Trubnikov anisotropy relaxation time

/// Maxwell molecules: 2 / (3 rho), exact.
double trubnikov_tau_maxwell(double rho) noexcept;
/// Coulomb, small-anisotropy limit: (5/8) sqrt(2 pi) (8 sqrt(m) / (pi sqrt 2)) T^{3/2} / (e^4 rho logL).
double trubnikov_tau_coulomb(double temperature, double mass, double charge, double rho,
                             double log_lambda) noexcept;

// ---------------------------------------------------------------------------
// Initial conditions, possibly uncertain through z ~ U([0,1])

/// a + b z.
struct Affine {
  double offset = 0.0;
  double slope = 0.0;

  constexpr double at(double z) const noexcept { return offset + slope * z; }
  static constexpr Affine constant(double value) noexcept { return {value, 0.0}; }
};

enum class Shape { Gaussian, Bkw };

/// One mixture component: mean plus per-axis temperatures in z. A Bkw component is the t = 0 BKW
/// profile with isotropic temperature temperature[0].
struct Component {
  double weight = 1.0;
  Vec3 mean{};
  std::array<Affine, 3> temperature{};
  Shape shape = Shape::Gaussian;
};

struct InitialCondition {
  enum class Kind { Bkw, Ellipsoid, Bimodal, BumpOnTail };

  Kind kind = Kind::Ellipsoid;
  std::vector<Component> components;

  static InitialCondition bkw(Affine temperature);
  static InitialCondition ellipsoid(Affine tx, Affine ty, Affine tz);
  /// Two equal-weight Gaussians at +-(separation, 0, 0) with a common temperature.
  static InitialCondition bimodal(Affine temperature, double separation = 1.0);
  /// Bulk Gaussian at rest plus a bump of mass `bump_mass` at `bump_center` whose temperature is
  /// bulk / bump_temperature_ratio.
  static InitialCondition bump_on_tail(Affine bulk_temperature, double bump_mass = 1.0 / 40.0,
                                       Vec3 bump_center = {3.0, 0.0, 0.0},
                                       double bump_temperature_ratio = 40.0);

  /// Throws std::invalid_argument if a weight is nonpositive, weights do not sum to one, or a
  /// temperature is nonpositive anywhere on z in [0,1].
  void validate() const;

  /// Analytic moments of the initial profile at z.
  Vec3 mean(double z) const noexcept;
  /// Per-axis temperatures (variance about the global mean).
  Vec3 axis_temperatures(double z) const noexcept;
  /// (Tx + Ty + Tz) / 3; conserved by the dynamics.
  double temperature(double z) const noexcept;
};

const char* to_string(InitialCondition::Kind kind) noexcept;

/// Standardized draw of one reference particle: its component and unit-temperature shape vector.
/// The z-coupled velocity is v(z) = mean_c + sqrt(T_c(z)) * shape, componentwise. This is the
/// standard-deviation scaling map v(z) = mean_c + sqrt(T_c(z)/T_ref)(u - mean_c) with
/// u = mean_c + sqrt(T_ref) * shape.
struct ReferenceParticle {
  std::size_t component = 0;
  Vec3 shape{};
};

ReferenceParticle draw_reference(const InitialCondition& ic, std::uint64_t seed, std::size_t index);
Vec3 coupled_velocity(const InitialCondition& ic, const ReferenceParticle& p, double z) noexcept;

/// Deterministic ensemble sampled at a fixed z.
std::vector<Vec3> sample_initial(const InitialCondition& ic, std::size_t count, std::uint64_t seed,
                                 double z = 0.5);

/// sG ensemble: each reference particle is coupled in z and projected on the basis.
GalerkinEnsemble sg_initialize(const InitialCondition& ic, std::size_t count, std::uint64_t seed,
                               std::shared_ptr<const GalerkinSpace> space);

}  // namespace lfp
