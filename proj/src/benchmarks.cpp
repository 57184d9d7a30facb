#include "lfp/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lfp/galerkin.hpp"

namespace lfp {

namespace {
constexpr double kPi = std::numbers::pi;
}

double bkw_k(double t, double temperature) noexcept {
  return temperature * (1.0 - 0.4 * std::exp(-t / 2.0));
}

double bkw_density(const Vec3& v, double t, double temperature) noexcept {
  const double k = bkw_k(t, temperature);
  const double v2 = norm2(v);
  const double gauss = std::exp(-v2 / (2.0 * k)) / std::pow(2.0 * kPi * k, 1.5);
  return gauss * ((5.0 * k - 3.0 * temperature) / (2.0 * k) + (temperature - k) / (2.0 * k * k) * v2);
}

double bkw_m4(double t, double temperature) noexcept {
  const double k = bkw_k(t, temperature);
  return 9.0 * k * (2.0 * temperature - k);
}

double bkw_radial_m4(double t, double temperature) noexcept {
  const double k = bkw_k(t, temperature);
  return 15.0 * k * (2.0 * temperature - k);
}

namespace {

// Unit-temperature BKW(t=0) shape: radius sqrt(3/5 * chi2_5), isotropic direction.
Vec3 bkw0_shape(RngStream& rng) {
  double chi2 = 0.0;
  for (int d = 0; d < 5; ++d) {
    const double g = rng.normal();
    chi2 += g * g;
  }
  Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
  double len = norm(dir);
  while (len == 0.0) {
    dir = {rng.normal(), rng.normal(), rng.normal()};
    len = norm(dir);
  }
  return (std::sqrt(0.6 * chi2) / len) * dir;
}

}  // namespace

std::vector<Vec3> sample_bkw0(double temperature, std::size_t count, std::uint64_t seed) {
  std::vector<Vec3> out(count);
  const double scale = std::sqrt(temperature);
  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng{seed, kInitialStep, i, 1};
    out[i] = scale * bkw0_shape(rng);
  }
  return out;
}

double trubnikov_tau_maxwell(double rho) noexcept { return 2.0 / (3.0 * rho); }

double trubnikov_tau_coulomb(double temperature, double mass, double charge, double rho,
                             double log_lambda) noexcept {
  const double e4 = charge * charge * charge * charge;
  return 5.0 / 8.0 * std::sqrt(2.0 * kPi) *
         (8.0 * std::sqrt(mass) / (kPi * std::sqrt(2.0)) * std::pow(temperature, 1.5) /
          (e4 * rho * log_lambda));
}

InitialCondition InitialCondition::bkw(Affine temperature) {
  InitialCondition ic;
  ic.kind = Kind::Bkw;
  ic.components.push_back({1.0, {}, {temperature, temperature, temperature}, Shape::Bkw});
  return ic;
}

InitialCondition InitialCondition::ellipsoid(Affine tx, Affine ty, Affine tz) {
  InitialCondition ic;
  ic.kind = Kind::Ellipsoid;
  ic.components.push_back({1.0, {}, {tx, ty, tz}, Shape::Gaussian});
  return ic;
}

InitialCondition InitialCondition::bimodal(Affine temperature, double separation) {
  InitialCondition ic;
  ic.kind = Kind::Bimodal;
  const std::array<Affine, 3> t{temperature, temperature, temperature};
  ic.components.push_back({0.5, {-separation, 0.0, 0.0}, t, Shape::Gaussian});
  ic.components.push_back({0.5, {separation, 0.0, 0.0}, t, Shape::Gaussian});
  return ic;
}

InitialCondition InitialCondition::bump_on_tail(Affine bulk_temperature, double bump_mass, Vec3 bump_center,
                                                double bump_temperature_ratio) {
  InitialCondition ic;
  ic.kind = Kind::BumpOnTail;
  const Affine bump{bulk_temperature.offset / bump_temperature_ratio,
                    bulk_temperature.slope / bump_temperature_ratio};
  ic.components.push_back(
      {1.0 - bump_mass, {}, {bulk_temperature, bulk_temperature, bulk_temperature}, Shape::Gaussian});
  ic.components.push_back({bump_mass, bump_center, {bump, bump, bump}, Shape::Gaussian});
  return ic;
}

void InitialCondition::validate() const {
  if (components.empty()) throw std::invalid_argument("initial condition: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("initial condition: component weight must be positive");
    total += c.weight;
    for (const auto& t : c.temperature) {
      if (!(t.at(0.0) > 0.0) || !(t.at(1.0) > 0.0)) {
        throw std::invalid_argument("initial condition: temperature must be positive for all z in [0,1]");
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("initial condition: weights must sum to 1");
}

Vec3 InitialCondition::mean(double /*z*/) const noexcept {
  Vec3 m{};
  for (const auto& c : components) m += c.weight * c.mean;
  return m;
}

Vec3 InitialCondition::axis_temperatures(double z) const noexcept {
  const Vec3 m = mean(z);
  Vec3 t{};
  for (const auto& c : components) {
    for (int d = 0; d < 3; ++d) {
      const double offset = c.mean[d] - m[d];
      t[d] += c.weight * (c.temperature[static_cast<std::size_t>(d)].at(z) + offset * offset);
    }
  }
  return t;
}

double InitialCondition::temperature(double z) const noexcept {
  const Vec3 t = axis_temperatures(z);
  return (t.x + t.y + t.z) / 3.0;
}

const char* to_string(InitialCondition::Kind kind) noexcept {
  switch (kind) {
    case InitialCondition::Kind::Bkw: return "bkw";
    case InitialCondition::Kind::Ellipsoid: return "ellipsoid";
    case InitialCondition::Kind::Bimodal: return "bimodal";
    case InitialCondition::Kind::BumpOnTail: return "bump-on-tail";
  }
  return "?";
}

ReferenceParticle draw_reference(const InitialCondition& ic, std::uint64_t seed, std::size_t index) {
  // Counter 0 picks the component; the shape draws start at counter 1, as in sample_bkw0.
  RngStream rng{seed, kInitialStep, index, 1};
  ReferenceParticle p;
  const double u = uniform_at(seed, kInitialStep, index, 0);
  double acc = 0.0;
  p.component = ic.components.size() - 1;
  for (std::size_t c = 0; c + 1 < ic.components.size(); ++c) {
    acc += ic.components[c].weight;
    if (u < acc) {
      p.component = c;
      break;
    }
  }
  if (ic.components[p.component].shape == Shape::Bkw) {
    p.shape = bkw0_shape(rng);
  } else {
    p.shape = {rng.normal(), rng.normal(), rng.normal()};
  }
  return p;
}

Vec3 coupled_velocity(const InitialCondition& ic, const ReferenceParticle& p, double z) noexcept {
  const auto& c = ic.components[p.component];
  Vec3 v = c.mean;
  for (int d = 0; d < 3; ++d) {
    v[d] += std::sqrt(c.temperature[static_cast<std::size_t>(d)].at(z)) * p.shape[d];
  }
  return v;
}

std::vector<Vec3> sample_initial(const InitialCondition& ic, std::size_t count, std::uint64_t seed, double z) {
  ic.validate();
  std::vector<Vec3> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = coupled_velocity(ic, draw_reference(ic, seed, i), z);
  return out;
}

GalerkinEnsemble sg_initialize(const InitialCondition& ic, std::size_t count, std::uint64_t seed,
                               std::shared_ptr<const GalerkinSpace> space) {
  ic.validate();
  for (const auto& c : ic.components) {
    for (const auto& t : c.temperature) {
      for (double z : space->quadrature().nodes) {
        if (!(t.at(z) > 0.0)) throw std::invalid_argument("sg_initialize: negative temperature at a node");
      }
    }
  }
  GalerkinEnsemble ens(count, space);
  std::vector<Vec3> samples(space->nodes());
  for (std::size_t i = 0; i < count; ++i) {
    const auto p = draw_reference(ic, seed, i);
    for (std::size_t q = 0; q < samples.size(); ++q) samples[q] = coupled_velocity(ic, p, space->node(q));
    const auto coeffs = project(samples, *space);
    std::copy(coeffs.begin(), coeffs.end(), ens.particle(i).begin());
  }
  return ens;
}

}  // namespace lfp
