#include "lfp/kernel_checks.hpp"

#include <cmath>
#include <string>

#include "lfp/kinetics.hpp"
#include "lfp/polynomial.hpp"

namespace lfp {

double d1_density(double a, double mu) noexcept {
  // A e^{A mu} / (2 sinh A) = A e^{A (mu - 1)} / (1 - e^{-2A})
  return -a * std::exp(a * (mu - 1.0)) / std::expm1(-2.0 * a);
}

namespace {

PropertyCheck relative(std::string name, double measured, double expected, double tolerance) {
  const bool ok = std::abs(measured / expected - 1.0) < tolerance;
  return {std::move(name), measured, expected, tolerance, ok};
}

PropertyCheck absolute(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, 0.0, tolerance, std::abs(measured) < tolerance};
}

}  // namespace

std::vector<PropertyCheck> kernel_property_suite() {
  std::vector<PropertyCheck> out;

  // Gauss-Legendre in mu; 200 nodes resolve e^{A mu} for A up to a few hundred.
  const auto quad = gauss_nodes(200);
  for (double t : {1e-3, 0.1, 1.0}) {
    const double a = solve_a(t);
    double mass = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) mass += 2.0 * quad.weights[q] * d1_density(a, 2.0 * quad.nodes[q] - 1.0);
    out.push_back(relative("D1 normalization, tau0=" + std::to_string(t), mass, 1.0, 1e-10));
  }

  // Mean deflection of D1 at small tau0, by the midpoint rule on the inverse CDF.
  {
    const double t = 1e-3;
    const int n = 1000000;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += sample_cos_theta(Surrogate::D1, t, (k + 0.5) / n);
    out.push_back(relative("D1 mean cos(theta), tau0=1e-3", s / n, 1.0 - 2.0 * t, 1e-2));
    out.push_back(relative("D1 mean 1-cos(theta) over 2 tau0, tau0=1e-3", (1.0 - s / n) / (2.0 * t), 1.0, 1e-2));
  }

  for (auto s : {Surrogate::D1, Surrogate::D2, Surrogate::D3}) {
    const double t = 1e-8;
    const double c = sample_cos_theta(s, t, 0.5);
    out.push_back(absolute(std::string(to_string(s)) + " grazing limit 1-cos(theta), tau0=1e-8", 1.0 - c, 3.0 * t));
  }

  const double t = 1e-6;
  for (auto s : {Surrogate::D2, Surrogate::D3}) {
    const double c = sample_cos_theta(s, t, 0.0);
    for (int l = 1; l <= 5; ++l) {
      out.push_back(relative(std::string(to_string(s)) + " (1-P_" + std::to_string(l) + ")/tau0, tau0=1e-6",
                             (1.0 - legendre_p(l, c)) / t, l * (l + 1.0), 1e-4));
    }
  }
  return out;
}

}  // namespace lfp
