#include "lfp/polynomial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lfp {

double legendre_p(int l, double mu) noexcept {
  if (l <= 0) return 1.0;
  double p_prev = 1.0;
  double p = mu;
  for (int n = 1; n < l; ++n) {
    const double p_next = ((2.0 * n + 1.0) * mu * p - n * p_prev) / (n + 1.0);
    p_prev = p;
    p = p_next;
  }
  return p;
}

namespace {

// P_n(x) and P_n'(x) together, for Newton iterations on the roots.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p_prev = 1.0;
  double p = x;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = p_next;
  }
  const double dp = n * (x * p - p_prev) / (x * x - 1.0);
  return {p, dp};
}

}  // namespace

Quadrature gauss_nodes(int count) {
  if (count < 1) throw std::invalid_argument("gauss_nodes: count must be >= 1");
  Quadrature quad;
  quad.nodes.resize(static_cast<std::size_t>(count));
  quad.weights.resize(static_cast<std::size_t>(count));
  if (count == 1) {
    quad.nodes[0] = 0.5;
    quad.weights[0] = 1.0;
    return quad;
  }
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root on [-1,1].
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = legendre_with_derivative(count, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre_with_derivative(count, x).second;
    // Weight on [-1,1] is 2 / ((1-x^2) P'^2); halve it for [0,1].
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(count - 1 - i);
    quad.nodes[lo] = 0.5 * (1.0 - x);
    quad.nodes[hi] = 0.5 * (1.0 + x);
    quad.weights[lo] = w;
    quad.weights[hi] = w;
  }
  if (count % 2 == 1) quad.nodes[static_cast<std::size_t>(count / 2)] = 0.5;
  return quad;
}

PolyBasis::PolyBasis(int order) : order_(order) {
  if (order < 0) throw std::invalid_argument("PolyBasis: order must be >= 0");
}

double PolyBasis::eval(int k, double z) const {
  if (k < 0 || k > order_) {
    throw std::invalid_argument("PolyBasis::eval: mode " + std::to_string(k) + " outside [0, " +
                                std::to_string(order_) + "]");
  }
  if (k == 0) return 1.0;
  return std::sqrt(2.0 * k + 1.0) * legendre_p(k, 2.0 * z - 1.0);
}

void PolyBasis::eval_all(double z, std::span<double> out) const noexcept {
  const double x = 2.0 * z - 1.0;
  double p_prev = 1.0;
  double p = x;
  out[0] = 1.0;
  if (order_ >= 1) out[1] = std::sqrt(3.0) * x;
  for (int n = 1; n < order_; ++n) {
    const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
    p_prev = p;
    p = p_next;
    out[static_cast<std::size_t>(n + 1)] = std::sqrt(2.0 * n + 3.0) * p;
  }
}

GalerkinSpace::GalerkinSpace(int order, int node_count) : basis_(order), quad_(gauss_nodes(node_count)) {
  tabulate();
}

GalerkinSpace::GalerkinSpace(PolyBasis basis, Quadrature quad) : basis_(basis), quad_(std::move(quad)) {
  tabulate();
}

void GalerkinSpace::tabulate() {
  table_.assign(quad_.size() * modes(), 0.0);
  for (std::size_t q = 0; q < quad_.size(); ++q) {
    basis_.eval_all(quad_.nodes[q], {table_.data() + q * modes(), modes()});
  }
}

}  // namespace lfp
