#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lfp {

/// Legendre polynomial P_l(mu) by the three-term recurrence. No range check on mu.
double legendre_p(int l, double mu) noexcept;

/// Gauss-Legendre rule mapped to [0,1]; weights sum to one (measure p(z) = 1 on [0,1]).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Exact for polynomials up to degree 2*count-1. Throws std::invalid_argument for count < 1.
Quadrature gauss_nodes(int count);

/// Orthonormal shifted-Legendre basis on [0,1] with uniform weight:
/// Psi_k(z) = sqrt(2k+1) P_k(2z-1).
class PolyBasis {
 public:
  /// Throws std::invalid_argument if order < 0.
  explicit PolyBasis(int order);

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(order_) + 1; }

  /// Psi_k(z); throws std::invalid_argument for k outside [0, order].
  double eval(int k, double z) const;

  /// Fills out[0..order] with Psi_0(z)..Psi_order(z). out.size() must be order+1.
  void eval_all(double z, std::span<double> out) const noexcept;

 private:
  int order_;
};

/// Basis values tabulated at quadrature nodes, shared by projection and the collision matrices.
class GalerkinSpace {
 public:
  GalerkinSpace(int order, int node_count);
  GalerkinSpace(PolyBasis basis, Quadrature quad);

  const PolyBasis& basis() const noexcept { return basis_; }
  const Quadrature& quadrature() const noexcept { return quad_; }
  int order() const noexcept { return basis_.order(); }
  std::size_t modes() const noexcept { return basis_.size(); }
  std::size_t nodes() const noexcept { return quad_.size(); }

  /// Psi_k(z_q).
  double psi(std::size_t q, std::size_t k) const noexcept { return table_[q * modes() + k]; }
  std::span<const double> psi_row(std::size_t q) const noexcept {
    return {table_.data() + q * modes(), modes()};
  }
  double weight(std::size_t q) const noexcept { return quad_.weights[q]; }
  double node(std::size_t q) const noexcept { return quad_.nodes[q]; }

 private:
  void tabulate();

  PolyBasis basis_;
  Quadrature quad_;
  std::vector<double> table_;
};

}  // namespace lfp
