#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lfp/kinetics.hpp"
#include "lfp/polynomial.hpp"
#include "lfp/vec3.hpp"

namespace lfp {

/// gPC coefficients of one particle velocity, modes 0..M.
using GpcVelocity = std::vector<Vec3>;

/// v_k = sum_q w_q v(z_q) Psi_k(z_q). samples.size() must equal space.nodes().
GpcVelocity project(std::span<const Vec3> samples, const GalerkinSpace& space);

/// sum_k v_k Psi_k(z).
Vec3 eval(std::span<const Vec3> coeffs, const PolyBasis& basis, double z);
/// Same, at the q-th quadrature node using the tabulated basis.
Vec3 eval_at_node(std::span<const Vec3> coeffs, const GalerkinSpace& space, std::size_t q) noexcept;

/// Per-pair Galerkin projections of the deflection.
///
/// `transfer` holds U_lk = int (1 - cos theta(z)) Psi_l Psi_k p dz, so that V_lk = delta_lk - U_lk.
/// Storing the complement keeps grazing collisions (cos theta close to 1) free of cancellation and
/// makes the M = 0 update reproduce the deterministic collision bit for bit.
struct CollisionMatrices {
  std::size_t modes = 0;
  std::vector<double> transfer;  // row-major modes x modes, symmetric
  std::vector<Vec3> w_hat;       // int h(z) sin theta(z) Psi_k p dz
  int floored_nodes = 0;         // nodes where the Coulomb speed floor was hit
  int degenerate_nodes = 0;      // nodes with q(z_q) = 0

  double u(std::size_t l, std::size_t k) const noexcept { return transfer[l * modes + k]; }
  double v_hat(std::size_t l, std::size_t k) const noexcept { return (l == k ? 1.0 : 0.0) - u(l, k); }
};

/// Builds the matrices for the pair (v_i, v_j) with one shared draw r1 and azimuth phi for every z.
/// At order 0 the pair is evaluated once (Psi_0 = 1) instead of by quadrature.
void collision_matrices(std::span<const Vec3> v_i, std::span<const Vec3> v_j, const KernelSpec& spec,
                        double r1, double phi, const GalerkinSpace& space, CollisionMatrices& out);
CollisionMatrices collision_matrices(std::span<const Vec3> v_i, std::span<const Vec3> v_j,
                                     const KernelSpec& spec, double r1, double phi,
                                     const GalerkinSpace& space);

/// Coefficient-space collision: v_i,k -= d_k / 2, v_j,k += d_k / 2 with
/// d_k = sum_l q_l U_lk + W_k (equivalently q_k - sum_l q_l V_lk + W_k).
void sg_collide_inplace(std::span<Vec3> v_i, std::span<Vec3> v_j, const CollisionMatrices& mats) noexcept;

struct GpcPair {
  GpcVelocity first;
  GpcVelocity second;
};
GpcPair sg_collide(std::span<const Vec3> v_i, std::span<const Vec3> v_j, const CollisionMatrices& mats);

}  // namespace lfp
