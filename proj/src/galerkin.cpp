#include "lfp/galerkin.hpp"

#include <stdexcept>

namespace lfp {

GpcVelocity project(std::span<const Vec3> samples, const GalerkinSpace& space) {
  if (samples.size() != space.nodes()) {
    throw std::invalid_argument("project: expected one sample per quadrature node");
  }
  GpcVelocity coeffs(space.modes());
  for (std::size_t q = 0; q < space.nodes(); ++q) {
    const Vec3 wv = space.weight(q) * samples[q];
    const auto psi = space.psi_row(q);
    for (std::size_t k = 0; k < space.modes(); ++k) coeffs[k] += psi[k] * wv;
  }
  return coeffs;
}

Vec3 eval(std::span<const Vec3> coeffs, const PolyBasis& basis, double z) {
  std::vector<double> psi(basis.size());
  basis.eval_all(z, psi);
  Vec3 v = coeffs[0];
  for (std::size_t k = 1; k < coeffs.size(); ++k) v += psi[k] * coeffs[k];
  return v;
}

Vec3 eval_at_node(std::span<const Vec3> coeffs, const GalerkinSpace& space, std::size_t q) noexcept {
  const auto psi = space.psi_row(q);
  Vec3 v = coeffs[0];
  for (std::size_t k = 1; k < coeffs.size(); ++k) v += psi[k] * coeffs[k];
  return v;
}

void collision_matrices(std::span<const Vec3> v_i, std::span<const Vec3> v_j, const KernelSpec& spec,
                        double r1, double phi, const GalerkinSpace& space, CollisionMatrices& out) {
  const std::size_t m = space.modes();
  out.modes = m;
  out.transfer.assign(m * m, 0.0);
  out.w_hat.assign(m, Vec3{});
  out.floored_nodes = 0;
  out.degenerate_nodes = 0;

  if (m == 1) {
    const Vec3 q = v_i[0] - v_j[0];
    const double qn = norm(q);
    if (qn == 0.0) {
      out.degenerate_nodes = 1;
      return;
    }
    if (tau0_floored(spec, qn)) out.floored_nodes = 1;
    const double c = sample_cos_theta(spec.surrogate, tau0(spec, qn), r1);
    const double s = sin_from_cos(c);
    const Vec3 h = h_vector(q, phi);
    out.transfer[0] = 1.0 - c;
    out.w_hat[0] = {h.x * s, h.y * s, h.z * s};
    return;
  }

  for (std::size_t node = 0; node < space.nodes(); ++node) {
    const auto psi = space.psi_row(node);
    Vec3 q = v_i[0] - v_j[0];
    for (std::size_t k = 1; k < m; ++k) q += psi[k] * (v_i[k] - v_j[k]);
    const double qn = norm(q);
    if (qn == 0.0) {
      ++out.degenerate_nodes;
      continue;
    }
    if (tau0_floored(spec, qn)) ++out.floored_nodes;
    const double c = sample_cos_theta(spec.surrogate, tau0(spec, qn), r1);
    const double w = space.weight(node);
    const double g = w * (1.0 - c);
    const Vec3 hs = (w * sin_from_cos(c)) * h_vector(q, phi);
    for (std::size_t l = 0; l < m; ++l) {
      const double gl = g * psi[l];
      double* row = out.transfer.data() + l * m;
      for (std::size_t k = l; k < m; ++k) row[k] += gl * psi[k];
      out.w_hat[l] += psi[l] * hs;
    }
  }
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = 0; k < l; ++k) out.transfer[l * m + k] = out.transfer[k * m + l];
  }
}

CollisionMatrices collision_matrices(std::span<const Vec3> v_i, std::span<const Vec3> v_j,
                                     const KernelSpec& spec, double r1, double phi,
                                     const GalerkinSpace& space) {
  CollisionMatrices out;
  collision_matrices(v_i, v_j, spec, r1, phi, space, out);
  return out;
}

void sg_collide_inplace(std::span<Vec3> v_i, std::span<Vec3> v_j, const CollisionMatrices& mats) noexcept {
  const std::size_t m = mats.modes;
  // Small fixed-size scratch keeps this allocation-free; orders above 63 fall back to the heap.
  Vec3 stack_q[64];
  std::vector<Vec3> heap_q;
  Vec3* q = stack_q;
  if (m > 64) {
    heap_q.resize(m);
    q = heap_q.data();
  }
  for (std::size_t l = 0; l < m; ++l) q[l] = v_i[l] - v_j[l];
  for (std::size_t k = 0; k < m; ++k) {
    const double u0 = mats.transfer[k];
    Vec3 d{q[0].x * u0, q[0].y * u0, q[0].z * u0};
    for (std::size_t l = 1; l < m; ++l) d += mats.transfer[l * m + k] * q[l];
    d += mats.w_hat[k];
    const Vec3 half = 0.5 * d;
    v_i[k] -= half;
    v_j[k] += half;
  }
}

GpcPair sg_collide(std::span<const Vec3> v_i, std::span<const Vec3> v_j, const CollisionMatrices& mats) {
  GpcPair out{GpcVelocity(v_i.begin(), v_i.end()), GpcVelocity(v_j.begin(), v_j.end())};
  sg_collide_inplace(out.first, out.second, mats);
  return out;
}

}  // namespace lfp
