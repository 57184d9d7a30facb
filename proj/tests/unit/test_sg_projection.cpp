#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "lfp/collision_log.hpp"
#include "lfp/galerkin.hpp"
#include "lfp/rng.hpp"

using namespace lfp;

namespace {

GpcVelocity linear_in_z(const GalerkinSpace& space, Vec3 a, Vec3 b) {
  std::vector<Vec3> s(space.nodes());
  for (std::size_t q = 0; q < s.size(); ++q) s[q] = a + space.node(q) * b;
  return project(s, space);
}

}  // namespace

TEST_CASE("projection") {
  const GalerkinSpace space(4, 16);
  const auto c = linear_in_z(space, {}, {1.0, 0.0, 0.0});
  CHECK(c[0].x == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c[1].x == doctest::Approx(1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-14));
  for (std::size_t k = 2; k < c.size(); ++k) CHECK(std::abs(c[k].x) < 1e-15);

  const auto u = linear_in_z(space, {0.3, -2.0, 1.0}, {});
  CHECK(norm(u[0] - Vec3{0.3, -2.0, 1.0}) < 1e-15);
  for (std::size_t k = 1; k < u.size(); ++k) CHECK(norm(u[k]) < 1e-15);

  // Degree-4 polynomial round-trips through project/eval.
  std::vector<Vec3> s(space.nodes());
  auto poly = [](double z) { return Vec3{z * z * z * z - z, 2.0 * z * z, 1.0 - z * z * z}; };
  for (std::size_t q = 0; q < s.size(); ++q) s[q] = poly(space.node(q));
  const auto p = project(s, space);
  for (double z : {0.0, 0.13, 0.5, 0.91, 1.0}) CHECK(norm(eval(p, space.basis(), z) - poly(z)) < 1e-12);
  for (std::size_t q = 0; q < space.nodes(); ++q) CHECK(norm(eval_at_node(p, space, q) - s[q]) < 1e-12);

  CHECK_THROWS_AS(project(std::vector<Vec3>(3), space), std::invalid_argument);
}

TEST_CASE("Maxwell collision matrices are the scaled identity") {
  const GalerkinSpace space(5, 32);
  const KernelSpec spec{Surrogate::D3, Maxwell{1.0}, 0.05};
  const auto vi = linear_in_z(space, {1.0, 0.2, 0.0}, {0.5, 0.0, 0.1});
  const auto vj = linear_in_z(space, {-0.3, 0.1, 0.4}, {0.0, 0.3, 0.0});
  const auto m = collision_matrices(vi, vj, spec, 0.4, 1.1, space);
  const double c = sample_cos_theta(spec.surrogate, tau0(spec, 1.0), 0.4);
  for (std::size_t l = 0; l < m.modes; ++l) {
    for (std::size_t k = 0; k < m.modes; ++k) {
      CHECK(std::abs(m.v_hat(l, k) - (l == k ? c : 0.0)) < 1e-13);
    }
  }
}

TEST_CASE("Coulomb collision matrices against a dense trapezoid rule") {
  const GalerkinSpace space(2, 64);
  for (auto surrogate : {Surrogate::D1, Surrogate::D3}) {
    const KernelSpec spec{surrogate, Coulomb{}, 0.5};
    // q(z) = (1 + z, 0.5, 0) stays away from the floor.
    const auto vi = linear_in_z(space, {1.0, 0.5, 0.0}, {1.0, 0.0, 0.0});
    const std::vector<Vec3> vj(space.modes());
    const double r1 = 0.37, phi = 2.2;
    const auto m = collision_matrices(vi, vj, spec, r1, phi, space);

    // Trapezoid on 10^4 panels, with one Richardson step against 5000 panels to remove its
    // O(h^2) error.
    const int n = 10000;
    std::vector<double> v(9, 0.0);
    std::vector<Vec3> w(3);
    for (int p = 0; p <= n; ++p) {
      const double z = static_cast<double>(p) / n;
      const double fine = (p == 0 || p == n) ? 0.5 / n : 1.0 / n;
      const double coarse = p % 2 ? 0.0 : ((p == 0 || p == n) ? 1.0 / n : 2.0 / n);
      const double tw = (4.0 * fine - coarse) / 3.0;
      const Vec3 q{1.0 + z, 0.5, 0.0};
      const double c = sample_cos_theta(surrogate, tau0(spec, norm(q)), r1);
      const Vec3 hs = std::sqrt(1.0 - c * c) * h_vector(q, phi);
      double psi[3];
      space.basis().eval_all(z, psi);
      for (int l = 0; l < 3; ++l) {
        for (int k = 0; k < 3; ++k) v[l * 3 + k] += tw * c * psi[l] * psi[k];
        w[l] += (tw * psi[l]) * hs;
      }
    }
    for (std::size_t l = 0; l < 3; ++l) {
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(m.v_hat(l, k) - v[l * 3 + k]) < 1e-8);
        CHECK(m.u(l, k) == m.u(k, l));
      }
      CHECK(norm(m.w_hat[l] - w[l]) < 1e-8);
    }
  }
}

TEST_CASE("sG collision invariants") {
  const GalerkinSpace space(6, 32);
  const auto vi = linear_in_z(space, {0.4, 0.0, -0.2}, {0.3, -0.2, 0.0});
  const auto vj = linear_in_z(space, {-0.5, 0.6, 0.0}, {0.0, 0.1, 0.5});

  CollisionMatrices identity;
  identity.modes = space.modes();
  identity.transfer.assign(identity.modes * identity.modes, 0.0);
  identity.w_hat.assign(identity.modes, Vec3{});
  const auto unchanged = sg_collide(vi, vj, identity);
  CHECK(unchanged.first == vi);
  CHECK(unchanged.second == vj);

  for (auto s : {Surrogate::D1, Surrogate::D2, Surrogate::D3}) {
    const KernelSpec spec{s, Coulomb{}, 0.8};
    const auto m = collision_matrices(vi, vj, spec, 0.61, 0.3, space);
    double gershgorin = 0.0;
    for (std::size_t l = 0; l < m.modes; ++l) {
      double row = 0.0;
      for (std::size_t k = 0; k < m.modes; ++k) {
        row += std::abs(m.v_hat(l, k));
        CHECK(std::abs(m.v_hat(l, k) - m.v_hat(k, l)) < 1e-12);
      }
      gershgorin = std::max(gershgorin, row);
    }
    CHECK(gershgorin <= 1.0 + 1e-12);

    const auto out = sg_collide(vi, vj, m);
    for (std::size_t k = 0; k < m.modes; ++k) {
      const Vec3 before = vi[k] + vj[k];
      const Vec3 after = out.first[k] + out.second[k];
      CHECK(norm(after - before) < 1e-15);
    }
  }
}

TEST_CASE("order 0 reduces to the deterministic collision bit for bit") {
  const GalerkinSpace space(0, 64);
  RngStream rng{31, 0, 0, 0};
  for (auto s : {Surrogate::D1, Surrogate::D2, Surrogate::D3}) {
    for (int k = 0; k < 200; ++k) {
      const KernelSpec spec{s, k % 2 ? Interaction{Coulomb{}} : Interaction{Maxwell{}}, 0.3};
      const Vec3 a{rng.normal(), rng.normal(), rng.normal()};
      const Vec3 b{rng.normal(), rng.normal(), rng.normal()};
      const double r1 = rng.uniform(), r2 = rng.uniform();
      const auto det = collide(a, b, sample_angles(spec, tau0(spec, norm(a - b)), r1, r2));
      const auto m = collision_matrices(std::vector<Vec3>{a}, std::vector<Vec3>{b}, spec, r1, azimuth(r2), space);
      const auto sg = sg_collide(std::vector<Vec3>{a}, std::vector<Vec3>{b}, m);
      REQUIRE(sg.first[0] == det.first);
      REQUIRE(sg.second[0] == det.second);
    }
  }
}

TEST_CASE("pointwise consistency improves with the order") {
  // One collision of a pair whose relative speed crosses a wide range in z; compare the sG result
  // evaluated at the nodes with per-node deterministic collisions.
  const KernelSpec spec{Surrogate::D3, Coulomb{}, 0.5};
  double prev = 1e300;
  for (int order : {1, 2, 4, 8}) {
    auto space = GalerkinSpace(order, 64);
    std::vector<Vec3> si(64), sj(64);
    for (std::size_t q = 0; q < 64; ++q) {
      si[q] = {0.5 + space.node(q), 0.2, 0.0};
      sj[q] = {-0.3, 0.0, 0.4 * space.node(q)};
    }
    const auto vi = project(si, space), vj = project(sj, space);
    const auto m = collision_matrices(vi, vj, spec, 0.3, 1.0, space);
    const auto out = sg_collide(vi, vj, m);
    double err = 0.0;
    for (std::size_t q = 0; q < 64; ++q) {
      const Vec3 a = eval_at_node(vi, space, q), b = eval_at_node(vj, space, q);
      const double e0 = norm2(a) + norm2(b);
      const double e1 = norm2(eval_at_node(out.first, space, q)) + norm2(eval_at_node(out.second, space, q));
      err += space.weight(q) * std::abs(e1 - e0);
    }
    CHECK(err <= prev * (1.0 + 1e-9) + 1e-14);
    prev = err;
  }
}

TEST_CASE("collision log record and round trip") {
  CollisionLog log(10);
  log.begin_step(0);
  log.append({0, 1, 2, 0.25, 0.5});
  log.append({0, 3, 4, 0.125, 0.75});
  log.begin_step(1);
  auto block = log.append_block(1);
  block[0] = {1, 9, 0, 1.0 / 3.0, 0.1};
  log.begin_step(2);

  CHECK(log.steps() == 3);
  CHECK(log.step_records(0).size() == 2);
  CHECK(log.step_records(1)[0].i == 9);
  CHECK(log.step_records(2).empty());
  CHECK_THROWS_AS(log.step_records(3), CollisionLogError);
  CHECK_THROWS_AS(log.begin_step(5), CollisionLogError);
  CHECK_NOTHROW(log.check_shape(10));
  CHECK_THROWS_AS(log.check_shape(12), CollisionLogError);

  const auto path = std::filesystem::temp_directory_path() / "lfp_unit_log.bin";
  log.save(path);
  const auto back = CollisionLog::load(path);
  CHECK(back == log);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(CollisionLog::load(path), CollisionLogError);
}
