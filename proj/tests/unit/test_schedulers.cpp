#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

#include "lfp/benchmarks.hpp"
#include "lfp/schedulers.hpp"

using namespace lfp;

namespace {

SimConfig base(std::size_t n, Scheme scheme = Scheme::NanbuBabovsky) {
  SimConfig c;
  c.particles = n;
  c.dt = 0.1;
  c.kernel = {Surrogate::D3, Maxwell{}, 0.1};
  c.scheme = scheme;
  c.t_end = 1.0;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("configuration checks") {
  auto c = base(100);
  CHECK_NOTHROW(c.validate());
  c.dt = 0.2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.scheme = Scheme::Bird;
  CHECK_NOTHROW(c.validate());
  c.particles = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  auto g = base(10);
  g.mode = StochasticGalerkin{5, 4};
  CHECK_THROWS_AS(g.validate(), ConfigError);
  CHECK(base(10).steps() == 10);
  CHECK(parse_scheme("Bird") == Scheme::Bird);
  CHECK_THROWS_AS(parse_scheme("dsmc"), ConfigError);
}

TEST_CASE("Nanbu-Babovsky selection") {
  auto c = base(1001);
  c.dt = 0.0731;
  double total = 0.0;
  const int steps = 400;
  for (int s = 0; s < steps; ++s) {
    const auto plan = plan_nb_step(c, static_cast<std::uint64_t>(s));
    REQUIRE(plan.size() <= 500);
    std::set<std::uint32_t> seen;
    for (const auto& r : plan) {
      REQUIRE(r.i < 1001);
      REQUIRE(r.j < 1001);
      REQUIRE(seen.insert(r.i).second);
      REQUIRE(seen.insert(r.j).second);
    }
    total += static_cast<double>(plan.size());
  }
  // N_c = sround(365.8655): sd below 0.5 per step.
  CHECK(std::abs(total / steps - 365.8655) < 3.0 * 0.5 / std::sqrt(steps));

  auto half = base(1000);
  half.dt = 0.05;
  double t2 = 0.0;
  for (int s = 0; s < steps; ++s) t2 += static_cast<double>(plan_nb_step(half, static_cast<std::uint64_t>(s)).size());
  CHECK(t2 / steps == doctest::Approx(250.0));
}

TEST_CASE("Bird selection") {
  auto c = base(2, Scheme::Bird);
  c.dt = 0.35;
  c.kernel.epsilon = 0.1;
  std::uint64_t total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto plan = plan_bird_step(c, s);
    for (const auto& r : plan) {
      CHECK(r.i != r.j);
      CHECK(r.i + r.j == 1);
    }
    total += plan.size();
  }
  // Expected 3.5 per step with no drift of the integer clock.
  CHECK(total == 70);

  auto big = base(1000, Scheme::Bird);
  CHECK(plan_bird_step(big, 0).size() == 500);
  CHECK(plan_bird_step(big, 7).size() == 500);
}

TEST_CASE("single forced collision matches collide") {
  auto c = base(2);
  c.dt = 0.1;
  c.t_end = 0.1;
  const std::vector<Vec3> init{{1.0, 0.0, 0.5}, {-0.2, 0.3, 0.0}};
  Simulation sim(c, init);
  sim.step();
  const auto plan = plan_nb_step(c, 0);
  REQUIRE(plan.size() == 1);
  const auto& r = plan[0];
  const Vec3 vi = init[r.i], vj = init[r.j];
  const auto expect = collide(vi, vj, sample_angles(c.kernel, tau0(c.kernel, norm(vi - vj)), r.r1, r.r2));
  CHECK(sim.velocities()[r.i] == expect.first);
  CHECK(sim.velocities()[r.j] == expect.second);
}

TEST_CASE("zero time step leaves the ensemble unchanged") {
  auto c = base(50);
  c.t_end = 0.0;
  const auto v0 = sample_bkw0(1.0, 50, 1);
  Simulation sim(c, v0);
  const auto series = run(sim);
  CHECK(series.times.size() == 1);
  CHECK(sim.velocities() == v0);
}

TEST_CASE("record, replay and thread independence") {
  auto c = base(2000);
  c.kernel = {Surrogate::D1, Coulomb{}, 0.1};
  c.t_end = 0.5;
  c.log_mode = LogMode::Record;
  const auto v0 = sample_initial(InitialCondition::ellipsoid(Affine::constant(0.1), Affine::constant(0.1), Affine::constant(0.05)), 2000, 4);
  Simulation rec(c, v0);
  const auto s1 = run(rec);
  CHECK(s1.status == ObservableSeries::Status::Complete);

  auto threaded = c;
  threaded.log_mode = LogMode::Off;
  threaded.threads = 3;
  Simulation par(threaded, v0);
  run(par);
  CHECK(par.velocities() == rec.velocities());

  auto rc = c;
  rc.log_mode = LogMode::Replay;
  rc.kernel.surrogate = Surrogate::D1;
  Simulation rep(rc, v0);
  rep.set_replay(std::make_shared<CollisionLog>(rec.recorded_log()));
  run(rep);
  CHECK(rep.velocities() == rec.velocities());

  // Too short a log.
  auto longer = rc;
  longer.t_end = 1.0;
  Simulation over(longer, v0);
  over.set_replay(std::make_shared<CollisionLog>(rec.recorded_log()));
  CHECK_THROWS_AS(over.advance_to_end(), CollisionLogError);

  auto other = rc;
  other.particles = 1000;
  Simulation wrong(other, std::vector<Vec3>(v0.begin(), v0.begin() + 1000));
  CHECK_THROWS_AS(wrong.set_replay(std::make_shared<CollisionLog>(rec.recorded_log())), CollisionLogError);
}

TEST_CASE("conservation in both schemes") {
  for (auto scheme : {Scheme::NanbuBabovsky, Scheme::Bird}) {
    auto c = base(4000, scheme);
    c.kernel = {Surrogate::D2, Coulomb{}, 0.1};
    c.t_end = 2.0;
    const auto v0 = sample_bkw0(0.5, 4000, 2);
    Simulation sim(c, v0);
    const auto s = run(sim);
    CHECK(s.status == ObservableSeries::Status::Complete);
    const Vec3 dp = total_momentum(sim.velocities()) - total_momentum(v0);
    CHECK(norm(dp) < 1e-12);
    CHECK(std::abs(total_energy(sim.velocities()) / total_energy(v0) - 1.0) < 1e-12);
  }
}

TEST_CASE("sG order 0 replay equals the deterministic run") {
  auto c = base(1000);
  c.kernel = {Surrogate::D3, Coulomb{}, 0.1};
  c.t_end = 1.0;
  c.log_mode = LogMode::Record;
  const auto ic = InitialCondition::ellipsoid(Affine::constant(0.2), Affine::constant(0.1), Affine::constant(0.1));
  const auto space = std::make_shared<const GalerkinSpace>(0, 64);
  const auto ens = sg_initialize(ic, 1000, 3, space);
  const auto v0 = ens.mean_velocities();
  Simulation det(c, v0);
  det.advance_to_end();

  auto g = c;
  g.mode = StochasticGalerkin{0, 64};
  g.log_mode = LogMode::Replay;
  Simulation sg(g, ens);
  sg.set_replay(std::make_shared<CollisionLog>(det.recorded_log()));
  sg.advance_to_end();
  for (std::size_t i = 0; i < 1000; ++i) REQUIRE(sg.ensemble().particle(i)[0] == det.velocities()[i]);
}

TEST_CASE("observer failure returns partial output") {
  auto c = base(100);
  c.t_end = 1.0;
  Simulation sim(c, sample_bkw0(1.0, 100, 1));
  int calls = 0;
  const auto s = run(sim, {[&](const Simulation&) {
                       if (++calls == 4) throw std::runtime_error("disk full");
                     }});
  CHECK(s.status == ObservableSeries::Status::ObserverFailed);
  CHECK(s.times.size() == 4);
  CHECK(s.message == "disk full");
}

TEST_CASE("Monte Carlo in z") {
  auto c = base(200);
  c.t_end = 0.3;
  c.mode = MonteCarloZ{5};
  const auto ic = InitialCondition::bkw({0.5, 0.1});
  const auto s = mc_z_run(c, ic);
  CHECK(s.z.size() == 5);
  CHECK(s.cost == doctest::Approx(200.0 * 5));
  CHECK(s.rows.back().size() == 5);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(s.rows.front()[m].temperature == doctest::Approx(s.rows.back()[m].temperature).epsilon(1e-12));
  }

  auto one = c;
  one.mode = MonteCarloZ{1};
  const auto single = mc_z_run(one, ic);
  auto det = c;
  det.mode = Deterministic{};
  det.seed = derive_seed(c.seed, 0);
  Simulation sim(det, sample_initial(ic, 200, det.seed, single.z[0]));
  run(sim);
  CHECK(moments(sim.velocities()).m4 == single.rows.back()[0].m4);
}
