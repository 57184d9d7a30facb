#include "lfp/schedulers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <thread>

#include "lfp/rng.hpp"

namespace lfp {

const char* to_string(Scheme s) noexcept {
  return s == Scheme::Bird ? "bird" : "nanbu-babovsky";
}

Scheme parse_scheme(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "nanbu-babovsky" || n == "nb" || n == "nanbu") return Scheme::NanbuBabovsky;
  if (n == "bird") return Scheme::Bird;
  throw ConfigError("unknown scheme '" + name + "' (expected nanbu-babovsky or bird)");
}

void SimConfig::validate() const {
  try {
    kernel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (particles < 2) throw ConfigError("particles must be at least 2");
  if (particles > 0xffffffffULL) throw ConfigError("particles must fit in 32 bits");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be nonnegative");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (output_every < 1) throw ConfigError("output_every must be at least 1");
  if (scheme == Scheme::NanbuBabovsky && rho * dt > kernel.epsilon * (1.0 + 1e-12)) {
    throw ConfigError("Nanbu-Babovsky needs rho * dt <= epsilon");
  }
  if (const auto* sg = std::get_if<StochasticGalerkin>(&mode)) {
    if (sg->order < 0) throw ConfigError("gPC order must be nonnegative");
    if (sg->nodes < sg->order + 1) throw ConfigError("quadrature nodes must be at least order + 1");
  }
  if (const auto* mc = std::get_if<MonteCarloZ>(&mode)) {
    if (mc->samples < 1) throw ConfigError("Monte Carlo samples must be at least 1");
    if (log_mode != LogMode::Off) throw ConfigError("collision logs are not supported with Monte Carlo in z");
  }
}

std::uint64_t SimConfig::steps() const noexcept {
  return static_cast<std::uint64_t>(std::llround(t_end / dt));
}

double expected_collisions(const SimConfig& cfg) noexcept {
  return cfg.rho * static_cast<double>(cfg.particles) * cfg.dt / (2.0 * cfg.kernel.epsilon);
}

std::vector<CollisionRecord> plan_nb_step(const SimConfig& cfg, std::uint64_t step) {
  const std::size_t n = cfg.particles;
  const double u = uniform_at(cfg.seed, step, kSchedulerStream, 0);
  const auto nc = std::min<std::uint64_t>(static_cast<std::uint64_t>(sround(expected_collisions(cfg), u)), n / 2);

  // Partial Fisher-Yates: only the first 2 N_c positions are needed.
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t a = 0; a < 2 * nc; ++a) {
    const auto b = a + uniform_index_at(cfg.seed, step, kSchedulerStream, a + 1, n - a);
    std::swap(perm[a], perm[b]);
  }
  std::vector<CollisionRecord> out(nc);
  const auto s32 = static_cast<std::uint32_t>(step);
  for (std::size_t p = 0; p < nc; ++p) {
    out[p] = {s32, perm[2 * p], perm[2 * p + 1], uniform_at(cfg.seed, step, p, 0), uniform_at(cfg.seed, step, p, 1)};
  }
  return out;
}

namespace {

// Number of Bird collisions with start time below n dt. Products that land within roundoff of an
// integer are treated as that integer so that dt a multiple of the collision time stays exact.
std::uint64_t bird_count(const SimConfig& cfg, std::uint64_t n) {
  const double t = static_cast<double>(n) * expected_collisions(cfg);
  const double r = std::round(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, t)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(t));
}

}  // namespace

std::vector<CollisionRecord> plan_bird_step(const SimConfig& cfg, std::uint64_t step) {
  const std::uint64_t first = bird_count(cfg, step);
  const std::uint64_t last = bird_count(cfg, step + 1);
  const std::uint64_t n = cfg.particles;
  std::vector<CollisionRecord> out;
  out.reserve(last - first);
  const auto s32 = static_cast<std::uint32_t>(step);
  for (std::uint64_t c = first; c < last; ++c) {
    const auto i = uniform_index_at(cfg.seed, step, c, 2, n);
    auto j = uniform_index_at(cfg.seed, step, c, 3, n - 1);
    if (j >= i) ++j;
    out.push_back({s32, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), uniform_at(cfg.seed, step, c, 0),
                   uniform_at(cfg.seed, step, c, 1)});
  }
  return out;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(SimConfig cfg, std::vector<Vec3> velocities)
    : cfg_(std::move(cfg)), velocities_(std::move(velocities)) {
  cfg_.validate();
  if (!std::holds_alternative<Deterministic>(cfg_.mode)) {
    throw ConfigError("Simulation: velocity initial data needs deterministic mode");
  }
  if (velocities_.size() != cfg_.particles) throw ConfigError("Simulation: ensemble size differs from particles");
  recorded_ = CollisionLog(static_cast<std::uint32_t>(cfg_.particles));
}

Simulation::Simulation(SimConfig cfg, GalerkinEnsemble ensemble)
    : cfg_(std::move(cfg)), galerkin_mode_(true), ensemble_(std::move(ensemble)) {
  cfg_.validate();
  const auto* sg = std::get_if<StochasticGalerkin>(&cfg_.mode);
  if (!sg) throw ConfigError("Simulation: gPC initial data needs stochastic Galerkin mode");
  if (ensemble_.order() != sg->order) throw ConfigError("Simulation: ensemble order differs from configuration");
  if (ensemble_.particles() != cfg_.particles) throw ConfigError("Simulation: ensemble size differs from particles");
  recorded_ = CollisionLog(static_cast<std::uint32_t>(cfg_.particles));
}

void Simulation::set_replay(std::shared_ptr<const CollisionLog> log) {
  if (log) log->check_shape(static_cast<std::uint32_t>(cfg_.particles));
  replay_ = std::move(log);
}

std::vector<CollisionRecord> Simulation::plan(std::uint64_t step) const {
  if (cfg_.log_mode == LogMode::Replay) {
    if (!replay_) throw CollisionLogError("replay requested but no collision log was given");
    const auto recs = replay_->step_records(static_cast<std::uint32_t>(step));
    return {recs.begin(), recs.end()};
  }
  return cfg_.scheme == Scheme::Bird ? plan_bird_step(cfg_, step) : plan_nb_step(cfg_, step);
}

void Simulation::step() {
  const auto records = plan(step_);
  if (cfg_.log_mode == LogMode::Record) {
    recorded_.begin_step(static_cast<std::uint32_t>(step_));
    const auto slot = recorded_.append_block(records.size());
    std::copy(records.begin(), records.end(), slot.begin());
  }
  if (galerkin_mode_) {
    apply_galerkin(records);
  } else {
    apply_deterministic(records);
  }
  diag_.collisions += records.size();
  ++step_;
}

void Simulation::advance_to_end() {
  const auto n = cfg_.steps();
  while (step_ < n) step();
}

namespace {

// Nanbu-Babovsky pairs are disjoint, so a step may be split into contiguous chunks across workers.
// Bird pairs can repeat particles and always run in order.
template <class Body>
void for_chunks(std::size_t count, int threads, bool parallel, Body&& body) {
  const std::size_t workers = parallel ? std::min<std::size_t>(static_cast<std::size_t>(threads), count) : 1;
  if (workers <= 1) {
    body(0, std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = count * w / workers;
    const std::size_t hi = count * (w + 1) / workers;
    pool.emplace_back([&body, w, lo, hi] { body(w, lo, hi); });
  }
}

}  // namespace

void Simulation::apply_deterministic(std::span<const CollisionRecord> records) {
  const bool parallel = cfg_.scheme == Scheme::NanbuBabovsky && cfg_.log_mode != LogMode::Replay;
  std::vector<Diagnostics> local(static_cast<std::size_t>(cfg_.threads));
  for_chunks(records.size(), cfg_.threads, parallel, [&](std::size_t w, std::size_t lo, std::size_t hi) {
    auto& d = local[w];
    for (std::size_t p = lo; p < hi; ++p) {
      const auto& r = records[p];
      Vec3& vi = velocities_[r.i];
      Vec3& vj = velocities_[r.j];
      const double qn = norm(vi - vj);
      if (qn == 0.0) {
        ++d.skipped;
        continue;
      }
      if (tau0_floored(cfg_.kernel, qn)) ++d.floored_nodes;
      const auto angles = sample_angles(cfg_.kernel, tau0(cfg_.kernel, qn), r.r1, r.r2);
      const auto out = collide(vi, vj, angles);
      vi = out.first;
      vj = out.second;
    }
  });
  for (const auto& d : local) {
    diag_.skipped += d.skipped;
    diag_.floored_nodes += d.floored_nodes;
  }
}

void Simulation::apply_galerkin(std::span<const CollisionRecord> records) {
  const bool parallel = cfg_.scheme == Scheme::NanbuBabovsky && cfg_.log_mode != LogMode::Replay;
  const auto& space = ensemble_.space();
  std::vector<Diagnostics> local(static_cast<std::size_t>(cfg_.threads));
  for_chunks(records.size(), cfg_.threads, parallel, [&](std::size_t w, std::size_t lo, std::size_t hi) {
    auto& d = local[w];
    CollisionMatrices mats;
    for (std::size_t p = lo; p < hi; ++p) {
      const auto& r = records[p];
      auto vi = ensemble_.particle(r.i);
      auto vj = ensemble_.particle(r.j);
      const double phi = azimuth(r.r2);
      collision_matrices(vi, vj, cfg_.kernel, r.r1, phi, space, mats);
      d.floored_nodes += static_cast<std::uint64_t>(mats.floored_nodes);
      d.degenerate_nodes += static_cast<std::uint64_t>(mats.degenerate_nodes);
      if (static_cast<std::size_t>(mats.degenerate_nodes) == (mats.modes == 1 ? 1 : space.nodes())) {
        ++d.skipped;
        continue;
      }
      sg_collide_inplace(vi, vj, mats);
    }
  });
  for (const auto& d : local) {
    diag_.skipped += d.skipped;
    diag_.floored_nodes += d.floored_nodes;
    diag_.degenerate_nodes += d.degenerate_nodes;
  }
}

// ---------------------------------------------------------------------------

ZStatistics ObservableSeries::statistics(std::size_t t, double (*extract)(const MomentSet&)) const {
  const auto g = field(t, extract);
  double e = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) e += weights[q] * g[q];
  double var = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) var += weights[q] * (g[q] - e) * (g[q] - e);
  return {e, var};
}

std::vector<double> ObservableSeries::field(std::size_t t, double (*extract)(const MomentSet&)) const {
  std::vector<double> out(z.size());
  for (std::size_t q = 0; q < z.size(); ++q) out[q] = extract(rows[t][q]);
  return out;
}

namespace {

double abs_sum(std::span<const Vec3> v) {
  double s = 0.0;
  for (const auto& u : v) s += std::abs(u.x) + std::abs(u.y) + std::abs(u.z);
  return s;
}

double max_abs(const Vec3& v) { return std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)}); }

// Reference totals taken at the start of a run; check() reports the first breach.
struct ConservationMonitor {
  bool galerkin = false;
  Vec3 momentum{};
  double energy = 0.0;
  double scale = 0.0;
  std::vector<Vec3> modes;
  std::vector<double> mode_scale;

  explicit ConservationMonitor(const Simulation& sim) : galerkin(sim.galerkin()) {
    if (galerkin) {
      modes = mode_momentum(sim.ensemble());
      const auto& ens = sim.ensemble();
      mode_scale.assign(ens.modes(), 0.0);
      for (std::size_t i = 0; i < ens.particles(); ++i) {
        const auto p = ens.particle(i);
        for (std::size_t k = 0; k < ens.modes(); ++k) mode_scale[k] += max_abs(p[k]);
      }
    } else {
      momentum = total_momentum(sim.velocities());
      energy = total_energy(sim.velocities());
      scale = abs_sum(sim.velocities());
    }
  }

  std::string check(const Simulation& sim) const {
    if (galerkin) {
      const auto now = mode_momentum(sim.ensemble());
      for (std::size_t k = 0; k < now.size(); ++k) {
        if (!is_finite(now[k]) || max_abs(now[k] - modes[k]) > kMomentumTolerance * std::max(1.0, mode_scale[k])) {
          return "mode " + std::to_string(k) + " momentum drifted";
        }
      }
      return {};
    }
    const Vec3 p = total_momentum(sim.velocities());
    if (!is_finite(p) || max_abs(p - momentum) > kMomentumTolerance * std::max(1.0, scale)) {
      return "momentum drifted";
    }
    const double e = total_energy(sim.velocities());
    if (!(std::abs(e - energy) <= kEnergyTolerance * energy)) return "energy drifted";
    return {};
  }
};

std::vector<MomentSet> node_moments(const Simulation& sim) {
  if (!sim.galerkin()) return {moments(sim.velocities())};
  const auto& ens = sim.ensemble();
  std::vector<MomentSet> out(ens.space().nodes());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = moments_at_node(ens, q);
  return out;
}

double run_cost(const SimConfig& cfg) {
  const double n = static_cast<double>(cfg.particles);
  if (const auto* sg = std::get_if<StochasticGalerkin>(&cfg.mode)) {
    const double m = sg->order + 1.0;
    return n * m * m;
  }
  return n;
}

}  // namespace

ObservableSeries run(Simulation& sim, const std::vector<Observer>& observers) {
  ObservableSeries series;
  if (sim.galerkin()) {
    const auto& quad = sim.ensemble().space().quadrature();
    series.z = quad.nodes;
    series.weights = quad.weights;
  } else {
    series.z = {0.5};
    series.weights = {1.0};
  }
  series.cost = run_cost(sim.config());

  const ConservationMonitor monitor(sim);
  const auto total = sim.config().steps();
  const auto every = static_cast<std::uint64_t>(sim.config().output_every);

  auto output = [&]() -> bool {
    series.times.push_back(sim.time());
    series.rows.push_back(node_moments(sim));
    series.diagnostics = sim.diagnostics();
    if (auto breach = monitor.check(sim); !breach.empty()) {
      series.status = ObservableSeries::Status::InvariantViolated;
      series.message = breach + " at t = " + std::to_string(sim.time());
      return false;
    }
    try {
      for (const auto& obs : observers) obs(sim);
    } catch (const std::exception& e) {
      series.status = ObservableSeries::Status::ObserverFailed;
      series.message = e.what();
      return false;
    }
    return true;
  };

  if (!output()) return series;
  while (sim.steps_done() < total) {
    sim.step();
    if (sim.steps_done() % every == 0 || sim.steps_done() == total) {
      if (!output()) return series;
    }
  }
  return series;
}

ObservableSeries ensemble_run(const SimConfig& cfg, const InitialCondition& ic, std::span<const double> z,
                              std::span<const double> weights) {
  if (z.size() != weights.size() || z.empty()) throw ConfigError("ensemble_run: need matching nonempty z and weights");
  SimConfig member = cfg;
  member.mode = Deterministic{};
  member.log_mode = LogMode::Off;
  ObservableSeries out;
  out.z.assign(z.begin(), z.end());
  out.weights.assign(weights.begin(), weights.end());
  for (std::size_t m = 0; m < z.size(); ++m) {
    member.seed = derive_seed(cfg.seed, m);
    Simulation sim(member, sample_initial(ic, member.particles, member.seed, z[m]));
    auto one = run(sim);
    if (m == 0) {
      out.times = one.times;
      out.rows.assign(one.rows.size(), {});
    }
    for (std::size_t t = 0; t < one.rows.size() && t < out.rows.size(); ++t) out.rows[t].push_back(one.rows[t][0]);
    out.diagnostics.collisions += one.diagnostics.collisions;
    out.diagnostics.skipped += one.diagnostics.skipped;
    out.diagnostics.floored_nodes += one.diagnostics.floored_nodes;
    out.cost += one.cost;
    if (one.status != ObservableSeries::Status::Complete) {
      out.status = one.status;
      out.message = "sample " + std::to_string(m) + ": " + one.message;
      out.rows.resize(std::min(out.rows.size(), one.rows.size()));
      out.times.resize(out.rows.size());
      return out;
    }
  }
  return out;
}

ObservableSeries mc_z_run(const SimConfig& cfg, const InitialCondition& ic) {
  const auto* mc = std::get_if<MonteCarloZ>(&cfg.mode);
  if (!mc) throw ConfigError("mc_z_run: configuration is not in Monte Carlo mode");
  cfg.validate();
  const auto count = static_cast<std::size_t>(mc->samples);
  std::vector<double> z(count), w(count, 1.0 / static_cast<double>(count));
  for (std::size_t m = 0; m < count; ++m) z[m] = uniform_at(cfg.seed, kInitialStep, kSchedulerStream, m);
  return ensemble_run(cfg, ic, z, w);
}

ObservableSeries collocation_run(const SimConfig& cfg, const InitialCondition& ic, const Quadrature& quad) {
  return ensemble_run(cfg, ic, quad.nodes, quad.weights);
}

}  // namespace lfp
