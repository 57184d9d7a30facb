#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lfp/benchmarks.hpp"
#include "lfp/collision_log.hpp"
#include "lfp/ensemble.hpp"
#include "lfp/galerkin.hpp"
#include "lfp/kinetics.hpp"
#include "lfp/observables.hpp"

namespace lfp {

enum class Scheme { NanbuBabovsky, Bird };

struct Deterministic {};
struct StochasticGalerkin {
  int order = 0;
  int nodes = 64;
};
struct MonteCarloZ {
  int samples = 1;
};
using Mode = std::variant<Deterministic, StochasticGalerkin, MonteCarloZ>;

enum class LogMode { Off, Record, Replay };

const char* to_string(Scheme s) noexcept;
Scheme parse_scheme(const std::string& name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimConfig {
  std::size_t particles = 0;
  double dt = 0.1;
  double rho = 1.0;
  KernelSpec kernel{};
  Scheme scheme = Scheme::NanbuBabovsky;
  Mode mode = Deterministic{};
  double t_end = 0.0;
  std::uint64_t seed = 0;
  LogMode log_mode = LogMode::Off;
  int threads = 1;
  /// Observables are taken every `output_every` steps and at the final step.
  int output_every = 1;

  /// Throws ConfigError; in particular Nanbu-Babovsky needs rho * dt <= epsilon.
  void validate() const;
  /// round(t_end / dt).
  std::uint64_t steps() const noexcept;
};

/// Pair selection for one step, independent of the velocities. Records carry the pair and the two
/// uniform draws of each collision, in application order.
std::vector<CollisionRecord> plan_nb_step(const SimConfig& cfg, std::uint64_t step);
/// Bird's no-time-counter selection: collisions with global index in [count(step), count(step+1)),
/// count(n) = ceil(n dt rho N / (2 eps)), each drawing one uniform pair (recollisions allowed).
std::vector<CollisionRecord> plan_bird_step(const SimConfig& cfg, std::uint64_t step);
/// Expected collision count per step, rho N dt / (2 eps).
double expected_collisions(const SimConfig& cfg) noexcept;

struct Diagnostics {
  std::uint64_t collisions = 0;
  std::uint64_t skipped = 0;         // pairs with q = 0 (deterministic) or q(z_q) = 0 at every node
  std::uint64_t floored_nodes = 0;   // Coulomb speed-floor hits, counted per node in sG mode
  std::uint64_t degenerate_nodes = 0;
};

/// Time stepper for one ensemble, deterministic or stochastic Galerkin.
class Simulation {
 public:
  /// Deterministic mode.
  Simulation(SimConfig cfg, std::vector<Vec3> velocities);
  /// sG mode; the ensemble order must match cfg.mode.
  Simulation(SimConfig cfg, GalerkinEnsemble ensemble);

  /// Required before stepping when cfg.log_mode is Replay.
  void set_replay(std::shared_ptr<const CollisionLog> log);

  void step();
  void advance_to_end();

  const SimConfig& config() const noexcept { return cfg_; }
  std::uint64_t steps_done() const noexcept { return step_; }
  double time() const noexcept { return static_cast<double>(step_) * cfg_.dt; }
  bool galerkin() const noexcept { return galerkin_mode_; }

  const std::vector<Vec3>& velocities() const noexcept { return velocities_; }
  const GalerkinEnsemble& ensemble() const noexcept { return ensemble_; }
  const CollisionLog& recorded_log() const noexcept { return recorded_; }
  const Diagnostics& diagnostics() const noexcept { return diag_; }

 private:
  std::vector<CollisionRecord> plan(std::uint64_t step) const;
  void apply_deterministic(std::span<const CollisionRecord> records);
  void apply_galerkin(std::span<const CollisionRecord> records);

  SimConfig cfg_;
  bool galerkin_mode_ = false;
  std::vector<Vec3> velocities_;
  GalerkinEnsemble ensemble_;
  std::shared_ptr<const CollisionLog> replay_;
  CollisionLog recorded_;
  Diagnostics diag_;
  std::uint64_t step_ = 0;
};

/// Time series of moments, one MomentSet per z-node per output time. Deterministic runs have a
/// single node; MC-in-z runs have one node per sample.
struct ObservableSeries {
  enum class Status { Complete, ObserverFailed, InvariantViolated };

  std::vector<double> z;
  std::vector<double> weights;
  std::vector<double> times;
  std::vector<std::vector<MomentSet>> rows;  // rows[t][node]
  Diagnostics diagnostics;
  /// Work in collision-evaluation units: N (M+1)^2 for sG, N per sample otherwise.
  double cost = 0.0;
  Status status = Status::Complete;
  std::string message;

  /// E_z and Var_z of a scalar extracted from each node's MomentSet, at output index t.
  ZStatistics statistics(std::size_t t, double (*extract)(const MomentSet&)) const;
  std::vector<double> field(std::size_t t, double (*extract)(const MomentSet&)) const;
};

using Observer = std::function<void(const Simulation&)>;

/// Relative tolerance on momentum drift, scaled by sum_i |v_i|, and on energy drift.
inline constexpr double kMomentumTolerance = 1e-12;
inline constexpr double kEnergyTolerance = 1e-10;

/// Steps to t_end, recording moments at the configured cadence and calling the observers there.
/// Conservation is checked at every output; a breach or an observer exception stops the run and
/// returns what was collected so far with the corresponding status.
ObservableSeries run(Simulation& sim, const std::vector<Observer>& observers = {});

/// Independent deterministic runs at given z values with given weights; sample m uses the
/// derived seed derive_seed(cfg.seed, m) for both its initial draw and its collisions.
ObservableSeries ensemble_run(const SimConfig& cfg, const InitialCondition& ic, std::span<const double> z,
                              std::span<const double> weights);
/// Monte Carlo in z: cfg.mode must be MonteCarloZ; z_m ~ U([0,1]) with equal weights.
ObservableSeries mc_z_run(const SimConfig& cfg, const InitialCondition& ic);
/// Collocation at the Gauss nodes of `quad`, used as a reference for E_z.
ObservableSeries collocation_run(const SimConfig& cfg, const InitialCondition& ic, const Quadrature& quad);

}  // namespace lfp
