// sim: command-line front end. See README.md for the config format.

#include <CLI11.hpp>

#include <iostream>

#include "lfp/cli.hpp"
#include "lfp/collision_log.hpp"

using namespace lfp;
using namespace lfp::cli;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> record_log;
  std::optional<std::string> replay_log;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--record-log", o.record_log, "write the collision log to this file");
  cmd->add_option("--replay-log", o.replay_log, "replay the collision log in this file");
}

RunConfig configure(const std::string& source, const Overrides& o) {
  RunConfig cfg = load_config(source);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.threads) cfg.sim.threads = *o.threads;
  cfg.sim.validate();
  return cfg;
}

RunOptions log_options(const Overrides& o) {
  RunOptions r;
  if (o.record_log) r.record_log = *o.record_log;
  if (o.replay_log) r.replay_log = *o.replay_log;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle solver for the Landau equation with uncertain initial data"};
  app.require_subcommand(1);

  Overrides o;
  std::string source;

  auto* run_cmd = app.add_subcommand("run", "run one configuration and write a result bundle");
  run_cmd->add_option("config", source, "config file or preset name")->required();
  add_common(run_cmd, o);

  std::string m_list = "1,2,4,8,16", kernels;
  int ref = 30;
  auto* sweep = app.add_subcommand("sweep-m", "error of T(z) against a high-order reference on a shared log");
  sweep->add_option("config", source, "config file or preset name")->required();
  sweep->add_option("--m", m_list, "comma-separated gPC orders");
  sweep->add_option("--ref", ref, "reference order");
  sweep->add_option("--kernels", kernels, "comma-separated surrogates, e.g. D1,D2,D3");
  add_common(sweep, o);

  std::string orders = "0,1,2,4", samples = "1,2,4,8,16";
  int ref_nodes = 8;
  std::size_t ref_particles = 0;
  auto* compare = app.add_subcommand("compare-mc", "cost and error of sG against Monte Carlo in z");
  compare->add_option("config", source, "config file or preset name")->required();
  compare->add_option("--m", orders, "comma-separated gPC orders");
  compare->add_option("--samples", samples, "comma-separated Monte Carlo sample counts");
  compare->add_option("--ref-nodes", ref_nodes, "collocation nodes of the reference");
  compare->add_option("--ref-particles", ref_particles, "particles per reference node (default 10 N)");
  add_common(compare, o);

  auto* kcheck = app.add_subcommand("kernel-check", "surrogate kernel property suite");

  app.add_subcommand("presets", "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    CommandResult r;
    if (app.got_subcommand("presets")) {
      for (const auto& n : preset_names()) std::cout << n << '\n';
      return kExitOk;
    }
    if (kcheck->parsed()) {
      r = cmd_kernel_check(std::cout);
    } else if (run_cmd->parsed()) {
      r = cmd_run(configure(source, o), log_options(o), std::cout);
    } else if (sweep->parsed()) {
      SweepOptions so;
      so.orders = parse_int_list(m_list);
      so.reference_order = ref;
      if (!kernels.empty()) {
        std::stringstream ss(kernels);
        std::string k;
        while (std::getline(ss, k, ',')) {
          try {
            so.kernels.push_back(parse_surrogate(k.c_str()));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
        }
      }
      so.logs = log_options(o);
      r = cmd_sweep_m(configure(source, o), so, std::cout);
    } else if (compare->parsed()) {
      if (o.record_log || o.replay_log) throw ConfigError("compare-mc does not take collision logs");
      CompareOptions co;
      co.orders = parse_int_list(orders);
      co.samples = parse_int_list(samples);
      co.reference_nodes = ref_nodes;
      co.reference_particles = ref_particles;
      r = cmd_compare_mc(configure(source, o), co, std::cout);
    }
    if (r.exit_code != kExitOk) std::cerr << "sim: " << r.message << '\n';
    return r.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "sim: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CollisionLogError& e) {
    std::cerr << "sim: collision log: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return kExitFailure;
  }
}
