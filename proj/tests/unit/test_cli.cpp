#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lfp/cli.hpp"

using namespace lfp;
using namespace lfp::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lfp_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_run() {
  return json::parse(R"({
    "schema_version": 1,
    "particles": 400,
    "dt": 0.1,
    "t_end": 0.5,
    "seed": 3,
    "kernel": {"surrogate": "D2", "interaction": "coulomb", "epsilon": 0.1},
    "initial": {"kind": "ellipsoid", "tx": [1.0, 0.05], "ty": 0.75, "tz": 0.75}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("presets parse and round trip") {
  for (const auto& name : preset_names()) {
    const auto cfg = parse_config(preset(name));
    CHECK(cfg.preset == name);
    const auto again = parse_config(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
  }
  CHECK_THROWS_AS(preset("test9"), ConfigError);

  // A preset with overrides on top.
  json doc = {{"schema_version", 1}, {"preset", "test4-coulomb-uq"}, {"particles", 1000}};
  const auto cfg = parse_config(doc);
  CHECK(cfg.sim.particles == 1000);
  CHECK(std::holds_alternative<Coulomb>(cfg.sim.kernel.interaction));
  CHECK(std::get<StochasticGalerkin>(cfg.sim.mode).order == 5);
}

TEST_CASE("schema diagnostics") {
  auto doc = small_run();
  doc["particels"] = 10;
  CHECK(error_of(doc).find("/particels: unknown key") != std::string::npos);

  doc = small_run();
  doc["kernel"]["sigma"] = 1;
  CHECK(error_of(doc).find("/kernel/sigma: unknown key") != std::string::npos);

  doc = small_run();
  doc["dt"] = "fast";
  CHECK(error_of(doc).find("/dt: expected a number") != std::string::npos);

  doc = small_run();
  doc.erase("schema_version");
  CHECK(error_of(doc).find("schema_version") != std::string::npos);

  doc = small_run();
  doc["schema_version"] = 2;
  CHECK(error_of(doc).find("unsupported version") != std::string::npos);

  doc = small_run();
  doc["dt"] = 0.2;
  CHECK(error_of(doc).find("rho * dt <= epsilon") != std::string::npos);

  doc = small_run();
  doc["kernel"]["c0"] = 1.0;
  CHECK(error_of(doc).find("/kernel/c0") != std::string::npos);

  doc = small_run();
  doc["initial"]["tz"] = json::array({0.1, -0.2});
  CHECK(error_of(doc).find("temperature must be positive") != std::string::npos);

  doc = small_run();
  doc["mode"] = {{"kind", "sg"}, {"order", 8}, {"nodes", 4}};
  CHECK(error_of(doc).find("nodes") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("csv fields follow RFC 4180") {
  std::ostringstream out;
  CsvWriter w(out);
  w.field("plain").field("a,b").field("say \"hi\"").field(0.5).end_row();
  w.field(static_cast<long long>(7)).end_row();
  CHECK(out.str() == "plain,\"a,b\",\"say \"\"hi\"\"\",0.5\r\n7\r\n");
}

TEST_CASE("integer lists") {
  CHECK(parse_int_list("1,2,16") == std::vector<int>{1, 2, 16});
  CHECK_THROWS_AS(parse_int_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_int_list("1,x"), ConfigError);
}

TEST_CASE("run bundle re-runs bit for bit from its metadata") {
  auto cfg = parse_config(small_run());
  cfg.output_dir = scratch("first").string();
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, {}, log).exit_code == kExitOk);

  const std::filesystem::path first = cfg.output_dir;
  const auto series = slurp(first / "series.csv");
  CHECK(series.rfind("time,m1_x,", 0) == 0);
  CHECK(std::count(series.begin(), series.end(), '\n') == 7);  // header and t = 0, 0.1, ..., 0.5

  const auto meta = json::parse(slurp(first / "metadata.json"));
  CHECK(meta["status"] == "complete");
  CHECK(meta["diagnostics"]["collisions"].get<std::uint64_t>() > 0);

  auto again = parse_config(meta["config"]);
  again.output_dir = scratch("second").string();
  REQUIRE(cmd_run(again, {}, log).exit_code == kExitOk);
  CHECK(slurp(std::filesystem::path(again.output_dir) / "series.csv") == series);
}

TEST_CASE("recorded log replays to the same series") {
  auto cfg = parse_config(small_run());
  const auto dir = scratch("log");
  std::filesystem::create_directories(dir);
  cfg.output_dir = (dir / "rec").string();
  RunOptions rec;
  rec.record_log = dir / "tree.bin";
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, rec, log).exit_code == kExitOk);

  auto other = cfg;
  other.output_dir = (dir / "rep").string();
  RunOptions rep;
  rep.replay_log = dir / "tree.bin";
  REQUIRE(cmd_run(other, rep, log).exit_code == kExitOk);
  CHECK(slurp(dir / "rec" / "series.csv") == slurp(dir / "rep" / "series.csv"));
}

TEST_CASE("sG run writes node files and z statistics") {
  auto doc = small_run();
  doc["mode"] = {{"kind", "sg"}, {"order", 2}, {"nodes", 4}};
  doc["histogram"] = {{"enabled", true}, {"bins", 20}, {"half_width", 4.0}};
  auto cfg = parse_config(doc);
  cfg.output_dir = scratch("sg").string();
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, {}, log).exit_code == kExitOk);
  const std::filesystem::path d = cfg.output_dir;
  for (const char* f : {"node_000.csv", "node_003.csv", "expectation.csv", "variance.csv", "marginal.csv"})
    CHECK(std::filesystem::exists(d / f));
  const auto meta = json::parse(slurp(d / "metadata.json"));
  CHECK(meta["nodes"].size() == 4);
  CHECK(meta["cost"].get<double>() == doctest::Approx(400.0 * 9));
}

TEST_CASE("sweep and compare tables") {
  auto doc = small_run();
  doc["mode"] = {{"kind", "sg"}, {"order", 2}, {"nodes", 8}};
  auto cfg = parse_config(doc);
  cfg.output_dir = scratch("sweep").string();
  SweepOptions so;
  so.orders = {1, 6};
  so.reference_order = 6;
  std::ostringstream log;
  REQUIRE(cmd_sweep_m(cfg, so, log).exit_code == kExitOk);
  const auto table = slurp(std::filesystem::path(cfg.output_dir) / "sweep_m.csv");
  CHECK(table.rfind("time,kernel,order,l2p_error_temperature\r\n", 0) == 0);
  // The reference order replayed on its own log has zero error.
  CHECK(table.find(",D2,6,0\r\n") != std::string::npos);

  so.reference_order = 9;
  CHECK_THROWS_AS(cmd_sweep_m(cfg, so, log), ConfigError);

  cfg.output_dir = scratch("compare").string();
  CompareOptions co;
  co.orders = {0, 1};
  co.samples = {1, 2};
  co.reference_nodes = 2;
  co.reference_particles = 800;
  REQUIRE(cmd_compare_mc(cfg, co, log).exit_code == kExitOk);
  const auto cmp = slurp(std::filesystem::path(cfg.output_dir) / "compare_mc.csv");
  CHECK(std::count(cmp.begin(), cmp.end(), '\n') == 5);
}

TEST_CASE("kernel check passes") {
  std::ostringstream log;
  CHECK(cmd_kernel_check(log).exit_code == kExitOk);
  CHECK(log.str().find("FAIL") == std::string::npos);
}
