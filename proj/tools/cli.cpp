#include "lfp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "lfp/kernel_checks.hpp"
#include "lfp/rng.hpp"

namespace lfp::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Presets, one per benchmark. Particle counts are desk-scale.

json affine(double a, double b) { return json::array({a, b}); }

const std::vector<std::pair<std::string, json>>& preset_table() {
  static const std::vector<std::pair<std::string, json>> table = {
      {"test1-bkw",
       {{"particles", 200000},
        {"dt", 0.1},
        {"t_end", 10.0},
        {"kernel", {{"surrogate", "D3"}, {"interaction", "maxwell"}, {"epsilon", 0.1}}},
        {"mode", {{"kind", "deterministic"}}},
        {"initial", {{"kind", "bkw"}, {"temperature", 1.0}}},
        {"histogram", {{"enabled", true}, {"bins", 100}, {"half_width", 6.0}, {"axis", 0}}}}},
      {"test2-trubnikov",
       {{"particles", 200000},
        {"dt", 0.1},
        {"t_end", 3.0},
        {"kernel", {{"surrogate", "D3"}, {"interaction", "maxwell"}, {"epsilon", 0.1}}},
        {"mode", {{"kind", "deterministic"}}},
        {"initial", {{"kind", "ellipsoid"}, {"tx", 0.085}, {"ty", 0.085}, {"tz", 0.04}}}}},
      {"test3-bkw-uq",
       {{"particles", 100000},
        {"dt", 0.1},
        {"t_end", 1.0},
        {"kernel", {{"surrogate", "D3"}, {"interaction", "maxwell"}, {"epsilon", 0.1}}},
        {"mode", {{"kind", "sg"}, {"order", 5}, {"nodes", 64}}},
        {"initial", {{"kind", "bkw"}, {"temperature", affine(0.95, 0.1)}}},
        {"histogram", {{"enabled", true}, {"bins", 100}, {"half_width", 6.0}, {"axis", 0}}}}},
      {"test4-coulomb-uq",
       {{"particles", 100000},
        {"dt", 0.1},
        {"t_end", 1.0},
        {"kernel", {{"surrogate", "D3"}, {"interaction", "coulomb"}, {"epsilon", 0.1}}},
        {"mode", {{"kind", "sg"}, {"order", 5}, {"nodes", 64}}},
        {"initial", {{"kind", "ellipsoid"}, {"tx", affine(1.0, 0.05)}, {"ty", 0.75}, {"tz", 0.75}}}}},
      {"test5-cost",
       {{"particles", 100000},
        {"dt", 0.1},
        {"t_end", 1.0},
        {"kernel", {{"surrogate", "D3"}, {"interaction", "maxwell"}, {"epsilon", 0.1}}},
        {"mode", {{"kind", "sg"}, {"order", 4}, {"nodes", 16}}},
        {"initial", {{"kind", "bkw"}, {"temperature", affine(0.95, 0.1)}}}}},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Schema checking. Every accessor knows its JSON pointer for error messages.

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config " + (path_.empty() ? std::string("/") : path_) + ": " + what);
  }

  void only(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        Node(v, path_ + "/" + k).fail("unknown key");
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  Node at(const char* key) const {
    if (!j_.contains(key)) Node(j_, path_ + "/" + key).fail("missing");
    return Node(j_.at(key), path_ + "/" + key);
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::uint64_t unsigned_int() const {
    if (!j_.is_number_integer() && !(j_.is_number_float() && std::floor(j_.get<double>()) == j_.get<double>()))
      fail("expected an integer");
    if (j_.is_number_integer() && !j_.is_number_unsigned() && j_.get<long long>() < 0) fail("must be nonnegative");
    if (j_.is_number_float() && j_.get<double>() < 0) fail("must be nonnegative");
    return j_.is_number_float() ? static_cast<std::uint64_t>(j_.get<double>()) : j_.get<std::uint64_t>();
  }
  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  /// A number (constant in z) or [offset, slope].
  Affine affine_map() const {
    if (j_.is_number()) return Affine::constant(j_.get<double>());
    if (j_.is_array() && j_.size() == 2 && j_[0].is_number() && j_[1].is_number())
      return {j_[0].get<double>(), j_[1].get<double>()};
    fail("expected a number or [offset, slope]");
  }
  Vec3 vec3() const {
    if (!(j_.is_array() && j_.size() == 3 && j_[0].is_number() && j_[1].is_number() && j_[2].is_number()))
      fail("expected [x, y, z]");
    return {j_[0].get<double>(), j_[1].get<double>(), j_[2].get<double>()};
  }

 private:
  const json& j_;
  std::string path_;
};

KernelSpec parse_kernel(const Node& n) {
  n.only({"surrogate", "interaction", "epsilon", "c0", "charge", "permittivity", "reduced_mass", "log_lambda"});
  KernelSpec k;
  if (n.has("surrogate")) {
    const auto s = n.at("surrogate").string();
    try {
      k.surrogate = parse_surrogate(s.c_str());
    } catch (const std::invalid_argument&) {
      n.at("surrogate").fail("unknown surrogate '" + s + "' (expected D1, D2 or D3)");
    }
  }
  if (n.has("epsilon")) k.epsilon = n.at("epsilon").number();
  const std::string inter = n.has("interaction") ? n.at("interaction").string() : "maxwell";
  if (inter == "maxwell") {
    for (const char* key : {"charge", "permittivity", "reduced_mass", "log_lambda"})
      if (n.has(key)) n.at(key).fail("only valid for the coulomb interaction");
    Maxwell m;
    if (n.has("c0")) m.c0 = n.at("c0").number();
    k.interaction = m;
  } else if (inter == "coulomb") {
    if (n.has("c0")) n.at("c0").fail("only valid for the maxwell interaction");
    Coulomb c;
    if (n.has("charge")) c.charge = n.at("charge").number();
    if (n.has("permittivity")) c.permittivity = n.at("permittivity").number();
    if (n.has("reduced_mass")) c.reduced_mass = n.at("reduced_mass").number();
    if (n.has("log_lambda")) c.log_lambda = n.at("log_lambda").number();
    k.interaction = c;
  } else {
    n.at("interaction").fail("unknown interaction '" + inter + "' (expected maxwell or coulomb)");
  }
  try {
    k.validate();
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  return k;
}

Mode parse_mode(const Node& n) {
  const std::string kind = n.has("kind") ? n.at("kind").string() : "deterministic";
  if (kind == "deterministic") {
    n.only({"kind"});
    return Deterministic{};
  }
  if (kind == "sg") {
    n.only({"kind", "order", "nodes"});
    StochasticGalerkin s;
    if (n.has("order")) s.order = n.at("order").integer();
    if (n.has("nodes")) s.nodes = n.at("nodes").integer();
    return s;
  }
  if (kind == "mc") {
    n.only({"kind", "samples"});
    MonteCarloZ m;
    if (n.has("samples")) m.samples = n.at("samples").integer();
    return m;
  }
  n.at("kind").fail("unknown mode '" + kind + "' (expected deterministic, sg or mc)");
}

InitialCondition parse_initial(const Node& n) {
  const std::string kind = n.at("kind").string();
  InitialCondition ic;
  if (kind == "bkw") {
    n.only({"kind", "temperature"});
    ic = InitialCondition::bkw(n.at("temperature").affine_map());
  } else if (kind == "ellipsoid") {
    n.only({"kind", "tx", "ty", "tz"});
    ic = InitialCondition::ellipsoid(n.at("tx").affine_map(), n.at("ty").affine_map(), n.at("tz").affine_map());
  } else if (kind == "bimodal") {
    n.only({"kind", "temperature", "separation"});
    ic = InitialCondition::bimodal(n.at("temperature").affine_map(),
                                   n.has("separation") ? n.at("separation").number() : 1.0);
  } else if (kind == "bump-on-tail") {
    n.only({"kind", "temperature", "bump_mass", "bump_center", "temperature_ratio"});
    ic = InitialCondition::bump_on_tail(n.at("temperature").affine_map(),
                                        n.has("bump_mass") ? n.at("bump_mass").number() : 1.0 / 40.0,
                                        n.has("bump_center") ? n.at("bump_center").vec3() : Vec3{3.0, 0.0, 0.0},
                                        n.has("temperature_ratio") ? n.at("temperature_ratio").number() : 40.0);
  } else {
    n.at("kind").fail("unknown initial condition '" + kind + "' (expected bkw, ellipsoid, bimodal or bump-on-tail)");
  }
  try {
    ic.validate();
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  return ic;
}

json affine_json(const Affine& a) { return a.slope == 0.0 ? json(a.offset) : affine(a.offset, a.slope); }

json initial_json(const InitialCondition& ic) {
  const auto& c0 = ic.components.at(0);
  switch (ic.kind) {
    case InitialCondition::Kind::Bkw:
      return {{"kind", "bkw"}, {"temperature", affine_json(c0.temperature[0])}};
    case InitialCondition::Kind::Ellipsoid:
      return {{"kind", "ellipsoid"},
              {"tx", affine_json(c0.temperature[0])},
              {"ty", affine_json(c0.temperature[1])},
              {"tz", affine_json(c0.temperature[2])}};
    case InitialCondition::Kind::Bimodal:
      return {{"kind", "bimodal"}, {"temperature", affine_json(c0.temperature[0])}, {"separation", ic.components.at(1).mean.x}};
    case InitialCondition::Kind::BumpOnTail: {
      const auto& bump = ic.components.at(1);
      return {{"kind", "bump-on-tail"},
              {"temperature", affine_json(c0.temperature[0])},
              {"bump_mass", bump.weight},
              {"bump_center", json::array({bump.mean.x, bump.mean.y, bump.mean.z})},
              {"temperature_ratio", c0.temperature[0].offset / bump.temperature[0].offset}};
    }
  }
  return {};
}

json kernel_json(const KernelSpec& k) {
  json j = {{"surrogate", to_string(k.surrogate)}, {"epsilon", k.epsilon}};
  if (const auto* m = std::get_if<Maxwell>(&k.interaction)) {
    j["interaction"] = "maxwell";
    j["c0"] = m->c0;
  } else {
    const auto& c = std::get<Coulomb>(k.interaction);
    j["interaction"] = "coulomb";
    j["charge"] = c.charge;
    j["permittivity"] = c.permittivity;
    j["reduced_mass"] = c.reduced_mass;
    j["log_lambda"] = c.log_lambda;
  }
  return j;
}

json mode_json(const Mode& m) {
  if (const auto* s = std::get_if<StochasticGalerkin>(&m)) return {{"kind", "sg"}, {"order", s->order}, {"nodes", s->nodes}};
  if (const auto* c = std::get_if<MonteCarloZ>(&m)) return {{"kind", "mc"}, {"samples", c->samples}};
  return {{"kind", "deterministic"}};
}

const char* status_name(ObservableSeries::Status s) {
  switch (s) {
    case ObservableSeries::Status::Complete:
      return "complete";
    case ObservableSeries::Status::ObserverFailed:
      return "observer-failed";
    case ObservableSeries::Status::InvariantViolated:
      return "invariant-violated";
  }
  return "unknown";
}

json diagnostics_json(const Diagnostics& d) {
  return {{"collisions", d.collisions},
          {"skipped", d.skipped},
          {"floored_nodes", d.floored_nodes},
          {"degenerate_nodes", d.degenerate_nodes}};
}

std::vector<double> row_values(const MomentSet& m) {
  return {m.m1.x, m.m1.y, m.m1.z, m.temperature, m.t_dir.x, m.t_dir.y, m.t_dir.z, m.m4, m.anisotropy()};
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct Bundle {
  std::filesystem::path dir;
  json meta;
  std::vector<std::string> files;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Bundle(const RunConfig& cfg, const std::string& command) : dir(cfg.output_dir) {
    std::filesystem::create_directories(dir);
    meta = {{"schema_version", kSchemaVersion},
            {"tool", "sim"},
            {"version", kToolVersion},
            {"command", command},
            {"seed", cfg.sim.seed},
            {"initial_seed", initial_seed(cfg.sim.seed)},
            {"config", to_json(cfg)}};
  }

  void add(const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_file(dir / name, body);
    files.push_back(name);
  }

  void finish() {
    meta["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    meta["files"] = files;
    write_file(dir / "metadata.json", [&](std::ostream& o) { o << meta.dump(2) << '\n'; });
  }
};

void write_series_files(Bundle& b, const ObservableSeries& s) {
  if (s.z.size() == 1) {
    b.add("series.csv", [&](std::ostream& o) { write_node_series(o, s, 0); });
    return;
  }
  for (std::size_t q = 0; q < s.z.size(); ++q) {
    char name[32];
    std::snprintf(name, sizeof name, "node_%03zu.csv", q);
    b.add(name, [&](std::ostream& o) { write_node_series(o, s, q); });
  }
  b.add("expectation.csv", [&](std::ostream& o) { write_z_series(o, s, false); });
  b.add("variance.csv", [&](std::ostream& o) { write_z_series(o, s, true); });
  json nodes = json::array();
  for (std::size_t q = 0; q < s.z.size(); ++q) nodes.push_back({{"z", s.z[q]}, {"weight", s.weights[q]}});
  b.meta["nodes"] = nodes;
}

void write_marginal(Bundle& b, const HistogramOutput& h, const Marginal1D& m, double time) {
  const auto density = m.density();
  b.add("marginal.csv", [&](std::ostream& o) {
    CsvWriter w(o);
    w.field("time").field("v").field("density").end_row();
    for (std::size_t k = 0; k < density.size(); ++k) w.field(time).field(m.center(k)).field(density[k]).end_row();
  });
  b.meta["histogram"] = {{"axis", h.axis},
                         {"bins", h.bins},
                         {"half_width", h.half_width},
                         {"out_of_range_fraction", m.out_of_range_fraction()}};
}

CommandResult finish_series(Bundle& b, const ObservableSeries& s, std::ostream& log) {
  b.meta["status"] = status_name(s.status);
  b.meta["message"] = s.message;
  b.meta["cost"] = s.cost;
  b.meta["diagnostics"] = diagnostics_json(s.diagnostics);
  write_series_files(b, s);
  b.finish();
  log << "status " << status_name(s.status) << (s.message.empty() ? "" : ": " + s.message) << ", "
      << s.times.size() << " outputs written to " << b.dir.string() << '\n';
  if (s.status == ObservableSeries::Status::InvariantViolated) return {kExitInvariant, s.message};
  if (s.status == ObservableSeries::Status::ObserverFailed) return {kExitFailure, s.message};
  return {};
}

double temperature_of(const MomentSet& m) { return m.temperature; }
double m4_of(const MomentSet& m) { return m.m4; }

std::shared_ptr<const CollisionLog> load_log(const std::filesystem::path& p) {
  return std::make_shared<const CollisionLog>(CollisionLog::load(p));
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, doc] : preset_table()) out.push_back(name);
  return out;
}

json preset(const std::string& name) {
  for (const auto& [n, doc] : preset_table()) {
    if (n != name) continue;
    json full = doc;
    full["schema_version"] = kSchemaVersion;
    full["preset"] = name;
    return full;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

RunConfig parse_config(const json& doc) {
  const Node top(doc, "");
  if (!doc.is_object()) top.fail("expected an object");
  json merged = doc;
  if (doc.contains("preset")) {
    merged = preset(top.at("preset").string());
    merged.merge_patch(doc);
  }
  const Node n(merged, "");
  n.only({"schema_version", "preset", "particles", "dt", "rho", "t_end", "seed", "scheme", "threads", "output_every",
          "kernel", "mode", "initial", "z", "histogram", "output_dir"});
  if (!n.has("schema_version")) n.at("schema_version").fail("missing (current version is 1)");
  if (n.at("schema_version").integer() != kSchemaVersion)
    n.at("schema_version").fail("unsupported version (this build reads version 1)");

  RunConfig cfg;
  if (n.has("preset")) cfg.preset = n.at("preset").string();
  auto& s = cfg.sim;
  s.particles = static_cast<std::size_t>(n.at("particles").unsigned_int());
  if (n.has("dt")) s.dt = n.at("dt").number();
  if (n.has("rho")) s.rho = n.at("rho").number();
  s.t_end = n.at("t_end").number();
  if (n.has("seed")) s.seed = n.at("seed").unsigned_int();
  if (n.has("scheme")) {
    try {
      s.scheme = parse_scheme(n.at("scheme").string());
    } catch (const ConfigError& e) {
      n.at("scheme").fail(e.what());
    }
  }
  if (n.has("threads")) s.threads = n.at("threads").integer();
  if (n.has("output_every")) s.output_every = n.at("output_every").integer();
  if (n.has("kernel")) s.kernel = parse_kernel(n.at("kernel"));
  if (n.has("mode")) s.mode = parse_mode(n.at("mode"));
  cfg.initial = parse_initial(n.at("initial"));
  if (n.has("z")) {
    cfg.z = n.at("z").number();
    if (!(cfg.z >= 0.0 && cfg.z <= 1.0)) n.at("z").fail("must lie in [0, 1]");
  }
  if (n.has("histogram")) {
    const auto h = n.at("histogram");
    h.only({"enabled", "bins", "half_width", "axis"});
    if (h.has("enabled")) cfg.histogram.enabled = h.at("enabled").boolean();
    if (h.has("bins")) cfg.histogram.bins = static_cast<std::size_t>(h.at("bins").unsigned_int());
    if (h.has("half_width")) cfg.histogram.half_width = h.at("half_width").number();
    if (h.has("axis")) cfg.histogram.axis = h.at("axis").integer();
    if (cfg.histogram.bins < 1) h.at("bins").fail("must be at least 1");
    if (!(cfg.histogram.half_width > 0.0)) h.at("half_width").fail("must be positive");
    if (cfg.histogram.axis < 0 || cfg.histogram.axis > 2) h.at("axis").fail("must be 0, 1 or 2");
  }
  if (n.has("output_dir")) cfg.output_dir = n.at("output_dir").string();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& source) {
  if (!std::filesystem::exists(source)) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), source) != names.end()) return parse_config(preset(source));
    throw ConfigError("config file '" + source + "' not found and not a preset name");
  }
  std::ifstream in(source);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  const auto& s = cfg.sim;
  json j = {{"schema_version", kSchemaVersion},
            {"particles", s.particles},
            {"dt", s.dt},
            {"rho", s.rho},
            {"t_end", s.t_end},
            {"seed", s.seed},
            {"scheme", to_string(s.scheme)},
            {"threads", s.threads},
            {"output_every", s.output_every},
            {"kernel", kernel_json(s.kernel)},
            {"mode", mode_json(s.mode)},
            {"initial", initial_json(cfg.initial)},
            {"z", cfg.z},
            {"histogram",
             {{"enabled", cfg.histogram.enabled},
              {"bins", cfg.histogram.bins},
              {"half_width", cfg.histogram.half_width},
              {"axis", cfg.histogram.axis}}},
            {"output_dir", cfg.output_dir}};
  // The preset name is kept for reference only; with every key present it changes nothing.
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  return j;
}

std::uint64_t initial_seed(std::uint64_t seed) noexcept { return derive_seed(seed, kInitialStep); }

// ---------------------------------------------------------------------------

CsvWriter& CsvWriter::field(const std::string& s) {
  if (!first_) out_ << ',';
  first_ = false;
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    out_ << s;
    return *this;
  }
  out_ << '"';
  for (char c : s) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

CsvWriter& CsvWriter::field(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return field(std::string(buf));
}

CsvWriter& CsvWriter::field(long long x) { return field(std::to_string(x)); }

void CsvWriter::end_row() {
  out_ << "\r\n";
  first_ = true;
}

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {"time", "m1_x", "m1_y", "m1_z", "temperature", "t_x",
                                                "t_y",  "t_z",  "m4",   "anisotropy_xz"};
  return cols;
}

void write_node_series(std::ostream& out, const ObservableSeries& s, std::size_t node) {
  CsvWriter w(out);
  for (const auto& c : series_columns()) w.field(c);
  w.end_row();
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    w.field(s.times[t]);
    for (double v : row_values(s.rows[t].at(node))) w.field(v);
    w.end_row();
  }
}

void write_z_series(std::ostream& out, const ObservableSeries& s, bool variance) {
  CsvWriter w(out);
  for (const auto& c : series_columns()) w.field(c);
  w.end_row();
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    const auto& row = s.rows[t];
    const std::size_t cols = series_columns().size() - 1;
    std::vector<double> e(cols, 0.0), v(cols, 0.0);
    for (std::size_t q = 0; q < row.size(); ++q) {
      const auto vals = row_values(row[q]);
      for (std::size_t c = 0; c < cols; ++c) e[c] += s.weights[q] * vals[c];
    }
    for (std::size_t q = 0; q < row.size(); ++q) {
      const auto vals = row_values(row[q]);
      for (std::size_t c = 0; c < cols; ++c) v[c] += s.weights[q] * (vals[c] - e[c]) * (vals[c] - e[c]);
    }
    w.field(s.times[t]);
    for (double x : variance ? v : e) w.field(x);
    w.end_row();
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ConfigError("empty entry in list '" + text + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("'" + item + "' is not an integer");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

// ---------------------------------------------------------------------------

CommandResult cmd_run(const RunConfig& cfg_in, const RunOptions& opts, std::ostream& log) {
  RunConfig cfg = cfg_in;
  if (opts.record_log && opts.replay_log) throw ConfigError("--record-log and --replay-log are exclusive");
  if (opts.record_log) cfg.sim.log_mode = LogMode::Record;
  if (opts.replay_log) cfg.sim.log_mode = LogMode::Replay;
  cfg.sim.validate();

  Bundle b(cfg, "run");
  if (opts.replay_log) b.meta["replay_log"] = std::filesystem::absolute(*opts.replay_log).string();

  if (std::holds_alternative<MonteCarloZ>(cfg.sim.mode)) {
    const auto s = mc_z_run(cfg.sim, cfg.initial);
    return finish_series(b, s, log);
  }

  const auto ic_seed = initial_seed(cfg.sim.seed);
  std::optional<Simulation> sim;
  if (const auto* sg = std::get_if<StochasticGalerkin>(&cfg.sim.mode)) {
    auto space = std::make_shared<const GalerkinSpace>(sg->order, sg->nodes);
    sim.emplace(cfg.sim, sg_initialize(cfg.initial, cfg.sim.particles, ic_seed, space));
  } else {
    sim.emplace(cfg.sim, sample_initial(cfg.initial, cfg.sim.particles, ic_seed, cfg.z));
  }
  if (opts.replay_log) sim->set_replay(load_log(*opts.replay_log));

  const auto series = run(*sim);

  if (cfg.histogram.enabled) {
    Marginal1D m(cfg.histogram.half_width, cfg.histogram.bins, cfg.histogram.axis);
    if (sim->galerkin()) {
      const auto& space = sim->ensemble().space();
      for (std::size_t q = 0; q < space.nodes(); ++q) m.add(sim->ensemble().at_node(q), space.weight(q));
    } else {
      m.add(sim->velocities());
    }
    write_marginal(b, cfg.histogram, m, sim->time());
  }
  if (opts.record_log) {
    sim->recorded_log().save(*opts.record_log);
    b.meta["recorded_log"] = std::filesystem::absolute(*opts.record_log).string();
  }
  return finish_series(b, series, log);
}

CommandResult cmd_sweep_m(const RunConfig& cfg_in, const SweepOptions& opts, std::ostream& log) {
  RunConfig cfg = cfg_in;
  const int nodes = [&] {
    if (const auto* sg = std::get_if<StochasticGalerkin>(&cfg.sim.mode)) return sg->nodes;
    return 64;
  }();
  if (opts.reference_order < 0) throw ConfigError("--ref must be nonnegative");
  if (nodes < opts.reference_order + 1) throw ConfigError("quadrature nodes must exceed the reference order");
  for (int m : opts.orders)
    if (m < 0 || m > opts.reference_order) throw ConfigError("orders must lie in [0, ref]");
  if (opts.logs.record_log && opts.logs.replay_log) throw ConfigError("--record-log and --replay-log are exclusive");

  std::vector<Surrogate> kernels = opts.kernels;
  if (kernels.empty()) kernels.push_back(cfg.sim.kernel.surrogate);

  Bundle b(cfg, "sweep-m");
  b.meta["orders"] = opts.orders;
  b.meta["reference_order"] = opts.reference_order;

  const auto ref_space = std::make_shared<const GalerkinSpace>(opts.reference_order, nodes);
  const auto ens = sg_initialize(cfg.initial, cfg.sim.particles, initial_seed(cfg.sim.seed), ref_space);

  std::shared_ptr<const CollisionLog> shared;
  if (opts.logs.replay_log) {
    shared = load_log(*opts.logs.replay_log);
    b.meta["replay_log"] = std::filesystem::absolute(*opts.logs.replay_log).string();
  }

  struct Row {
    double time;
    std::string kernel;
    int order;
    double error;
  };
  std::vector<Row> rows;
  Diagnostics total;
  for (auto k : kernels) {
    auto rc = cfg.sim;
    rc.kernel.surrogate = k;
    rc.mode = StochasticGalerkin{opts.reference_order, nodes};
    rc.log_mode = shared ? LogMode::Replay : LogMode::Record;
    rc.validate();
    Simulation ref(rc, ens);
    if (shared) ref.set_replay(shared);
    const auto rs = run(ref);
    if (rs.status != ObservableSeries::Status::Complete) {
      b.meta["status"] = status_name(rs.status);
      b.meta["message"] = "reference: " + rs.message;
      b.finish();
      return {rs.status == ObservableSeries::Status::InvariantViolated ? kExitInvariant : kExitFailure, rs.message};
    }
    if (!shared) {
      shared = std::make_shared<const CollisionLog>(ref.recorded_log());
      if (opts.logs.record_log) {
        shared->save(*opts.logs.record_log);
        b.meta["recorded_log"] = std::filesystem::absolute(*opts.logs.record_log).string();
      }
    }
    const auto t_ref = rs.field(rs.rows.size() - 1, temperature_of);
    for (int m : opts.orders) {
      auto gc = rc;
      gc.mode = StochasticGalerkin{m, nodes};
      gc.log_mode = LogMode::Replay;
      const auto space = std::make_shared<const GalerkinSpace>(m, nodes);
      Simulation sim(gc, ens.with_order(space));
      sim.set_replay(shared);
      const auto gs = run(sim);
      if (gs.status != ObservableSeries::Status::Complete) {
        b.meta["status"] = status_name(gs.status);
        b.meta["message"] = "order " + std::to_string(m) + ": " + gs.message;
        b.finish();
        return {gs.status == ObservableSeries::Status::InvariantViolated ? kExitInvariant : kExitFailure, gs.message};
      }
      const auto t_m = gs.field(gs.rows.size() - 1, temperature_of);
      const double err = l2p_error_z(t_m, t_ref, ref_space->quadrature());
      rows.push_back({gs.times.back(), to_string(k), m, err});
      total.collisions += gs.diagnostics.collisions;
      log << to_string(k) << " M=" << m << " L2_p error of T(z): " << err << '\n';
    }
  }
  b.add("sweep_m.csv", [&](std::ostream& o) {
    CsvWriter w(o);
    w.field("time").field("kernel").field("order").field("l2p_error_temperature").end_row();
    for (const auto& r : rows) w.field(r.time).field(r.kernel).field(static_cast<long long>(r.order)).field(r.error).end_row();
  });
  b.meta["status"] = "complete";
  b.meta["diagnostics"] = diagnostics_json(total);
  b.finish();
  return {};
}

CommandResult cmd_compare_mc(const RunConfig& cfg, const CompareOptions& opts, std::ostream& log) {
  if (opts.orders.empty() || opts.samples.empty()) throw ConfigError("empty order or sample list");
  const int top = *std::max_element(opts.orders.begin(), opts.orders.end());
  const int nodes = [&] {
    if (const auto* sg = std::get_if<StochasticGalerkin>(&cfg.sim.mode)) return std::max(sg->nodes, top + 1);
    return std::max(16, top + 1);
  }();
  for (int m : opts.orders)
    if (m < 0) throw ConfigError("orders must be nonnegative");
  for (int s : opts.samples)
    if (s < 1) throw ConfigError("sample counts must be positive");
  if (opts.reference_nodes < 1) throw ConfigError("--ref-nodes must be positive");

  Bundle b(cfg, "compare-mc");
  struct Row {
    double time;
    std::string method;
    int size;
    double cost;
    double value;
    double error;
  };
  std::vector<Row> rows;

  auto base = cfg.sim;
  base.log_mode = LogMode::Off;
  auto rc = base;
  rc.mode = Deterministic{};
  rc.particles = opts.reference_particles ? opts.reference_particles : 10 * cfg.sim.particles;
  rc.seed = derive_seed(cfg.sim.seed, 1);
  const auto ref_series = collocation_run(rc, cfg.initial, gauss_nodes(opts.reference_nodes));
  const double ref = ref_series.statistics(ref_series.rows.size() - 1, m4_of).expectation;
  b.meta["reference"] = {{"method", "collocation"},
                         {"nodes", opts.reference_nodes},
                         {"particles_per_node", rc.particles},
                         {"expectation_m4", ref}};
  log << "reference E_z[M4] = " << ref << '\n';

  // sG orders on one collision log recorded at the highest order.
  const auto top_space = std::make_shared<const GalerkinSpace>(top, nodes);
  const auto ens = sg_initialize(cfg.initial, base.particles, initial_seed(base.seed), top_space);
  auto gc = base;
  gc.mode = StochasticGalerkin{top, nodes};
  gc.log_mode = LogMode::Record;
  Simulation top_sim(gc, ens);
  const auto ts = run(top_sim);
  if (ts.status != ObservableSeries::Status::Complete) {
    b.meta["status"] = status_name(ts.status);
    b.meta["message"] = ts.message;
    b.finish();
    return {ts.status == ObservableSeries::Status::InvariantViolated ? kExitInvariant : kExitFailure, ts.message};
  }
  const auto log_ptr = std::make_shared<const CollisionLog>(top_sim.recorded_log());
  for (int m : opts.orders) {
    ObservableSeries s;
    if (m == top) {
      s = ts;
    } else {
      auto c = base;
      c.mode = StochasticGalerkin{m, nodes};
      c.log_mode = LogMode::Replay;
      Simulation sim(c, ens.with_order(std::make_shared<const GalerkinSpace>(m, nodes)));
      sim.set_replay(log_ptr);
      s = run(sim);
    }
    const double value = s.statistics(s.rows.size() - 1, m4_of).expectation;
    rows.push_back({s.times.back(), "sg", m, s.cost, value, std::abs(value - ref)});
    log << "sG M=" << m << " cost " << s.cost << " error " << rows.back().error << '\n';
  }

  for (int count : opts.samples) {
    auto c = base;
    c.mode = MonteCarloZ{count};
    c.seed = derive_seed(base.seed, 1000 + static_cast<std::uint64_t>(count));
    const auto s = mc_z_run(c, cfg.initial);
    const double value = s.statistics(s.rows.size() - 1, m4_of).expectation;
    rows.push_back({s.times.back(), "mc", count, s.cost, value, std::abs(value - ref)});
    log << "MC M_s=" << count << " cost " << s.cost << " error " << rows.back().error << '\n';
  }

  b.add("compare_mc.csv", [&](std::ostream& o) {
    CsvWriter w(o);
    w.field("time").field("method").field("size").field("cost").field("expectation_m4").field("error").end_row();
    for (const auto& r : rows)
      w.field(r.time).field(r.method).field(static_cast<long long>(r.size)).field(r.cost).field(r.value).field(r.error).end_row();
  });
  b.meta["status"] = "complete";
  b.finish();
  return {};
}

CommandResult cmd_kernel_check(std::ostream& log) {
  int failed = 0;
  for (const auto& c : kernel_property_suite()) {
    char line[256];
    std::snprintf(line, sizeof line, "%-4s %-55s measured %.12g expected %.12g tol %.1e\n", c.passed ? "ok" : "FAIL",
                  c.name.c_str(), c.measured, c.expected, c.tolerance);
    log << line;
    failed += c.passed ? 0 : 1;
  }
  if (failed) return {kExitInvariant, std::to_string(failed) + " kernel properties failed"};
  return {};
}

}  // namespace lfp::cli
