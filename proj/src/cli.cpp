#include "msmux/cli.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "msmux/analytics.h"
#include "msmux/errors.h"
#include "msmux/format.h"
#include "msmux/gap_analysis.h"
#include "msmux/geometry.h"
#include "msmux/layout_io.h"
#include "msmux/montecarlo.h"
#include "msmux/presets.h"
#include "msmux/records_io.h"
#include "msmux/table_io.h"

namespace msmux::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "json";
  std::string preset;
  std::vector<std::string> records;
  unsigned threads = 0;
  // analytic
  std::string input;
  // gap-sweep
  std::vector<std::uint64_t> attempts;
  std::string thresholds;
  std::string grid;
  std::string tail;
  // layout
  std::string layout;
  std::string builtin;
  std::string stage;
  std::optional<std::size_t> pack;
  bool emit_definition = false;
};

// ---------------------------------------------------------------- config --

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
  return j;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + context);
    }
  }
}

double get_number(const json& obj, const std::string& key, double fallback,
                  const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(context + "." + key + " must be a number");
  return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& key,
                     std::int64_t fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(context + "." + key + " must be an integer");
  }
  return obj[key].get<std::int64_t>();
}

std::uint64_t get_uint(const json& obj, const std::string& key,
                       std::uint64_t fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned()) {
    throw ConfigError(context + "." + key + " must be a non-negative integer");
  }
  return obj[key].get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(context + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback,
              const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(context + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

std::vector<double> get_number_array(const json& obj, const std::string& key,
                                     const std::string& context) {
  if (!obj.contains(key)) return {};
  const json& arr = obj[key];
  if (!arr.is_array()) throw ConfigError(context + "." + key + " must be an array");
  std::vector<double> out;
  for (const json& v : arr) {
    if (!v.is_number()) throw ConfigError(context + "." + key + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> get_string_array(const json& obj, const std::string& key,
                                          const std::string& context) {
  if (!obj.contains(key)) return {};
  const json& arr = obj[key];
  if (arr.is_string()) return {arr.get<std::string>()};
  if (!arr.is_array()) throw ConfigError(context + "." + key + " must be an array");
  std::vector<std::string> out;
  for (const json& v : arr) {
    if (!v.is_string()) throw ConfigError(context + "." + key + " must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Full-precision JSON numbers for the effective config, so that re-running
// from the embedded config reproduces the run exactly.
json exact(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// ---------------------------------------------------------------- output --

std::string resolve_out_dir(const Options& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return {};
}

void prepare_out_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  const fs::path probe = fs::path(dir) / ".msmux_write_probe";
  {
    std::ofstream test(probe);
    if (!test) throw IoError("output directory " + dir + " is not writable");
  }
  fs::remove(probe, ec);
}

void require_readable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

json envelope(const std::string& command, const json& effective_config,
              json result) {
  json provenance = {{"config", effective_config},
                     {"config_hash", fnv1a_hex(effective_config.dump())}};
  if (effective_config.contains("seed")) provenance["seed"] = effective_config["seed"];
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"provenance", provenance},
          {"result", std::move(result)}};
}

void emit(const std::string& out_dir, const std::string& file_name,
          const std::string& content, std::ostream& out) {
  if (out_dir.empty()) {
    out << content;
  } else {
    write_file(out_dir, file_name, content);
  }
}

// -------------------------------------------------------------- analytic --

int cmd_analytic(const Options& opts, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(opts.config_path);
  check_keys(cfg, {"preset", "input", "sites", "relative_tolerance", "format"},
             "analytic config");
  std::string preset = opts.preset.empty() ? get_string(cfg, "preset", "", "analytic")
                                           : opts.preset;
  std::string input = opts.input.empty() ? get_string(cfg, "input", "", "analytic")
                                         : opts.input;
  std::string format = opts.format;
  if (format == "json" && cfg.contains("format")) format = get_string(cfg, "format", "json", "analytic");
  const int sites = static_cast<int>(get_int(cfg, "sites", 4, "analytic"));
  TableTolerance tol;
  tol.relative = get_number(cfg, "relative_tolerance", tol.relative, "analytic");
  if (preset.empty() == input.empty()) {
    throw ConfigError("analytic needs exactly one of --preset or --input");
  }
  if (sites < 1) throw ConfigError("analytic.sites must be positive");
  if (format != "json" && format != "csv") throw ConfigError("unknown format '" + format + "'");
  if (!input.empty()) require_readable(input);
  const std::string out_dir = resolve_out_dir(opts);
  prepare_out_dir(out_dir);

  std::vector<TableRow> rows;
  json meta = json::object();
  if (!preset.empty()) {
    auto p = find_preset(preset);
    if (!p) throw ConfigError("unknown preset '" + preset + "'");
    rows = p->rows;
    meta = {{"name", p->name}, {"description", p->description}};
  } else {
    std::ifstream in(input);
    rows = read_table_csv(in, input);
  }
  const auto results = reproduce_table(rows, sites, tol);

  if (format == "csv") {
    std::ostringstream os;
    write_table_csv(os, results);
    emit(out_dir, "analytic.csv", os.str(), out);
  } else {
    std::size_t mismatches = 0;
    std::size_t errors = 0;
    for (const auto& r : results) {
      if (!r.ok()) {
        ++errors;
      } else if (!r.all_rounding_consistent()) {
        ++mismatches;
      }
    }
    json effective = {{"preset", preset.empty() ? json(nullptr) : json(preset)},
                      {"input", input.empty() ? json(nullptr) : json(input)},
                      {"sites", sites},
                      {"relative_tolerance", exact(tol.relative)}};
    json result = {{"preset", meta},
                   {"rows", table_json(results)},
                   {"row_count", results.size()},
                   {"rounding_mismatches", mismatches},
                   {"row_errors", errors}};
    emit(out_dir, "analytic.json",
         envelope("analytic", effective, std::move(result)).dump(2) + "\n", out);
  }
  for (const auto& r : results) {
    if (!r.ok()) err << "row d1=" << r.input.d1 << " p=" << format_number(r.input.p)
                     << ": " << *r.error << '\n';
  }
  return kOk;
}

// -------------------------------------------------------------- simulate --

GapDistribution parse_gap_distribution(const json& j, const std::string& ctx) {
  check_keys(j, {"kind", "rate", "step", "value", "lo", "hi"}, ctx);
  const std::string kind = get_string(j, "kind", "discretized_exponential", ctx);
  if (kind == "constant") return GapDistribution::constant(get_number(j, "value", 0.0, ctx));
  if (kind == "exponential") return GapDistribution::exponential(get_number(j, "rate", 0.05, ctx));
  if (kind == "discretized_exponential") {
    return GapDistribution::discretized_exponential(get_number(j, "rate", 0.05, ctx),
                                                    get_number(j, "step", 1.0, ctx));
  }
  if (kind == "uniform") {
    return GapDistribution::uniform(get_number(j, "lo", 0.0, ctx), get_number(j, "hi", 1.0, ctx));
  }
  throw ConfigError(ctx + ".kind '" + kind + "' is not a gap distribution");
}

json gap_distribution_json(const GapDistribution& g) {
  switch (g.kind) {
    case GapDistribution::Kind::Constant: return {{"kind", "constant"}, {"value", exact(g.a)}};
    case GapDistribution::Kind::Exponential: return {{"kind", "exponential"}, {"rate", exact(g.a)}};
    case GapDistribution::Kind::DiscretizedExponential:
      return {{"kind", "discretized_exponential"}, {"rate", exact(g.a)}, {"step", exact(g.b)}};
    case GapDistribution::Kind::Uniform:
      return {{"kind", "uniform"}, {"lo", exact(g.a)}, {"hi", exact(g.b)}};
  }
  return nullptr;
}

struct SimulateSetup {
  SimConfig config;
  json effective;
  bool write_records = false;
};

SimulateSetup parse_simulate(const Options& opts) {
  const json cfg = load_config(opts.config_path);
  const std::string ctx = "simulate";
  check_keys(cfg, {"d1", "p", "k", "n_shots", "seed", "failure_model", "calibrate_D1",
                   "stage_split", "escape_model", "selection", "escape_threshold",
                   "records"},
             "simulate config");
  SimulateSetup s;
  SimConfig& c = s.config;
  c.d1_label = static_cast<int>(get_int(cfg, "d1", 3, ctx));
  c.p_label = get_number(cfg, "p", 0.0, ctx);
  c.k = static_cast<int>(get_int(cfg, "k", kDefaultSites, ctx));
  if (c.k < 1 || c.k > kMaxSites) throw ConfigError("simulate.k must be in [1, 64]");
  c.n_shots = get_uint(cfg, "n_shots", 1000000, ctx);
  c.seed = opts.seed.value_or(get_uint(cfg, "seed", 0, ctx));
  c.escape_threshold = get_number(cfg, "escape_threshold", 0.0, ctx);
  s.write_records = get_bool(cfg, "records", false, ctx);

  if (cfg.contains("failure_model") && cfg.contains("calibrate_D1")) {
    throw ConfigError("simulate takes failure_model or calibrate_D1, not both");
  }
  json fm_json;
  if (cfg.contains("calibrate_D1")) {
    const double d1 = get_number(cfg, "calibrate_D1", 0.0, ctx);
    if (!(d1 >= 0.0 && d1 <= 1.0)) throw ConfigError("simulate.calibrate_D1 must lie in [0, 1]");
    c.failure_model = calibrate_from_table(d1, c.k);
  } else if (cfg.contains("failure_model")) {
    const json& fm = cfg["failure_model"];
    const std::string fctx = "simulate.failure_model";
    check_keys(fm, {"kind", "per_site_fail", "D", "c", "table"}, fctx);
    std::vector<double> rates = get_number_array(fm, "per_site_fail", fctx);
    if (fm.contains("D")) {
      if (!rates.empty()) throw ConfigError(fctx + " takes per_site_fail or D, not both");
      rates.assign(static_cast<std::size_t>(c.k), get_number(fm, "D", 0.0, fctx));
    }
    c.failure_model = FailureModel::independent(rates);
    const std::string kind = get_string(fm, "kind", "independent", fctx);
    if (kind == "common_mode") {
      c.failure_model.correlation = CommonMode{get_number(fm, "c", 0.0, fctx)};
    } else if (kind == "explicit_joint") {
      c.failure_model.correlation = ExplicitJoint{get_number_array(fm, "table", fctx)};
    } else if (kind != "independent") {
      throw ConfigError(fctx + ".kind '" + kind + "' is unknown");
    }
  } else {
    c.failure_model = FailureModel::identical(c.k, 0.0);
  }

  if (cfg.contains("stage_split")) {
    c.stage_split = StageSplit{get_number_array(cfg, "stage_split", ctx)};
  }

  std::string pool_path;
  if (cfg.contains("escape_model")) {
    const json& em = cfg["escape_model"];
    const std::string ectx = "simulate.escape_model";
    check_keys(em, {"kind", "q", "correct_gap", "error_gap", "pool"}, ectx);
    const std::string kind = get_string(em, "kind", "always_keep", ectx);
    if (kind == "always_keep") {
      c.escape_model = EscapeModel::always_keep();
    } else if (kind == "bernoulli_error") {
      c.escape_model = EscapeModel::bernoulli_error(get_number(em, "q", 0.0, ectx));
      if (em.contains("correct_gap")) {
        c.escape_model.correct_gap = parse_gap_distribution(em["correct_gap"], ectx + ".correct_gap");
      }
      if (em.contains("error_gap")) {
        c.escape_model.error_gap = parse_gap_distribution(em["error_gap"], ectx + ".error_gap");
      }
    } else if (kind == "empirical") {
      pool_path = get_string(em, "pool", "", ectx);
      if (pool_path.empty()) throw ConfigError(ectx + ".pool is required");
      require_readable(pool_path);
      c.escape_model = EscapeModel::empirical(read_records_file(pool_path));
    } else {
      throw ConfigError(ectx + ".kind '" + kind + "' is unknown");
    }
  }

  if (cfg.contains("selection")) {
    const json& sel = cfg["selection"];
    if (sel.is_string() && sel.get<std::string>() == "lowest_index") {
      c.selection = SelectionRule::lowest_index();
    } else if (sel.is_array()) {
      std::vector<int> perm;
      for (const json& v : sel) {
        if (!v.is_number_integer()) throw ConfigError("simulate.selection must list site numbers");
        perm.push_back(v.get<int>());
      }
      try {
        c.selection = SelectionRule::fixed_priority(perm);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("simulate.selection: ") + e.what());
      }
    } else {
      throw ConfigError("simulate.selection must be \"lowest_index\" or a priority list");
    }
  }

  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("simulate: ") + e.what());
  }

  // Effective config: every parameter that influences the result.
  json fm;
  fm["per_site_fail"] = json::array();
  for (double d : c.failure_model.per_site_fail) fm["per_site_fail"].push_back(exact(d));
  if (const auto* cm = std::get_if<CommonMode>(&c.failure_model.correlation)) {
    fm["kind"] = "common_mode";
    fm["c"] = exact(cm->c);
  } else if (const auto* jt = std::get_if<ExplicitJoint>(&c.failure_model.correlation)) {
    fm["kind"] = "explicit_joint";
    fm["table"] = jt->table;
  } else {
    fm["kind"] = "independent";
  }
  json em;
  switch (c.escape_model.kind) {
    case EscapeModel::Kind::AlwaysKeep: em = {{"kind", "always_keep"}}; break;
    case EscapeModel::Kind::BernoulliError:
      em = {{"kind", "bernoulli_error"},
            {"q", exact(c.escape_model.error_probability)},
            {"correct_gap", gap_distribution_json(c.escape_model.correct_gap)},
            {"error_gap", gap_distribution_json(c.escape_model.error_gap)}};
      break;
    case EscapeModel::Kind::Empirical:
      em = {{"kind", "empirical"}, {"pool", pool_path}};
      break;
  }
  json selection = c.selection.kind() == SelectionRule::Kind::LowestIndex
                       ? json("lowest_index")
                       : json(c.selection.priority());
  s.effective = {{"d1", c.d1_label},
                 {"p", exact(c.p_label)},
                 {"k", c.k},
                 {"n_shots", c.n_shots},
                 {"seed", c.seed},
                 {"failure_model", fm},
                 {"escape_model", em},
                 {"selection", selection},
                 {"escape_threshold", exact(c.escape_threshold)},
                 {"records", s.write_records}};
  if (c.stage_split) s.effective["stage_split"] = c.stage_split->injection_fail;
  return s;
}

json summary_json(const SimSummary& s, const SimConfig& config) {
  const double closed_D = all_fail_probability(config.failure_model);
  const double sigma_D = std::sqrt(closed_D * (1.0 - closed_D) / static_cast<double>(s.shots));
  json j = {{"d1", s.d1_label},
            {"p", json_number(s.p_label)},
            {"k", s.k},
            {"seed", s.seed},
            {"shots", s.shots},
            {"early_discards", s.early_discards},
            {"escape_rejections", s.escape_rejections},
            {"kept", s.kept},
            {"kept_errors", s.kept_errors},
            {"empirical_D", json_number(s.empirical_D)},
            {"empirical_A", json_number(s.empirical_A)},
            {"site_survival_histogram", s.site_survival_histogram},
            {"closed_form",
             {{"D", json_number(closed_D)},
              {"A_IC", json_number(expected_attempts(closed_D))},
              {"sigma_D", json_number(sigma_D)},
              {"z_D", sigma_D > 0.0 ? json_number((s.empirical_D - closed_D) / sigma_D)
                                    : json(nullptr)}}}};
  j["warnings"] = json::array();
  if (s.no_kept_warning) j["warnings"].push_back("no kept shots; empirical_A is infinite");
  return j;
}

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err) {
  if (opts.format != "json") throw ConfigError("simulate only emits json");
  SimulateSetup setup = parse_simulate(opts);
  const std::string out_dir = resolve_out_dir(opts);
  if (setup.write_records && out_dir.empty()) {
    throw ConfigError("record output needs --out or " + std::string(kOutDirEnv));
  }
  prepare_out_dir(out_dir);
  setup.config.keep_records = setup.write_records;

  const SimSummary summary = run_simulation(setup.config, opts.threads);
  json result = summary_json(summary, setup.config);
  if (setup.write_records) {
    result["records_file"] = "records.jsonl";
    result["record_count"] = summary.records.size();
    std::ostringstream os;
    write_records_jsonl(os, summary.records);
    write_file(out_dir, "records.jsonl", os.str());
  }
  emit(out_dir, "summary.json",
       envelope("simulate", setup.effective, std::move(result)).dump(2) + "\n", out);
  if (summary.no_kept_warning) {
    err << "warning: no kept shots; empirical_A is infinite\n";
    return kEmptyResult;
  }
  return kOk;
}

// ------------------------------------------------------------- gap-sweep --

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in " + what);
    }
  }
  return out;
}

std::vector<double> parse_triple(const std::string& text, const std::string& what) {
  std::string commas = text;
  std::replace(commas.begin(), commas.end(), ':', ',');
  auto v = parse_number_list(commas, what);
  if (v.size() != 3 && v.size() != 2) throw ConfigError(what + " expects lo:hi[:step]");
  return v;
}

json curve_json(const SweepCurve& curve) {
  json pts = json::array();
  for (const SweepPoint& p : curve.points) {
    json j = {{"G", json_number(p.threshold)},
              {"kept_correct", json_number(p.kept_correct)},
              {"kept_error", json_number(p.kept_error)},
              {"attempts", json_optional(p.attempts)},
              {"logical_error", json_optional(p.logical_error)},
              {"extrapolated", p.extrapolated}};
    if (p.error_lower) j["error_lower"] = json_number(*p.error_lower);
    if (p.error_upper) j["error_upper"] = json_number(*p.error_upper);
    pts.push_back(j);
  }
  return pts;
}

int cmd_gap_sweep(const Options& opts, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(opts.config_path);
  const std::string ctx = "gap_sweep";
  check_keys(cfg, {"records", "attempts", "thresholds", "grid", "tail"}, "gap-sweep config");
  std::vector<std::string> paths = opts.records.empty()
                                       ? get_string_array(cfg, "records", ctx)
                                       : opts.records;
  if (paths.empty()) throw ConfigError("gap-sweep needs at least one --records file");
  if (opts.format != "json" && opts.format != "csv") {
    throw ConfigError("unknown format '" + opts.format + "'");
  }
  std::vector<std::uint64_t> attempts = opts.attempts;
  if (attempts.empty() && cfg.contains("attempts")) {
    const json& a = cfg["attempts"];
    if (!a.is_array()) throw ConfigError("gap_sweep.attempts must be an array");
    for (const json& v : a) {
      if (!v.is_number_unsigned()) throw ConfigError("gap_sweep.attempts must hold integers");
      attempts.push_back(v.get<std::uint64_t>());
    }
  }
  if (!attempts.empty() && attempts.size() != paths.size()) {
    throw ConfigError("give one attempts value per records file");
  }

  std::optional<std::vector<double>> thresholds;
  json grid_json = nullptr;
  if (!opts.thresholds.empty()) {
    thresholds = parse_number_list(opts.thresholds, "--thresholds");
  } else if (!opts.grid.empty()) {
    auto v = parse_triple(opts.grid, "--grid");
    if (v.size() != 3) throw ConfigError("--grid expects lo:hi:step");
    grid_json = {{"lo", v[0]}, {"hi", v[1]}, {"step", v[2]}};
  } else if (cfg.contains("thresholds")) {
    thresholds = get_number_array(cfg, "thresholds", ctx);
  } else if (cfg.contains("grid")) {
    grid_json = cfg["grid"];
    check_keys(grid_json, {"lo", "hi", "step"}, "gap_sweep.grid");
  }
  if (!grid_json.is_null()) {
    try {
      thresholds = uniform_threshold_grid(get_number(grid_json, "lo", 0.0, ctx),
                                          get_number(grid_json, "hi", 0.0, ctx),
                                          get_number(grid_json, "step", 1.0, ctx));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("gap_sweep.grid: ") + e.what());
    }
  }

  std::optional<std::vector<double>> tail;  // lo, hi
  std::vector<double> tail_extend;
  if (!opts.tail.empty()) {
    tail = parse_triple(opts.tail, "--tail");
    if (tail->size() != 2) throw ConfigError("--tail expects lo:hi");
  } else if (cfg.contains("tail")) {
    const json& t = cfg["tail"];
    check_keys(t, {"lo", "hi", "extend"}, "gap_sweep.tail");
    tail = std::vector<double>{get_number(t, "lo", 0.0, ctx), get_number(t, "hi", 0.0, ctx)};
    tail_extend = get_number_array(t, "extend", "gap_sweep.tail");
  }

  for (const auto& p : paths) require_readable(p);
  const std::string out_dir = resolve_out_dir(opts);
  prepare_out_dir(out_dir);

  std::vector<RecordSet> sets;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    RecordSet set;
    set.records = read_records_file(paths[i]);
    set.n_attempts = attempts.empty() ? attempts_from_records(set.records) : attempts[i];
    if (set.n_attempts == 0) set.n_attempts = 1;
    try {
      set.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(paths[i] + ": " + e.what());
    }
    sets.push_back(std::move(set));
  }
  if (!thresholds) {
    std::vector<double> grid;
    for (const RecordSet& s : sets) {
      auto g = default_threshold_grid(s);
      grid.insert(grid.end(), g.begin(), g.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    thresholds = grid;
  }

  std::vector<SweepCurve> curves;
  json inputs = json::array();
  bool any_defined = false;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    SweepCurve curve;
    try {
      curve = sweep(sets[i], *thresholds);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    json entry = {{"records_file", paths[i]},
                  {"records", sets[i].records.size()},
                  {"n_attempts", sets[i].n_attempts}};
    const auto fractions = cumulative_fractions(sets[i], *thresholds);
    json frac = json::array();
    for (std::size_t t = 0; t < fractions.thresholds.size(); ++t) {
      frac.push_back({{"G", json_number(fractions.thresholds[t])},
                      {"correct", json_number(fractions.correct[t])},
                      {"error", json_number(fractions.error[t])}});
    }
    entry["cumulative_fractions"] = frac;
    SweepCurve emitted = curve;
    if (tail) {
      TailResult tr = extrapolate_tail(curve, (*tail)[0], (*tail)[1],
                                       sets[i].n_attempts, tail_extend);
      if (tr.extrapolation) {
        const TailFit& f = tr.extrapolation->fit;
        entry["tail_fit"] = {{"slope", json_number(f.slope)},
                             {"rate", json_number(f.rate())},
                             {"intercept", json_number(f.intercept)},
                             {"slope_stderr", json_number(f.slope_stderr)},
                             {"points_used", f.points_used},
                             {"window", {json_number((*tail)[0]), json_number((*tail)[1])}},
                             {"note", "log-linear fit of error survival counts; "
                                      "extrapolated points are estimates"}};
        emitted = tr.extrapolation->curve;
      } else {
        entry["tail_fit"] = {{"diagnostic", tr.diagnostic}};
        err << paths[i] << ": tail fit skipped: " << tr.diagnostic << '\n';
      }
    }
    entry["curve"] = curve_json(emitted);
    entry["warnings"] = emitted.warnings;
    for (const auto& p : curve.points) any_defined = any_defined || p.attempts.has_value();
    if (!out_dir.empty()) {
      std::ostringstream os;
      write_curve_csv(os, emitted);
      const std::string name = "curve_" + std::to_string(i + 1) + ".csv";
      write_file(out_dir, name, os.str());
      entry["curve_file"] = name;
    }
    inputs.push_back(entry);
    curves.push_back(std::move(curve));
  }

  json result = {{"inputs", inputs}};
  if (curves.size() == 2) {
    auto crossing = find_crossing(curves[0], curves[1]);
    result["crossing"] = crossing ? json{{"G_star", json_number(crossing->threshold)},
                                         {"bracket", {json_number(crossing->lower),
                                                      json_number(crossing->upper)}}}
                                  : json(nullptr);
  }
  json effective = {{"records", paths},
                    {"attempts", json::array()},
                    {"thresholds", json::array()}};
  for (const RecordSet& s : sets) effective["attempts"].push_back(s.n_attempts);
  for (double g : *thresholds) effective["thresholds"].push_back(exact(g));
  if (tail) {
    effective["tail"] = {{"lo", exact((*tail)[0])}, {"hi", exact((*tail)[1])},
                         {"extend", tail_extend}};
  }

  if (opts.format == "csv" && out_dir.empty()) {
    if (curves.size() != 1) throw ConfigError("csv to stdout needs a single records file");
    SweepCurve emitted = curves.front();
    write_curve_csv(out, emitted);
  } else {
    emit(out_dir, "gap_sweep.json",
         envelope("gap-sweep", effective, std::move(result)).dump(2) + "\n", out);
  }
  if (!any_defined) {
    err << "warning: no kept records at any threshold\n";
    return kEmptyResult;
  }
  return kOk;
}

// ---------------------------------------------------------------- layout --

int cmd_layout(const Options& opts, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(opts.config_path);
  const std::string ctx = "layout";
  check_keys(cfg, {"builtin", "layout", "stage", "pack", "emit_definition"}, "layout config");
  const std::string layout_path = opts.layout.empty() ? get_string(cfg, "layout", "", ctx)
                                                      : opts.layout;
  std::string builtin = opts.builtin.empty() ? get_string(cfg, "builtin", "", ctx)
                                             : opts.builtin;
  const std::string stage_name = opts.stage.empty() ? get_string(cfg, "stage", "", ctx)
                                                    : opts.stage;
  std::optional<std::size_t> pack = opts.pack;
  if (!pack && cfg.contains("pack")) pack = get_uint(cfg, "pack", 0, ctx);
  const bool emit_definition = opts.emit_definition || get_bool(cfg, "emit_definition", false, ctx);
  if (opts.format != "json") throw ConfigError("layout only emits json");
  if (layout_path.empty() && builtin.empty()) builtin = "canonical";
  if (!layout_path.empty() && !builtin.empty()) {
    throw ConfigError("layout takes --layout or --builtin, not both");
  }
  if (!builtin.empty() && builtin != "canonical") {
    throw ConfigError("unknown builtin layout '" + builtin + "'");
  }
  std::optional<Stage> stage;
  if (!stage_name.empty()) {
    stage = parse_stage(stage_name);
    if (!stage) throw ConfigError("unknown stage '" + stage_name + "'");
  }
  if (!layout_path.empty()) require_readable(layout_path);
  const std::string out_dir = resolve_out_dir(opts);
  prepare_out_dir(out_dir);

  PatchLayout layout;
  if (!builtin.empty()) {
    layout = canonical_layout(stage.value_or(Stage::Cultivation));
  } else {
    LayoutDefinition def = read_layout_definition(layout_path);
    if (stage) def.stage = stage;
    if (!def.patch) def.patch = canonical_patch();
    try {
      if (pack) {
        layout.patch = *def.patch;
        layout.stage = def.stage.value_or(def.site_footprint().reference().stage);
      } else {
        layout = def.to_layout();
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(layout_path, 0, e.what());
    }
    if (pack) {
      const SiteFootprint fp = def.site_footprint();
      layout = pack_sites(layout.patch, fp, *pack, layout.stage).layout;
    }
  }
  if (pack && !builtin.empty()) {
    layout = pack_sites(layout.patch, canonical_site_footprint(), *pack, layout.stage).layout;
  }
  if (layout.sites.empty() && !pack) throw ConfigError("layout has no sites to validate");

  if (emit_definition) {
    emit(out_dir, "layout.txt", format_layout_definition(layout), out);
    return kOk;
  }

  const ValidationReport report = validate_layout(layout);
  json result = layout_report_json(layout, report);
  const std::string map = ascii_map(layout);
  json rows = json::array();
  std::istringstream ms(map);
  for (std::string line; std::getline(ms, line);) rows.push_back(line);
  result["map"] = rows;
  if (pack) {
    result["mode"] = "pack";
    result["k_max"] = *pack;
    result["placed"] = layout.sites.size();
  } else {
    result["mode"] = "validate";
  }
  json effective = {{"builtin", builtin.empty() ? json(nullptr) : json(builtin)},
                    {"layout", layout_path.empty() ? json(nullptr) : json(layout_path)},
                    {"stage", to_string(layout.stage)},
                    {"pack", pack ? json(*pack) : json(nullptr)}};
  emit(out_dir, "layout.json",
       envelope("layout", effective, std::move(result)).dump(2) + "\n", out);
  if (!out_dir.empty()) write_file(out_dir, "layout_map.txt", map);

  if (pack && layout.sites.empty()) {
    err << "warning: no placement possible\n";
    return kEmptyResult;
  }
  if (!report.valid()) {
    err << "layout violates " << (report.containment_ok ? "" : "containment ")
        << (report.nonoverlap_ok ? "" : "nonoverlap") << '\n';
    return kValidationFailed;
  }
  return kOk;
}

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 internal error, 2 configuration error,\n"
    "3 input-format error, 4 empty result, 5 I/O error,\n"
    "6 layout validation failed.\n"
    "MSMUX_OUT_DIR sets the output directory when --out is absent.";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Multiplexed cultivation postselection analytics and simulation",
               kToolName};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration");
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* analytic = app.add_subcommand("analytic", "Recompute discard/attempt tables");
  add_common(analytic);
  analytic->add_option("--preset", opts.preset, "Built-in table: table2 or table3");
  analytic->add_option("--input", opts.input, "CSV table of discards or attempts");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo shot simulation");
  add_common(simulate);
  simulate->add_option("--seed", opts.seed, "Override the config seed");
  simulate->add_option("--threads", opts.threads, "Worker threads (0 = all cores)");

  CLI::App* gap = app.add_subcommand("gap-sweep", "Gap-threshold acceptance sweep");
  add_common(gap);
  gap->add_option("--records", opts.records, "Record file (JSONL or CSV); repeat for crossing");
  gap->add_option("--attempts", opts.attempts, "Total attempts per records file");
  gap->add_option("--thresholds", opts.thresholds, "Comma-separated thresholds");
  gap->add_option("--grid", opts.grid, "Uniform grid lo:hi:step");
  gap->add_option("--tail", opts.tail, "Tail fit window lo:hi");

  CLI::App* layout = app.add_subcommand("layout", "Validate or pack site layouts");
  add_common(layout);
  layout->add_option("--layout", opts.layout, "Layout/footprint definition file");
  layout->add_option("--builtin", opts.builtin, "Built-in layout (canonical)");
  layout->add_option("--stage", opts.stage, "Growth stage: injection or cultivation");
  layout->add_option("--pack", opts.pack, "Greedy-pack up to K sites");
  layout->add_flag("--emit-definition", opts.emit_definition,
                   "Print the layout definition file instead of a report");

  for (CLI::App* sub : {analytic, simulate, gap, layout}) sub->footer(kExitCodeHelp);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (analytic->parsed()) return cmd_analytic(opts, out, err);
    if (simulate->parsed()) return cmd_simulate(opts, out, err);
    if (gap->parsed()) return cmd_gap_sweep(opts, out, err);
    if (layout->parsed()) return cmd_layout(opts, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputFormatError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace msmux::cli
