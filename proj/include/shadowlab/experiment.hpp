#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shadowlab/bodies.hpp"
#include "shadowlab/congruence.hpp"
#include "shadowlab/errors.hpp"
#include "shadowlab/estimators.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/random.hpp"
#include "shadowlab/report.hpp"
#include "shadowlab/strata.hpp"

#ifndef SHADOWLAB_VERSION
#define SHADOWLAB_VERSION "0.0.0"
#endif

namespace shadowlab {

inline constexpr const char* kVersion = SHADOWLAB_VERSION;
inline constexpr int kManifestVersion = 1;

struct SampleCounts {
  std::size_t outer = 20;
  std::size_t inner = 200;
  std::size_t chains = 1000;
  std::size_t haar = 1000;
  std::size_t bootstrap = 200;
};

struct Tolerances {
  double group = kGroupTol;
  double subspace = kSubspaceTol;
};

struct BodySpec {
  std::string name;  // builtin name, or empty when `file` is set
  BodyParams params;
  std::string file;
};

struct ExperimentConfig {
  BodySpec body;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  SampleCounts samples;
  std::vector<double> epsilon;
  std::optional<double> delta;  // absolute grid size
  double delta_relative = 0.05;  // used when delta is absent, times the circumradius
  Tolerances tolerances;
  std::string output_dir = "shadowlab-out";
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

inline void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_fail(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) config_fail("unknown key '" + it.key() + "' in " + where);
  }
}

inline std::uint64_t get_uint(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_fail(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::size_t get_count(const Json& obj, const std::string& key, const std::string& where) {
  const std::uint64_t v = get_uint(obj, key, where);
  if (v < 1) config_fail(where + "." + key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

inline int get_int(const Json& obj, const std::string& key, const std::string& where) {
  const std::uint64_t v = get_uint(obj, key, where);
  if (v > 1000000) config_fail(where + "." + key + " is too large");
  return static_cast<int>(v);
}

inline double get_positive(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_number()) config_fail(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) config_fail(where + "." + key + " must be positive and finite");
  return x;
}

}  // namespace detail

/// Parses the JSON configuration. Unknown keys are errors. Relative vertex-file
/// paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  check_keys(j, {"body", "m", "seed", "samples", "epsilon", "delta", "delta_relative", "tolerances", "output_dir"},
             "config");
  ExperimentConfig c;

  if (!j.contains("body")) config_fail("config.body is required");
  const Json& b = j.at("body");
  check_keys(b, {"name", "file", "n", "half_widths", "points", "seed", "sides", "height", "radius"}, "body");
  if (b.contains("file") == b.contains("name")) config_fail("body needs exactly one of 'name' or 'file'");
  if (b.contains("file")) {
    check_keys(b, {"file"}, "body (file)");
    if (!b.at("file").is_string()) config_fail("body.file must be a string");
    std::filesystem::path p = b.at("file").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (!std::filesystem::exists(p)) config_fail("vertex file does not exist: " + p.string());
    c.body.file = std::filesystem::absolute(p).lexically_normal().string();
    c.n = static_cast<int>(read_vertex_file(c.body.file).ambient_dim());
  } else {
    if (!b.at("name").is_string()) config_fail("body.name must be a string");
    c.body.name = b.at("name").get<std::string>();
    if (!b.contains("n")) config_fail("body.n is required for builtin bodies");
    c.body.params.n = get_int(b, "n", "body");
    if (b.contains("half_widths")) {
      if (!b.at("half_widths").is_array()) config_fail("body.half_widths must be an array");
      for (const Json& h : b.at("half_widths")) {
        if (!h.is_number()) config_fail("body.half_widths must hold numbers");
        c.body.params.half_widths.push_back(h.get<double>());
      }
    }
    if (b.contains("points")) c.body.params.points = static_cast<int>(get_count(b, "points", "body"));
    if (b.contains("seed")) c.body.params.seed = get_uint(b, "seed", "body");
    if (b.contains("sides")) c.body.params.sides = get_int(b, "sides", "body");
    if (b.contains("height")) c.body.params.height = get_positive(b, "height", "body");
    if (b.contains("radius")) c.body.params.radius = get_positive(b, "radius", "body");
    c.n = c.body.params.n;
  }
  if (c.n < 3) config_fail("body dimension n must be >= 3");

  c.m = j.contains("m") ? get_int(j, "m", "config") : c.n - 1;
  if (c.m < 2 || c.m > c.n - 1) config_fail("m must satisfy 2 <= m <= n - 1");
  if (j.contains("seed")) c.seed = get_uint(j, "seed", "config");

  if (j.contains("samples")) {
    const Json& s = j.at("samples");
    check_keys(s, {"outer", "inner", "chains", "haar", "bootstrap"}, "samples");
    if (s.contains("outer")) c.samples.outer = get_count(s, "outer", "samples");
    if (s.contains("inner")) c.samples.inner = get_count(s, "inner", "samples");
    if (s.contains("chains")) c.samples.chains = get_count(s, "chains", "samples");
    if (s.contains("haar")) c.samples.haar = get_count(s, "haar", "samples");
    if (s.contains("bootstrap")) c.samples.bootstrap = get_count(s, "bootstrap", "samples");
    if (c.samples.bootstrap < 2) config_fail("samples.bootstrap must be >= 2");
  }

  if (!j.contains("epsilon")) config_fail("config.epsilon is required");
  const Json& eps = j.at("epsilon");
  if (!eps.is_array() || eps.empty()) config_fail("config.epsilon must be a non-empty array");
  for (const Json& e : eps) {
    if (!e.is_number()) config_fail("config.epsilon must hold numbers");
    const double x = e.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) config_fail("epsilon values must be positive and finite");
    if (!c.epsilon.empty() && !(x < c.epsilon.back())) config_fail("epsilon grid must be strictly decreasing");
    c.epsilon.push_back(x);
  }

  if (j.contains("delta") && j.contains("delta_relative")) config_fail("give at most one of delta and delta_relative");
  if (j.contains("delta")) c.delta = get_positive(j, "delta", "config");
  if (j.contains("delta_relative")) c.delta_relative = get_positive(j, "delta_relative", "config");

  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    check_keys(t, {"group", "subspace"}, "tolerances");
    if (t.contains("group")) c.tolerances.group = get_positive(t, "group", "tolerances");
    if (t.contains("subspace")) c.tolerances.subspace = get_positive(t, "subspace", "tolerances");
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) config_fail("config.output_dir must be a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  return c;
}

/// Canonical JSON form; parse_config(config_to_json(c)) == c.
inline Json config_to_json(const ExperimentConfig& c) {
  Json body = Json::object();
  if (!c.body.file.empty()) {
    body["file"] = c.body.file;
  } else {
    const BodyParams& p = c.body.params;
    const std::string& name = c.body.name;
    body["name"] = name;
    body["n"] = p.n;
    if (!p.half_widths.empty()) body["half_widths"] = p.half_widths;
    if (p.points > 0) body["points"] = p.points;
    if (name == "random-hull" || name == "simplex-random") body["seed"] = p.seed;
    if (name == "prism-regular-polygon") {
      body["sides"] = p.sides;
      body["height"] = p.height;
    }
    if (name == "prism-regular-polygon" || name == "ball") body["radius"] = p.radius;
  }
  Json j = Json::object();
  j["body"] = body;
  j["m"] = c.m;
  j["seed"] = c.seed;
  j["samples"] = {{"outer", c.samples.outer},
                  {"inner", c.samples.inner},
                  {"chains", c.samples.chains},
                  {"haar", c.samples.haar},
                  {"bootstrap", c.samples.bootstrap}};
  j["epsilon"] = c.epsilon;
  if (c.delta) {
    j["delta"] = *c.delta;
  } else {
    j["delta_relative"] = c.delta_relative;
  }
  j["tolerances"] = {{"group", c.tolerances.group}, {"subspace", c.tolerances.subspace}};
  j["output_dir"] = c.output_dir;
  return j;
}

/// Reads a config file, or the config echoed inside a run manifest.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, "config is not valid JSON: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw Error(ErrorKind::ConfigError, "manifest has no config section");
    j = j.at("config");
  }
  return parse_config(j, path.parent_path());
}

inline std::string body_id(const BodySpec& b) {
  if (!b.file.empty()) return "file:" + std::filesystem::path(b.file).filename().string();
  const BodyParams& p = b.params;
  std::string id = b.name + "(n=" + std::to_string(p.n);
  if (b.name == "box") {
    id += ",half_widths=";
    for (std::size_t i = 0; i < p.half_widths.size(); ++i) id += (i ? ":" : "") + format_double(p.half_widths[i]);
  }
  if (b.name == "random-hull") id += ",points=" + std::to_string(p.points > 0 ? p.points : 2 * p.n);
  if (b.name == "random-hull" || b.name == "simplex-random") id += ",seed=" + std::to_string(p.seed);
  if (b.name == "prism-regular-polygon") {
    id += ",sides=" + std::to_string(p.sides) + ",height=" + format_double(p.height) + ",radius=" + format_double(p.radius);
  }
  if (b.name == "ball") id += ",radius=" + format_double(p.radius);
  return id + ")";
}

inline Body load_body(const BodySpec& b) {
  if (!b.file.empty()) return read_vertex_file(b.file);
  return generate_body(b.name, b.params);
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"sample", "project", "estimate-n", "bound", "mi", "dpi", "stratify", "full"};
  return names;
}

struct RunManifest {
  Json json;
  std::filesystem::path path;
  std::map<std::string, std::string> outputs;  // quantity group -> file path
};

namespace detail {

inline constexpr const char* kFiniteGroupDegenerate = "FINITE_GROUP_DEGENERATE";

struct RunContext {
  ExperimentConfig config;
  Body body;
  std::string id;
  double radius = 0.0;
  double delta = 0.0;
  RandomSource rng{0, 0};
  int workers = 1;
  std::filesystem::path out_dir;
  std::map<std::string, std::string> outputs;

  bool is_ball() const { return std::holds_alternative<Ball>(body); }
  const Polytope& polytope() const { return std::get<Polytope>(body); }
};

struct RecordFields {
  std::string quantity;
  std::optional<double> value;
  std::vector<std::string> flags;
  std::optional<Interval> ci;
  std::optional<std::size_t> n_samples;
  std::optional<double> epsilon;
  std::optional<double> delta;
};

inline Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

inline Json make_record(const RunContext& c, const RecordFields& f) {
  Json r = Json::object();
  r["quantity"] = f.quantity;
  r["value"] = f.value && std::isfinite(*f.value) ? Json(*f.value) : Json(nullptr);
  if (!f.flags.empty()) r["flag"] = f.flags;
  r["ci"] = f.ci ? Json::array({f.ci->lo, f.ci->hi}) : Json(nullptr);
  r["n_samples"] = f.n_samples ? Json(*f.n_samples) : Json(nullptr);
  r["epsilon"] = optional_number(f.epsilon);
  r["delta"] = optional_number(f.delta);
  r["seed"] = c.config.seed;
  r["body_id"] = c.id;
  return r;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (const auto& f : flags) s += (s.empty() ? "" : ";") + f;
  return s;
}

inline void emit_json(RunContext& c, const std::string& key, const std::string& file, const Json& j) {
  write_json_file(c.out_dir / file, j);
  c.outputs[key] = file;
}

inline void emit_csv(RunContext& c, const std::string& key, const std::string& file, const CsvTable& t) {
  write_text_file(c.out_dir / file, t.text());
  c.outputs[key] = file;
}

inline std::vector<std::string> polytope_flags(const RunContext& c) {
  return c.is_ball() ? std::vector<std::string>{} : std::vector<std::string>{kFiniteGroupDegenerate};
}

inline void run_sample(RunContext& c) {
  const std::size_t count = c.config.samples.haar;
  CsvTable t({"quantity", "index", "shadow_dim", "extreme_count", "circumradius", "diameter", "seed", "body_id"});
  if (c.is_ball()) {
    const double r = std::get<Ball>(c.body).radius;
    for (std::size_t i = 0; i < count; ++i) {
      t.add_row({std::string("haar_shadow"), std::uint64_t{i}, std::int64_t{c.config.n - 2}, std::string(""), r, 2.0 * r,
                 c.config.seed, c.id});
    }
  } else {
    std::vector<Polytope> shadows(count);
    parallel_for(count, c.workers, [&](std::size_t i) {
      shadows[i] = centered_extremes(haar_shadow(c.polytope(), c.rng.substream(streams::kHaarPlane, i)).body());
    });
    for (std::size_t i = 0; i < count; ++i) {
      t.add_row({std::string("haar_shadow"), std::uint64_t{i}, std::int64_t{c.config.n - 2},
                 static_cast<std::int64_t>(shadows[i].size()), circumradius(shadows[i]), diameter(shadows[i]),
                 c.config.seed, c.id});
    }
  }
  emit_csv(c, "samples", "samples.csv", t);
}

inline void run_project(RunContext& c) {
  const int n = c.config.n, m = c.config.m;
  CsvTable t({"quantity", "step", "dim", "extreme_count", "circumradius", "hausdorff_to_direct", "seed", "body_id"});
  if (c.is_ball()) {
    const double r = std::get<Ball>(c.body).radius;
    for (int i = 1; i <= m; ++i) {
      t.add_row({std::string("projection_chain"), std::int64_t{i}, std::int64_t{n - i}, std::string(""), r, 0.0,
                 c.config.seed, c.id});
    }
  } else {
    RandomSource r = c.rng.substream(streams::kChain, 0);
    const DirectionChain chain = sample_chain(r, n, m);
    const auto steps = project_chain(c.polytope(), chain);
    for (int i = 1; i <= m; ++i) {
      const EmbeddedBody& s = steps[static_cast<std::size_t>(i - 1)];
      const double dh = hausdorff(s.embed(), project_direct(c.polytope(), chain, static_cast<std::size_t>(i)).embed());
      t.add_row({std::string("projection_chain"), std::int64_t{i}, std::int64_t{s.dim()},
                 static_cast<std::int64_t>(s.body().size()), circumradius(centered_extremes(s.body())), dh,
                 c.config.seed, c.id});
    }
  }
  emit_csv(c, "projection_chain", "project.csv", t);
}

inline std::vector<ElogNEstimate> elog_sweep(const RunContext& c, std::span<const double> grid) {
  if (c.is_ball()) {
    std::vector<ElogNEstimate> out;
    for (double e : grid) out.push_back(estimate_ElogN(std::get<Ball>(c.body), e, c.config.samples.outer, c.config.samples.inner));
    return out;
  }
  return estimate_ElogN_sweep(c.polytope(), grid, c.config.samples.outer, c.config.samples.inner, c.rng, c.workers);
}

inline std::vector<std::string> elog_flags(const RunContext& c, const ElogNEstimate& e) {
  std::vector<std::string> flags;
  if (e.divergent) flags.push_back("DIVERGENT");
  for (auto& f : polytope_flags(c)) flags.push_back(f);
  return flags;
}

inline void run_estimate_n(RunContext& c) {
  const auto& grid = c.config.epsilon;
  std::vector<NEstimate> n_est;
  if (c.is_ball()) {
    for (double e : grid) n_est.push_back(estimate_N(std::get<Ball>(c.body), e, c.config.samples.inner));
  } else {
    const EmbeddedBody ref = haar_shadow(c.polytope(), c.rng.substream(streams::kOuterShadow, 0));
    n_est = estimate_N_sweep(c.polytope(), ref, grid, c.config.samples.inner,
                             c.rng.substream(streams::kInnerPlanes, 0), c.workers);
  }
  CsvTable nt({"quantity", "epsilon", "value", "ci_lo", "ci_hi", "hits", "n_samples", "seed", "body_id", "flag"});
  for (const NEstimate& e : n_est) {
    nt.add_row({std::string("n_hat_epsilon"), e.epsilon, e.fraction, e.wilson_ci.lo, e.wilson_ci.hi,
                std::uint64_t{e.hits}, std::uint64_t{e.n_samples}, c.config.seed, c.id, join_flags(polytope_flags(c))});
  }
  emit_csv(c, "n_hat_epsilon", "estimate_n.csv", nt);

  CsvTable lt({"quantity", "epsilon", "value", "ci_lo", "ci_hi", "outer", "inner", "seed", "body_id", "flag"});
  for (const ElogNEstimate& e : elog_sweep(c, grid)) {
    lt.add_row({std::string("e_log_n"), e.epsilon, e.value, e.ci.lo, e.ci.hi, std::uint64_t{e.outer},
                std::uint64_t{e.inner}, c.config.seed, c.id, join_flags(elog_flags(c, e))});
  }
  emit_csv(c, "e_log_n", "e_log_n.csv", lt);
}

inline void run_bound(RunContext& c) {
  const double eps = c.config.epsilon.back();
  const BoundReport r = evaluate_bound(c.body, eps, c.config.samples.outer, c.config.samples.inner,
                                       c.config.samples.chains, c.delta, c.rng, c.workers);
  const std::size_t pairs = r.e_log_n.outer * r.e_log_n.inner;
  std::vector<std::string> bound_flags = polytope_flags(c);
  if (r.e_log_n.divergent) bound_flags.insert(bound_flags.begin(), "INFINITE");
  Json records = Json::array();
  records.push_back(make_record(c, {.quantity = "theorem1_first_term", .value = r.first_term}));
  records.push_back(make_record(c, {.quantity = "e_log_n",
                                    .value = r.e_log_n.value,
                                    .flags = elog_flags(c, r.e_log_n),
                                    .ci = r.e_log_n.divergent ? std::nullopt : std::optional<Interval>(r.e_log_n.ci),
                                    .n_samples = pairs,
                                    .epsilon = eps}));
  records.push_back(make_record(c, {.quantity = "theorem1_bound",
                                    .value = r.bound,
                                    .flags = bound_flags,
                                    .n_samples = pairs,
                                    .epsilon = eps}));
  records.push_back(make_record(c, {.quantity = "mi_plugin_k1_k2",
                                    .value = r.mi_plugin.value,
                                    .n_samples = r.mi_plugin.n_samples,
                                    .delta = c.delta}));
  emit_json(c, "theorem1_bound", "bound.json", Json{{"records", records}});
}

inline void run_mi(RunContext& c) {
  const MIEstimate mi = estimate_conditional_mi(c.body, c.config.m, c.config.samples.chains, c.delta, c.rng, c.workers);
  Json rec = make_record(c, {.quantity = "mi_plugin_k1_km", .value = mi.value, .n_samples = mi.n_samples, .delta = c.delta});
  rec["m"] = c.config.m;
  rec["classes"] = {{"k1", mi.classes_x}, {"km", mi.classes_y}, {"joint", mi.classes_joint}};
  emit_json(c, "mi_plugin", "mi.json", Json{{"records", Json::array({rec})}});
}

inline void run_dpi(RunContext& c) {
  if (c.config.m < 3) throw Error(ErrorKind::ConfigError, "dpi needs m >= 3");
  const DpiReport r = validate_dpi(c.body, c.config.m, c.config.samples.chains, c.delta, c.rng, c.workers,
                                   c.config.samples.bootstrap);
  const std::size_t n = c.config.samples.chains;
  Json records = Json::array();
  records.push_back(make_record(c, {.quantity = "mi_plugin_k1_k2", .value = r.first_pair.value, .n_samples = n, .delta = c.delta}));
  Json last = make_record(c, {.quantity = "mi_plugin_k1_km", .value = r.last_pair.value, .n_samples = n, .delta = c.delta});
  last["m"] = r.m;
  records.push_back(last);
  Json check = make_record(c, {.quantity = "proposition1_dpi",
                               .value = r.difference,
                               .flags = {r.pass ? "PASS" : "FAIL"},
                               .ci = Interval{r.difference - 2.0 * r.stderr_diff, r.difference + 2.0 * r.stderr_diff},
                               .n_samples = n,
                               .delta = c.delta});
  check["m"] = r.m;
  check["stderr"] = r.stderr_diff;
  check["bootstrap"] = r.bootstrap;
  records.push_back(check);
  emit_json(c, "proposition1_dpi", "dpi.json", Json{{"records", records}});
}

inline void run_stratify(RunContext& c) {
  CsvTable t({"quantity", "class_index", "class_order", "v", "mu_hat", "count", "n_samples", "seed", "body_id"});
  LowerBound lb;
  StratReport rep;
  if (c.is_ball()) {
    rep = ball_strat_report(c.config.n);
    lb = theorem2_lower_bound(rep, StrataMode::AnalyticBall);
  } else {
    const SymmetryGroup g = symmetry_group(c.polytope(), c.config.tolerances.group);
    rep = stratify(g, c.config.n, c.config.samples.haar, c.rng, c.config.tolerances.subspace, c.workers);
    lb = theorem2_lower_bound(rep, StrataMode::Counting);
    for (std::size_t i = 0; i < rep.strata.size(); ++i) {
      const Stratum& s = rep.strata[i];
      t.add_row({std::string("stratum"), std::uint64_t{i}, std::uint64_t{s.class_rep.order()}, s.v, s.mu_hat,
                 std::uint64_t{s.count}, std::uint64_t{rep.n_samples}, c.config.seed, c.id});
    }
  }
  emit_csv(c, "strata", "strata.csv", t);
  std::vector<std::string> flags;
  if (lb.finite_group_degenerate) flags.push_back(kFiniteGroupDegenerate);
  Json rec = make_record(c, {.quantity = "theorem2_lower_bound",
                             .value = lb.value,
                             .flags = flags,
                             .n_samples = c.is_ball() ? std::nullopt : std::optional<std::size_t>(rep.n_samples)});
  rec["mode"] = lb.mode == StrataMode::Counting ? "counting" : "analytic-ball";
  rec["group_order"] = c.is_ball() ? Json(nullptr) : Json(rep.group_order);
  emit_json(c, "theorem2_lower_bound", "theorem2.json", Json{{"records", Json::array({rec})}});
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Runs one subcommand and writes its outputs plus manifest.json into the
/// output directory.
inline RunManifest run(const ExperimentConfig& config, const std::string& subcommand, int workers = 1) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    throw Error(ErrorKind::ConfigError, "unknown subcommand '" + subcommand + "'");
  }
  if (workers < 1) throw Error(ErrorKind::ConfigError, "worker count must be >= 1");
  if (subcommand == "dpi" && config.m < 3) throw Error(ErrorKind::ConfigError, "dpi needs m >= 3");

  const auto start = std::chrono::steady_clock::now();
  detail::RunContext c;
  c.config = config;
  try {
    c.body = load_body(config.body);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BadParams || e.kind() == ErrorKind::UnknownBody) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
    throw;
  }
  if (body_dim(c.body) != config.n) throw Error(ErrorKind::ConfigError, "body dimension differs from n");
  c.id = body_id(config.body);
  c.radius = c.is_ball() ? std::get<Ball>(c.body).radius : circumradius(centered_extremes(c.polytope()));
  c.delta = config.delta ? *config.delta : config.delta_relative * c.radius;
  if (!(c.delta > 0.0)) throw Error(ErrorKind::ConfigError, "descriptor grid delta must be positive");
  c.rng = RandomSource(config.seed, 0);
  c.workers = workers;
  c.out_dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec || !std::filesystem::is_directory(c.out_dir)) {
    throw Error(ErrorKind::IoError, "cannot create output directory " + c.out_dir.string());
  }

  const bool all = subcommand == "full";
  if (all || subcommand == "sample") detail::run_sample(c);
  if (all || subcommand == "project") detail::run_project(c);
  if (all || subcommand == "estimate-n") detail::run_estimate_n(c);
  if (all || subcommand == "bound") detail::run_bound(c);
  if (all || subcommand == "mi") detail::run_mi(c);
  if ((all && config.m >= 3) || subcommand == "dpi") detail::run_dpi(c);
  if (all || subcommand == "stratify") detail::run_stratify(c);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunManifest m;
  m.outputs = c.outputs;
  Json outputs = Json::object();
  for (const auto& [k, v] : c.outputs) outputs[k] = v;
  m.json = Json::object();
  m.json["manifest_version"] = kManifestVersion;
  m.json["tool"] = "shadowlab";
  m.json["version"] = kVersion;
  m.json["subcommand"] = subcommand;
  m.json["seed"] = config.seed;
  m.json["workers"] = workers;
  m.json["body_id"] = c.id;
  m.json["delta"] = c.delta;
  m.json["config"] = config_to_json(config);
  m.json["outputs"] = outputs;
  m.json["substreams"] = {{"haar_plane", streams::kHaarPlane}, {"outer_shadow", streams::kOuterShadow},
                          {"inner_planes", streams::kInnerPlanes}, {"chain", streams::kChain},
                          {"bootstrap", streams::kBootstrap},     {"strata", streams::kStrata},
                          {"body", streams::kBody}};
  if (all && config.m < 3) m.json["skipped"] = Json::array({"dpi"});
  m.json["started_utc"] = detail::utc_timestamp();
  m.json["wall_clock_seconds"] = seconds;
  m.path = c.out_dir / "manifest.json";
  write_json_file(m.path, m.json);
  return m;
}

/// Process exit code for an error kind.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return 3;
    case ErrorKind::IoError: return 4;
    case ErrorKind::ConfigError:
    case ErrorKind::BadParams:
    case ErrorKind::UnknownBody:
    case ErrorKind::DomainError:
    case ErrorKind::DimensionError:
    case ErrorKind::ModeUnsupported: return 2;
    default: return 1;
  }
}

inline Json error_json(ErrorKind kind, const std::string& message) {
  return Json{{"error", to_string(kind)}, {"message", message}, {"exit_code", exit_code_for(kind)}};
}

}  // namespace shadowlab
