#pragma once

#include "parakon/cli/toml.hpp"
#include "parakon/errors.hpp"
#include "parakon/geometry.hpp"
#include "parakon/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace parakon::cli {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Closest candidate, or empty when nothing is within about half the word length.
inline std::string nearest(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_d > std::max<std::size_t>(3, (word.size() + 1) / 2 + 1)) return "";
  return best;
}

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  std::string operator_text = "laplacian";
  std::string source_text = "constant:1";
  std::vector<std::string> domains = {"interval:0,1"};
  double lambda = 0.5;

  double p = 0.5;
  double alpha = 0.5;
  std::optional<double> k;  ///< empty: default_k

  double h = 1.0 / 128.0;
  std::optional<double> dt;
  double T = 2.0;
  std::optional<double> output_dt;
  bool steady_stop = false;

  std::size_t concavity_pairs = 2000;
  int convergence_levels = 3;
  double convergence_T = 0.1;
  int growth_j_min = 3;
  int growth_j_max = 7;

  std::vector<std::string> audit_operators = {"laplacian", "qlap:3", "pucci-:1,2"};
  std::vector<std::string> audit_controls = {"pucci+:1,2"};
  std::size_t audit_samples = 10000;
  std::vector<std::string> semilinear_pass = {"constant:1"};
  std::vector<std::string> semilinear_fail = {"power-r:1,2"};

  std::vector<double> table_p = {-1.0, 0.3, 0.5};
  std::vector<double> table_alpha = {0.4, 0.5, 1.0};

  /// Where relative file references resolve; the config file's directory.
  std::filesystem::path base_dir = ".";
  std::string source_name = "<defaults>";
  /// Line of each key that came from a file, for diagnostics.
  std::map<std::string, int> lines;

  std::string where(const std::string& key) const {
    auto it = lines.find(key);
    return source_name + (it == lines.end() ? "" : ":" + std::to_string(it->second)) + ": " + key;
  }
};

/// Built-in settings of each experiment kind.
inline ExperimentConfig defaults_for(const std::string& kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (kind == "heat-2d" || kind == "qlap-2d" || kind == "pucci-2d") {
    c.domains = {"square"};
    c.h = 1.0 / 32.0;
    c.T = 1.0;
    if (kind == "qlap-2d") c.operator_text = "qlap:3";
    if (kind == "pucci-2d") c.operator_text = "pucci-:1,2";
  } else if (kind == "porous-1d") {
    c.operator_text = "porous:2";
    c.h = 1.0 / 64.0;
    c.T = 1.0;
  } else if (kind == "minkowski-pair") {
    c.domains = {"interval:0,1", "interval:0,1"};
    c.h = 1.0 / 32.0;
    c.T = 0.5;
  } else if (kind == "h2-audit") {
    c.operator_text = "laplacian";
    c.source_text = "zero";
    c.domains = {"square"};
  } else if (kind == "h1-table") {
    c.operator_text = "porous:2";
  }
  return c;
}

namespace detail {

using Setter = std::function<void(ExperimentConfig&, const toml::Value&, const std::string& key)>;

struct KeySpec {
  std::string key;
  std::string type;
  std::string doc;
  Setter set;
};

[[noreturn]] inline void type_fail(const ExperimentConfig& c, const std::string& key, const toml::Value& v,
                                   const std::string& want) {
  throw usage_error(c.where(key) + ": expected " + want + ", found " + v.type_name());
}

inline double as_number(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  if (v.type != toml::Value::Type::number) type_fail(c, key, v, "a number");
  return v.num;
}

inline long long as_integer(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  if (v.type != toml::Value::Type::number || !v.integral) type_fail(c, key, v, "an integer");
  return static_cast<long long>(v.num);
}

inline std::size_t as_count(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  const long long n = as_integer(c, v, key);
  if (n < 1) throw usage_error(c.where(key) + ": must be at least 1");
  return static_cast<std::size_t>(n);
}

inline std::string as_string(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  if (v.type != toml::Value::Type::string) type_fail(c, key, v, "a string");
  return v.str;
}

inline std::optional<double> number_or_auto(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  if (v.type == toml::Value::Type::string) {
    if (v.str == "auto") return std::nullopt;
    throw usage_error(c.where(key) + ": expected a number or \"auto\", found \"" + v.str + "\"");
  }
  return as_number(c, v, key);
}

inline std::vector<std::string> string_list(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  if (v.type != toml::Value::Type::array) type_fail(c, key, v, "an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v.items) out.push_back(as_string(c, item, key));
  return out;
}

inline std::vector<double> number_list(const ExperimentConfig& c, const toml::Value& v, const std::string& key) {
  if (v.type != toml::Value::Type::array) type_fail(c, key, v, "an array of numbers");
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(as_number(c, item, key));
  if (out.empty()) throw usage_error(c.where(key) + ": list is empty");
  return out;
}

}  // namespace detail

/// Every accepted key with its type and a one-line description.
inline const std::vector<detail::KeySpec>& config_schema() {
  using detail::KeySpec;
  using C = ExperimentConfig;
  using V = toml::Value;
  using S = std::string;
  static const std::vector<KeySpec> schema = {
      {"kind", "string", "experiment kind (see `parakon list`)",
       [](C& c, const V& v, const S& k) { c.kind = detail::as_string(c, v, k); }},
      {"seed", "integer", "seed of every random draw",
       [](C& c, const V& v, const S& k) {
         const long long s = detail::as_integer(c, v, k);
         if (s < 0) throw usage_error(c.where(k) + ": seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"out", "string", "output root; artifacts go to <out>/<kind>/",
       [](C& c, const V& v, const S& k) { c.out_dir = detail::as_string(c, v, k); }},
      {"problem.operator", "string", "operator: laplacian, qlap:q, pucci-:a,b, pucci+:a,b, porous:s, finsler:w=.., ...",
       [](C& c, const V& v, const S& k) { c.operator_text = detail::as_string(c, v, k); }},
      {"problem.source", "string", "source: zero, constant:c, linear-r:c, power-r:c,e, space:poly(c0,..)",
       [](C& c, const V& v, const S& k) { c.source_text = detail::as_string(c, v, k); }},
      {"problem.domain", "string", "domain: interval:a,b, square, rect:x0,y0,x1,y1, polygon:x,y;.., file:path",
       [](C& c, const V& v, const S& k) {
         if (c.lines.count("problem.domains")) throw usage_error(c.where(k) + ": set either domain or domains");
         c.domains = {detail::as_string(c, v, k)};
       }},
      {"problem.domains", "string array", "two domains for minkowski-pair",
       [](C& c, const V& v, const S& k) {
         if (c.lines.count("problem.domain")) throw usage_error(c.where(k) + ": set either domain or domains");
         c.domains = detail::string_list(c, v, k);
       }},
      {"problem.lambda", "number", "weight of the first domain in minkowski-pair and h2-audit",
       [](C& c, const V& v, const S& k) { c.lambda = detail::as_number(c, v, k); }},
      {"transform.p", "number", "value exponent, p <= 1",
       [](C& c, const V& v, const S& k) { c.p = detail::as_number(c, v, k); }},
      {"transform.alpha", "number", "time exponent, 0 < alpha <= 1",
       [](C& c, const V& v, const S& k) { c.alpha = detail::as_number(c, v, k); }},
      {"transform.k", "number or \"auto\"", "weight exponent r^k; auto picks the catalog value",
       [](C& c, const V& v, const S& k) { c.k = detail::number_or_auto(c, v, k); }},
      {"grid.h", "number", "spatial step",
       [](C& c, const V& v, const S& k) { c.h = detail::as_number(c, v, k); }},
      {"grid.dt", "number or \"auto\"", "time step; auto uses the stability limit",
       [](C& c, const V& v, const S& k) { c.dt = detail::number_or_auto(c, v, k); }},
      {"grid.T", "number", "final time",
       [](C& c, const V& v, const S& k) { c.T = detail::as_number(c, v, k); }},
      {"grid.output_dt", "number or \"auto\"", "spacing of stored slices; auto is T/50",
       [](C& c, const V& v, const S& k) { c.output_dt = detail::number_or_auto(c, v, k); }},
      {"grid.steady_stop", "boolean", "stop once the solution is steady",
       [](C& c, const V& v, const S& k) {
         if (v.type != toml::Value::Type::boolean) detail::type_fail(c, k, v, "a boolean");
         c.steady_stop = v.b;
       }},
      {"checks.concavity_pairs", "integer", "sampled point pairs of the concavity check",
       [](C& c, const V& v, const S& k) { c.concavity_pairs = detail::as_count(c, v, k); }},
      {"checks.convergence_levels", "integer", "grids of the self-convergence study (torsion-1d), ending at grid.h",
       [](C& c, const V& v, const S& k) {
         const long long n = detail::as_integer(c, v, k);
         if (n < 3 || n > 6) throw usage_error(c.where(k) + ": must lie in 3..6");
         c.convergence_levels = static_cast<int>(n);
       }},
      {"checks.convergence_T", "number", "final time of the self-convergence study",
       [](C& c, const V& v, const S& k) { c.convergence_T = detail::as_number(c, v, k); }},
      {"checks.growth_j_min", "integer", "smallest j in rho = 2^-j for boundary growth",
       [](C& c, const V& v, const S& k) { c.growth_j_min = static_cast<int>(detail::as_integer(c, v, k)); }},
      {"checks.growth_j_max", "integer", "largest j in rho = 2^-j for boundary growth",
       [](C& c, const V& v, const S& k) { c.growth_j_max = static_cast<int>(detail::as_integer(c, v, k)); }},
      {"audit.operators", "string array", "operators expected to satisfy the structure condition",
       [](C& c, const V& v, const S& k) { c.audit_operators = detail::string_list(c, v, k); }},
      {"audit.controls", "string array", "operators expected to violate it (negative controls)",
       [](C& c, const V& v, const S& k) { c.audit_controls = detail::string_list(c, v, k); }},
      {"audit.samples", "integer", "samples per audited operator",
       [](C& c, const V& v, const S& k) { c.audit_samples = detail::as_count(c, v, k); }},
      {"audit.semilinear_pass", "string array", "sources expected to pass the semilinear condition",
       [](C& c, const V& v, const S& k) { c.semilinear_pass = detail::string_list(c, v, k); }},
      {"audit.semilinear_fail", "string array", "sources expected to be flagged",
       [](C& c, const V& v, const S& k) { c.semilinear_fail = detail::string_list(c, v, k); }},
      {"table.p", "number array", "p values of h1-table",
       [](C& c, const V& v, const S& k) { c.table_p = detail::number_list(c, v, k); }},
      {"table.alpha", "number array", "alpha values of h1-table",
       [](C& c, const V& v, const S& k) { c.table_alpha = detail::number_list(c, v, k); }},
  };
  return schema;
}

/// "interval:a,b", "square", "rect:x0,y0,x1,y1", "polygon:x,y;x,y;...",
/// "file:path" (one "x y" vertex per line). Non-convex vertex lists are
/// rasterized at `h`.
inline Domain parse_domain(const std::string& text, const std::filesystem::path& base_dir, double h) {
  auto [head, args] = parakon::detail::split_head(text);
  if (head == "interval") {
    auto v = parakon::detail::parse_number_list(args, "interval");
    if (v.size() != 2) throw usage_error("interval takes a,b");
    return Domain::interval(v[0], v[1]);
  }
  if (head == "square" && args.empty()) return Domain::unit_square();
  if (head == "rect") {
    auto v = parakon::detail::parse_number_list(args, "rect");
    if (v.size() != 4) throw usage_error("rect takes x0,y0,x1,y1");
    return Domain::rectangle(v[0], v[1], v[2], v[3]);
  }
  if (head == "polygon") {
    std::vector<Point2> pts;
    std::string item;
    std::istringstream in(args);
    while (std::getline(in, item, ';')) {
      auto v = parakon::detail::parse_number_list(item, "polygon vertex");
      if (v.size() != 2) throw usage_error("polygon vertex needs x,y");
      pts.emplace_back(v[0], v[1]);
    }
    if (pts.size() < 3) throw usage_error("polygon needs at least three vertices");
    return Domain::from_vertices(std::move(pts), h);
  }
  if (head == "file") {
    std::filesystem::path path(args);
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw usage_error("domain file '" + path.string() + "' not found");
    return Domain::from_vertices(read_polygon(in), h);
  }
  throw usage_error("unknown domain '" + text + "'");
}

/// Full range and reference check without running anything.
inline void validate(const ExperimentConfig& c, const std::vector<std::string>& known_kinds = {}) {
  auto fail = [&](const std::string& key, const std::string& msg) { throw usage_error(c.where(key) + ": " + msg); };
  if (c.kind.empty()) fail("kind", "missing experiment kind");
  if (!known_kinds.empty() && std::find(known_kinds.begin(), known_kinds.end(), c.kind) == known_kinds.end()) {
    const std::string s = nearest(c.kind, known_kinds);
    fail("kind", "unknown experiment '" + c.kind + "'" + (s.empty() ? "" : "; did you mean '" + s + "'?"));
  }
  auto check_p = [&](double p, const std::string& key) {
    if (!std::isfinite(p) || p > 1.0) fail(key, "out of range: need finite p <= 1, got " + std::to_string(p));
  };
  auto check_alpha = [&](double a, const std::string& key) {
    if (!(a > 0.0 && a <= 1.0)) fail(key, "out of range: need 0 < alpha <= 1, got " + std::to_string(a));
  };
  check_p(c.p, "transform.p");
  check_alpha(c.alpha, "transform.alpha");
  if (c.k && !std::isfinite(*c.k)) fail("transform.k", "must be finite or \"auto\"");
  if (!(c.h > 0.0 && c.h < 1.0)) fail("grid.h", "need 0 < h < 1");
  if (!(c.T > 0.0 && std::isfinite(c.T))) fail("grid.T", "need T > 0");
  if (c.dt && !(*c.dt > 0.0)) fail("grid.dt", "need dt > 0");
  if (c.output_dt && !(*c.output_dt > 0.0 && *c.output_dt <= c.T)) fail("grid.output_dt", "need 0 < output_dt <= T");
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) fail("problem.lambda", "need 0 < lambda < 1");
  if (!(c.convergence_T > 0.0)) fail("checks.convergence_T", "need a positive time");
  if (c.growth_j_min < 1 || c.growth_j_max <= c.growth_j_min || c.growth_j_max > 20)
    fail("checks.growth_j_min", "need 1 <= j_min < j_max <= 20");
  for (double p : c.table_p) check_p(p, "table.p");
  for (double a : c.table_alpha) check_alpha(a, "table.alpha");

  auto guarded = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const usage_error& e) {
      fail(key, e.what());
    } catch (const domain_error& e) {
      fail(key, e.what());
    }
  };
  guarded("problem.source", [&] { parse_source(c.source_text); });
  guarded("problem.operator", [&] { parse_operator(c.operator_text); });
  const std::string dkey = c.lines.count("problem.domains") ? "problem.domains" : "problem.domain";
  if (c.domains.empty()) fail(dkey, "no domain given");
  if (c.kind == "minkowski-pair" && c.domains.size() != 2) fail(dkey, "minkowski-pair needs exactly two domains");
  if (c.kind != "minkowski-pair" && c.domains.size() != 1) fail(dkey, "this experiment takes a single domain");
  for (const auto& d : c.domains) guarded(dkey, [&] { parse_domain(d, c.base_dir, c.h); });
  for (const auto& s : c.audit_operators) guarded("audit.operators", [&] { parse_operator(s); });
  for (const auto& s : c.audit_controls) guarded("audit.controls", [&] { parse_operator(s); });
  for (const auto& s : c.semilinear_pass) guarded("audit.semilinear_pass", [&] { parse_source(s); });
  for (const auto& s : c.semilinear_fail) guarded("audit.semilinear_fail", [&] { parse_source(s); });
}

/// Parses a config document. The kind comes from the file, else from
/// `fallback_kind`; defaults of that kind fill unset keys.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source_name,
                                     const std::filesystem::path& base_dir, const std::string& fallback_kind = "") {
  const toml::Document doc = toml::parse(text, source_name);
  std::string kind = fallback_kind;
  if (const auto* v = doc.find("kind")) {
    if (v->type != toml::Value::Type::string)
      throw usage_error(source_name + ":" + std::to_string(v->line) + ": kind: expected a string");
    kind = v->str;
  }
  ExperimentConfig c = defaults_for(kind);
  c.source_name = source_name;
  c.base_dir = base_dir;

  const auto& schema = config_schema();
  std::vector<std::string> names;
  for (const auto& s : schema) names.push_back(s.key);
  for (const auto& key : doc.keys()) {
    const toml::Value& v = *doc.find(key);
    auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& s) { return s.key == key; });
    if (it == schema.end()) {
      const std::string s = nearest(key, names);
      throw usage_error(source_name + ":" + std::to_string(v.line) + ": unknown key '" + key + "'" +
                        (s.empty() ? "" : "; did you mean '" + s + "'?"));
    }
    c.lines[key] = v.line;
    it->set(c, v, key);
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const std::string& fallback_kind = "") {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path(), fallback_kind);
}

}  // namespace parakon::cli
