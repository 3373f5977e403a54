#pragma once

#include "parakon/cli/config.hpp"
#include "parakon/cli/svg.hpp"
#include "parakon/envelope.hpp"
#include "parakon/hypothesis.hpp"
#include "parakon/solver.hpp"
#include "parakon/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace parakon::cli {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Ordered key=value lines.
class Summary {
 public:
  void add(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_)
      if (k == key) {
        v = value;
        return;
      }
    entries_.emplace_back(key, value);
  }
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }
  void add(const std::string& key, double value) { add(key, format_number(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return v;
    return std::nullopt;
  }
  double number(const std::string& key) const {
    auto v = get(key);
    if (!v) throw usage_error("summary has no key '" + key + "'");
    return std::stod(*v);
  }
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  }
  static Summary read(std::istream& in) {
    Summary s;
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      s.add(line.substr(0, eq), line.substr(eq + 1));
    }
    return s;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct ExperimentResult {
  std::string kind;
  std::filesystem::path dir;
  Summary summary;
  std::vector<std::string> failed_checks;
  std::vector<std::string> files;

  bool passed() const noexcept { return failed_checks.empty(); }
};

/// Shared state of one run: output directory, summary and threshold checks.
class RunContext {
 public:
  RunContext(const ExperimentConfig& cfg, std::filesystem::path dir) : cfg_(cfg) {
    result_.kind = cfg.kind;
    result_.dir = std::move(dir);
  }

  const ExperimentConfig& config() const noexcept { return cfg_; }
  Summary& summary() noexcept { return result_.summary; }

  template <class Fn>
  void write(const std::string& name, Fn&& fn) {
    std::ofstream out(result_.dir / name, std::ios::binary);
    if (!out) throw usage_error("cannot write " + (result_.dir / name).string());
    fn(out);
    result_.files.push_back(name);
  }

  /// Records `<name>_pass` and remembers failures.
  void check(const std::string& name, bool ok) {
    result_.summary.add(name + "_pass", ok);
    if (!ok) result_.failed_checks.push_back(name);
  }

  ExperimentResult finish() {
    std::string failed;
    for (const auto& f : result_.failed_checks) failed += (failed.empty() ? "" : ",") + f;
    result_.summary.add("status", result_.failed_checks.empty() ? "pass" : "fail");
    result_.summary.add("failed_checks", failed);
    write("summary.txt", [&](std::ostream& out) { result_.summary.write(out); });
    return std::move(result_);
  }

 private:
  const ExperimentConfig& cfg_;
  ExperimentResult result_;
};

namespace detail {

inline double x_radius(const std::vector<Domain>& ds) {
  double r = 0.0;
  for (const auto& d : ds) {
    auto [lo, hi] = d.bounding_box();
    r = std::max({r, lo.norm(), hi.norm()});
  }
  return std::max(r, 1.0);
}

struct Problem {
  std::vector<Domain> domains;
  OperatorSpec spec;
  Source source;
};

inline Problem load_problem(const ExperimentConfig& c, int want_dim) {
  std::vector<Domain> ds;
  for (const auto& d : c.domains) ds.push_back(parse_domain(d, c.base_dir, c.h));
  for (const auto& d : ds)
    if (want_dim && d.dim() != want_dim)
      throw usage_error(c.where("problem.domain") + ": " + c.kind + " needs a " + std::to_string(want_dim) +
                        "D domain");
  Source f = parse_source(c.source_text);
  OperatorSpec spec = parse_operator(c.operator_text, f, x_radius(ds));
  return {std::move(ds), std::move(spec), std::move(f)};
}

inline SchemeConfig scheme_config(const ExperimentConfig& c) {
  SchemeConfig s;
  s.h = c.h;
  s.dt = c.dt;
  s.T = c.T;
  s.output_dt = c.output_dt ? *c.output_dt : c.T / 50.0;
  s.stop_at_steady = c.steady_stop;
  return s;
}

/// c when the source is the constant c, for the analytic oracles.
inline std::optional<double> constant_source(const std::string& text) {
  auto [head, args] = parakon::detail::split_head(text);
  if (head == "zero" && args.empty()) return 0.0;
  if (head != "constant") return std::nullopt;
  return parakon::detail::parse_number_list(args, "constant source").at(0);
}

inline double k_for(const ExperimentConfig& c, const OperatorSpec& spec, double p) {
  return c.k ? *c.k : default_k(spec, p);
}

inline void monotonicity(RunContext& ctx, const GridFunction& u) {
  const auto m = check_time_monotonicity(u);
  ctx.summary().add("monotonicity_min", m.min_difference);
  ctx.summary().add("monotonicity_slice", m.slice);
  ctx.check("monotonicity", m.min_difference >= -1e-12);
}

inline void concavity(RunContext& ctx, const GridFunction& u, const OperatorSpec& spec) {
  const auto& c = ctx.config();
  Rng rng(c.seed);
  ConcavityOptions opt;
  opt.pair_count = c.concavity_pairs;
  const auto rep = concavity_deficit(u, c.p, c.alpha, rng, opt);
  const double k = k_for(c, spec, c.p);
  const bool h1 = check_H1(c.p, c.alpha, k);
  auto& s = ctx.summary();
  s.add("k", k);
  s.add("h1_satisfied", h1);
  s.add("concavity_min_deficit", rep.min_deficit);
  s.add("concavity_tolerance", rep.tolerance);
  s.add("lipschitz", rep.lipschitz);
  s.add("concavity_samples", rep.samples);
  s.add("concavity_skipped", rep.skipped);
  if (rep.witness)
    s.add("concavity_witness", "x1=" + to_string(rep.witness->x1) + " t1=" + format_number(rep.witness->t1) +
                                   " x2=" + to_string(rep.witness->x2) + " t2=" + format_number(rep.witness->t2) +
                                   " lambda=" + format_number(rep.witness->lambda));
  // The theorem needs (H1); outside it the deficit is only reported.
  if (h1) ctx.check("concavity", rep.passed());
}

inline void write_slice_svg(RunContext& ctx, const GridFunction& u, std::size_t n, const std::string& name,
                            const std::string& title) {
  const Raster& r = u.raster();
  if (r.dim == 1) {
    svg::Series s{"u", {}, {}};
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.kind[k] == NodeKind::outside) continue;
      s.x.push_back(r.position(k)(0));
      s.y.push_back(u.at(n, k));
    }
    ctx.write(name, [&](std::ostream& o) { svg::line_plot(o, {title, "x", "u"}, {s}); });
    return;
  }
  svg::Grid g{r.nx, r.ny, r.origin.x(), r.origin.x() + r.h * (r.nx - 1), r.origin.y(),
              r.origin.y() + r.h * (r.ny - 1), std::vector<double>(r.size(), std::nan(""))};
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r.kind[k] != NodeKind::outside) g.values[k] = u.at(n, k);
  ctx.write(name, [&](std::ostream& o) { svg::heatmap(o, {title, "x", "y"}, g); });
}

inline void write_max_in_time(RunContext& ctx, const GridFunction& u) {
  svg::Series s{"max u", {}, {}};
  for (std::size_t n = 0; n < u.nt(); ++n) {
    double m = 0.0;
    for (double v : u.slice(n)) m = std::max(m, v);
    s.x.push_back(u.time(n));
    s.y.push_back(m);
  }
  ctx.write("max_in_time.csv", [&](std::ostream& o) {
    o << "t,max_u\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << format_number(s.x[i]) << ',' << format_number(s.y[i]) << '\n';
  });
  ctx.write("max_in_time.svg", [&](std::ostream& o) { svg::line_plot(o, {"max of u over time", "t", "max u"}, {s}); });
}

/// Sup distance on the coarse nodes between the final slices.
inline double final_distance(const GridFunction& coarse, const GridFunction& fine) {
  double e = 0.0;
  const Raster& r = coarse.raster();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r.kind[k] == NodeKind::outside) continue;
    auto v = fine.interpolate_space(fine.nt() - 1, r.position(k));
    if (v) e = std::max(e, std::abs(coarse.at(coarse.nt() - 1, k) - *v));
  }
  return e;
}

// ---------------------------------------------------------------------------

inline void run_torsion(RunContext& ctx) {
  const auto& c = ctx.config();
  auto& s = ctx.summary();
  const Problem P = load_problem(c, 1);
  const Domain& omega = P.domains.front();
  const GridFunction u = solve(P.spec, omega, scheme_config(c));
  const std::size_t last = u.nt() - 1;
  s.add("final_time", u.final_time());
  s.add("steady_reached", u.steady_reached());

  // Steady state x(1-x)/2 rescaled to [a, b] and source c.
  const auto fc = constant_source(c.source_text);
  const bool oracle = P.spec.kind() == OperatorKind::laplacian && fc;
  const auto& iv = omega.as_interval();
  auto exact = [&](double x) { return oracle ? *fc * (x - iv.a) * (iv.b - x) / 2.0 : std::nan(""); };
  double err = 0.0;
  const Raster& r = u.raster();
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r.kind[k] != NodeKind::outside) err = std::max(err, std::abs(u.at(last, k) - exact(r.position(k)(0))));
  s.add("analytic_oracle", oracle);
  if (oracle) {
    s.add("sup_error", err);
    ctx.check("sup_error", err <= 1e-3);
  }
  ctx.write("profile.csv", [&](std::ostream& o) {
    o << "x,u,exact\n";
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.kind[k] != NodeKind::outside)
        o << format_number(r.position(k)(0)) << ',' << format_number(u.at(last, k)) << ','
          << format_number(exact(r.position(k)(0))) << '\n';
  });
  {
    svg::Series num{"numerical", {}, {}}, ex{"x(1-x)/2", {}, {}};
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.kind[k] == NodeKind::outside) continue;
      num.x.push_back(r.position(k)(0));
      num.y.push_back(u.at(last, k));
      ex.x.push_back(r.position(k)(0));
      ex.y.push_back(exact(r.position(k)(0)));
    }
    std::vector<svg::Series> ss{num};
    if (oracle) ss.push_back(ex);
    ctx.write("profile.svg", [&](std::ostream& o) { svg::line_plot(o, {"final profile", "x", "u"}, ss); });
  }

  // Self-convergence on nested grids with Δt/h² fixed, compared at one time.
  std::vector<GridFunction> levels;
  std::vector<double> hs;
  for (int i = c.convergence_levels - 1; i >= 0; --i) {
    SchemeConfig sc;
    sc.h = c.h * std::ldexp(1.0, i);
    sc.dt = 0.4 * sc.h * sc.h;
    sc.T = c.convergence_T;
    sc.output_dt = c.convergence_T;
    sc.stop_at_steady = false;
    hs.push_back(sc.h);
    levels.push_back(solve(P.spec, omega, sc));
  }
  std::vector<double> diffs, orders;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) diffs.push_back(final_distance(levels[i], levels[i + 1]));
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) orders.push_back(std::log2(diffs[i] / diffs[i + 1]));
  const double order = *std::min_element(orders.begin(), orders.end());
  s.add("convergence_order", order);
  s.add("convergence_finest_diff", diffs.back());
  ctx.check("convergence_order", order >= 1.7);
  ctx.write("convergence.csv", [&](std::ostream& o) {
    o << "level,h,dt,diff_to_next,order\n";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      o << i << ',' << format_number(hs[i]) << ',' << format_number(0.4 * hs[i] * hs[i]) << ','
        << (i < diffs.size() ? format_number(diffs[i]) : "") << ',' << (i < orders.size() ? format_number(orders[i]) : "")
        << '\n';
    }
  });

  monotonicity(ctx, u);

  // Boundary growth at both endpoints on the last slice.
  std::vector<GrowthProbe> probes{make_probe(omega, Vec::Constant(1, iv.a), u.final_time()),
                                  make_probe(omega, Vec::Constant(1, iv.b), u.final_time())};
  std::vector<double> rhos;
  for (int j = c.growth_j_min; j <= c.growth_j_max; ++j) rhos.push_back(std::ldexp(1.0, -j));
  std::vector<std::pair<double, GrowthTable>> tables;
  if (c.p > 0.0 && c.p < 1.0) tables.emplace_back(c.p, check_boundary_growth(u, c.p, c.alpha, probes, rhos));
  tables.emplace_back(1.0, check_boundary_growth(u, 1.0, c.alpha, probes, rhos));
  for (const auto& [p, tab] : tables) {
    if (p < 1.0) {
      bool increasing = true;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto q = tab.ratios(i);
        for (std::size_t j = 0; j + 1 < q.size(); ++j) increasing = increasing && q[j + 1] > q[j];
      }
      s.add("growth_divergence", *std::min_element(tab.divergence.begin(), tab.divergence.end()));
      s.add("growth_increasing", increasing);
      ctx.check("growth_increasing", increasing);
    } else {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& row : tab.rows) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
      }
      s.add("growth_p1_min", lo);
      s.add("growth_p1_max", hi);
      s.add("growth_p1_spread", hi / lo);
      ctx.check("growth_p1_bounded", lo > 0.0 && hi / lo <= 1.5);
    }
  }
  ctx.write("growth.csv", [&](std::ostream& o) {
    o << "p,probe,x,rho,ratio\n";
    for (const auto& [p, tab] : tables)
      for (const auto& row : tab.rows)
        o << format_number(p) << ',' << row.probe << ',' << format_number(probes[row.probe].x(0)) << ','
          << format_number(row.rho) << ',' << format_number(row.ratio) << '\n';
  });
  {
    std::vector<svg::Series> ss;
    for (const auto& [p, tab] : tables)
      for (std::size_t i = 0; i < probes.size(); ++i) {
        svg::Series se{"p=" + format_number(p) + " x=" + format_number(probes[i].x(0)), {}, tab.ratios(i), true};
        for (double rho : rhos) se.x.push_back(-std::log2(rho));
        ss.push_back(std::move(se));
      }
    ctx.write("growth.svg", [&](std::ostream& o) {
      svg::line_plot(o, {"boundary growth u^p(x+rho*nu)/rho", "j (rho = 2^-j)", "ratio"}, ss);
    });
  }

  concavity(ctx, u, P.spec);
}

inline void run_field(RunContext& ctx, int dim) {
  const auto& c = ctx.config();
  const Problem P = load_problem(c, dim);
  const GridFunction u = solve(P.spec, P.domains.front(), scheme_config(c));
  ctx.summary().add("final_time", u.final_time());
  ctx.summary().add("steady_reached", u.steady_reached());
  ctx.summary().add("max_u", u.max_abs());
  ctx.write("final.csv", [&](std::ostream& o) { u.write_csv_slice(u.nt() - 1, o); });
  write_slice_svg(ctx, u, u.nt() - 1, "final.svg", "u at t = " + format_number(u.final_time()));
  write_max_in_time(ctx, u);
  monotonicity(ctx, u);
  concavity(ctx, u, P.spec);
}

inline void run_porous(RunContext& ctx) {
  const auto& c = ctx.config();
  auto& s = ctx.summary();
  const Problem P = load_problem(c, 1);
  if (P.spec.kind() != OperatorKind::porous_medium)
    throw usage_error(c.where("problem.operator") + ": porous-1d needs a porous:sigma operator");
  const GridFunction u = solve(P.spec, P.domains.front(), scheme_config(c));
  const double sigma = P.spec.sigma();
  const auto& iv = P.domains.front().as_interval();
  const auto fc = constant_source(c.source_text);
  const Raster& r = u.raster();
  const std::size_t last = u.nt() - 1;
  // u^σ lies below the steady torsion profile c(x-a)(b-x)/2 for zero data.
  auto bound = [&](double x) { return fc ? *fc * (x - iv.a) * (iv.b - x) / 2.0 : std::nan(""); };
  double excess = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < u.nt(); ++n)
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.kind[k] == NodeKind::interior)
        excess = std::max(excess, std::pow(u.at(n, k), sigma) - bound(r.position(k)(0)));
  s.add("final_time", u.final_time());
  s.add("sigma", sigma);
  if (fc) {
    s.add("bound_excess", excess);
    ctx.check("comparison_bound", excess <= 1e-3);
  }
  ctx.write("profile.csv", [&](std::ostream& o) {
    o << "x,u,u_pow_sigma,steady_bound\n";
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.kind[k] != NodeKind::outside) {
        const double x = r.position(k)(0);
        o << format_number(x) << ',' << format_number(u.at(last, k)) << ','
          << format_number(std::pow(u.at(last, k), sigma)) << ',' << format_number(bound(x)) << '\n';
      }
  });
  write_slice_svg(ctx, u, last, "profile.svg", "porous medium profile at t = " + format_number(u.final_time()));
  write_max_in_time(ctx, u);
  monotonicity(ctx, u);
  concavity(ctx, u, P.spec);
}

inline void run_minkowski(RunContext& ctx) {
  const auto& c = ctx.config();
  auto& s = ctx.summary();
  const Problem P = load_problem(c, 0);
  if (P.domains[0].dim() != P.domains[1].dim()) throw usage_error(c.where("problem.domains") + ": dimensions differ");
  SchemeConfig sc = scheme_config(c);
  sc.stop_at_steady = false;  // the envelope needs equal time grids
  const Weights lambda = Weights::pair(c.lambda);
  const Domain omega_l = minkowski_combination(P.domains, lambda);
  std::vector<GridFunction> us{solve(P.spec, P.domains[0], sc), solve(P.spec, P.domains[1], sc)};
  const GridFunction ul = solve(P.spec, omega_l, sc);
  EnvelopeOptions eo;
  eo.target = ul.raster();
  eo.threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  const EnvelopeField U = compute_U(us, P.domains, lambda, c.p, c.alpha, eo);
  const auto cmp = compare_envelope(U, ul);
  double L = 0.0;
  for (const auto& u : us) L = std::max(L, lipschitz_estimate(forward_transform(u, c.p, c.alpha)));
  const double tol = 5.0 * (c.h + ul.dt()) * L;
  const bool identical = c.domains[0] == c.domains[1];
  s.add("lambda", c.lambda);
  s.add("measure_lambda", omega_l.measure());
  s.add("max_excess", cmp.max_excess);
  s.add("max_abs", cmp.max_abs);
  s.add("tolerance", tol);
  s.add("lipschitz", L);
  s.add("boundary_hits", argmax_boundary_hits(U));
  s.add("pairwise_iterated", U.pairwise_iterated);
  s.add("domains_differ", U.domains_differ);
  s.add("identical_problems", identical);
  ctx.check("envelope_below_solution", cmp.max_excess <= tol);
  if (identical) ctx.check("envelope_sandwich", cmp.max_abs <= tol);
  ctx.write("envelope.csv", [&](std::ostream& o) { U.write_csv(o); });

  const Raster& r = ul.raster();
  const std::size_t nU = U.nt() - 1;
  ctx.write("comparison.csv", [&](std::ostream& o) {
    o << (r.dim == 2 ? "x,y," : "x,") << "U,u_lambda\n";
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.kind[k] != NodeKind::interior) continue;
      const Vec x = r.position(k);
      o << format_number(x(0)) << ',';
      if (r.dim == 2) o << format_number(x(1)) << ',';
      o << format_number(U.U(nU, k)) << ',' << format_number(ul.node_in_time(k, U.time(nU))) << '\n';
    }
  });
  if (r.dim == 1) {
    svg::Series a{"U envelope", {}, {}}, b{"u on combined domain", {}, {}};
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.kind[k] != NodeKind::interior) continue;
      a.x.push_back(r.position(k)(0));
      a.y.push_back(U.U(nU, k));
      b.x.push_back(r.position(k)(0));
      b.y.push_back(ul.node_in_time(k, U.time(nU)));
    }
    ctx.write("comparison.svg", [&](std::ostream& o) { svg::line_plot(o, {"envelope vs solution", "x", "u"}, {a, b}); });
  } else {
    svg::Grid g{r.nx, r.ny, r.origin.x(), r.origin.x() + r.h * (r.nx - 1), r.origin.y(),
                r.origin.y() + r.h * (r.ny - 1), std::vector<double>(r.size(), std::nan(""))};
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.kind[k] == NodeKind::interior) g.values[k] = U.U(nU, k) - ul.node_in_time(k, U.time(nU));
    ctx.write("comparison.svg", [&](std::ostream& o) { svg::heatmap(o, {"U - u_lambda", "x", "y"}, g); });
  }
}

/// Summary label for an audited operator or source: its kind name,
/// suffixed when repeated.
inline std::string audit_label(std::string base, std::map<std::string, int>& seen) {
  for (char& ch : base)
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  const int n = ++seen[base];
  return n == 1 ? base : base + "_" + std::to_string(n);
}

inline void run_h2_audit(RunContext& ctx) {
  const auto& c = ctx.config();
  auto& s = ctx.summary();
  const Problem P = load_problem(c, 0);
  const Domain& omega = P.domains.front();
  const std::vector<Domain> D{omega, omega};
  const Weights lambda = Weights::pair(c.lambda);

  struct Row {
    std::string check, label, text;
    bool expect_pass;
    HypothesisReport rep;
    double k = std::nan("");
  };
  std::vector<Row> rows;
  std::map<std::string, int> seen;
  auto audit_op = [&](const std::string& text, bool expect_pass) {
    const OperatorSpec spec = parse_operator(text, P.source, x_radius(P.domains));
    Rng rng(c.seed);
    HypothesisSampling opt;
    opt.record_samples = true;
    const double k = k_for(c, spec, c.p);
    const std::vector<OperatorSpec> F{spec, spec};
    Row row{"H2", audit_label(to_string(spec.kind()), seen), text, expect_pass,
            check_H2(spec, F, D, k, c.p, c.alpha, lambda, c.audit_samples, rng, opt), k};
    rows.push_back(std::move(row));
  };
  for (const auto& t : c.audit_operators) audit_op(t, true);
  for (const auto& t : c.audit_controls) audit_op(t, false);
  auto audit_src = [&](const std::string& text, bool expect_pass) {
    Rng rng(c.seed);
    HypothesisSampling opt;
    opt.record_samples = true;
    Row row{"semilinear", audit_label(parakon::detail::split_head(text).first, seen), text, expect_pass,
            check_semilinear_condition(parse_source(text), c.p, c.alpha, c.audit_samples, rng, omega.dim(), opt)};
    rows.push_back(std::move(row));
  };
  for (const auto& t : c.semilinear_pass) audit_src(t, true);
  for (const auto& t : c.semilinear_fail) audit_src(t, false);

  for (const auto& row : rows) {
    const std::string key = row.check == "H2" ? "h2." + row.label : "semilinear." + row.label;
    s.add(key + ".spec", row.text);
    s.add(key + ".expected", row.expect_pass ? "pass" : "violation");
    s.add(key + ".checked", row.rep.checked);
    s.add(key + ".violations", row.rep.violations);
    s.add(key + ".worst_margin", row.rep.worst_margin);
    if (row.check == "H2") {
      s.add(key + ".k", row.k);
      s.add(key + ".h1_satisfied", check_H1(c.p, c.alpha, row.k));
    }
    if (row.rep.violations > 0 && row.rep.witness) s.add(key + ".witness", row.rep.witness->describe());
    const bool ok = row.expect_pass ? row.rep.violations == 0 && row.rep.worst_margin >= -1e-8 : row.rep.violations > 0;
    ctx.check(key, ok);
  }

  ctx.write("audit.csv", [&](std::ostream& o) {
    o << "check,name,spec,expected,checked,violations,skipped,worst_relative_margin,worst_absolute_margin\n";
    for (const auto& row : rows)
      o << row.check << ',' << row.label << ",\"" << row.text << "\"," << (row.expect_pass ? "pass" : "violation") << ','
        << row.rep.checked << ',' << row.rep.violations << ',' << row.rep.skipped << ','
        << format_number(row.rep.worst_margin) << ',' << format_number(row.rep.worst_absolute_margin) << '\n';
  });
  // Relative margin quantiles, one curve per audited item.
  std::vector<svg::Series> curves;
  ctx.write("margins.csv", [&](std::ostream& o) {
    o << "check,name,quantile,relative_margin\n";
    for (const auto& row : rows) {
      std::vector<double> m;
      for (const auto& smp : row.rep.samples) m.push_back(smp.margin / (1.0 + std::abs(smp.lhs) + std::abs(smp.rhs)));
      std::sort(m.begin(), m.end());
      svg::Series se{row.check + " " + row.label, {}, {}};
      if (!m.empty())
        for (int q = 0; q <= 100; ++q) {
          const double v = m[static_cast<std::size_t>(std::lround(q / 100.0 * static_cast<double>(m.size() - 1)))];
          o << row.check << ',' << row.label << ',' << format_number(q / 100.0) << ',' << format_number(v) << '\n';
          se.x.push_back(q / 100.0);
          se.y.push_back(std::asinh(v * 1e3));
        }
      curves.push_back(std::move(se));
    }
  });
  ctx.write("margins.svg", [&](std::ostream& o) {
    svg::line_plot(o, {"sampled relative margins (asinh(1000 m))", "quantile", "asinh(1000 margin)"}, curves);
  });
}

inline void run_h1_table(RunContext& ctx) {
  const auto& c = ctx.config();
  auto& s = ctx.summary();
  const OperatorSpec spec = parse_operator(c.operator_text, parse_source(c.source_text));
  std::size_t admissible = 0;
  std::string pattern;
  svg::Grid g{static_cast<int>(c.table_alpha.size()), static_cast<int>(c.table_p.size()), 0.0,
              static_cast<double>(c.table_alpha.size() - 1), 0.0, static_cast<double>(c.table_p.size() - 1), {}};
  ctx.write("table.csv", [&](std::ostream& o) {
    o << "p,alpha,k,s,admissible\n";
    for (double p : c.table_p)
      for (double a : c.table_alpha) {
        const double k = k_for(c, spec, p);
        const double sv = p == 0.0 ? std::nan("") : 1.0 / p - 1.0 + k;
        const bool ok = check_H1(p, a, k);
        admissible += ok;
        pattern += ok ? '1' : '0';
        g.values.push_back(ok ? 1.0 : 0.0);
        o << format_number(p) << ',' << format_number(a) << ',' << format_number(k) << ',' << format_number(sv) << ','
          << (ok ? 1 : 0) << '\n';
      }
  });
  s.add("operator", spec.name());
  s.add("rows", c.table_p.size() * c.table_alpha.size());
  s.add("admissible", admissible);
  s.add("pattern", pattern);
  ctx.write("table.svg", [&](std::ostream& o) {
    svg::heatmap(o, {"admissible (1) per (alpha index, p index)", "alpha index", "p index"}, g);
  });
}

}  // namespace detail

struct ExperimentInfo {
  std::string name;
  std::string doc;
  std::function<void(RunContext&)> run;
};

inline const std::vector<ExperimentInfo>& registry() {
  static const std::vector<ExperimentInfo> r = {
      {"torsion-1d", "torsion flow on an interval: steady error, convergence order, growth, concavity",
       detail::run_torsion},
      {"heat-2d", "heat flow with constant source on the unit square: monotonicity and concavity",
       [](RunContext& c) { detail::run_field(c, 2); }},
      {"qlap-2d", "normalized q-Laplacian flow (q = 3) on the square", [](RunContext& c) { detail::run_field(c, 2); }},
      {"pucci-2d", "Pucci minimal operator flow (a = 1, b = 2) on the square",
       [](RunContext& c) { detail::run_field(c, 2); }},
      {"porous-1d", "porous medium flow on an interval: comparison bound, monotonicity, concavity",
       detail::run_porous},
      {"minkowski-pair", "envelope of two solutions against the solution on the combined domain",
       detail::run_minkowski},
      {"h2-audit", "sampled structure-condition audit with negative controls and semilinear sources",
       detail::run_h2_audit},
      {"h1-table", "admissibility table of (p, alpha) for the configured operator", detail::run_h1_table},
  };
  return r;
}

inline std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.push_back(e.name);
  return out;
}

inline const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  const std::string s = nearest(name, experiment_names());
  throw usage_error("unknown experiment '" + name + "'" + (s.empty() ? "" : "; did you mean '" + s + "'?"));
}

/// Validates, runs and writes artifacts under <out_root>/<kind>/.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_root) {
  const ExperimentInfo& info = find_experiment(cfg.kind);
  validate(cfg, experiment_names());
  const std::filesystem::path dir = out_root / cfg.kind;
  std::filesystem::create_directories(dir);
  RunContext ctx(cfg, dir);
  auto& s = ctx.summary();
  s.add("kind", cfg.kind);
  s.add("seed", std::to_string(cfg.seed));
  s.add("operator", cfg.operator_text);
  s.add("source", cfg.source_text);
  std::string ds;
  for (const auto& d : cfg.domains) ds += (ds.empty() ? "" : ";") + d;
  s.add("domains", ds);
  s.add("p", cfg.p);
  s.add("alpha", cfg.alpha);
  s.add("h", cfg.h);
  s.add("T", cfg.T);
  try {
    info.run(ctx);
  } catch (const numerical_error& e) {
    throw numerical_error(cfg.kind + ": " + e.what());
  }
  return ctx.finish();
}

}  // namespace parakon::cli
