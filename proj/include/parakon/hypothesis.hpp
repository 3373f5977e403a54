#pragma once

#include "parakon/errors.hpp"
#include "parakon/geometry.hpp"
#include "parakon/linalg.hpp"
#include "parakon/means.hpp"
#include "parakon/operators.hpp"
#include "parakon/transform.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace parakon {

/// (H1): 1/p - 1 + k ≤ 0 or α(1/p - 1 + k) ≥ 1. Always true at p = 0.
inline bool check_H1(double p, double alpha, double k) {
  if (p == 0.0) return true;
  const double s = 1.0 / p - 1.0 + k;
  return s <= 0.0 || alpha * s >= 1.0;
}

/// Catalog choice of k. Porous medium uses k = 3 - σ/p, which turns the
/// leading part of G into -(σ/p) r² tr X - σ(σ-p)/p² r|ξ|².
inline double default_k(const OperatorSpec& spec, double p) {
  const bool porous = spec.kind() == OperatorKind::porous_medium;
  if (p == 0.0) return porous ? 2.0 - spec.sigma() : 1.0;
  if (porous) return 3.0 - spec.sigma() / p;
  return 3.0 - 1.0 / p;
}

/// A tuple (Y, X_1..X_m) for the block constraint
/// sign·blockdiag(λ_i X_i) ≤ sign·(λλᵀ ⊗ Y).
struct Key2Instance {
  Weights lambda;
  Mat Y;
  std::vector<Mat> X;
  int sign = 1;

  int n() const { return static_cast<int>(Y.rows()); }
  std::size_t m() const { return X.size(); }
};

inline Eigen::MatrixXd key2_block_matrix(const Key2Instance& inst) {
  const int n = inst.n();
  const auto m = static_cast<int>(inst.m());
  Eigen::MatrixXd B(m * n, m * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXd blk = inst.lambda[static_cast<std::size_t>(i)] * inst.lambda[static_cast<std::size_t>(j)] *
                            Eigen::MatrixXd(inst.Y);
      if (i == j) blk -= inst.lambda[static_cast<std::size_t>(i)] * Eigen::MatrixXd(inst.X[static_cast<std::size_t>(i)]);
      B.block(i * n, j * n, n, n) = static_cast<double>(inst.sign) * blk;
    }
  }
  return B;
}

/// Smallest eigenvalue of sign·[(λλᵀ ⊗ Y) - blockdiag(λ_i X_i)]; ≥ 0 means valid.
inline double verify_key2(const Key2Instance& inst) {
  if (inst.X.size() != inst.lambda.size()) throw usage_error("verify_key2: X count does not match weights");
  for (const Mat& X : inst.X)
    if (X.rows() != inst.Y.rows() || X.cols() != inst.Y.cols()) throw usage_error("verify_key2: shape mismatch");
  return min_eigenvalue(key2_block_matrix(inst));
}

namespace detail {

// PSD slack of random rank 0..n and a scale skewed toward zero, so that
// near-tight instances (X_i close to Y) are sampled as often as loose ones.
inline Mat core_slack(int n, double bound, Rng& rng) {
  const int rank = std::uniform_int_distribution<int>(0, n)(rng);
  const double u = uniform(rng, 0.0, 1.0);
  Mat Q = Mat::Zero(n, n);
  for (int j = 0; j < rank; ++j) {
    const Vec v = random_unit(n, rng) * uniform(rng, 0.0, bound);
    Q += v * v.transpose();
  }
  return u * u * Q;
}

}  // namespace detail

enum class Key2Mode { concave_core, rejection };

/// Draws valid Key2 instances. concave-core: Y = -sign·AAᵀ and
/// X_i = Y - sign·Q_i with Q_i ⪰ 0, valid by construction. rejection:
/// Y arbitrary symmetric, X_i = S_i - sign·s_i I, kept when the margin test passes.
inline std::vector<Key2Instance> sample_key2(int n, std::size_t m, const Weights& lambda, int sign,
                                             std::size_t count, Key2Mode mode, Rng& rng,
                                             double matrix_bound = 2.0) {
  if (count < 1) throw usage_error("sample_key2: count must be at least 1");
  if (n < 1 || n > 4) throw usage_error("sample_key2: n must lie in 1..4");
  if (m != lambda.size()) throw usage_error("sample_key2: m does not match weights");
  if (sign != 1 && sign != -1) throw usage_error("sample_key2: sign must be +1 or -1");
  if (mode == Key2Mode::rejection && m > 4) throw usage_error("sample_key2: rejection mode needs m <= 4");
  std::vector<Key2Instance> out;
  out.reserve(count);
  const double b = std::sqrt(matrix_bound);
  if (mode == Key2Mode::concave_core) {
    for (std::size_t c = 0; c < count; ++c) {
      Key2Instance inst{lambda, Mat(-static_cast<double>(sign) * random_psd(n, b, rng)), {}, sign};
      for (std::size_t i = 0; i < m; ++i) inst.X.push_back(inst.Y - static_cast<double>(sign) * detail::core_slack(n, b, rng));
      out.push_back(std::move(inst));
    }
    return out;
  }
  std::size_t attempts = 0;
  while (out.size() < count) {
    ++attempts;
    Key2Instance inst{lambda, random_symmetric(n, matrix_bound, rng), {}, sign};
    for (std::size_t i = 0; i < m; ++i) {
      const double s = uniform(rng, 0.0, 2.0 * matrix_bound);
      inst.X.push_back(random_symmetric(n, matrix_bound, rng) - static_cast<double>(sign) * s * Mat::Identity(n, n));
    }
    if (verify_key2(inst) >= 0.0) out.push_back(std::move(inst));
    if (attempts >= 10000 && static_cast<double>(out.size()) < 1e-3 * static_cast<double>(attempts)) {
      std::ostringstream os;
      os << "sample_key2: rejection yield " << out.size() << "/" << attempts << " below 0.1% (n=" << n
         << ", m=" << m << ", sign=" << sign << ")";
      throw numerical_error(os.str());
    }
  }
  return out;
}

/// A sampled tuple of (H2)-type checks together with both sides.
struct H2Witness {
  std::vector<Vec> x;
  std::vector<double> t;
  std::vector<double> r;
  Vec xi;
  std::vector<Mat> X;
  Mat Y;
  double lhs = 0.0;
  double rhs = 0.0;

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < x.size(); ++i)
      os << "x" << i + 1 << "=" << to_string(x[i]) << " t" << i + 1 << "=" << t[i] << " r" << i + 1 << "=" << r[i]
         << (X.empty() ? "" : " X" + std::to_string(i + 1) + "=" + to_string(X[i])) << "; ";
    os << "xi=" << to_string(xi);
    if (Y.size() > 0) os << " Y=" << to_string(Y);
    os << " lhs=" << lhs << " rhs=" << rhs;
    return os.str();
  }
};

struct HypothesisSample {
  std::size_t id = 0;
  double margin = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct HypothesisReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  /// min (RHS - LHS) / (1 + |LHS| + |RHS|)
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_absolute_margin = std::numeric_limits<double>::infinity();
  double tolerance = 1e-8;
  bool h1_satisfied = true;
  std::optional<H2Witness> witness;
  std::vector<HypothesisSample> samples;

  bool passed() const noexcept { return violations == 0; }

  void merge(const HypothesisReport& o) {
    checked += o.checked;
    violations += o.violations;
    skipped += o.skipped;
    h1_satisfied = h1_satisfied && o.h1_satisfied;
    worst_absolute_margin = std::min(worst_absolute_margin, o.worst_absolute_margin);
    if (o.worst_margin < worst_margin) {
      worst_margin = o.worst_margin;
      if (o.witness) witness = o.witness;
    }
    samples.insert(samples.end(), o.samples.begin(), o.samples.end());
  }

  /// CSV columns: sample_id, margin, lhs, rhs.
  void write_csv(std::ostream& out) const {
    out << "sample_id,margin,lhs,rhs\n";
    out.precision(17);
    for (const auto& s : samples) out << s.id << ',' << s.margin << ',' << s.lhs << ',' << s.rhs << '\n';
  }
};

struct HypothesisSampling {
  double t_lo = 0.1, t_hi = 2.0;
  double r_lo = 0.1, r_hi = 2.0;
  double xi_lo = 0.1, xi_hi = 2.0;
  double matrix_bound = 2.0;
  double tolerance = 1e-8;
  Key2Mode mode = Key2Mode::concave_core;
  bool record_samples = false;
  /// Use the same r for every point (for r-independent or r-degenerate checks).
  std::optional<double> fixed_r;
  /// Box for x when no domain is given.
  double x_lo = 0.0, x_hi = 1.0;
};

namespace detail {

inline Vec sample_in_domain(const Domain& omega, Rng& rng) {
  auto [lo, hi] = omega.bounding_box();
  const int n = omega.dim();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec x(n);
    x(0) = uniform(rng, lo.x(), hi.x());
    if (n == 2) x(1) = uniform(rng, lo.y(), hi.y());
    if (contains(omega, x) == Location::interior) return x;
  }
  throw numerical_error("could not sample an interior point of the domain");
}

inline double sample_open(Rng& rng, double lo, double hi) {
  // (lo, hi]
  return hi - uniform(rng, 0.0, hi - lo);
}

inline void record(HypothesisReport& rep, const HypothesisSampling& opt, double lhs, double rhs,
                   const std::function<H2Witness()>& make_witness) {
  const double margin = rhs - lhs;
  const double scale = 1.0 + std::abs(lhs) + std::abs(rhs);
  const double rel = margin / scale;
  const std::size_t id = rep.checked++;
  if (opt.record_samples) rep.samples.push_back({id, margin, lhs, rhs});
  rep.worst_absolute_margin = std::min(rep.worst_absolute_margin, margin);
  const bool violating = margin < -opt.tolerance * scale;
  if (violating) ++rep.violations;
  if (rel < rep.worst_margin) {
    rep.worst_margin = rel;
    if (violating || !rep.witness) rep.witness = make_witness();
  }
}

}  // namespace detail

/// Samples (H2): G_λ(x, t, r, ξ, Y) ≤ Σ λ_i G_i(x_i, t_i, r_i, ξ, X_i) with
/// (x, t, r) the λ-averages and (Y, X_i) a Key2 instance.
inline HypothesisReport check_H2(const OperatorSpec& F_lambda, std::span<const OperatorSpec> F,
                                 std::span<const Domain> domains, double k, double p, double alpha,
                                 const Weights& lambda, std::size_t count, Rng& rng,
                                 const HypothesisSampling& opt = {}) {
  const std::size_t m = lambda.size();
  if (F.size() != m || domains.size() != m) throw usage_error("check_H2: need one operator and domain per weight");
  const int n = domains.front().dim();
  for (const auto& d : domains)
    if (d.dim() != n) throw usage_error("check_H2: domain dimensions differ");
  HypothesisReport rep;
  rep.tolerance = opt.tolerance;
  rep.h1_satisfied = check_H1(p, alpha, k);
  const int sign = sign_star(p);
  const TransformedOperator G_lambda{F_lambda, k, p, alpha};
  std::vector<TransformedOperator> G;
  for (const auto& f : F) G.push_back({f, k, p, alpha});
  for (std::size_t c = 0; c < count; ++c) {
    Key2Instance inst = sample_key2(n, m, lambda, sign, 1, opt.mode, rng, opt.matrix_bound).front();
    H2Witness w;
    w.xi = uniform(rng, opt.xi_lo, opt.xi_hi) * random_unit(n, rng);
    Vec xbar = Vec::Zero(n);
    double tbar = 0.0, rbar = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      w.x.push_back(detail::sample_in_domain(domains[i], rng));
      w.t.push_back(detail::sample_open(rng, opt.t_lo, opt.t_hi));
      w.r.push_back(opt.fixed_r ? *opt.fixed_r : detail::sample_open(rng, opt.r_lo, opt.r_hi));
      xbar += lambda[i] * w.x[i];
      tbar += lambda[i] * w.t[i];
      rbar += lambda[i] * w.r[i];
    }
    w.X = inst.X;
    w.Y = inst.Y;
    double lhs = 0.0, rhs = 0.0;
    try {
      lhs = eval_G(G_lambda, xbar, tbar, rbar, w.xi, inst.Y);
      for (std::size_t i = 0; i < m; ++i) rhs += lambda[i] * eval_G(G[i], w.x[i], w.t[i], w.r[i], w.xi, inst.X[i]);
    } catch (const std::exception&) {
      ++rep.skipped;
      continue;
    }
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
      ++rep.skipped;
      continue;
    }
    w.lhs = lhs;
    w.rhs = rhs;
    detail::record(rep, opt, lhs, rhs, [&] { return w; });
  }
  return rep;
}

/// (H2b): the single-operator version of check_H2 with k = 3 - 1/p (unless
/// given), a shared convex domain and m = n + 2 points.
inline HypothesisReport check_H2b(const OperatorSpec& spec, const Domain& omega, double p, double alpha,
                                  std::size_t count, Rng& rng, std::optional<double> k = std::nullopt,
                                  std::optional<Weights> lambda = std::nullopt,
                                  const HypothesisSampling& opt = {}) {
  if (p == 0.0) throw usage_error("check_H2b requires p != 0");
  const std::size_t m = static_cast<std::size_t>(omega.dim()) + 2;
  const Weights w = lambda ? *lambda : Weights::uniform(m);
  if (w.size() != m) throw usage_error("check_H2b: weights must have n + 2 entries");
  std::vector<OperatorSpec> F(m, spec);
  std::vector<Domain> D(m, omega);
  return check_H2(spec, F, D, k ? *k : 3.0 - 1.0 / p, p, alpha, w, count, rng, opt);
}

/// g(x, t, r, ξ) = r^{3-1/p} f(x, t^{1/α}, r^{1/p}, (1/p) r^{1/p-1} ξ), or
/// e^r f(x, t^{1/α}, e^r, e^r ξ) at p = 0.
inline double transformed_source(const Source& f, double p, double alpha, const Vec& x, double t, double r,
                                 const Vec& xi) {
  const double s = std::pow(t, 1.0 / alpha);
  if (p == 0.0) {
    const double e = std::exp(r);
    return e * f(x, s, e, e * xi);
  }
  return std::pow(r, 3.0 - 1.0 / p) * f(x, s, std::pow(r, 1.0 / p), std::pow(r, 1.0 / p - 1.0) / p * xi);
}

/// Concavity of g along two-point combinations:
/// g(Σλx_i, Σλt_i, Σλr_i, ξ) ≥ Σ λ_i g(x_i, t_i, r_i, ξ).
inline HypothesisReport check_semilinear_condition(const Source& f, double p, double alpha, std::size_t count,
                                                   Rng& rng, int dim = 1, const HypothesisSampling& opt = {}) {
  HypothesisReport rep;
  rep.tolerance = opt.tolerance;
  for (std::size_t c = 0; c < count; ++c) {
    const Weights lambda = Weights::pair(uniform(rng, 0.05, 0.95));
    H2Witness w;
    w.xi = uniform(rng, opt.xi_lo, opt.xi_hi) * random_unit(dim, rng);
    Vec xbar = Vec::Zero(dim);
    double tbar = 0.0, rbar = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      Vec x(dim);
      for (int d = 0; d < dim; ++d) x(d) = uniform(rng, opt.x_lo, opt.x_hi);
      w.x.push_back(x);
      w.t.push_back(detail::sample_open(rng, opt.t_lo, opt.t_hi));
      w.r.push_back(opt.fixed_r ? *opt.fixed_r : detail::sample_open(rng, opt.r_lo, opt.r_hi));
      xbar += lambda[i] * x;
      tbar += lambda[i] * w.t[i];
      rbar += lambda[i] * w.r[i];
    }
    const double lhs_g = transformed_source(f, p, alpha, xbar, tbar, rbar, w.xi);
    double rhs_g = 0.0;
    for (std::size_t i = 0; i < 2; ++i) rhs_g += lambda[i] * transformed_source(f, p, alpha, w.x[i], w.t[i], w.r[i], w.xi);
    if (!std::isfinite(lhs_g) || !std::isfinite(rhs_g)) {
      ++rep.skipped;
      continue;
    }
    // Concavity reads g(mean) ≥ mean of g; record as lhs = Σλg_i, rhs = g(mean).
    w.lhs = rhs_g;
    w.rhs = lhs_g;
    detail::record(rep, opt, rhs_g, lhs_g, [&] { return w; });
  }
  return rep;
}

}  // namespace parakon
