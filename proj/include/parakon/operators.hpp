#pragma once

#include "parakon/errors.hpp"
#include "parakon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace parakon {

/// Source term f(x, t, r, ξ) ≥ 0.
struct Source {
  using Fn = std::function<double(const Vec& x, double t, double r, const Vec& xi)>;

  Fn f;
  std::string label = "zero";

  double operator()(const Vec& x, double t, double r, const Vec& xi) const {
    return f ? f(x, t, r, xi) : 0.0;
  }

  static Source zero() { return {}; }
  static Source constant(double c) {
    return {[c](const Vec&, double, double, const Vec&) { return c; },
            "constant:" + std::to_string(c)};
  }
  /// f = c r
  static Source linear_r(double c) {
    return {[c](const Vec&, double, double r, const Vec&) { return c * r; },
            "linear-r:" + std::to_string(c)};
  }
  /// f = c r^e
  static Source power_r(double c, double e) {
    return {[c, e](const Vec&, double, double r, const Vec&) { return c * std::pow(r, e); },
            "power-r:" + std::to_string(c) + "," + std::to_string(e)};
  }
  /// f = Σ_k c_k |x|^k
  static Source space_poly(std::vector<double> coeffs) {
    std::string label = "space:poly(";
    for (std::size_t i = 0; i < coeffs.size(); ++i) label += (i ? "," : "") + std::to_string(coeffs[i]);
    label += ")";
    return {[coeffs](const Vec& x, double, double, const Vec&) {
              const double s = x.norm();
              double v = 0.0;
              for (std::size_t i = coeffs.size(); i-- > 0;) v = v * s + coeffs[i];
              return v;
            },
            label};
  }
};

enum class OperatorKind {
  laplacian,
  normalized_q_laplacian,
  pucci_minus,
  pucci_plus,
  quasilinear,
  finsler,
  porous_medium,
  custom,
};

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::laplacian: return "laplacian";
    case OperatorKind::normalized_q_laplacian: return "normalized_q_laplacian";
    case OperatorKind::pucci_minus: return "pucci_minus";
    case OperatorKind::pucci_plus: return "pucci_plus";
    case OperatorKind::quasilinear: return "quasilinear";
    case OperatorKind::finsler: return "finsler";
    case OperatorKind::porous_medium: return "porous_medium";
    case OperatorKind::custom: return "custom";
  }
  return "?";
}

/// Finsler gauges with closed-form A_J = ½∇²J².
struct FinslerGauge {
  enum class Type { weighted_l2, weighted_l4 };
  Type type = Type::weighted_l2;
  std::vector<double> w;

  double J(const Vec& xi) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const double wi = weight(i);
      s += type == Type::weighted_l2 ? wi * xi(i) * xi(i) : wi * std::pow(xi(i), 4);
    }
    return type == Type::weighted_l2 ? std::sqrt(s) : std::pow(s, 0.25);
  }

  Mat A(const Vec& xi) const {
    const auto n = xi.size();
    Mat out = Mat::Zero(n, n);
    if (type == Type::weighted_l2) {
      for (Eigen::Index i = 0; i < n; ++i) out(i, i) = weight(i);
      return out;
    }
    // J² = S^{1/2}, S = Σ w ξ⁴.
    double S = 0.0;
    Vec c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      S += weight(i) * std::pow(xi(i), 4);
      c(i) = weight(i) * xi(i) * xi(i) * xi(i);
    }
    if (!(S > 0.0)) throw singular_point_error("finsler A_J undefined at xi = 0");
    for (Eigen::Index i = 0; i < n; ++i) out(i, i) = 3.0 * weight(i) * xi(i) * xi(i) / std::sqrt(S);
    out -= 2.0 * std::pow(S, -1.5) * c * c.transpose();
    return out;
  }

  /// Upper bound on the eigenvalues of A_J over all ξ.
  double bound() const {
    double m = 0.0;
    for (double wi : w) m = std::max(m, type == Type::weighted_l2 ? wi : 3.0 * std::sqrt(wi));
    return m;
  }

  double weight(Eigen::Index i) const {
    if (w.empty()) return 1.0;
    return w[std::min<std::size_t>(static_cast<std::size_t>(i), w.size() - 1)];
  }
};

/// One entry of the operator catalog F(x, t, r, ξ, X) together with its
/// source term and accumulated perturbation ε.
class OperatorSpec {
 public:
  using MatrixField = std::function<Mat(const Vec& x, const Vec& xi)>;
  using CustomF = std::function<double(const Vec& x, double t, double r, const Vec& xi, const Mat& X)>;
  using CustomH = std::function<double(const Vec& x, double t, double r)>;

  static OperatorSpec laplacian(Source f = Source::zero()) {
    return OperatorSpec(OperatorKind::laplacian, std::move(f));
  }
  static OperatorSpec q_laplacian(double q, Source f = Source::zero()) {
    if (!(q > 1.0)) throw domain_error("normalized q-Laplacian requires q in (1, inf]");
    OperatorSpec s(OperatorKind::normalized_q_laplacian, std::move(f));
    s.q_ = q;
    return s;
  }
  static OperatorSpec pucci_minus(double a, double b, Source f = Source::zero()) {
    check_pucci(a, b);
    OperatorSpec s(OperatorKind::pucci_minus, std::move(f));
    s.a_ = a;
    s.b_ = b;
    return s;
  }
  static OperatorSpec pucci_plus(double a, double b, Source f = Source::zero()) {
    check_pucci(a, b);
    OperatorSpec s(OperatorKind::pucci_plus, std::move(f));
    s.a_ = a;
    s.b_ = b;
    return s;
  }
  /// -tr(A(x, ξ) X) - f. `bound` is an upper bound on the eigenvalues of A
  /// over the region of interest, used for the time-step restriction.
  /// Set `gradient_singular` when A depends on the direction of ξ.
  static OperatorSpec quasilinear(MatrixField A, double bound, Source f = Source::zero(),
                                  bool gradient_singular = true, std::string label = "quasilinear") {
    if (!A) throw usage_error("quasilinear operator needs a coefficient field");
    OperatorSpec s(OperatorKind::quasilinear, std::move(f));
    s.A_ = std::move(A);
    s.bound_ = bound;
    s.singular_ = gradient_singular;
    s.label_ = std::move(label);
    return s;
  }
  static OperatorSpec finsler(FinslerGauge gauge, Source f = Source::zero()) {
    for (double wi : gauge.w)
      if (!(wi > 0.0)) throw domain_error("finsler weights must be positive");
    OperatorSpec s(OperatorKind::finsler, std::move(f));
    s.singular_ = gauge.type != FinslerGauge::Type::weighted_l2;
    s.gauge_ = std::move(gauge);
    return s;
  }
  static OperatorSpec porous(double sigma, Source f = Source::zero()) {
    if (!(sigma > 1.0)) throw domain_error("porous medium requires sigma > 1");
    OperatorSpec s(OperatorKind::porous_medium, std::move(f));
    s.sigma_ = sigma;
    return s;
  }
  /// Arbitrary operator given by callbacks; used for test fixtures.
  static OperatorSpec custom(CustomF F, CustomH h, double bound = 1.0, std::string label = "custom") {
    OperatorSpec s(OperatorKind::custom, Source::zero());
    s.custom_F_ = std::move(F);
    s.custom_h_ = std::move(h);
    s.bound_ = bound;
    s.singular_ = false;
    s.label_ = std::move(label);
    return s;
  }

  OperatorKind kind() const noexcept { return kind_; }
  double q() const noexcept { return q_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double sigma() const noexcept { return sigma_; }
  double epsilon() const noexcept { return eps_; }
  const Source& source() const noexcept { return f_; }
  const FinslerGauge& gauge() const noexcept { return gauge_; }
  const MatrixField& coefficient_field() const noexcept { return A_; }
  const CustomF& custom_F() const noexcept { return custom_F_; }
  const CustomH& custom_h() const noexcept { return custom_h_; }
  double coefficient_bound() const noexcept { return bound_; }

  /// True when F depends on the direction of ξ and is undefined at ξ = 0.
  bool gradient_singular() const noexcept {
    switch (kind_) {
      case OperatorKind::normalized_q_laplacian: return true;
      case OperatorKind::finsler:
      case OperatorKind::quasilinear: return singular_;
      default: return false;
    }
  }

  /// F(X) = -tr(A X) + lower order for the kinds that are linear in X.
  bool linear_in_hessian() const noexcept {
    return kind_ != OperatorKind::pucci_minus && kind_ != OperatorKind::pucci_plus &&
           kind_ != OperatorKind::custom;
  }

  std::string name() const {
    std::ostringstream os;
    switch (kind_) {
      case OperatorKind::laplacian: os << "laplacian"; break;
      case OperatorKind::normalized_q_laplacian:
        if (std::isinf(q_)) os << "qlap:inf";
        else os << "qlap:" << q_;
        break;
      case OperatorKind::pucci_minus: os << "pucci-:" << a_ << "," << b_; break;
      case OperatorKind::pucci_plus: os << "pucci+:" << a_ << "," << b_; break;
      case OperatorKind::porous_medium: os << "porous:" << sigma_; break;
      case OperatorKind::finsler:
        os << (gauge_.type == FinslerGauge::Type::weighted_l2 ? "finsler:w=" : "finsler-l4:w=");
        for (std::size_t i = 0; i < gauge_.w.size(); ++i) os << (i ? "," : "") << gauge_.w[i];
        break;
      case OperatorKind::quasilinear:
      case OperatorKind::custom: os << label_; break;
    }
    return os.str();
  }

  /// F - ε with ε accumulated onto the existing perturbation.
  OperatorSpec perturbed(double eps) const {
    if (!(eps > 0.0)) throw usage_error("perturbation must be positive");
    OperatorSpec s = *this;
    s.eps_ += eps;
    return s;
  }

  OperatorSpec with_source(Source f) const {
    OperatorSpec s = *this;
    s.f_ = std::move(f);
    return s;
  }

  /// Diffusion matrix A with F = -tr(A X) + (terms free of X), for the kinds
  /// linear in X. Porous medium returns σ r^{σ-1} I.
  Mat diffusion_matrix(const Vec& x, double r, const Vec& xi) const {
    const auto n = xi.size();
    switch (kind_) {
      case OperatorKind::laplacian: return Mat::Identity(n, n);
      case OperatorKind::normalized_q_laplacian: {
        const double s = xi.squaredNorm();
        if (!(s > 0.0)) throw singular_point_error("q-Laplacian at vanishing gradient; use eval_h");
        if (std::isinf(q_)) return (xi * xi.transpose()) / s;
        return Mat::Identity(n, n) + (q_ - 2.0) * (xi * xi.transpose()) / s;
      }
      case OperatorKind::finsler: return gauge_.A(xi);
      case OperatorKind::quasilinear: return A_(x, xi);
      case OperatorKind::porous_medium:
        return sigma_ * std::pow(r, sigma_ - 1.0) * Mat::Identity(n, n);
      default: throw usage_error(std::string("operator ") + to_string(kind_) + " is not linear in X");
    }
  }

 private:
  OperatorSpec(OperatorKind kind, Source f) : kind_(kind), f_(std::move(f)) {}

  static void check_pucci(double a, double b) {
    if (!(a > 0.0 && a <= b && std::isfinite(b)))
      throw domain_error("pucci parameters require 0 < a <= b");
  }

  OperatorKind kind_;
  Source f_;
  double eps_ = 0.0;
  double q_ = 2.0;
  double a_ = 1.0;
  double b_ = 1.0;
  double sigma_ = 1.0;
  double bound_ = 1.0;
  bool singular_ = false;
  FinslerGauge gauge_;
  MatrixField A_;
  CustomF custom_F_;
  CustomH custom_h_;
  std::string label_;
};

inline OperatorSpec perturb(const OperatorSpec& spec, double eps) { return spec.perturbed(eps); }

/// M⁻_{a,b}(X) = inf_{aI ≤ A ≤ bI} tr(A X).
inline double pucci_inf(const Mat& X, double a, double b) {
  const Vec e = symmetric_eigenvalues(X);
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) s += e(i) >= 0.0 ? a * e(i) : b * e(i);
  return s;
}

/// M⁺_{a,b}(X) = sup_{aI ≤ A ≤ bI} tr(A X).
inline double pucci_sup(const Mat& X, double a, double b) {
  const Vec e = symmetric_eigenvalues(X);
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) s += e(i) <= 0.0 ? a * e(i) : b * e(i);
  return s;
}

inline double eval_F(const OperatorSpec& spec, const Vec& x, double t, double r, const Vec& xi,
                     const Mat& X) {
  if (r < 0.0) throw domain_error("eval_F: r = " + std::to_string(r) + " < 0");
  if (xi.squaredNorm() == 0.0)
    throw singular_point_error("eval_F at xi = 0; use eval_h for the singular envelope");
  if (X.rows() != xi.size() || X.cols() != xi.size())
    throw usage_error("eval_F: X and xi dimensions disagree");
  const double f = spec.source()(x, t, r, xi);
  const double eps = spec.epsilon();
  switch (spec.kind()) {
    case OperatorKind::laplacian: return -X.trace() - f - eps;
    case OperatorKind::normalized_q_laplacian: {
      const double s = xi.squaredNorm();
      const double dir = xi.dot(X * xi) / s;
      if (std::isinf(spec.q())) return -dir - f - eps;
      return -X.trace() - (spec.q() - 2.0) * dir - f - eps;
    }
    case OperatorKind::pucci_minus: return -pucci_inf(X, spec.a(), spec.b()) - f - eps;
    case OperatorKind::pucci_plus: return -pucci_sup(X, spec.a(), spec.b()) - f - eps;
    case OperatorKind::quasilinear:
    case OperatorKind::finsler:
      return -(spec.diffusion_matrix(x, r, xi) * X).trace() - f - eps;
    case OperatorKind::porous_medium: {
      const double s = spec.sigma();
      return -s * std::pow(r, s - 1.0) * X.trace() - s * (s - 1.0) * std::pow(r, s - 2.0) * xi.squaredNorm() - f -
             eps;
    }
    case OperatorKind::custom: return spec.custom_F()(x, t, r, xi, X) - eps;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Singular envelope h(x, t, r) = F_*(x,t,r,0,0) = -f(x,t,r,0) - ε.
inline double eval_h(const OperatorSpec& spec, const Vec& x, double t, double r) {
  if (spec.kind() == OperatorKind::custom)
    return (spec.custom_h() ? spec.custom_h()(x, t, r) : 0.0) - spec.epsilon();
  return -spec.source()(x, t, r, Vec::Zero(x.size())) - spec.epsilon();
}

/// Largest eigenvalue of the second-order coefficient over gradient
/// directions; porous medium reports σ (the r-factor is applied by the caller).
inline double ellipticity_bound(const OperatorSpec& spec) {
  switch (spec.kind()) {
    case OperatorKind::laplacian: return 1.0;
    case OperatorKind::normalized_q_laplacian: return std::isinf(spec.q()) ? 1.0 : std::max(1.0, spec.q() - 1.0);
    case OperatorKind::pucci_minus:
    case OperatorKind::pucci_plus: return spec.b();
    case OperatorKind::finsler: return spec.gauge().bound();
    case OperatorKind::porous_medium: return spec.sigma();
    case OperatorKind::quasilinear:
    case OperatorKind::custom: return spec.coefficient_bound();
  }
  return 1.0;
}

struct MarginReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<std::string> witness;

  bool passed() const noexcept { return violations == 0; }
};

/// Ranges for the structural sampling checks.
struct StructureSampling {
  int dim = 2;
  double x_lo = 0.0, x_hi = 1.0;
  double t_max = 2.0;
  double r_max = 2.0;
  double matrix_bound = 2.0;
  double tolerance = 1e-10;
};

namespace detail {

inline Vec sample_xi(int n, Rng& rng) { return uniform(rng, 0.1, 2.0) * random_unit(n, rng); }

inline Vec sample_box(int n, double lo, double hi, Rng& rng) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = uniform(rng, lo, hi);
  return x;
}

}  // namespace detail

/// Degenerate ellipticity: F(X + P) ≤ F(X) for PSD P.
inline MarginReport verify_ellipticity(const OperatorSpec& spec, std::size_t sample_count, Rng& rng,
                                       const StructureSampling& s = {}) {
  MarginReport rep;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const Vec x = detail::sample_box(s.dim, s.x_lo, s.x_hi, rng);
    const double t = uniform(rng, 0.0, s.t_max);
    const double r = uniform(rng, 0.0, s.r_max);
    const Vec xi = detail::sample_xi(s.dim, rng);
    const Mat X = random_symmetric(s.dim, s.matrix_bound, rng);
    const Mat P = random_psd(s.dim, 1.0, rng);
    const double margin = eval_F(spec, x, t, r, xi, X) - eval_F(spec, x, t, r, xi, X + P);
    ++rep.checked;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      if (margin < -s.tolerance) {
        rep.witness = "x=" + to_string(x) + " t=" + std::to_string(t) + " r=" + std::to_string(r) +
                      " xi=" + to_string(xi) + " X=" + to_string(X) + " P=" + to_string(P);
      }
    }
    if (margin < -s.tolerance) ++rep.violations;
  }
  return rep;
}

/// Properness: F(r₁) + c r₁ ≤ F(r₂) + c r₂ for r₁ ≤ r₂.
inline MarginReport verify_properness(const OperatorSpec& spec, double c, std::size_t sample_count, Rng& rng,
                                      const StructureSampling& s = {}) {
  MarginReport rep;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const Vec x = detail::sample_box(s.dim, s.x_lo, s.x_hi, rng);
    const double t = uniform(rng, 0.0, s.t_max);
    double r1 = uniform(rng, 0.0, s.r_max), r2 = uniform(rng, 0.0, s.r_max);
    if (r1 > r2) std::swap(r1, r2);
    const Vec xi = detail::sample_xi(s.dim, rng);
    const Mat X = random_symmetric(s.dim, s.matrix_bound, rng);
    const double margin = (eval_F(spec, x, t, r2, xi, X) + c * r2) - (eval_F(spec, x, t, r1, xi, X) + c * r1);
    ++rep.checked;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      if (margin < -s.tolerance) {
        rep.witness = "x=" + to_string(x) + " t=" + std::to_string(t) + " r1=" + std::to_string(r1) +
                      " r2=" + std::to_string(r2) + " xi=" + to_string(xi) + " X=" + to_string(X);
      }
    }
    if (margin < -s.tolerance) ++rep.violations;
  }
  return rep;
}

/// Samples f over the structure ranges and reports min f (must be ≥ 0).
inline MarginReport verify_source_nonnegative(const Source& f, std::size_t sample_count, Rng& rng,
                                              const StructureSampling& s = {}) {
  MarginReport rep;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const Vec x = detail::sample_box(s.dim, s.x_lo, s.x_hi, rng);
    const double t = uniform(rng, 0.0, s.t_max);
    const double r = uniform(rng, 0.0, s.r_max);
    const Vec xi = detail::sample_xi(s.dim, rng);
    const double v = f(x, t, r, xi);
    ++rep.checked;
    if (v < rep.worst_margin) rep.worst_margin = v;
    if (v < 0.0) {
      ++rep.violations;
      rep.witness = "x=" + to_string(x) + " t=" + std::to_string(t) + " r=" + std::to_string(r);
    }
  }
  return rep;
}

namespace detail {

inline std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw usage_error(std::string(what) + ": empty list entry");
    item = item.substr(b, e - b + 1);
    if (item == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw usage_error(std::string(what) + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw usage_error(std::string(what) + ": missing parameters");
  return out;
}

inline std::pair<std::string, std::string> split_head(std::string_view text) {
  const auto c = text.find(':');
  if (c == std::string_view::npos) return {std::string(text), ""};
  return {std::string(text.substr(0, c)), std::string(text.substr(c + 1))};
}

}  // namespace detail

/// "zero", "constant:c", "linear-r:c", "power-r:c,e", "space:poly(c0,c1,...)".
inline Source parse_source(std::string_view text) {
  auto [head, args] = detail::split_head(text);
  if (head == "zero" && args.empty()) return Source::zero();
  if (head == "constant") {
    auto v = detail::parse_number_list(args, "constant source");
    if (v.size() != 1) throw usage_error("constant source takes one value");
    return Source::constant(v[0]);
  }
  if (head == "linear-r") {
    auto v = detail::parse_number_list(args, "linear-r source");
    if (v.size() != 1) throw usage_error("linear-r source takes one value");
    return Source::linear_r(v[0]);
  }
  if (head == "power-r") {
    auto v = detail::parse_number_list(args, "power-r source");
    if (v.size() != 2) throw usage_error("power-r source takes c,e");
    return Source::power_r(v[0], v[1]);
  }
  if (head == "space") {
    if (args.rfind("poly(", 0) != 0 || args.back() != ')')
      throw usage_error("space source must read space:poly(c0,c1,...)");
    return Source::space_poly(detail::parse_number_list(args.substr(5, args.size() - 6), "space source"));
  }
  throw usage_error("unknown source '" + std::string(text) + "'");
}

/// "laplacian", "qlap:q" (q may be inf), "pucci-:a,b", "pucci+:a,b",
/// "porous:σ", "finsler:w=w1,w2", "finsler-l4:w=w1,w2", "quasi-iso:c".
/// `x_radius` bounds |x| over the domain for coefficient fields that grow in x.
inline OperatorSpec parse_operator(std::string_view text, Source f = Source::zero(), double x_radius = 1.5) {
  auto [head, args] = detail::split_head(text);
  if (head == "laplacian" && args.empty()) return OperatorSpec::laplacian(std::move(f));
  if (head == "qlap") {
    auto v = detail::parse_number_list(args, "qlap");
    if (v.size() != 1) throw usage_error("qlap takes one exponent");
    return OperatorSpec::q_laplacian(v[0], std::move(f));
  }
  if (head == "pucci-" || head == "pucci+") {
    auto v = detail::parse_number_list(args, head);
    if (v.size() != 2) throw usage_error(head + " takes a,b");
    return head == "pucci-" ? OperatorSpec::pucci_minus(v[0], v[1], std::move(f))
                            : OperatorSpec::pucci_plus(v[0], v[1], std::move(f));
  }
  if (head == "porous") {
    auto v = detail::parse_number_list(args, "porous");
    if (v.size() != 1) throw usage_error("porous takes one exponent");
    return OperatorSpec::porous(v[0], std::move(f));
  }
  if (head == "finsler" || head == "finsler-l4") {
    if (args.rfind("w=", 0) != 0) throw usage_error(head + " expects w=w1,w2,...");
    FinslerGauge g;
    g.type = head == "finsler" ? FinslerGauge::Type::weighted_l2 : FinslerGauge::Type::weighted_l4;
    g.w = detail::parse_number_list(args.substr(2), head);
    return OperatorSpec::finsler(std::move(g), std::move(f));
  }
  if (head == "quasi-iso") {
    auto v = detail::parse_number_list(args, "quasi-iso");
    if (v.size() != 1 || v[0] < 0.0) throw usage_error("quasi-iso takes one nonnegative coefficient");
    const double c = v[0];
    return OperatorSpec::quasilinear(
        [c](const Vec& x, const Vec& xi) {
          return Mat((1.0 + c * x.squaredNorm()) * Mat::Identity(xi.size(), xi.size()));
        },
        1.0 + c * x_radius * x_radius, std::move(f), false, "quasi-iso:" + std::to_string(c));
  }
  throw usage_error("unknown operator '" + std::string(text) + "'");
}

}  // namespace parakon
