#pragma once

#include "parakon/errors.hpp"
#include "parakon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parakon {

/// A point of the open simplex: m >= 2 strictly positive weights summing to 1.
class Weights {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit Weights(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw usage_error("weights need at least two entries");
    double sum = 0.0;
    for (double w : values_) {
      if (!(w > 0.0) || !std::isfinite(w))
        throw domain_error("weights must be strictly positive and finite");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw domain_error("weights sum to " + std::to_string(sum) + ", expected 1");
    for (double& w : values_) w /= sum;
  }

  static Weights uniform(std::size_t m) {
    return Weights(std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  /// (w, 1 - w); the common two-point case.
  static Weights pair(double w) { return Weights({w, 1.0 - w}); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// Extended-real exponent of a power mean. Zero and the infinities are tagged
/// so that they always take the closed-form branch.
class Exponent {
 public:
  enum class Kind { finite, zero, plus_infinity, minus_infinity };

  static Exponent of(double p) {
    if (std::isnan(p)) throw domain_error("exponent is NaN");
    if (p == std::numeric_limits<double>::infinity()) return Exponent(Kind::plus_infinity, p);
    if (p == -std::numeric_limits<double>::infinity()) return Exponent(Kind::minus_infinity, p);
    if (p == 0.0) return Exponent(Kind::zero, 0.0);
    return Exponent(Kind::finite, p);
  }
  static Exponent zero() { return of(0.0); }
  static Exponent plus_infinity() { return of(std::numeric_limits<double>::infinity()); }
  static Exponent minus_infinity() { return of(-std::numeric_limits<double>::infinity()); }

  Kind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }

 private:
  Exponent(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

/// λ-weighted p-mean of nonnegative numbers, including the limit cases
/// p = 0 (geometric), ±∞ (max/min), and the convention that a zero entry
/// forces the mean to 0 for p <= 0.
inline double p_mean(std::span<const double> a, const Weights& w, Exponent p) {
  if (a.size() != w.size())
    throw usage_error("p_mean: " + std::to_string(a.size()) + " values but " +
                      std::to_string(w.size()) + " weights");
  bool has_zero = false;
  for (double x : a) {
    if (!std::isfinite(x)) throw domain_error("p_mean: non-finite entry");
    if (x < 0.0) throw domain_error("p_mean: negative entry");
    has_zero = has_zero || x == 0.0;
  }
  switch (p.kind()) {
    case Exponent::Kind::plus_infinity:
      return *std::max_element(a.begin(), a.end());
    case Exponent::Kind::minus_infinity:
      return *std::min_element(a.begin(), a.end());
    case Exponent::Kind::zero: {
      if (has_zero) return 0.0;
      double log_mean = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) log_mean += w[i] * std::log(a[i]);
      return std::exp(log_mean);
    }
    case Exponent::Kind::finite:
      break;
  }
  const double q = p.value();
  if (q < 0.0 && has_zero) return 0.0;
  if (q > 0.0 && has_zero) {
    // 0^q = 0 contributes literally; the remaining entries are strictly positive.
    bool all_zero = std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
    if (all_zero) return 0.0;
  }
  // Factor out the dominant entry and work in logs:
  //   M_q = exp(L + log(sum w_i exp(q (log a_i - L))) / q)
  // with log1p/expm1 so that |q| -> 0 keeps full precision.
  double ref = 0.0;
  if (q > 0.0) {
    ref = *std::max_element(a.begin(), a.end());
  } else {
    ref = *std::min_element(a.begin(), a.end());
  }
  const double log_ref = std::log(ref);
  double excess = 0.0;  // sum w_i (exp(q (log a_i - L)) - 1)
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      excess += w[i] * -1.0;
      continue;
    }
    excess += w[i] * std::expm1(q * (std::log(a[i]) - log_ref));
  }
  return std::exp(log_ref + std::log1p(excess) / q);
}

inline double p_mean(std::span<const double> a, const Weights& w, double p) {
  return p_mean(a, w, Exponent::of(p));
}

struct SpaceTimePoint {
  Vec x;
  double t = 0.0;
};

/// (Σ λ_i x_i, M_α(t; λ)): the space-time point at which parabolic
/// concavity compares values.
inline SpaceTimePoint parabolic_combination(std::span<const SpaceTimePoint> points,
                                            const Weights& w, double alpha) {
  if (points.size() != w.size())
    throw usage_error("parabolic_combination: point/weight count mismatch");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("alpha must lie in (0, 1]");
  const auto n = points.front().x.size();
  SpaceTimePoint out{Vec::Zero(n), 0.0};
  std::vector<double> times(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].x.size() != n) throw usage_error("parabolic_combination: mixed dimensions");
    if (points[i].t < 0.0) throw domain_error("parabolic_combination: negative time");
    out.x += w[i] * points[i].x;
    times[i] = points[i].t;
  }
  out.t = p_mean(times, w, alpha);
  return out;
}

/// Exponents (p, α) of the concavity notion plus the optional transformation
/// parameter k.
struct PowerParams {
  double p = 0.5;
  double alpha = 0.5;
  std::optional<double> k;

  void validate() const {
    if (!(p <= 1.0)) throw domain_error("p must satisfy p <= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("alpha must lie in (0, 1]");
  }
};

/// sgn*(p): +1 for p >= 0, -1 for p < 0.
inline int sign_star(double p) { return p >= 0.0 ? 1 : -1; }

}  // namespace parakon
