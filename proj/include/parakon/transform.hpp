#pragma once

#include "parakon/errors.hpp"
#include "parakon/grid_function.hpp"
#include "parakon/linalg.hpp"
#include "parakon/operators.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace parakon {

/// G_k^{p,α}: the operator F rewritten for v = u^p(x, t^{1/α}) (log u when
/// p = 0) and multiplied by r^k (e^{kr}).
struct TransformedOperator {
  OperatorSpec base;
  double k = 1.0;
  double p = 0.5;
  double alpha = 0.5;
};

namespace detail {

inline double time_back(double t, double alpha) {
  if (t < 0.0) throw domain_error("transformed time must be nonnegative");
  return std::pow(t, 1.0 / alpha);
}

}  // namespace detail

inline double eval_G(const TransformedOperator& T, const Vec& x, double t, double r, const Vec& xi,
                     const Mat& X) {
  if (xi.squaredNorm() == 0.0)
    throw singular_point_error("eval_G at xi = 0; use eval_h_tilde");
  const double s = detail::time_back(t, T.alpha);
  const Mat xx = xi * xi.transpose();
  if (T.p == 0.0) {
    const double e = std::exp(r);
    return std::exp(T.k * r) * eval_F(T.base, x, s, e, e * xi, Mat(e * (X + xx)));
  }
  if (!(r > 0.0)) throw domain_error("eval_G: r = " + std::to_string(r) + " must be positive for p != 0");
  const double p = T.p;
  const double u = std::pow(r, 1.0 / p);
  const double c1 = std::pow(r, 1.0 / p - 1.0) / p;
  const double c2 = (1.0 - p) / (p * p) * std::pow(r, 1.0 / p - 2.0);
  return std::pow(r, T.k) * eval_F(T.base, x, s, u, c1 * xi, Mat(c1 * X + c2 * xx));
}

/// h̃(x, t, r) = r^k h(x, t^{1/α}, r^{1/p}), or e^{kr} h(x, t^{1/α}, e^r) at p = 0.
inline double eval_h_tilde(const TransformedOperator& T, const Vec& x, double t, double r) {
  const double s = detail::time_back(t, T.alpha);
  if (T.p == 0.0) return std::exp(T.k * r) * eval_h(T.base, x, s, std::exp(r));
  if (!(r > 0.0)) throw domain_error("eval_h_tilde: r must be positive for p != 0");
  return std::pow(r, T.k) * eval_h(T.base, x, s, std::pow(r, 1.0 / T.p));
}

namespace detail {

inline double to_v(double u, double p) {
  if (p == 0.0) return u > 0.0 ? std::log(u) : -std::numeric_limits<double>::infinity();
  if (p > 0.0) return std::pow(std::max(u, 0.0), p);
  return u > 0.0 ? std::pow(u, p) : std::numeric_limits<double>::infinity();
}

inline double to_u(double v, double p) {
  if (p == 0.0) return std::exp(v);
  if (p > 0.0) return std::pow(std::max(v, 0.0), 1.0 / p);
  return std::isinf(v) ? 0.0 : std::pow(v, 1.0 / p);
}

/// Samples `src` at the times times[n] via monotone cubic interpolation,
/// then applies `map` node by node.
template <class Map>
GridFunction resample(const GridFunction& src, double new_dt, std::size_t nt, Map&& map_time) {
  GridFunction out(src.raster(), new_dt, nt, src.kind());
  for (std::size_t n = 0; n < nt; ++n) {
    const double t_src = map_time(static_cast<double>(n) * new_dt);
    for (std::size_t node = 0; node < src.nodes(); ++node) out.at(n, node) = src.node_in_time(node, t_src);
  }
  return out;
}

}  // namespace detail

/// v(x, τ) = u(x, τ^{1/α})^p (log u at p = 0) on the uniform τ-grid with
/// N_τ = N_t and τ_max = T^α. Boundary nodes and the initial slice map to
/// ±∞ when p ≤ 0.
inline GridFunction forward_transform(const GridFunction& u, double p, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("alpha must lie in (0, 1]");
  if (!(p <= 1.0)) throw domain_error("p must satisfy p <= 1");
  if (u.kind() != FieldKind::u) throw usage_error("forward_transform expects a u-field");
  const std::size_t nt = u.nt();
  const double tau_max = std::pow(u.final_time(), alpha);
  const double dtau = nt > 1 ? tau_max / static_cast<double>(nt - 1) : 1.0;
  const Raster& r = u.raster();
  if (p <= 0.0) {
    for (std::size_t n = 1; n < nt; ++n) {
      for (std::size_t node = 0; node < u.nodes(); ++node) {
        if (r.kind[node] == NodeKind::interior && !(u.at(n, node) > 0.0)) {
          throw domain_error("forward_transform: u = " + std::to_string(u.at(n, node)) + " <= 0 at node " +
                             to_string(r.position(node)) + ", t = " + std::to_string(u.time(n)) +
                             " under p = " + std::to_string(p));
        }
      }
    }
  }
  GridFunction v = detail::resample(u, dtau, nt, [alpha](double tau) { return std::pow(tau, 1.0 / alpha); });
  for (std::size_t n = 0; n < nt; ++n) {
    for (std::size_t node = 0; node < v.nodes(); ++node) {
      double& val = v.at(n, node);
      const bool pinned = n == 0 || r.kind[node] != NodeKind::interior;
      val = pinned && p <= 0.0 ? detail::to_v(0.0, p) : detail::to_v(val, p);
    }
  }
  v.set_transform(p, alpha);
  return v;
}

/// u(x, t) = v(x, t^α)^{1/p} (exp v at p = 0) on the uniform t-grid with
/// N_t = N_τ and T = τ_max^{1/α}.
inline GridFunction inverse_transform(const GridFunction& v, double p, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("alpha must lie in (0, 1]");
  if (!(p <= 1.0)) throw domain_error("p must satisfy p <= 1");
  const std::size_t nt = v.nt();
  const double T = std::pow(v.final_time(), 1.0 / alpha);
  const double dt = nt > 1 ? T / static_cast<double>(nt - 1) : 1.0;
  const Raster& r = v.raster();
  if (p < 0.0) {
    for (std::size_t n = 1; n < nt; ++n)
      for (std::size_t node = 0; node < v.nodes(); ++node)
        if (r.kind[node] == NodeKind::interior && std::isfinite(v.at(n, node)) && !(v.at(n, node) > 0.0))
          throw domain_error("inverse_transform: v <= 0 at node " + to_string(r.position(node)) + " under p < 0");
  }
  GridFunction u = detail::resample(v, dt, nt, [alpha](double t) { return std::pow(t, alpha); });
  for (std::size_t n = 0; n < nt; ++n) {
    for (std::size_t node = 0; node < u.nodes(); ++node) {
      double& val = u.at(n, node);
      const bool pinned = n == 0 || r.kind[node] != NodeKind::interior;
      if (pinned && p <= 0.0) {
        val = 0.0;
        continue;
      }
      if (std::isnan(val)) throw domain_error("inverse_transform: undefined value at node " + to_string(r.position(node)));
      val = detail::to_u(val, p);
    }
  }
  u.set_kind(FieldKind::u);
  return u;
}

}  // namespace parakon
