#pragma once

#include "parakon/errors.hpp"
#include "parakon/geometry.hpp"
#include "parakon/grid_function.hpp"
#include "parakon/means.hpp"
#include "parakon/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace parakon {

/// x = Σ λ_i x_i, τ = Σ λ_i τ_i realizing the envelope value at one node.
struct Decomposition {
  std::vector<Vec> x;
  std::vector<double> tau;
  /// x_i sits on (or next to, for interpolated points) a Dirichlet node of Ω_i
  std::vector<bool> on_boundary;
};

/// V (v-variables, τ-grid) and U = V^{1/p} (exp V at p = 0) on a target
/// raster over Ω_λ. Slice n holds τ_n = n Δτ, i.e. t_n = τ_n^{1/α}.
class EnvelopeField {
 public:
  EnvelopeField(Raster raster, double dtau, std::size_t nt, Weights lambda, double p, double alpha)
      : raster_(std::move(raster)), dtau_(dtau), nt_(nt), lambda_(std::move(lambda)), p_(p), alpha_(alpha),
        V_(raster_.size() * nt, 0.0), U_(raster_.size() * nt, 0.0), argmax_(raster_.size() * nt) {}

  const Raster& raster() const noexcept { return raster_; }
  std::size_t nt() const noexcept { return nt_; }
  std::size_t nodes() const noexcept { return raster_.size(); }
  double dtau() const noexcept { return dtau_; }
  double tau(std::size_t n) const noexcept { return static_cast<double>(n) * dtau_; }
  double time(std::size_t n) const { return std::pow(tau(n), 1.0 / alpha_); }
  const Weights& lambda() const noexcept { return lambda_; }
  double p() const noexcept { return p_; }
  double alpha() const noexcept { return alpha_; }

  double& V(std::size_t n, std::size_t node) { return V_[n * nodes() + node]; }
  double V(std::size_t n, std::size_t node) const { return V_[n * nodes() + node]; }
  double& U(std::size_t n, std::size_t node) { return U_[n * nodes() + node]; }
  double U(std::size_t n, std::size_t node) const { return U_[n * nodes() + node]; }
  std::optional<Decomposition>& argmax(std::size_t n, std::size_t node) { return argmax_[n * nodes() + node]; }
  const std::optional<Decomposition>& argmax(std::size_t n, std::size_t node) const {
    return argmax_[n * nodes() + node];
  }

  /// Set when m > 2 was handled by iterated pairwise combination.
  bool pairwise_iterated = false;
  /// Set when the input domains differ (the pairwise caveat applies).
  bool domains_differ = false;

  /// V as a PKGF v-field on the τ-grid.
  GridFunction v_field() const {
    GridFunction g(raster_, dtau_, nt_, FieldKind::v);
    for (std::size_t n = 0; n < nt_; ++n)
      for (std::size_t k = 0; k < nodes(); ++k) g.at(n, k) = V(n, k);
    g.set_transform(p_, alpha_);
    return g;
  }

  /// CSV: slice, tau, t, node coordinates, V, U, then x_i and tau_i per part.
  void write_csv(std::ostream& out) const {
    const int d = raster_.dim;
    out << "slice,tau,t," << (d == 2 ? "x,y," : "x,") << "V,U";
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
      out << ",x" << i + 1;
      if (d == 2) out << ",y" << i + 1;
      out << ",tau" << i + 1;
    }
    out << '\n';
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.12g", v);
      return std::string(buf);
    };
    for (std::size_t n = 0; n < nt_; ++n) {
      for (std::size_t k = 0; k < nodes(); ++k) {
        if (raster_.kind[k] != NodeKind::interior) continue;
        const Vec x = raster_.position(k);
        out << n << ',' << num(tau(n)) << ',' << num(time(n)) << ',' << num(x(0)) << ',';
        if (d == 2) out << num(x(1)) << ',';
        out << num(V(n, k)) << ',' << num(U(n, k));
        const auto& dec = argmax(n, k);
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
          if (dec) {
            out << ',' << num(dec->x[i](0));
            if (d == 2) out << ',' << num(dec->x[i](1));
            out << ',' << num(dec->tau[i]);
          } else {
            out << (d == 2 ? ",,," : ",,");
          }
        }
        out << '\n';
      }
    }
  }

 private:
  Raster raster_;
  double dtau_;
  std::size_t nt_;
  Weights lambda_;
  double p_, alpha_;
  std::vector<double> V_, U_;
  std::vector<std::optional<Decomposition>> argmax_;
};

struct EnvelopeOptions {
  /// Target raster; empty rasterizes the Minkowski combination at the
  /// finest input spacing.
  std::optional<Raster> target;
  /// Extra search around the best grid decomposition at quarter spacing.
  bool refine = false;
  unsigned threads = 1;
};

namespace detail {

inline double v_at_node(const GridFunction& v, std::size_t n, std::size_t node) { return v.at(n, node); }

/// v(x, τ) by bilinear interpolation in space and linear interpolation in τ.
inline std::optional<double> v_interp(const GridFunction& v, const Vec& x, double tau) {
  auto r = v.interpolate(x, tau);
  if (!r || !std::isfinite(*r)) return std::nullopt;
  return r;
}

inline bool near_dirichlet(const Raster& r, const Vec& x) {
  const int i = static_cast<int>(std::lround((x(0) - r.origin.x()) / r.h));
  const int j = r.dim == 2 ? static_cast<int>(std::lround((x(1) - r.origin.y()) / r.h)) : 0;
  return r.at(i, j) != NodeKind::interior;
}

/// Pairwise envelope W(x, τ) = opt over x = a y + b z, τ = a σ + b ς of
/// a w1(y, σ) + b w2(z, ς), with y over the closure nodes of w1's raster and
/// σ over the τ nodes. `better(a, b)` is > for sup and < for inf.
struct PairResult {
  std::vector<double> values;  // per (n, node) of the target
  std::vector<std::optional<std::pair<Decomposition, bool>>> arg;
};

template <class Better>
PairResult pair_envelope(const GridFunction& w1, const GridFunction& w2, double a, double b, const Raster& target,
                         std::size_t nt, double dtau, bool refine, unsigned threads, Better better, double worst) {
  const std::size_t N = target.size();
  PairResult res;
  res.values.assign(N * nt, worst);
  res.arg.assign(N * nt, std::nullopt);
  std::vector<std::size_t> closure1;
  for (std::size_t k = 0; k < w1.nodes(); ++k)
    if (w1.raster().kind[k] != NodeKind::outside) closure1.push_back(k);
  std::vector<Vec> pos1;
  for (std::size_t k : closure1) pos1.push_back(w1.raster().position(k));
  const double tau_max = dtau * static_cast<double>(nt - 1);

  auto work = [&](std::size_t node_begin, std::size_t node_end) {
    for (std::size_t node = node_begin; node < node_end; ++node) {
      if (target.kind[node] != NodeKind::interior) continue;
      const Vec x = target.position(node);
      for (std::size_t n = 0; n < nt; ++n) {
        const double tau = dtau * static_cast<double>(n);
        double best = worst;
        std::optional<Decomposition> best_dec;
        auto consider = [&](const Vec& y, double s, std::optional<double> w1v) {
          const double s2 = (tau - a * s) / b;
          if (s2 < -1e-12 * std::max(1.0, tau_max) || s2 > tau_max * (1.0 + 1e-12)) return;
          const Vec z = (x - a * y) / b;
          if (!w1v) w1v = v_interp(w1, y, s);
          if (!w1v) return;
          auto w2v = v_interp(w2, z, std::clamp(s2, 0.0, tau_max));
          if (!w2v) return;
          const double val = a * *w1v + b * *w2v;
          if (!best_dec || better(val, best)) {
            best = val;
            best_dec = Decomposition{{y, z}, {s, std::clamp(s2, 0.0, tau_max)}, {}};
          }
        };
        // Trivial decomposition first: guarantees the definition lower bound.
        consider(x, tau, std::nullopt);
        for (std::size_t c = 0; c < closure1.size(); ++c) {
          for (std::size_t m1 = 0; m1 < nt; ++m1) {
            const double s = dtau * static_cast<double>(m1);
            const double w1v = w1.at(m1, closure1[c]);
            if (!std::isfinite(w1v)) continue;
            consider(pos1[c], s, w1v);
          }
        }
        if (refine && best_dec) {
          const Vec y0 = best_dec->x[0];
          const double s0 = best_dec->tau[0];
          const double hy = w1.raster().h / 4.0, hs = dtau / 4.0;
          const int dy = w1.raster().dim == 2 ? 3 : 0;
          for (int ox = -3; ox <= 3; ++ox)
            for (int oy = -dy; oy <= dy; ++oy)
              for (int os = -3; os <= 3; ++os) {
                Vec y = y0;
                y(0) += ox * hy;
                if (dy) y(1) += oy * hy;
                const double s = s0 + os * hs;
                if (s < 0.0 || s > tau_max) continue;
                consider(y, s, std::nullopt);
              }
        }
        res.values[n * N + node] = best;
        if (best_dec) res.arg[n * N + node] = std::make_pair(*best_dec, true);
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, N);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (N + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b0 = t * chunk, b1 = std::min(N, b0 + chunk);
      if (b0 < b1) pool.emplace_back(work, b0, b1);
    }
    for (auto& th : pool) th.join();
  }
  return res;
}

inline GridFunction as_v_field(const Raster& r, double dtau, std::size_t nt, const std::vector<double>& values,
                               double boundary_value) {
  GridFunction g(r, dtau, nt, FieldKind::v);
  for (std::size_t n = 0; n < nt; ++n)
    for (std::size_t k = 0; k < r.size(); ++k) {
      const bool pinned = r.kind[k] != NodeKind::interior || n == 0;
      const double v = values[n * r.size() + k];
      g.at(n, k) = pinned && !std::isfinite(v) ? boundary_value : v;
    }
  return g;
}

}  // namespace detail

/// V(x, τ) = sup (p ≥ 0) or inf (p < 0) of Σ λ_i v_i(x_i, τ_i) over
/// x = Σ λ_i x_i, τ = Σ λ_i τ_i, searched on the τ nodes and the closure
/// nodes of each part. m > 2 runs as an iterated pairwise combination.
inline EnvelopeField compute_V(std::span<const GridFunction> vs, std::span<const Domain> domains, const Weights& lambda,
                               double p, const EnvelopeOptions& opt = {}) {
  const std::size_t m = lambda.size();
  if (vs.size() != m || domains.size() != m) throw usage_error("compute_V: need one field and domain per weight");
  const std::size_t nt = vs.front().nt();
  const double dtau = vs.front().dt();
  double h = std::numeric_limits<double>::infinity();
  for (const auto& v : vs) {
    if (v.nt() != nt || std::abs(v.dt() - dtau) > 1e-12 * std::max(1.0, dtau))
      throw usage_error("compute_V: inputs must share the tau grid");
    h = std::min(h, v.raster().h);
  }
  const Raster target = opt.target ? *opt.target : rasterize(minkowski_combination(domains, lambda), h);
  const double alpha = vs.front().kind() == FieldKind::v ? vs.front().alpha() : 1.0;
  EnvelopeField field(target, dtau, nt, lambda, p, alpha);
  field.pairwise_iterated = m > 2;
  for (std::size_t i = 1; i < m; ++i) {
    if (domains[i].shape().index() != domains[0].shape().index() ||
        std::abs(domains[i].measure() - domains[0].measure()) > 1e-12 ||
        (domains[i].bounding_box().first - domains[0].bounding_box().first).norm() > 1e-12)
      field.domains_differ = true;
  }
  const bool sup = p >= 0.0;
  const double worst = sup ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  // v on Dirichlet nodes / τ = 0: 0 for p > 0, −∞ (log) at p = 0, +∞ for p < 0.
  const double pinned = p > 0.0 ? 0.0 : worst;
  auto better = [sup](double a, double b) { return sup ? a > b : a < b; };

  GridFunction acc = vs[0];
  double acc_w = lambda[0];
  Domain acc_domain = domains[0];
  std::vector<std::optional<Decomposition>> decs;  // decompositions of acc
  for (std::size_t i = 1; i < m; ++i) {
    const double total = acc_w + lambda[i];
    const double a = acc_w / total, b = lambda[i] / total;
    const bool last = i + 1 == m;
    Raster tgt;
    Domain next_domain = acc_domain;
    if (last) {
      tgt = target;
    } else {
      const Weights w2({a, b});
      std::vector<Domain> pair{acc_domain, domains[i]};
      next_domain = minkowski_combination(std::span<const Domain>(pair), w2);
      tgt = rasterize(next_domain, h);
    }
    const auto res = detail::pair_envelope(acc, vs[i], a, b, tgt, nt, dtau, opt.refine, opt.threads, better, worst);
    // Compose decompositions: the first part refers to the accumulated field.
    std::vector<std::optional<Decomposition>> next_decs(tgt.size() * nt);
    for (std::size_t q = 0; q < res.arg.size(); ++q) {
      if (!res.arg[q]) continue;
      const Decomposition& d = res.arg[q]->first;
      Decomposition full;
      if (i == 1) {
        full = d;
      } else {
        // Nearest node decomposition of the intermediate point.
        const Raster& ar = acc.raster();
        const int ii = std::clamp(static_cast<int>(std::lround((d.x[0](0) - ar.origin.x()) / ar.h)), 0, ar.nx - 1);
        const int jj = ar.dim == 2
                           ? std::clamp(static_cast<int>(std::lround((d.x[0](1) - ar.origin.y()) / ar.h)), 0, ar.ny - 1)
                           : 0;
        const auto nn = static_cast<std::size_t>(std::clamp<long>(std::lround(d.tau[0] / dtau), 0, static_cast<long>(nt) - 1));
        const auto& inner = decs[nn * ar.size() + ar.index(ii, jj)];
        if (inner) {
          full = *inner;
        } else {
          full.x.assign(i, d.x[0]);
          full.tau.assign(i, d.tau[0]);
        }
        full.x.push_back(d.x[1]);
        full.tau.push_back(d.tau[1]);
      }
      next_decs[q] = std::move(full);
    }
    acc = detail::as_v_field(tgt, dtau, nt, res.values, pinned);
    acc.set_transform(p, alpha);
    decs = std::move(next_decs);
    acc_w = total;
    acc_domain = next_domain;
  }

  for (std::size_t n = 0; n < nt; ++n) {
    for (std::size_t k = 0; k < target.size(); ++k) {
      double v = acc.at(n, k);
      if (target.kind[k] != NodeKind::interior || n == 0) v = pinned;
      field.V(n, k) = v;
      field.U(n, k) = detail::to_u(v, p);
      if (target.kind[k] == NodeKind::interior) {
        auto dec = decs[n * target.size() + k];
        if (!dec && n > 0)
          throw domain_error("compute_V: no feasible decomposition at " + to_string(target.position(k)));
        if (dec) {
          dec->on_boundary.clear();
          for (std::size_t i = 0; i < m; ++i)
            dec->on_boundary.push_back(detail::near_dirichlet(vs[i].raster(), dec->x[i]));
        }
        field.argmax(n, k) = std::move(dec);
      }
    }
  }
  return field;
}

/// U_{p,λ} via v_i = forward_transform(u_i) and the inverse map of V.
inline EnvelopeField compute_U(std::span<const GridFunction> us, std::span<const Domain> domains, const Weights& lambda,
                               double p, double alpha, const EnvelopeOptions& opt = {}) {
  std::vector<GridFunction> vs;
  vs.reserve(us.size());
  for (const auto& u : us) {
    if (u.nt() != us.front().nt() || std::abs(u.final_time() - us.front().final_time()) > 1e-12)
      throw usage_error("compute_U: inputs must share the time grid");
    vs.push_back(forward_transform(u, p, alpha));
  }
  return compute_V(vs, domains, lambda, p, opt);
}

struct EnvelopeComparison {
  double max_excess = -std::numeric_limits<double>::infinity();  ///< max (U - u_λ)
  double max_abs = 0.0;                                           ///< max |U - u_λ|
  std::size_t node = 0;
  std::size_t slice = 0;
};

/// max over interior target nodes and slices of U(x, t_n) - u_λ(x, t_n),
/// with u_λ interpolated in time by monotone cubics.
inline EnvelopeComparison compare_envelope(const EnvelopeField& U, const GridFunction& u_lambda) {
  if (!U.raster().same_grid(u_lambda.raster())) throw usage_error("compare_envelope: spatial grids differ");
  const double T = U.time(U.nt() - 1);
  if (std::abs(T - u_lambda.final_time()) > 1e-9 * std::max(1.0, T))
    throw usage_error("compare_envelope: time ranges differ (" + std::to_string(T) + " vs " +
                      std::to_string(u_lambda.final_time()) + ")");
  EnvelopeComparison c;
  for (std::size_t n = 0; n < U.nt(); ++n) {
    const double t = std::min(U.time(n), u_lambda.final_time());
    for (std::size_t k = 0; k < U.nodes(); ++k) {
      if (U.raster().kind[k] != NodeKind::interior) continue;
      const double d = U.U(n, k) - u_lambda.node_in_time(k, t);
      if (d > c.max_excess) {
        c.max_excess = d;
        c.node = k;
        c.slice = n;
      }
      c.max_abs = std::max(c.max_abs, std::abs(d));
    }
  }
  return c;
}

/// Argmax parts sitting on Dirichlet nodes (interior-maximizer check).
inline std::size_t argmax_boundary_hits(const EnvelopeField& U) {
  std::size_t hits = 0;
  for (std::size_t n = 1; n < U.nt(); ++n)
    for (std::size_t k = 0; k < U.nodes(); ++k) {
      const auto& d = U.argmax(n, k);
      if (!d) continue;
      for (bool b : d->on_boundary) hits += b;
    }
  return hits;
}

/// Discrete Lipschitz bound of v = u^p (log u) over space and τ, from
/// differences between neighbouring finite values.
inline double lipschitz_estimate(const GridFunction& v) {
  const Raster& r = v.raster();
  double L = 0.0;
  for (std::size_t n = 0; n < v.nt(); ++n) {
    for (std::size_t k = 0; k < v.nodes(); ++k) {
      if (r.kind[k] == NodeKind::outside) continue;
      const double a = v.at(n, k);
      if (!std::isfinite(a)) continue;
      const int i = r.ix(k), j = r.jy(k);
      auto diff = [&](int di, int dj) {
        if (!r.in_range(i + di, j + dj) || r.at(i + di, j + dj) == NodeKind::outside) return;
        const double b = v.at(n, r.index(i + di, j + dj));
        if (std::isfinite(b)) L = std::max(L, std::abs(b - a) / r.h);
      };
      diff(1, 0);
      if (r.dim == 2) diff(0, 1);
      if (n + 1 < v.nt()) {
        const double b = v.at(n + 1, k);
        if (std::isfinite(b)) L = std::max(L, std::abs(b - a) / v.dt());
      }
    }
  }
  return L;
}

struct ConcavityWitness {
  Vec x1, x2;
  double t1 = 0.0, t2 = 0.0;
  double lambda = 0.5;
  double combined = 0.0;  ///< u at the combined point
  double mean = 0.0;      ///< M_p of the two values
};

struct ConcavityReport {
  std::size_t samples = 0;
  std::size_t skipped = 0;
  double min_deficit = std::numeric_limits<double>::infinity();
  std::optional<ConcavityWitness> witness;
  double tolerance = 0.0;
  double lipschitz = 0.0;

  bool passed() const noexcept { return min_deficit >= -tolerance; }
};

struct ConcavityOptions {
  std::size_t pair_count = 2000;
  /// λ values tried for every pair, plus one random λ.
  std::vector<double> lambdas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  bool random_lambda = true;
  /// Earliest sampled time as a fraction of T (t = 0 is a boundary slice).
  double t_min_fraction = 0.0;
  /// Only sample points whose value exceeds this (p ≤ 0 needs u > 0).
  double min_value = 0.0;
};

/// min over sampled pairs and λ of
/// u(λx₁+(1-λ)x₂, M_α(t₁,t₂)) - M_p(u(x₁,t₁), u(x₂,t₂)).
inline ConcavityReport concavity_deficit(const GridFunction& u, double p, double alpha, Rng& rng,
                                         const ConcavityOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("alpha must lie in (0, 1]");
  if (!(p <= 1.0)) throw domain_error("p must satisfy p <= 1");
  const Raster& r = u.raster();
  ConcavityReport rep;
  // Tolerance from the discrete Lipschitz constant of the transformed field.
  if (u.kind() == FieldKind::u && u.nt() > 1 && u.final_time() > 0.0) {
    const GridFunction v = forward_transform(u, p, alpha);
    rep.lipschitz = lipschitz_estimate(v);
  } else {
    rep.lipschitz = lipschitz_estimate(u);
  }
  rep.tolerance = 5.0 * (r.h + u.dt()) * rep.lipschitz;

  std::vector<std::size_t> inner;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r.kind[k] == NodeKind::interior) inner.push_back(k);
  if (inner.empty()) throw usage_error("concavity_deficit: no interior nodes");
  const double T = u.final_time();
  auto sample_point = [&](Vec& x, double& t, double& val) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const std::size_t k = inner[std::uniform_int_distribution<std::size_t>(0, inner.size() - 1)(rng)];
      x = r.position(k);
      for (int d = 0; d < r.dim; ++d) x(d) += uniform(rng, -0.5, 0.5) * r.h;
      t = u.nt() > 1 ? uniform(rng, opt.t_min_fraction * T, T) : 0.0;
      auto v = u.interpolate(x, t);
      if (v && *v > opt.min_value) {
        val = *v;
        return true;
      }
    }
    return false;
  };
  const Exponent pe = Exponent::of(p);
  for (std::size_t c = 0; c < opt.pair_count; ++c) {
    Vec x1, x2;
    double t1 = 0.0, t2 = 0.0, u1 = 0.0, u2 = 0.0;
    if (!sample_point(x1, t1, u1) || !sample_point(x2, t2, u2)) {
      ++rep.skipped;
      continue;
    }
    std::vector<double> ls = opt.lambdas;
    if (opt.random_lambda) ls.push_back(uniform(rng, 0.01, 0.99));
    for (double l : ls) {
      const Weights w = Weights::pair(l);
      const Vec xc = l * x1 + (1.0 - l) * x2;
      const double times[2] = {t1, t2};
      const double tc = u.nt() > 1 ? p_mean(times, w, alpha) : 0.0;
      auto uc = u.interpolate(xc, tc);
      if (!uc) {
        ++rep.skipped;
        continue;
      }
      const double vals[2] = {u1, u2};
      const double mean = p_mean(vals, w, pe);
      const double deficit = *uc - mean;
      ++rep.samples;
      if (deficit < rep.min_deficit) {
        rep.min_deficit = deficit;
        rep.witness = ConcavityWitness{x1, x2, t1, t2, l, *uc, mean};
      }
    }
  }
  return rep;
}

}  // namespace parakon
