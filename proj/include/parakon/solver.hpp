#pragma once

#include "parakon/errors.hpp"
#include "parakon/geometry.hpp"
#include "parakon/grid_function.hpp"
#include "parakon/linalg.hpp"
#include "parakon/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace parakon {

enum class SchemeKind {
  automatic,  ///< wide8 for Pucci operators, axis otherwise
  axis,       ///< 9-point monotone stencil (axis frame only for Pucci)
  wide8,      ///< axis + diagonal frames
};

inline const char* to_string(SchemeKind s) {
  switch (s) {
    case SchemeKind::automatic: return "automatic";
    case SchemeKind::axis: return "axis";
    case SchemeKind::wide8: return "wide8";
  }
  return "?";
}

struct SchemeConfig {
  double h = 1.0 / 64.0;
  /// Fixed time step; empty selects the CFL step.
  std::optional<double> dt;
  double T = 1.0;
  /// Spacing of the stored slices; empty selects T/200 (or the step, if larger).
  std::optional<double> output_dt;
  /// Gradient cutoff below which a direction-dependent operator uses its
  /// isotropic fallback; empty means 1e-8·max|u|/h, refreshed every step.
  std::optional<double> eps_grad;
  SchemeKind scheme = SchemeKind::automatic;
  bool stop_at_steady = true;
  double steady_tol = 1e-10;
  /// Initial data (zero when empty); values on Dirichlet nodes stay 0.
  std::function<double(const Vec&)> initial;
  /// Sample the ellipticity and f ≥ 0 preconditions before solving.
  bool check_structure = true;
};

namespace detail {

/// One explicit forward-Euler step of the monotone discretization.
class Stepper {
 public:
  Stepper(const OperatorSpec& spec, const Raster& raster, SchemeKind scheme, std::optional<double> eps_grad)
      : spec_(spec), r_(raster), eps_grad_(eps_grad) {
    scheme_ = scheme;
    if (scheme_ == SchemeKind::automatic) {
      const bool pucci = spec.kind() == OperatorKind::pucci_minus || spec.kind() == OperatorKind::pucci_plus;
      scheme_ = pucci ? SchemeKind::wide8 : SchemeKind::axis;
    }
    for (std::size_t k = 0; k < r_.size(); ++k)
      if (r_.kind[k] == NodeKind::interior) interior_.push_back(k);
    positions_.reserve(interior_.size());
    for (std::size_t k : interior_) positions_.push_back(r_.position(k));
    iso_ = isotropic_matrix();
    lambda_ = ellipticity_bound(spec);
    if (spec.kind() == OperatorKind::quasilinear) {
      // Coefficients may grow in x; take the larger of the declared bound and
      // the largest eigenvalue seen on the grid along a few directions.
      for (const Vec& x : positions_) {
        for (int d = 0; d < 4; ++d) {
          const double a = d * M_PI / 4.0;
          Vec e(r_.dim);
          e(0) = std::cos(a);
          if (r_.dim == 2) e(1) = std::sin(a);
          const Vec ev = symmetric_eigenvalues(spec.coefficient_field()(x, e));
          lambda_ = std::max(lambda_, ev(ev.size() - 1));
        }
      }
    }
  }

  SchemeKind scheme() const noexcept { return scheme_; }
  const std::vector<std::size_t>& interior() const noexcept { return interior_; }
  bool adaptive() const noexcept { return spec_.kind() == OperatorKind::porous_medium; }

  /// CFL step 0.9 h² / (2 n Λ); Λ uses max u for the porous medium.
  double cfl(double max_u) const {
    double L = lambda_;
    if (adaptive()) L = std::max(1.0, spec_.sigma() * std::pow(std::max(max_u, 0.0), spec_.sigma() - 1.0));
    return 0.9 * r_.h * r_.h / (2.0 * r_.dim * L);
  }

  double cutoff(const std::vector<double>& u) const {
    if (eps_grad_) return *eps_grad_;
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return 1e-8 * m / r_.h;
  }

  /// u_t = -F_num at interior node #idx (index into interior()).
  double rate(const std::vector<double>& u, std::size_t idx, double t, double eps, bool* singular = nullptr) const {
    const std::size_t node = interior_[idx];
    const int i = r_.ix(node), j = r_.jy(node);
    const Vec& x = positions_[idx];
    const double h = r_.h, h2 = h * h;
    auto U = [&](int di, int dj) { return u[r_.index(i + di, j + dj)]; };
    const double c = u[node];
    const int n = r_.dim;
    Vec xi(n);
    xi(0) = (U(1, 0) - U(-1, 0)) / (2.0 * h);
    const double dxx = (U(1, 0) - 2.0 * c + U(-1, 0)) / h2;
    double dyy = 0.0;
    if (n == 2) {
      xi(1) = (U(0, 1) - U(0, -1)) / (2.0 * h);
      dyy = (U(0, 1) - 2.0 * c + U(0, -1)) / h2;
    }
    const bool sing = spec_.gradient_singular() && xi.norm() <= eps;
    if (singular) *singular = sing;
    const Vec xi_f = sing ? Vec(Vec::Zero(n)) : xi;
    const double f = spec_.source()(x, t, std::max(c, 0.0), xi_f) + spec_.epsilon();

    switch (spec_.kind()) {
      case OperatorKind::porous_medium: {
        const double s = spec_.sigma();
        auto W = [&](int di, int dj) { return std::pow(std::max(U(di, dj), 0.0), s); };
        const double wc = std::pow(std::max(c, 0.0), s);
        double lap = (W(1, 0) - 2.0 * wc + W(-1, 0)) / h2;
        if (n == 2) lap += (W(0, 1) - 2.0 * wc + W(0, -1)) / h2;
        return lap + f;
      }
      case OperatorKind::pucci_minus:
      case OperatorKind::pucci_plus: {
        const bool minus = spec_.kind() == OperatorKind::pucci_minus;
        const double a = spec_.a(), b = spec_.b();
        // φ realizes inf (ψ realizes sup) of a·s..b·s along one direction.
        auto phi = [&](double s) { return minus ? (s >= 0.0 ? a * s : b * s) : (s >= 0.0 ? b * s : a * s); };
        double best = phi(dxx) + (n == 2 ? phi(dyy) : 0.0);
        if (n == 2 && scheme_ == SchemeKind::wide8) {
          const double d1 = (U(1, 1) - 2.0 * c + U(-1, -1)) / (2.0 * h2);
          const double d2 = (U(1, -1) - 2.0 * c + U(-1, 1)) / (2.0 * h2);
          const double diag = phi(d1) + phi(d2);
          best = minus ? std::min(best, diag) : std::max(best, diag);
        }
        return best + f;
      }
      case OperatorKind::custom: {
        Mat X(n, n);
        X(0, 0) = dxx;
        if (n == 2) {
          X(1, 1) = dyy;
          X(0, 1) = X(1, 0) = (U(1, 1) - U(1, -1) - U(-1, 1) + U(-1, -1)) / (4.0 * h2);
        }
        return -spec_.custom_F()(x, t, std::max(c, 0.0), xi, X) + spec_.epsilon();
      }
      default: break;
    }
    const Mat A = sing ? iso_ : spec_.diffusion_matrix(x, c, xi);
    if (n == 1) return A(0, 0) * dxx + f;
    const double a11 = A(0, 0), a22 = A(1, 1), a12 = 0.5 * (A(0, 1) + A(1, 0));
    const double slack = 1e-12 * (1.0 + std::abs(a11) + std::abs(a22));
    if (a11 + slack < std::abs(a12) || a22 + slack < std::abs(a12))
      throw numerical_error("coefficient matrix " + to_string(A) + " at " + to_string(x) +
                            " is not diagonally dominant; the 9-point scheme would not be monotone");
    double dxy;
    if (a12 >= 0.0) {
      dxy = (U(1, 1) - U(1, 0) - U(0, 1) + 2.0 * c - U(-1, 0) - U(0, -1) + U(-1, -1)) / (2.0 * h2);
    } else {
      dxy = -(U(1, -1) - U(1, 0) - U(0, -1) + 2.0 * c - U(-1, 0) - U(0, 1) + U(-1, 1)) / (2.0 * h2);
    }
    return a11 * dxx + a22 * dyy + 2.0 * a12 * dxy + f;
  }

  /// out = u + dt·rate(u); Dirichlet nodes stay at 0.
  double step(const std::vector<double>& u, std::vector<double>& out, double t, double dt,
              std::size_t* singular_count = nullptr) const {
    const double eps = cutoff(u);
    out.assign(u.size(), 0.0);
    double change = 0.0;
    std::size_t sing_total = 0;
    for (std::size_t idx = 0; idx < interior_.size(); ++idx) {
      bool sing = false;
      const std::size_t node = interior_[idx];
      out[node] = u[node] + dt * rate(u, idx, t, eps, &sing);
      sing_total += sing;
      change = std::max(change, std::abs(out[node] - u[node]));
    }
    if (singular_count) *singular_count = sing_total;
    return change;
  }

 private:
  Mat isotropic_matrix() const {
    const int n = r_.dim;
    Vec e(n);
    e.setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    switch (spec_.kind()) {
      case OperatorKind::normalized_q_laplacian:
        if (n == 1) return Mat::Constant(1, 1, std::isinf(spec_.q()) ? 1.0 : spec_.q() - 1.0);
        if (std::isinf(spec_.q())) return Mat(Mat::Identity(n, n) / n);
        return Mat((1.0 + (spec_.q() - 2.0) / n) * Mat::Identity(n, n));
      case OperatorKind::finsler: return spec_.gauge().A(e);
      case OperatorKind::quasilinear: {
        Vec e1 = Vec::Zero(n);
        e1(0) = 1.0;
        return spec_.coefficient_field()(Vec::Zero(n), e1);
      }
      default: return Mat::Identity(n, n);
    }
  }

  const OperatorSpec& spec_;
  const Raster& r_;
  SchemeKind scheme_;
  std::optional<double> eps_grad_;
  std::vector<std::size_t> interior_;
  std::vector<Vec> positions_;
  Mat iso_;
  double lambda_ = 1.0;
};

inline void check_finite(const std::vector<double>& u, std::size_t step) {
  for (double v : u)
    if (!std::isfinite(v)) throw numerical_error("non-finite value in explicit update", step);
}

inline void clip_negative(std::vector<double>& u, std::size_t step, const Raster& r) {
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] >= 0.0) continue;
    if (u[k] >= -1e-12) {
      u[k] = 0.0;
      continue;
    }
    throw numerical_error("scheme monotonicity violated: u = " + std::to_string(u[k]) + " at " +
                              to_string(r.position(k)),
                          step);
  }
}

}  // namespace detail

/// Explicit monotone solve of u_t + F(x, t, u, Du, D²u) = 0 with u = 0 on
/// the Dirichlet nodes (and at t = 0 unless initial data is given).
inline GridFunction solve(const OperatorSpec& spec, const Domain& omega, const SchemeConfig& cfg) {
  if (!(cfg.h > 0.0) || !(cfg.T > 0.0)) throw usage_error("solve: h and T must be positive");
  if (cfg.check_structure && spec.kind() != OperatorKind::custom) {
    Rng rng(0x5eed);
    StructureSampling s;
    s.dim = omega.dim();
    auto [lo, hi] = omega.bounding_box();
    s.x_lo = std::min(lo.x(), lo.y());
    s.x_hi = std::max(hi.x(), hi.y());
    const auto ell = verify_ellipticity(spec, 64, rng, s);
    if (!ell.passed()) throw usage_error("solve: operator is not degenerate elliptic: " + ell.witness.value_or(""));
    const auto src = verify_source_nonnegative(spec.source(), 64, rng, s);
    if (!src.passed()) throw usage_error("solve: source takes negative values: " + src.witness.value_or(""));
  }
  const Raster raster = rasterize(omega, cfg.h);
  detail::Stepper stepper(spec, raster, cfg.scheme, cfg.eps_grad);

  std::vector<double> u(raster.size(), 0.0);
  if (cfg.initial) {
    for (std::size_t k : stepper.interior()) u[k] = cfg.initial(raster.position(k));
  }
  double max_u = 0.0;
  for (double v : u) max_u = std::max(max_u, v);

  const double cfl0 = stepper.cfl(max_u);
  if (cfg.dt) {
    if (!(*cfg.dt > 0.0)) throw usage_error("solve: dt must be positive");
    if (!stepper.adaptive() && *cfg.dt > cfl0 * (1.0 + 1e-12))
      throw usage_error("solve: dt = " + std::to_string(*cfg.dt) + " exceeds the CFL bound " + std::to_string(cfl0));
  }
  const double base_step = cfg.dt ? *cfg.dt : cfl0;
  double out_dt = cfg.output_dt ? *cfg.output_dt : std::max(cfg.T / 200.0, base_step);
  if (!(out_dt > 0.0)) throw usage_error("solve: output_dt must be positive");
  const auto n_out = static_cast<std::size_t>(std::max(1.0, std::round(cfg.T / out_dt)));
  out_dt = cfg.T / static_cast<double>(n_out);

  GridFunction g(raster, out_dt, n_out + 1);
  std::copy(u.begin(), u.end(), g.slice(0).begin());
  Provenance prov;
  prov.scheme = to_string(stepper.scheme());
  prov.eps_grad = cfg.eps_grad ? *cfg.eps_grad : -1.0;

  std::vector<double> next;
  std::vector<double> pred;
  std::size_t step_index = 0;
  bool steady = false;
  std::size_t last_slice = n_out;
  for (std::size_t n = 0; n < n_out; ++n) {
    const double t_start = g.time(n);
    std::vector<double> sizes;
    if (!stepper.adaptive()) {
      const auto k = static_cast<std::size_t>(std::ceil(out_dt / base_step - 1e-9));
      const double sub = out_dt / static_cast<double>(k);
      for (std::size_t s = 0; s < k; ++s) {
        const double change = stepper.step(u, next, t_start + s * sub, sub);
        ++step_index;
        detail::check_finite(next, step_index);
        detail::clip_negative(next, step_index, raster);
        u.swap(next);
        sizes.push_back(sub);
        if (cfg.stop_at_steady && change < cfg.steady_tol) steady = true;
      }
    } else {
      double t = 0.0;
      while (t < out_dt * (1.0 - 1e-12)) {
        // Predict with the step from max u^n, then refresh from max of the prediction.
        double mu = *std::max_element(u.begin(), u.end());
        double dt = std::min(stepper.cfl(mu), out_dt - t);
        stepper.step(u, pred, t_start + t, dt);
        const double mp = std::max(mu, *std::max_element(pred.begin(), pred.end()));
        dt = std::min(stepper.cfl(mp), out_dt - t);
        if (cfg.dt) dt = std::min(dt, *cfg.dt);
        if (out_dt - t - dt < 1e-12 * out_dt) dt = out_dt - t;
        const double change = stepper.step(u, next, t_start + t, dt);
        ++step_index;
        detail::check_finite(next, step_index);
        detail::clip_negative(next, step_index, raster);
        u.swap(next);
        sizes.push_back(dt);
        t += dt;
        if (cfg.stop_at_steady && change < cfg.steady_tol) steady = true;
      }
    }
    std::copy(u.begin(), u.end(), g.slice(n + 1).begin());
    prov.steps.push_back(std::move(sizes));
    if (steady) {
      last_slice = n + 1;
      break;
    }
  }
  g.set_provenance(std::move(prov));
  if (steady) {
    g.truncate(last_slice + 1);
    g.set_steady_reached(true);
  }
  return g;
}

struct ResidualReport {
  double max_residual = 0.0;          ///< over all sampled nodes
  double regular_max = 0.0;           ///< nodes with |Du| above the cutoff
  double singular_max = 0.0;          ///< nodes that used the singular fallback
  std::size_t singular_nodes = 0;
  std::size_t worst_node = 0;
  std::size_t worst_slice = 0;
};

/// max |u^{n+1} - S(u^n)| / Δt_out over output intervals, where S is the
/// explicit update recomputed with the recorded substeps (a single step of
/// size Δt_out when the field carries no provenance). Nodes at which a
/// direction-dependent operator sits below the gradient cutoff are scored
/// against the singular envelope h via the isotropic fallback and reported
/// separately.
inline ResidualReport scheme_residual(const GridFunction& u, const OperatorSpec& spec,
                                      const std::vector<std::size_t>& sample_nodes = {},
                                      SchemeKind scheme = SchemeKind::automatic) {
  if (u.kind() != FieldKind::u) throw usage_error("scheme_residual expects a u-field");
  const auto& prov = u.provenance();
  std::optional<double> eps;
  if (prov && prov->eps_grad >= 0.0) eps = prov->eps_grad;
  SchemeKind sk = scheme;
  if (prov && scheme == SchemeKind::automatic) sk = prov->scheme == "wide8" ? SchemeKind::wide8 : SchemeKind::axis;
  detail::Stepper stepper(spec, u.raster(), sk, eps);
  std::vector<char> sampled(u.nodes(), sample_nodes.empty() ? 1 : 0);
  for (std::size_t k : sample_nodes) sampled.at(k) = 1;
  ResidualReport rep;
  std::vector<double> cur, next;
  for (std::size_t n = 0; n + 1 < u.nt(); ++n) {
    cur.assign(u.slice(n).begin(), u.slice(n).end());
    std::vector<double> sizes;
    if (prov && n < prov->steps.size()) sizes = prov->steps[n];
    else sizes = {u.dt()};
    std::vector<char> singular(u.nodes(), 0);
    double t = u.time(n);
    for (double dt : sizes) {
      const double e = stepper.cutoff(cur);
      next.assign(cur.size(), 0.0);
      for (std::size_t idx = 0; idx < stepper.interior().size(); ++idx) {
        bool sing = false;
        const std::size_t node = stepper.interior()[idx];
        next[node] = cur[node] + dt * stepper.rate(cur, idx, t, e, &sing);
        if (sing) singular[node] = 1;
      }
      for (double& v : next)
        if (v < 0.0 && v >= -1e-12) v = 0.0;
      cur.swap(next);
      t += dt;
    }
    for (std::size_t node : stepper.interior()) {
      if (!sampled[node]) continue;
      const double res = std::abs(u.at(n + 1, node) - cur[node]) / u.dt();
      if (singular[node]) {
        ++rep.singular_nodes;
        rep.singular_max = std::max(rep.singular_max, res);
      } else {
        rep.regular_max = std::max(rep.regular_max, res);
      }
      if (res > rep.max_residual) {
        rep.max_residual = res;
        rep.worst_node = node;
        rep.worst_slice = n + 1;
      }
    }
  }
  return rep;
}

struct MonotonicityReport {
  double min_difference = 0.0;  ///< min over nodes of u(x, t_{n+1}) - u(x, t_n)
  std::size_t node = 0;
  std::size_t slice = 0;
};

inline MonotonicityReport check_time_monotonicity(const GridFunction& u) {
  MonotonicityReport rep;
  bool first = true;
  for (std::size_t n = 0; n + 1 < u.nt(); ++n) {
    for (std::size_t k = 0; k < u.nodes(); ++k) {
      if (u.raster().kind[k] != NodeKind::interior) continue;
      const double d = u.at(n + 1, k) - u.at(n, k);
      if (first || d < rep.min_difference) {
        rep = {d, k, n};
        first = false;
      }
    }
  }
  return rep;
}

/// A point of the parabolic boundary with the probe directions ν̃ and μ.
struct GrowthProbe {
  Vec x;
  double t = 0.0;
  Vec nu;
  double mu = 0.0;
};

/// ν̃ from the domain geometry; μ = 1 on the initial slice, 0 after.
inline GrowthProbe make_probe(const Domain& omega, const Vec& x, double t) {
  const BoundaryPoint bp = normal_ext(omega, x);
  return {bp.x, t, bp.normal, t == 0.0 ? 1.0 : 0.0};
}

struct GrowthRow {
  std::size_t probe = 0;
  double rho = 0.0;
  double ratio = 0.0;
};

struct GrowthTable {
  std::vector<GrowthRow> rows;
  /// last ratio / first ratio per probe
  std::vector<double> divergence;

  std::vector<double> ratios(std::size_t probe) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.probe == probe) out.push_back(r.ratio);
    return out;
  }
};

/// Ratios u^p(x + ν̃ρ, t + μρ^{1/α}) / ρ over the given ρ values.
inline GrowthTable check_boundary_growth(const GridFunction& u, double p, double alpha,
                                         const std::vector<GrowthProbe>& probes, const std::vector<double>& rhos) {
  if (!(p > 0.0 && p <= 1.0)) throw domain_error("boundary growth needs 0 < p <= 1");
  GrowthTable table;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& pr = probes[i];
    double first = 0.0, last = 0.0;
    for (std::size_t j = 0; j < rhos.size(); ++j) {
      const double rho = rhos[j];
      const Vec x = pr.x + rho * pr.nu;
      const double t = pr.t + pr.mu * std::pow(rho, 1.0 / alpha);
      auto v = u.interpolate(x, std::min(t, u.final_time()));
      if (!v) throw domain_error("boundary growth probe " + to_string(x) + " outside the grid closure");
      const double ratio = std::pow(std::max(*v, 0.0), p) / rho;
      table.rows.push_back({i, rho, ratio});
      if (j == 0) first = ratio;
      last = ratio;
    }
    table.divergence.push_back(first > 0.0 ? last / first : std::numeric_limits<double>::infinity());
  }
  return table;
}

struct RapidGrowthResult {
  bool passed = false;
  /// min over samples of -(βψ₀t^{β-1} + F_*(...)); ≥ 0 means the subsolution inequality holds
  double worst_margin = std::numeric_limits<double>::infinity();
  Vec witness_x;
  double witness_t = 0.0;
};

struct RapidGrowthOptions {
  double t0 = 1e-4;
  double h = 1.0 / 64.0;
  std::size_t time_samples = 10;
};

namespace detail {

/// ψ₀ = d^{β'} for d ≥ h, a cubic in s = d/h below that matching value,
/// slope and curvature at s = 1, with ψ₀(0) = 0.
struct Psi0 {
  double beta_prime;
  double h;

  /// value, first and second derivative in d.
  std::array<double, 3> eval(double d) const {
    const double b = beta_prime;
    if (d >= h) return {std::pow(d, b), b * std::pow(d, b - 1.0), b * (b - 1.0) * std::pow(d, b - 2.0)};
    // Solve c1 + c2 + c3 = 1, c1 + 2c2 + 3c3 = b, 2c2 + 6c3 = b(b-1).
    const double v1 = 1.0, v2 = b, v3 = b * (b - 1.0);
    const double c3 = (v3 - 2.0 * (v2 - v1)) / 2.0;
    const double c2 = (v2 - v1) - 2.0 * c3;
    const double c1v = v1 - c2 - c3;
    const double s = d / h, scale = std::pow(h, b);
    return {scale * (c1v * s + c2 * s * s + c3 * s * s * s), scale / h * (c1v + 2.0 * c2 * s + 3.0 * c3 * s * s),
            scale / (h * h) * (2.0 * c2 + 6.0 * c3 * s)};
  }
};

/// Lower envelope F_* at a possibly vanishing gradient: F itself when ξ is
/// clearly nonzero, else the minimum over probe directions of F(1e-12·e).
inline double lower_envelope_F(const OperatorSpec& spec, const Vec& x, double t, double r, const Vec& xi,
                               const Mat& X) {
  if (xi.norm() > 1e-10) return eval_F(spec, x, t, r, xi, X);
  const int n = static_cast<int>(xi.size());
  double best = std::numeric_limits<double>::infinity();
  for (int d = 0; d < 16; ++d) {
    Vec e(n);
    if (n == 1) {
      e(0) = d % 2 ? 1.0 : -1.0;
    } else {
      const double a = d * M_PI / 8.0;
      e(0) = std::cos(a);
      e(1) = std::sin(a);
    }
    best = std::min(best, eval_F(spec, x, t, r, 1e-12 * e, X));
  }
  return best;
}

}  // namespace detail

/// Tests βψ₀t^{β-1} + F_*(x, t, ψ₀t^β, ∇ψ₀t^β, ∇²ψ₀t^β) ≤ 0 on the
/// interior nodes of a raster of Ω and t = t₀·j/N, j = 1..N.
inline RapidGrowthResult rapid_initial_growth_check(const OperatorSpec& spec, const Domain& omega, double beta,
                                                    double beta_prime, double p, double alpha,
                                                    const RapidGrowthOptions& opt = {}) {
  if (!(beta > 0.0 && beta_prime > 0.0 && opt.t0 > 0.0)) throw usage_error("rapid growth: beta, beta', t0 must be positive");
  if (!(p * beta_prime + p * beta / alpha < 1.0))
    throw usage_error("rapid growth: precondition p*beta' + p*beta/alpha < 1 fails (" +
                      std::to_string(p * beta_prime + p * beta / alpha) + ")");
  const detail::Psi0 psi{beta_prime, opt.h};
  const Raster r = rasterize(omega, opt.h);
  const int n = omega.dim();
  RapidGrowthResult res;
  res.witness_x = Vec::Zero(n);

  auto psi_derivs = [&](const Vec& x, double& val, Vec& grad, Mat& hess) {
    if (omega.is_interval()) {
      const auto& iv = omega.as_interval();
      const double dl = x(0) - iv.a, dr = iv.b - x(0);
      const double sgn = dl <= dr ? 1.0 : -1.0;
      const auto e = psi.eval(std::min(dl, dr));
      val = e[0];
      grad = Vec::Constant(1, sgn * e[1]);
      hess = Mat::Constant(1, 1, e[2]);
      return;
    }
    auto value_at = [&](const Vec& y) {
      if (contains(omega, y) == Location::outside) return 0.0;
      return psi.eval(normal_ext(omega, y).dist)[0];
    };
    const double step = 0.5 * opt.h;
    val = value_at(x);
    grad = Vec::Zero(n);
    hess = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a) {
      Vec ea = Vec::Zero(n);
      ea(a) = step;
      const double fp = value_at(x + ea), fm = value_at(x - ea);
      grad(a) = (fp - fm) / (2.0 * step);
      hess(a, a) = (fp - 2.0 * val + fm) / (step * step);
      for (int b = a + 1; b < n; ++b) {
        Vec eb = Vec::Zero(n);
        eb(b) = step;
        hess(a, b) = hess(b, a) =
            (value_at(x + ea + eb) - value_at(x + ea - eb) - value_at(x - ea + eb) + value_at(x - ea - eb)) /
            (4.0 * step * step);
      }
    }
  };

  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r.kind[k] != NodeKind::interior) continue;
    const Vec x = r.position(k);
    double val = 0.0;
    Vec grad;
    Mat hess;
    psi_derivs(x, val, grad, hess);
    for (std::size_t j = 1; j <= opt.time_samples; ++j) {
      const double t = opt.t0 * static_cast<double>(j) / static_cast<double>(opt.time_samples);
      const double tb = std::pow(t, beta);
      const double lhs = beta * val * std::pow(t, beta - 1.0) +
                         detail::lower_envelope_F(spec, x, t, val * tb, Vec(grad * tb), Mat(hess * tb));
      const double margin = -lhs;
      if (margin < res.worst_margin) {
        res.worst_margin = margin;
        res.witness_x = x;
        res.witness_t = t;
      }
    }
  }
  res.passed = res.worst_margin >= 0.0;
  return res;
}

}  // namespace parakon
