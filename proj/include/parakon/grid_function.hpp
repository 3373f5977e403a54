#pragma once

#include "parakon/errors.hpp"
#include "parakon/geometry.hpp"
#include "parakon/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace parakon {

/// Whether a field holds u-values or transformed values v = u^p (log u).
enum class FieldKind { u, v };

/// How a solution was produced; lets residual checks recompute the update.
struct Provenance {
  std::string scheme;
  double eps_grad = 0.0;
  /// Substep sizes taken inside each output interval [t_n, t_{n+1}].
  std::vector<std::vector<double>> steps;
};

namespace detail {

/// Fritsch–Carlson monotone cubic on a uniform grid, at fractional position
/// s ∈ [0, 1] between y[i] and y[i+1]. Non-finite neighbours fall back to
/// one-sided slopes; a non-finite end value returns that value exactly at
/// the node and NaN strictly inside.
inline double pchip_uniform(const std::vector<double>& y, std::size_t i, double s, double step) {
  const std::size_t n = y.size();
  const double y0 = y[i], y1 = y[i + 1];
  if (s <= 0.0) return y0;
  if (s >= 1.0) return y1;
  if (!std::isfinite(y0) || !std::isfinite(y1)) return std::numeric_limits<double>::quiet_NaN();
  const double d = (y1 - y0) / step;
  auto secant = [&](std::size_t a) -> std::optional<double> {
    if (a + 1 >= n) return std::nullopt;
    if (!std::isfinite(y[a]) || !std::isfinite(y[a + 1])) return std::nullopt;
    return (y[a + 1] - y[a]) / step;
  };
  auto slope = [&](std::optional<double> left, std::optional<double> right) {
    if (!left && !right) return 0.0;
    if (!left || !right) return left ? *left : *right;
    if (*left * *right <= 0.0) return 0.0;
    return 2.0 / (1.0 / *left + 1.0 / *right);
  };
  std::optional<double> left0 = i > 0 ? secant(i - 1) : std::nullopt;
  std::optional<double> right1 = secant(i + 1);
  double m0 = i > 0 && left0 ? slope(left0, d) : d;
  double m1 = right1 ? slope(d, right1) : d;
  if (d == 0.0) {
    m0 = m1 = 0.0;
  } else {
    if (m0 * d < 0.0) m0 = 0.0;
    if (m1 * d < 0.0) m1 = 0.0;
  }
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y0 + h10 * step * m0 + h01 * y1 + h11 * step * m1;
}

}  // namespace detail

/// Space-time samples u(x_j, t_n) on a masked node raster and a uniform time
/// grid t_n = n Δt, n = 0..N_t-1. Values are stored slice by slice.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Raster raster, double dt, std::size_t nt, FieldKind kind = FieldKind::u)
      : raster_(std::move(raster)), dt_(dt), nt_(nt), kind_(kind),
        values_(raster_.size() * nt, 0.0) {
    if (nt == 0) throw usage_error("grid function needs at least one time slice");
    if (!(dt > 0.0) && nt > 1) throw usage_error("grid function time step must be positive");
  }

  const Raster& raster() const noexcept { return raster_; }
  double dt() const noexcept { return dt_; }
  std::size_t nt() const noexcept { return nt_; }
  std::size_t nodes() const noexcept { return raster_.size(); }
  double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt_; }
  double final_time() const noexcept { return time(nt_ - 1); }
  FieldKind kind() const noexcept { return kind_; }

  /// Exponents of the transform when kind() == v.
  double p() const noexcept { return p_; }
  double alpha() const noexcept { return alpha_; }
  void set_transform(double p, double alpha) {
    kind_ = FieldKind::v;
    p_ = p;
    alpha_ = alpha;
  }
  void set_kind(FieldKind k) noexcept { kind_ = k; }

  double& at(std::size_t n, std::size_t node) { return values_[n * nodes() + node]; }
  double at(std::size_t n, std::size_t node) const { return values_[n * nodes() + node]; }
  std::span<double> slice(std::size_t n) { return {values_.data() + n * nodes(), nodes()}; }
  std::span<const double> slice(std::size_t n) const { return {values_.data() + n * nodes(), nodes()}; }
  std::span<const double> values() const noexcept { return values_; }

  const std::optional<Provenance>& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }
  bool steady_reached() const noexcept { return steady_; }
  void set_steady_reached(bool s) noexcept { steady_ = s; }

  /// Drops the slices after n_keep - 1.
  void truncate(std::size_t n_keep) {
    if (n_keep == 0 || n_keep > nt_) throw usage_error("truncate: bad slice count");
    nt_ = n_keep;
    values_.resize(nt_ * nodes());
    if (provenance_ && provenance_->steps.size() > nt_ - 1) provenance_->steps.resize(nt_ - 1);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_)
      if (std::isfinite(v)) m = std::max(m, std::abs(v));
    return m;
  }

  /// Bilinear (linear in 1D) interpolation in slice n. Returns nullopt if x
  /// lies outside the node grid, any stencil node is outside the mask, or a
  /// stencil value is not finite.
  std::optional<double> interpolate_space(std::size_t n, const Vec& x) const {
    const Raster& r = raster_;
    const double fx = (x(0) - r.origin.x()) / r.h;
    const double fy = r.dim == 2 ? (x(1) - r.origin.y()) / r.h : 0.0;
    const double snap = 1e-9;
    if (fx < -snap || fx > r.nx - 1 + snap) return std::nullopt;
    if (r.dim == 2 && (fy < -snap || fy > r.ny - 1 + snap)) return std::nullopt;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, std::max(0, r.nx - 2));
    int j = r.dim == 2 ? std::clamp(static_cast<int>(std::floor(fy)), 0, std::max(0, r.ny - 2)) : 0;
    double sx = std::clamp(fx - i, 0.0, 1.0);
    double sy = r.dim == 2 ? std::clamp(fy - j, 0.0, 1.0) : 0.0;
    auto node_value = [&](int a, int b, double weight) -> std::optional<double> {
      if (weight == 0.0) return 0.0;
      if (!r.in_range(a, b) || r.at(a, b) == NodeKind::outside) return std::nullopt;
      const double v = at(n, r.index(a, b));
      if (!std::isfinite(v)) return std::nullopt;
      return weight * v;
    };
    double acc = 0.0;
    const int jmax = r.dim == 2 ? 1 : 0;
    for (int b = 0; b <= jmax; ++b) {
      for (int a = 0; a <= 1; ++a) {
        const double wx = a ? sx : 1.0 - sx;
        const double wy = r.dim == 2 ? (b ? sy : 1.0 - sy) : 1.0;
        auto v = node_value(i + a, j + b, wx * wy);
        if (!v) return std::nullopt;
        acc += *v;
      }
    }
    return acc;
  }

  /// Space interpolation combined with linear interpolation in time.
  std::optional<double> interpolate(const Vec& x, double t) const {
    auto [n, s] = locate_time(t);
    if (n < 0) return std::nullopt;
    auto a = interpolate_space(static_cast<std::size_t>(n), x);
    if (!a) return std::nullopt;
    if (s == 0.0) return a;
    auto b = interpolate_space(static_cast<std::size_t>(n) + 1, x);
    if (!b) return std::nullopt;
    return (1.0 - s) * *a + s * *b;
  }

  /// Monotone cubic interpolation in time of the value at one node.
  double node_in_time(std::size_t node, double t) const {
    auto [n, s] = locate_time(t);
    if (n < 0) throw domain_error("time " + std::to_string(t) + " outside the grid");
    if (nt_ == 1) return at(0, node);
    // Only the four slices around the interval matter.
    const std::size_t lo = n > 0 ? static_cast<std::size_t>(n) - 1 : 0;
    const std::size_t hi = std::min(nt_ - 1, static_cast<std::size_t>(n) + 2);
    std::vector<double> window;
    for (std::size_t k = lo; k <= hi; ++k) window.push_back(at(k, node));
    if (static_cast<std::size_t>(n) + 1 > hi) return window.back();
    return detail::pchip_uniform(window, static_cast<std::size_t>(n) - lo, s, dt_);
  }

  /// Fractional slice position of t: (n, s) with t = (n + s) Δt; n = -1 if
  /// t lies outside [0, T].
  std::pair<int, double> locate_time(double t) const {
    const double T = final_time();
    const double tol = 1e-12 * std::max(1.0, T);
    if (t < -tol || t > T + tol) return {-1, 0.0};
    if (nt_ == 1) return {0, 0.0};
    const double pos = std::clamp(t / dt_, 0.0, static_cast<double>(nt_ - 1));
    int n = static_cast<int>(std::floor(pos));
    double s = pos - n;
    if (n >= static_cast<int>(nt_) - 1) {
      n = static_cast<int>(nt_) - 2;
      s = 1.0;
    }
    if (s < 1e-12) s = 0.0;
    return {n, s};
  }

  bool same_grid(const GridFunction& o) const {
    return raster_.same_grid(o.raster_) && nt_ == o.nt_ && std::abs(dt_ - o.dt_) <= 1e-12 * std::max(1.0, dt_);
  }

  /// PKGF v1 text: "PKGF v1 dim h dt nx [ny] nt", two '#' lines carrying the
  /// raster origin and mask, then values slice by slice.
  void write_pkgf(std::ostream& out) const {
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    out << "PKGF v1 " << raster_.dim << ' ' << num(raster_.h) << ' ' << num(dt_) << ' ' << raster_.nx;
    if (raster_.dim == 2) out << ' ' << raster_.ny;
    out << ' ' << nt_ << '\n';
    out << "# origin " << num(raster_.origin.x()) << ' ' << num(raster_.origin.y()) << '\n';
    out << "# mask ";
    for (NodeKind k : raster_.kind) out << static_cast<int>(k);
    out << '\n';
    for (std::size_t n = 0; n < nt_; ++n) {
      for (std::size_t j = 0; j < nodes(); ++j) out << (j ? " " : "") << num(at(n, j));
      out << '\n';
    }
  }

  static GridFunction read_pkgf(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw usage_error("PKGF: empty input");
    std::istringstream hs(line);
    std::string magic, version;
    int dim = 0;
    double h = 0.0, dt = 0.0;
    if (!(hs >> magic >> version >> dim >> h >> dt) || magic != "PKGF" || version != "v1")
      throw usage_error("PKGF: bad header '" + line + "'");
    if (dim != 1 && dim != 2) throw usage_error("PKGF: dim must be 1 or 2");
    int nx = 0, ny = 1;
    std::size_t nt = 0;
    if (!(hs >> nx)) throw usage_error("PKGF: missing nx");
    if (dim == 2 && !(hs >> ny)) throw usage_error("PKGF: missing ny");
    if (!(hs >> nt) || nx < 1 || ny < 1 || nt < 1) throw usage_error("PKGF: bad sizes");
    Raster r;
    r.dim = dim;
    r.h = h;
    r.nx = nx;
    r.ny = ny;
    r.kind.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), NodeKind::interior);
    bool have_mask = false;
    while (in.peek() == '#') {
      std::getline(in, line);
      std::istringstream cs(line.substr(1));
      std::string key;
      cs >> key;
      if (key == "origin") {
        double ox = 0.0, oy = 0.0;
        cs >> ox >> oy;
        r.origin = Point2(ox, oy);
      } else if (key == "mask") {
        std::string m;
        cs >> m;
        if (m.size() != r.kind.size()) throw usage_error("PKGF: mask length mismatch");
        for (std::size_t k = 0; k < m.size(); ++k) {
          if (m[k] < '0' || m[k] > '2') throw usage_error("PKGF: bad mask digit");
          r.kind[k] = static_cast<NodeKind>(m[k] - '0');
        }
        have_mask = true;
      }
    }
    if (!have_mask) {
      // Without a mask the outer ring of nodes is the Dirichlet boundary.
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const bool edge = i == 0 || i == nx - 1 || (dim == 2 && (j == 0 || j == ny - 1));
          r.kind[r.index(i, j)] = edge ? NodeKind::boundary : NodeKind::interior;
        }
    }
    GridFunction g(std::move(r), dt, nt);
    for (double& v : g.values_) {
      std::string tok;
      if (!(in >> tok)) throw usage_error("PKGF: truncated value block");
      v = std::strtod(tok.c_str(), nullptr);
    }
    return g;
  }

  /// CSV with columns x[,y],value for one slice, interior and boundary nodes.
  void write_csv_slice(std::size_t n, std::ostream& out) const {
    char buf[96];
    out << (raster_.dim == 2 ? "x,y,value\n" : "x,value\n");
    for (std::size_t node = 0; node < nodes(); ++node) {
      if (raster_.kind[node] == NodeKind::outside) continue;
      const Vec x = raster_.position(node);
      if (raster_.dim == 2)
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.17g\n", x(0), x(1), at(n, node));
      else
        std::snprintf(buf, sizeof buf, "%.10g,%.17g\n", x(0), at(n, node));
      out << buf;
    }
  }

 private:
  Raster raster_;
  double dt_ = 0.0;
  std::size_t nt_ = 0;
  FieldKind kind_ = FieldKind::u;
  double p_ = 1.0;
  double alpha_ = 1.0;
  std::vector<double> values_;
  std::optional<Provenance> provenance_;
  bool steady_ = false;
};

}  // namespace parakon
