#pragma once

// Static SVG line plots and heatmaps. Output is plain text with fixed
// number formatting, so equal inputs give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace parakon::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;
};

struct Axes {
  std::string title;
  std::string xlabel;
  std::string ylabel;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  return colors[i % 7];
}

constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 55;

inline void frame(std::ostream& out, const Axes& ax, double x0, double x1, double y0, double y1) {
  const double pw = W - L - R, ph = H - T - B;
  out << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = L + pw * i / 4.0, fy = T + ph - ph * i / 4.0;
    out << "<text x=\"" << num(fx) << "\" y=\"" << num(T + ph + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
        << tick(x0 + (x1 - x0) * i / 4.0) << "</text>\n";
    out << "<text x=\"" << num(L - 6) << "\" y=\"" << num(fy + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
        << tick(y0 + (y1 - y0) * i / 4.0) << "</text>\n";
  }
  out << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << num(22) << "\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(ax.title) << "</text>\n";
  out << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape(ax.xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(T + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << num(T + ph / 2) << ")\">" << escape(ax.ylabel) << "</text>\n";
}

inline void pad(double& lo, double& hi) {
  if (!(lo < hi)) {
    const double d = std::abs(lo) > 0 ? 0.05 * std::abs(lo) : 1.0;
    lo -= d;
    hi += d;
  }
}

}  // namespace detail

inline void line_plot(std::ostream& out, const Axes& ax, const std::vector<Series>& series) {
  using namespace detail;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  pad(x0, x1);
  pad(y0, y1);
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double x) { return L + pw * (x - x0) / (x1 - x0); };
  auto py = [&](double y) { return T + ph - ph * (y - y0) / (y1 - y0); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
      << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  frame(out, ax, x0, x1, y0, y1);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << palette(k) << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      first = false;
    }
    out << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\""
              << palette(k) << "\"/>\n";
    const double ly = T + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << num(W - R + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(W - R + 32) << "\" y2=\""
        << num(ly - 4) << "\" stroke=\"" << palette(k) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(W - R + 38) << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

/// nx × ny cells, values row-major with j = 0 at the bottom. NaN cells are
/// left blank. Cell centres span [x0, x1] × [y0, y1].
struct Grid {
  int nx = 0, ny = 0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::vector<double> values;
};

inline void heatmap(std::ostream& out, const Axes& ax, const Grid& g) {
  using namespace detail;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : g.values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  pad(lo, hi);
  const double pw = W - L - R, ph = H - T - B;
  const double cw = pw / std::max(g.nx, 1), ch = ph / std::max(g.ny, 1);
  const double hx = g.nx > 1 ? 0.5 * (g.x1 - g.x0) / (g.nx - 1) : 0.5;
  const double hy = g.ny > 1 ? 0.5 * (g.y1 - g.y0) / (g.ny - 1) : 0.5;

  // blue → white → red
  auto color = [&](double v) {
    const double s = (v - lo) / (hi - lo);
    int r, gg, b;
    if (s < 0.5) {
      const double u = s / 0.5;
      r = static_cast<int>(49 + u * (255 - 49));
      gg = static_cast<int>(54 + u * (255 - 54));
      b = static_cast<int>(149 + u * (255 - 149));
    } else {
      const double u = (s - 0.5) / 0.5;
      r = static_cast<int>(255 - u * (255 - 165));
      gg = static_cast<int>(255 - u * 255);
      b = static_cast<int>(255 - u * (255 - 38));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, gg, b);
    return std::string(buf);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
      << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = g.values[static_cast<std::size_t>(j) * g.nx + i];
      if (!std::isfinite(v)) continue;
      out << "<rect x=\"" << num(L + i * cw) << "\" y=\"" << num(T + ph - (j + 1) * ch) << "\" width=\"" << num(cw + 0.3)
          << "\" height=\"" << num(ch + 0.3) << "\" fill=\"" << color(v) << "\"/>\n";
    }
  frame(out, ax, g.x0 - hx, g.x1 + hx, g.y0 - hy, g.y1 + hy);
  // colour bar
  const double bx = W - R + 20, bw = 16;
  for (int s = 0; s < 50; ++s) {
    const double v = lo + (hi - lo) * (s + 0.5) / 50.0;
    out << "<rect x=\"" << num(bx) << "\" y=\"" << num(T + ph - (s + 1) * ph / 50.0) << "\" width=\"" << num(bw)
        << "\" height=\"" << num(ph / 50.0 + 0.3) << "\" fill=\"" << color(v) << "\"/>\n";
  }
  out << "<text x=\"" << num(bx + bw + 4) << "\" y=\"" << num(T + ph) << "\" font-size=\"11\">" << tick(lo)
      << "</text>\n<text x=\"" << num(bx + bw + 4) << "\" y=\"" << num(T + 10) << "\" font-size=\"11\">" << tick(hi)
      << "</text>\n</svg>\n";
}

}  // namespace parakon::svg
