#pragma once

// Small self-contained SVG plots: line charts (linear or log-log axes) and a
// blob chart of counts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynsr::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_axes = false;
  std::vector<Series> series;
};

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

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline const char* colour(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  return palette[i % 7];
}

inline std::string render(const LinePlot& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 150, Tm = 40, B = 55;
  auto tr = [&](double v) { return plot.log_axes ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (plot.log_axes && (!(s.x[i] > 0) || !(s.y[i] > 0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tr(s.x[i]));
      x1 = std::max(x1, tr(s.x[i]));
      y0 = std::min(y0, tr(s.y[i]));
      y1 = std::max(y1, tr(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  if (!plot.log_axes) y0 = std::min(y0, 0.0);
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return L + (tr(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (tr(v) - y0) / (y1 - y0) * (H - Tm - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
     << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double tx = x0 + k * (x1 - x0) / 5, ty = y0 + k * (y1 - y0) / 5;
    const double vx = plot.log_axes ? std::pow(10.0, tx) : tx, vy = plot.log_axes ? std::pow(10.0, ty) : ty;
    const double sx = L + k * (W - L - R) / 5, sy = H - B - k * (H - Tm - B) / 5;
    os << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(vx) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">" << fmt(vy) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << sy << "\" x2=\"" << W - R << "\" y2=\"" << sy
       << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(plot.xlabel)
     << "</text>\n";
  os << "<text transform=\"translate(16," << (Tm + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(plot.ylabel) << "</text>\n";
  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (plot.log_axes && (!(s.x[i] > 0) || !(s.y[i] > 0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      if (!s.dashed)
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << colour(si)
           << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << colour(si) << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    const double ly = Tm + 10 + 18.0 * si;
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << colour(si) << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
       << "/>\n";
    os << "<text x=\"" << W - R + 38 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Blob chart: one circle per (row, column) cell with area proportional to its count.
struct BlobChart {
  std::string title;
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<int>> counts;  // counts[row][column]
};

inline std::string render(const BlobChart& chart) {
  const double cell = 70, L = 170, Tm = 60;
  const double W = L + cell * chart.columns.size() + 20, H = Tm + cell * chart.rows.size() + 20;
  int peak = 1;
  for (const auto& r : chart.counts)
    for (int c : r) peak = std::max(peak, c);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << escape(chart.title)
     << "</text>\n";
  for (std::size_t c = 0; c < chart.columns.size(); ++c)
    os << "<text x=\"" << L + cell * (c + 0.5) << "\" y=\"" << Tm - 10 << "\" text-anchor=\"middle\">"
       << escape(chart.columns[c]) << "</text>\n";
  for (std::size_t r = 0; r < chart.rows.size(); ++r) {
    const double cy = Tm + cell * (r + 0.5);
    os << "<text x=\"" << L - 10 << "\" y=\"" << cy + 4 << "\" text-anchor=\"end\">" << escape(chart.rows[r])
       << "</text>\n";
    for (std::size_t c = 0; c < chart.columns.size(); ++c) {
      const int n = r < chart.counts.size() && c < chart.counts[r].size() ? chart.counts[r][c] : 0;
      const double cx = L + cell * (c + 0.5);
      const double rad = 0.45 * cell * std::sqrt(double(n) / peak);
      if (n > 0) os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << rad << "\" fill=\"" << colour(c)
                    << "\" fill-opacity=\"0.6\"/>\n";
      os << "<text x=\"" << cx << "\" y=\"" << cy + 4 << "\" text-anchor=\"middle\">" << n << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dynsr::svg
