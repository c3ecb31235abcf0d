#pragma once

// Matrices of the discretized problem. Strip matrices carry the relative area of
// each grid cell falling between consecutive bin breakpoints, computed by exact
// convex polygon clipping. The Fourier observation matrix evaluates truncated
// Fourier coefficients at the cell centres.

#include "dynsr/geometry.hpp"
#include "dynsr/measures.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace dynsr {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Polygon = std::vector<Vec2>;

/// Sutherland-Hodgman step: keep the part of a convex polygon with a.x <= c.
inline Polygon clip_halfplane(const Polygon& poly, const Vec2& a, double c) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double fp = a.dot(p) - c;
    const double fq = a.dot(q) - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double s = fp / (fp - fq);
      out.push_back(p + s * (q - p));
    }
  }
  return out;
}

/// Shoelace area (absolute value).
inline double polygon_area(const Polygon& poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    acc += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(acc);
}

/// Bins x cells matrix of a strip projection. Column j distributes the area of
/// cell j over the bins, so every column sums to one.
struct ProjectionMatrix {
  SparseMatrix weights;
  GridSpec source;
  GridSpec bins;
  Vec2 functional;  // strips are {x : r_i <= functional . x <= r_{i+1}}

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(weights); }
  Eigen::Index rows() const { return weights.rows(); }
  Eigen::Index cols() const { return weights.cols(); }
};

/// Strip matrix for an arbitrary nonzero linear functional a.
inline ProjectionMatrix assemble_strip_matrix(const GridSpec& grid, const Vec2& a, const GridSpec& bins) {
  if (grid.dim() != 2 || bins.dim() != 1) throw std::invalid_argument("assemble_strip_matrix: need a 2-D grid and 1-D bins");
  if (!(a.norm() > 0.0)) throw std::invalid_argument("assemble_strip_matrix: zero functional");
  const std::vector<double> r = bins.breakpoints();
  const int nb = bins.resolution();
  const double width = (r.back() - r.front()) / nb;
  const double span = std::max({std::abs(r.front()), std::abs(r.back()), width});
  const double cover_tol = 1e-9 * span;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(grid.cell_count()) * 3);
  for (Eigen::Index j = 0; j < grid.cell_count(); ++j) {
    const auto verts = grid.cell_vertices(j);
    const Polygon cell(verts.begin(), verts.end());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : verts) {
      lo = std::min(lo, a.dot(v));
      hi = std::max(hi, a.dot(v));
    }
    if (lo < r.front() - cover_tol || hi > r.back() + cover_tol) {
      throw std::invalid_argument("assemble_strip_matrix: bins do not cover the image of the grid");
    }
    const double area = polygon_area(cell);
    int first = static_cast<int>(std::floor((lo - r.front()) / width)) - 1;
    int last = static_cast<int>(std::floor((hi - r.front()) / width)) + 1;
    first = std::clamp(first, 0, nb - 1);
    last = std::clamp(last, 0, nb - 1);
    for (int i = first; i <= last; ++i) {
      if ((i > 0 && r[i] >= hi) || (i < nb - 1 && r[i + 1] <= lo)) continue;
      Polygon piece = cell;
      if (i > 0) piece = clip_halfplane(piece, -a, -r[i]);
      if (i < nb - 1) piece = clip_halfplane(piece, a, r[i + 1]);
      const double w = std::clamp(polygon_area(piece) / area, 0.0, 1.0);
      if (w > 0.0) trip.emplace_back(i, j, w);
    }
  }
  SparseMatrix W(nb, grid.cell_count());
  W.setFromTriplets(trip.begin(), trip.end());
  W.makeCompressed();
  return ProjectionMatrix{std::move(W), grid, bins, a};
}

/// Discretized Radon transform of a snapshot grid along theta onto the bins.
inline ProjectionMatrix assemble_radon_matrix(const GridSpec& grid, const Direction2& theta, const GridSpec& bins) {
  return assemble_strip_matrix(grid, theta.vector(), bins);
}

/// Discretized 1-D move operator (y, w) -> y + t w on a position-velocity grid.
/// Uses Mv_t = pushforward[s -> sqrt(1+t^2) s] o Radon along (1,t)/sqrt(1+t^2):
/// the Radon matrix is assembled against bins shrunk by 1/sqrt(1+t^2).
inline ProjectionMatrix assemble_move_matrix(const GridSpec& grid, double t, const GridSpec& bins) {
  const double scale = std::sqrt(1.0 + t * t);
  const auto theta = Direction2(Vec2(1.0 / scale, t / scale));
  const GridSpec shrunk(1, bins.resolution(), bins.linear() / scale, bins.offset() / scale);
  ProjectionMatrix P = assemble_radon_matrix(grid, theta, shrunk);
  return ProjectionMatrix{std::move(P.weights), grid, bins, Vec2(1.0, t)};
}

/// Integer frequencies xi with |xi|_inf <= cutoff, first component outermost.
inline std::vector<Eigen::Vector2i> fourier_frequencies(int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("fourier_frequencies: negative cutoff");
  std::vector<Eigen::Vector2i> out;
  for (int a = -cutoff; a <= cutoff; ++a)
    for (int b = -cutoff; b <= cutoff; ++b) out.emplace_back(a, b);
  return out;
}

inline Eigen::Index observation_size(int cutoff) {
  const Eigen::Index n = 2 * cutoff + 1;
  return 2 * n * n;
}

/// Rows: real parts for all frequencies, then imaginary parts.
struct ObservationMatrix {
  Eigen::MatrixXd matrix;
  std::vector<Eigen::Vector2i> frequencies;
  int cutoff = 0;
};

/// Truncated Fourier observation exp(-i 2 pi c_j . xi) evaluated at cell centres c_j.
inline ObservationMatrix assemble_fourier_matrix(const GridSpec& grid, int cutoff) {
  if (grid.dim() != 2) throw std::invalid_argument("assemble_fourier_matrix: 2-D grid required");
  ObservationMatrix out;
  out.cutoff = cutoff;
  out.frequencies = fourier_frequencies(cutoff);
  const Eigen::Index nf = static_cast<Eigen::Index>(out.frequencies.size());
  out.matrix.resize(2 * nf, grid.cell_count());
  for (Eigen::Index j = 0; j < grid.cell_count(); ++j) {
    const Vec2 c = grid.cell_center(j);
    for (Eigen::Index k = 0; k < nf; ++k) {
      const double phase = 2.0 * std::numbers::pi * c.dot(out.frequencies[k].cast<double>());
      out.matrix(k, j) = std::cos(phase);
      out.matrix(nf + k, j) = -std::sin(phase);
    }
  }
  return out;
}

/// Analytic truncated Fourier observation of a 2-D measure, stacked (Re, Im).
inline Eigen::VectorXd fourier_observation(const DiscreteMeasure<2>& u, int cutoff) {
  const auto freqs = fourier_frequencies(cutoff);
  const Eigen::Index nf = static_cast<Eigen::Index>(freqs.size());
  Eigen::VectorXd f(2 * nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    const std::complex<double> c = fourier(u, Vec2(2.0 * std::numbers::pi * freqs[k].cast<double>()));
    f(k) = c.real();
    f(nf + k) = c.imag();
  }
  return f;
}

/// Mass of each atom assigned to the cell containing it.
inline Eigen::VectorXd rasterize(const DiscreteMeasure<2>& nu, const GridSpec& grid) {
  if (grid.dim() != 2) throw std::invalid_argument("rasterize: 2-D grid required");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.cell_count());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const auto j = grid.locate(nu.points[i]);
    if (!j) throw std::out_of_range("rasterize: atom outside the grid domain");
    w(*j) += nu.weights[i];
  }
  return w;
}

inline Eigen::VectorXd rasterize(const DiscreteMeasure<1>& nu, const GridSpec& grid) {
  if (grid.dim() != 1) throw std::invalid_argument("rasterize: 1-D grid required");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.cell_count());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const auto j = grid.locate(Vec2(nu.points[i][0], 0.0));
    if (!j) throw std::out_of_range("rasterize: atom outside the grid domain");
    w(*j) += nu.weights[i];
  }
  return w;
}

// Matrix cache files: one line of JSON header, then rows*cols little-endian
// float64 values in row-major order.

/// Stable 64-bit FNV-1a hash, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Cache key for a grid: its affine parameters and resolution.
inline std::string grid_hash(const GridSpec& g) {
  nlohmann::json j = {{"dim", g.dim()},
                      {"M", g.resolution()},
                      {"A", {g.linear()(0, 0), g.linear()(0, 1), g.linear()(1, 0), g.linear()(1, 1)}},
                      {"b", {g.offset()(0), g.offset()(1)}}};
  return fnv1a_hex(j.dump());
}

inline void save_matrix_cache(const std::string& path, const nlohmann::json& key, const Eigen::MatrixXd& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_matrix_cache: cannot open " + path);
  nlohmann::json header = {{"key", key}, {"rows", m.rows()}, {"cols", m.cols()}, {"dtype", "<f8"}, {"order", "row-major"}};
  os << header.dump() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(m(i, j));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!os) throw std::runtime_error("save_matrix_cache: write failed for " + path);
}

/// Returns nullopt if the file is missing or was written for a different key.
inline std::optional<Eigen::MatrixXd> load_matrix_cache(const std::string& path, const nlohmann::json& key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::string line;
  if (!std::getline(is, line)) return std::nullopt;
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("key", nlohmann::json()) != key) return std::nullopt;
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      is.read(reinterpret_cast<char*>(&bits), sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      m(i, j) = std::bit_cast<double>(bits);
    }
  }
  if (!is) throw std::runtime_error("load_matrix_cache: truncated file " + path);
  return m;
}

}  // namespace dynsr
