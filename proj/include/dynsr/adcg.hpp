#pragma once

// Alternating descent conditional gradient on phase space for the penalized
// problem  min 1/2 |F(lambda) - f|^2 + alpha * mass(lambda),  where F stacks the
// truncated Fourier coefficients of the snapshots at all measurement times.

#include "dynsr/discretize.hpp"
#include "dynsr/geometry.hpp"
#include "dynsr/types.hpp"

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace dynsr {

struct AdcgParams {
  int max_outer = 100;
  int max_coord_descent = 200;
  int init_grid = 20;
  double min_gap = 1e-5;
  double min_progress = 1e-4;
  int max_local_steps = 100;

  void validate() const {
    if (max_outer < 1 || max_coord_descent < 1 || init_grid < 1 || !(min_gap > 0.0) || !(min_progress > 0.0) ||
        max_local_steps < 1) {
      throw std::invalid_argument("AdcgParams: all parameters must be positive");
    }
  }
};

/// Stacked Fourier features of a unit-mass particle: for each time t the real
/// parts of exp(-i 2 pi xi . (x + t v)) over all frequencies, then the
/// imaginary parts (same layout as the measurement vectors).
class FourierPhaseModel {
 public:
  FourierPhaseModel(std::vector<double> times, int cutoff)
      : times_(std::move(times)), freqs_(fourier_frequencies(cutoff)), cutoff_(cutoff) {
    if (times_.empty()) throw std::invalid_argument("FourierPhaseModel: no times");
  }

  const std::vector<double>& times() const { return times_; }
  int cutoff() const { return cutoff_; }
  Eigen::Index block() const { return 2 * static_cast<Eigen::Index>(freqs_.size()); }
  Eigen::Index size() const { return block() * static_cast<Eigen::Index>(times_.size()); }
  const std::vector<Eigen::Vector2i>& frequencies() const { return freqs_; }

  Eigen::VectorXd features(const Vec2& x, const Vec2& v) const {
    Eigen::VectorXd out(size());
    const Eigen::Index nf = static_cast<Eigen::Index>(freqs_.size());
    for (std::size_t ti = 0; ti < times_.size(); ++ti) {
      const Vec2 p = x + times_[ti] * v;
      const Eigen::Index off = static_cast<Eigen::Index>(ti) * block();
      for (Eigen::Index k = 0; k < nf; ++k) {
        const double ph = 2.0 * std::numbers::pi * p.dot(freqs_[k].cast<double>());
        out(off + k) = std::cos(ph);
        out(off + nf + k) = -std::sin(ph);
      }
    }
    return out;
  }

  /// Gradient of r . features(x, v) with respect to x and v.
  void feature_gradient(const Vec2& x, const Vec2& v, const Eigen::VectorXd& r, Vec2& gx, Vec2& gv) const {
    gx.setZero();
    gv.setZero();
    const Eigen::Index nf = static_cast<Eigen::Index>(freqs_.size());
    for (std::size_t ti = 0; ti < times_.size(); ++ti) {
      const double t = times_[ti];
      const Vec2 p = x + t * v;
      const Eigen::Index off = static_cast<Eigen::Index>(ti) * block();
      Vec2 gp = Vec2::Zero();
      for (Eigen::Index k = 0; k < nf; ++k) {
        const Vec2 w = 2.0 * std::numbers::pi * freqs_[k].cast<double>();
        const double ph = p.dot(w);
        // d cos = -sin * w,  d(-sin) = -cos * w
        gp -= (r(off + k) * std::sin(ph) + r(off + nf + k) * std::cos(ph)) * w;
      }
      gx += gp;
      gv += t * gp;
    }
  }

 private:
  std::vector<double> times_;
  std::vector<Eigen::Vector2i> freqs_;
  int cutoff_;
};

/// Euclidean projection onto a convex polygon given counter-clockwise.
template <std::size_t N>
Vec2 project_onto_polygon(const Vec2& p, const std::array<Vec2, N>& poly) {
  bool inside = true;
  for (std::size_t i = 0; i < N && inside; ++i) {
    const Vec2 e = poly[(i + 1) % N] - poly[i];
    const Vec2 r = p - poly[i];
    inside = e.x() * r.y() - e.y() * r.x() >= 0.0;
  }
  if (inside) return p;
  Vec2 best = poly[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    const Vec2 a = poly[i], e = poly[(i + 1) % N] - a;
    const double s = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const Vec2 q = a + s * e;
    const double d = (p - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

struct AdcgAtom {
  Vec2 x;
  Vec2 v;
  double m = 0.0;
};

struct AtomicSolution {
  std::vector<AdcgAtom> atoms;
  double objective = 0.0;
  std::vector<double> objective_trace;  // after every outer iteration, starting with the empty measure
  int outer_iterations = 0;
  std::string reason;

  /// Atoms with mass >= w_min at time t.
  DiscreteMeasure<2> snapshot(double t, double w_min = 0.0) const {
    DiscreteMeasure<2> out;
    for (const auto& a : atoms)
      if (a.m >= w_min && a.m > 0.0) out.add(a.x + t * a.v, a.m);
    return out;
  }
};

class AdcgSolver {
 public:
  AdcgSolver(FourierPhaseModel model, double T, double alpha, AdcgParams params = {})
      : model_(std::move(model)), T_(T), alpha_(alpha), params_(params) {
    if (!(T_ > 0.0)) throw std::invalid_argument("AdcgSolver: T must be positive");
    if (!(alpha_ > 0.0)) throw std::invalid_argument("AdcgSolver: alpha must be positive");
    params_.validate();
    const auto P = projected_phase_domain(Direction2(Vec2(1.0, 0.0)), T_);
    domain_ = P.boundary();
    const GridSpec g = make_grid(P, params_.init_grid);
    for (Eigen::Index j = 0; j < g.cell_count(); ++j) candidates_.push_back(g.cell_center(j));
  }

  const FourierPhaseModel& model() const { return model_; }

  /// Model output minus data.
  Eigen::VectorXd residual(const std::vector<AdcgAtom>& atoms, const Eigen::VectorXd& f) const {
    Eigen::VectorXd r = -f;
    for (const auto& a : atoms) r += a.m * model_.features(a.x, a.v);
    return r;
  }

  double objective(const std::vector<AdcgAtom>& atoms, const Eigen::VectorXd& f) const {
    double mass = 0.0;
    for (const auto& a : atoms) mass += a.m;
    return 0.5 * residual(atoms, f).squaredNorm() + alpha_ * mass;
  }

  /// Gradient of the objective, ordered (x1, x2, v1, v2, m) per atom.
  Eigen::VectorXd gradient(const std::vector<AdcgAtom>& atoms, const Eigen::VectorXd& f) const {
    const Eigen::VectorXd r = residual(atoms, f);
    Eigen::VectorXd g(5 * atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& a = atoms[i];
      Vec2 gx, gv;
      model_.feature_gradient(a.x, a.v, r, gx, gv);
      g.segment<2>(5 * i) = a.m * gx;
      g.segment<2>(5 * i + 2) = a.m * gv;
      g(5 * i + 4) = model_.features(a.x, a.v).dot(r) + alpha_;
    }
    return g;
  }

  /// Keeps (x, v) in the phase domain and m >= 0.
  AdcgAtom project(AdcgAtom a) const {
    for (int k = 0; k < 2; ++k) {
      const Vec2 q = project_onto_polygon(Vec2(a.x[k], a.v[k]), domain_);
      a.x[k] = q.x();
      a.v[k] = q.y();
    }
    a.m = std::max(0.0, a.m);
    return a;
  }

  AtomicSolution solve(const Eigen::VectorXd& f) const {
    if (f.size() != model_.size()) throw std::invalid_argument("AdcgSolver: data length mismatch");
    if (!f.allFinite()) throw std::invalid_argument("AdcgSolver: non-finite data");
    AtomicSolution sol;
    double obj = objective(sol.atoms, f);
    sol.objective_trace.push_back(obj);
    sol.reason = "max_outer";
    for (int outer = 0; outer < params_.max_outer; ++outer) {
      sol.outer_iterations = outer + 1;
      const Eigen::VectorXd r = -residual(sol.atoms, f);
      auto [cand, score] = best_candidate(r);
      if (score - alpha_ < params_.min_gap) {
        sol.reason = "gap";
        sol.outer_iterations = outer;
        break;
      }
      sol.atoms.push_back({cand.x, cand.v, 0.0});
      refit_weights(sol.atoms, f);
      local_descent(sol.atoms, f);
      std::erase_if(sol.atoms, [](const AdcgAtom& a) { return !(a.m > 0.0); });
      const double next = objective(sol.atoms, f);
      if (!std::isfinite(next)) throw std::runtime_error("AdcgSolver: non-finite objective");
      sol.objective_trace.push_back(next);
      const double progress = obj - next;
      obj = next;
      if (progress < params_.min_progress) {
        sol.reason = "progress";
        break;
      }
    }
    sol.objective = obj;
    return sol;
  }

  /// Correlation of a unit atom with the residual r = f - F(lambda).
  double correlation(const Vec2& x, const Vec2& v, const Eigen::VectorXd& r) const {
    return model_.features(x, v).dot(r);
  }

 private:
  /// Grid maximiser of the correlation over the product of the per-coordinate
  /// candidate grids, then projected gradient ascent from it.
  std::pair<AdcgAtom, double> best_candidate(const Eigen::VectorXd& r) const {
    using cd = std::complex<double>;
    const auto& freqs = model_.frequencies();
    const int n_side = 2 * model_.cutoff() + 1;
    const Eigen::Index nf = static_cast<Eigen::Index>(freqs.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(candidates_.size());
    Eigen::MatrixXd score = Eigen::MatrixXd::Zero(nc, nc);
    for (std::size_t ti = 0; ti < model_.times().size(); ++ti) {
      const double t = model_.times()[ti];
      const Eigen::Index off = static_cast<Eigen::Index>(ti) * model_.block();
      // correlation = Re sum_xi exp(i 2 pi xi . p) (r_re + i r_im)
      Eigen::MatrixXcd R(n_side, n_side);
      for (Eigen::Index k = 0; k < nf; ++k) {
        R(freqs[k].x() + model_.cutoff(), freqs[k].y() + model_.cutoff()) = cd(r(off + k), r(off + nf + k));
      }
      Eigen::MatrixXcd E(n_side, nc);
      for (Eigen::Index c = 0; c < nc; ++c) {
        const double p = candidates_[c].x() + t * candidates_[c].y();
        for (int a = 0; a < n_side; ++a) E(a, c) = std::polar(1.0, 2.0 * std::numbers::pi * (a - model_.cutoff()) * p);
      }
      const Eigen::MatrixXcd ER = E.transpose() * R;
      score += (ER * E).real();
    }
    Eigen::Index i1 = 0, i2 = 0;
    score.maxCoeff(&i1, &i2);
    AdcgAtom a{Vec2(candidates_[i1].x(), candidates_[i2].x()), Vec2(candidates_[i1].y(), candidates_[i2].y()), 1.0};
    double best = correlation(a.x, a.v, r);
    double step = 1e-3;
    for (int it = 0; it < 50; ++it) {
      Vec2 gx, gv;
      model_.feature_gradient(a.x, a.v, r, gx, gv);
      bool improved = false;
      for (int bt = 0; bt < 30; ++bt) {
        AdcgAtom b = project({a.x + step * gx, a.v + step * gv, 1.0});
        const double s = correlation(b.x, b.v, r);
        if (s > best) {
          a = b;
          best = s;
          improved = true;
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    a.m = 0.0;
    return {a, best};
  }

  /// Nonnegative least squares with l1 penalty on the weights by cyclic
  /// coordinate descent, positions fixed.
  void refit_weights(std::vector<AdcgAtom>& atoms, const Eigen::VectorXd& f) const {
    const Eigen::Index n = static_cast<Eigen::Index>(atoms.size());
    Eigen::MatrixXd Phi(model_.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) Phi.col(i) = model_.features(atoms[i].x, atoms[i].v);
    const Eigen::MatrixXd G = Phi.transpose() * Phi;
    const Eigen::VectorXd b = Phi.transpose() * f;
    Eigen::VectorXd m(n);
    for (Eigen::Index i = 0; i < n; ++i) m(i) = atoms[i].m;
    for (int sweep = 0; sweep < params_.max_coord_descent; ++sweep) {
      double change = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double next = std::max(0.0, m(i) - (G.row(i).dot(m) - b(i) + alpha_) / G(i, i));
        change = std::max(change, std::abs(next - m(i)));
        m(i) = next;
      }
      if (change <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) break;
    }
    for (Eigen::Index i = 0; i < n; ++i) atoms[i].m = m(i);
  }

  /// Projected gradient descent on all atom parameters jointly with
  /// backtracking (Armijo on the projected step). Position and velocity
  /// components are scaled down by the squared frequency bandwidth.
  void local_descent(std::vector<AdcgAtom>& atoms, const Eigen::VectorXd& f) const {
    const double w = 2.0 * std::numbers::pi * std::max(1, model_.cutoff());
    const double pos_scale = 1.0 / (w * w);
    double obj = objective(atoms, f);
    double step = 1.0 / static_cast<double>(model_.size());
    for (int it = 0; it < params_.max_local_steps; ++it) {
      const Eigen::VectorXd g = gradient(atoms, f);
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        std::vector<AdcgAtom> trial(atoms.size());
        double moved_sq = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          const auto gi = g.segment<5>(5 * i);
          AdcgAtom b{atoms[i].x - step * pos_scale * gi.head<2>(), atoms[i].v - step * pos_scale * gi.segment<2>(2),
                     atoms[i].m - step * gi(4)};
          trial[i] = project(b);
          moved_sq += ((trial[i].x - atoms[i].x).squaredNorm() + (trial[i].v - atoms[i].v).squaredNorm()) / pos_scale +
                      std::pow(trial[i].m - atoms[i].m, 2);
        }
        const double next = objective(trial, f);
        if (next <= obj - 1e-4 * moved_sq / step) {
          const double decrease = obj - next;
          atoms = std::move(trial);
          obj = next;
          accepted = moved_sq > 0.0;
          step *= 2.0;
          if (decrease <= 1e-12 * std::max(1.0, obj)) accepted = false;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
  }

  FourierPhaseModel model_;
  double T_;
  double alpha_;
  AdcgParams params_;
  std::array<Vec2, 4> domain_;
  std::vector<Vec2> candidates_;
};

/// Measurement vectors (one per time) concatenated in model order.
inline Eigen::VectorXd stack_measurements(const std::vector<Eigen::VectorXd>& f) {
  Eigen::Index n = 0;
  for (const auto& v : f) n += v.size();
  Eigen::VectorXd out(n);
  Eigen::Index off = 0;
  for (const auto& v : f) {
    out.segment(off, v.size()) = v;
    off += v.size();
  }
  return out;
}

}  // namespace dynsr
