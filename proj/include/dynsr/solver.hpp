#pragma once

// First-order primal-dual solver for the discretized dimension-reduced problem
//
//   min  sum_theta |gamma_theta|_1 + sum_t |u_t|_1 + 1/(2 alpha) sum_{t in T} |A_t u_t - f_t|^2
//   s.t. ( sum_{theta,t} |M_{theta,t} gamma_theta - R_{t,theta} u_t|^2 )^{1/2} <= tau,
//        gamma, u >= 0,
//
// and for the static problem (no directions, one snapshot).

#include "dynsr/discretize.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynsr {

/// Coupling between one direction variable and one snapshot variable.
struct ConsistencyBlock {
  std::size_t direction = 0;
  std::size_t time = 0;
  SparseMatrix move;   // bins x gamma cells
  SparseMatrix radon;  // bins x snapshot cells
};

/// Observation of one snapshot variable.
struct ObservationBlock {
  std::size_t time = 0;
  Eigen::MatrixXd matrix;
};

/// Matrices of a reduced problem. Independent of the data, so one instance is
/// shared by every dataset entry with the same discretization.
struct ReducedOperator {
  std::vector<Eigen::Index> gamma_sizes;
  std::vector<Eigen::Index> snapshot_sizes;
  std::vector<ConsistencyBlock> consistency;
  std::vector<ObservationBlock> observations;

  Eigen::Index primal_size() const {
    Eigen::Index n = 0;
    for (auto s : gamma_sizes) n += s;
    for (auto s : snapshot_sizes) n += s;
    return n;
  }
  Eigen::Index data_rows() const {
    Eigen::Index n = 0;
    for (const auto& o : observations) n += o.matrix.rows();
    return n;
  }
  Eigen::Index consistency_rows() const {
    Eigen::Index n = 0;
    for (const auto& c : consistency) n += c.move.rows();
    return n;
  }

  void validate() const {
    for (const auto& c : consistency) {
      if (c.direction >= gamma_sizes.size() || c.time >= snapshot_sizes.size())
        throw std::invalid_argument("ReducedOperator: consistency block index out of range");
      if (c.move.rows() != c.radon.rows() || c.move.cols() != gamma_sizes[c.direction] ||
          c.radon.cols() != snapshot_sizes[c.time])
        throw std::invalid_argument("ReducedOperator: consistency block shape mismatch");
    }
    for (const auto& o : observations) {
      if (o.time >= snapshot_sizes.size() || o.matrix.cols() != snapshot_sizes[o.time])
        throw std::invalid_argument("ReducedOperator: observation block shape mismatch");
      if (!o.matrix.allFinite()) throw std::invalid_argument("ReducedOperator: non-finite observation matrix");
    }
  }
};

struct ReducedProblem {
  std::shared_ptr<const ReducedOperator> op;
  std::vector<Eigen::VectorXd> data;  // one vector per observation block
  double alpha = 0.005;
  double tau = 0.001;
};

struct SolverOptions {
  int max_iters = 50000;
  double feas_tol = -1.0;  // negative: 1e-5 * sqrt(#consistency rows)
  double obj_tol = 1e-7;   // relative objective change over one window
  int window = 50;
  double res_tol = 1e-3;   // relative primal-dual residual
  double primal_weight = 0.0;  // initial primal weight; <= 0 picks |1| / |f|
  bool restart = true;         // restarts to the running average
  double consistency_scale = 1.0;  // multiplies the block weight w
  // Called once per window with (iteration, objective, consistency, primal and dual relative residuals).
  std::function<void(int, double, double, double, double)> monitor;
};

struct SolverReport {
  int iterations = 0;
  std::vector<double> objective_trace;  // one entry per window
  double objective = 0.0;
  double consistency_residual = 0.0;
  std::vector<double> data_residuals;
  double gap_estimate = 0.0;
  double wall_ms = 0.0;
  int restarts = 0;
  bool converged = false;
  bool hit_max_iters = false;
};

struct ReducedSolution {
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::VectorXd> u;
  SolverReport report;
};

/// Power iteration on A^T A. Returns 1.01 * sqrt(largest eigenvalue).
template <typename Apply, typename Adjoint>
double operator_norm_estimate(Apply&& apply, Adjoint&& adjoint, Eigen::Index n, int max_iters = 100,
                              double rtol = 1e-6) {
  if (n == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = g(rng);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd y = adjoint(apply(x));
    const double next = y.norm();
    if (next == 0.0) return 0.0;
    x = y / next;
    const bool done = it > 0 && std::abs(next - lambda) <= rtol * next;
    lambda = next;
    if (done) break;
  }
  return 1.01 * std::sqrt(lambda);
}

inline double operator_norm_estimate(const Eigen::MatrixXd& A, int max_iters = 100, double rtol = 1e-6) {
  return operator_norm_estimate([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; },
                                [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return A.transpose() * y; },
                                A.cols(), max_iters, rtol);
}

namespace detail {

/// K = [A (data rows); G (consistency rows)] acting on z = (gammas, snapshots).
class StackedOperator {
 public:
  explicit StackedOperator(const ReducedOperator& op) : op_(op) {
    Eigen::Index off = 0;
    for (auto s : op.gamma_sizes) {
      gamma_off_.push_back(off);
      off += s;
    }
    for (auto s : op.snapshot_sizes) {
      snap_off_.push_back(off);
      off += s;
    }
    n_ = off;
    off = 0;
    for (const auto& o : op.observations) {
      data_off_.push_back(off);
      off += o.matrix.rows();
    }
    md_ = off;
    off = 0;
    for (const auto& c : op.consistency) {
      cons_off_.push_back(off);
      off += c.move.rows();
    }
    mc_ = off;
  }

  Eigen::Index cols() const { return n_; }
  Eigen::Index data_rows() const { return md_; }
  Eigen::Index cons_rows() const { return mc_; }

  void apply_data(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
    out.resize(md_);
    for (std::size_t b = 0; b < op_.observations.size(); ++b) {
      const auto& o = op_.observations[b];
      out.segment(data_off_[b], o.matrix.rows()).noalias() =
          o.matrix * z.segment(snap_off_[o.time], op_.snapshot_sizes[o.time]);
    }
  }

  void apply_cons(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
    out.resize(mc_);
    for (std::size_t b = 0; b < op_.consistency.size(); ++b) {
      const auto& c = op_.consistency[b];
      auto seg = out.segment(cons_off_[b], c.move.rows());
      seg.noalias() = c.move * z.segment(gamma_off_[c.direction], op_.gamma_sizes[c.direction]);
      seg.noalias() -= c.radon * z.segment(snap_off_[c.time], op_.snapshot_sizes[c.time]);
    }
  }

  /// out = wd * A^T p + wc * G^T q
  void adjoint(const Eigen::VectorXd& p, const Eigen::VectorXd& q, Eigen::VectorXd& out, double wd = 1.0,
               double wc = 1.0) const {
    out.setZero(n_);
    for (std::size_t b = 0; b < op_.observations.size(); ++b) {
      const auto& o = op_.observations[b];
      out.segment(snap_off_[o.time], op_.snapshot_sizes[o.time]).noalias() +=
          wd * (o.matrix.transpose() * p.segment(data_off_[b], o.matrix.rows()));
    }
    for (std::size_t b = 0; b < op_.consistency.size(); ++b) {
      const auto& c = op_.consistency[b];
      const auto qs = q.segment(cons_off_[b], c.move.rows());
      out.segment(gamma_off_[c.direction], op_.gamma_sizes[c.direction]).noalias() +=
          wc * (c.move.transpose() * qs);
      out.segment(snap_off_[c.time], op_.snapshot_sizes[c.time]).noalias() -= wc * (c.radon.transpose() * qs);
    }
  }

  Eigen::Index gamma_offset(std::size_t i) const { return gamma_off_[i]; }
  Eigen::Index snapshot_offset(std::size_t i) const { return snap_off_[i]; }
  Eigen::Index data_offset(std::size_t b) const { return data_off_[b]; }

 private:
  const ReducedOperator& op_;
  std::vector<Eigen::Index> gamma_off_, snap_off_, data_off_, cons_off_;
  Eigen::Index n_ = 0, md_ = 0, mc_ = 0;
};

}  // namespace detail

namespace detail {

/// One primal-dual iterate with the operator products it needs.
struct PdState {
  Eigen::VectorXd x, yd, yc;  // primal, data dual, (weighted) consistency dual
  Eigen::VectorXd Kxd, Kxc;   // A x and the unweighted consistency residual G x
  Eigen::VectorXd KTy;        // A^T yd + sqrt(w) G^T yc

  void zeros(Eigen::Index n, Eigen::Index md, Eigen::Index mc) {
    x.setZero(n);
    yd.setZero(md);
    yc.setZero(mc);
    Kxd.setZero(md);
    Kxc.setZero(mc);
    KTy.setZero(n);
  }
};

}  // namespace detail

/// Restarted averaged primal-dual hybrid gradient (Chambolle-Pock).
///
/// Dual blocks: quadratic data terms (closed-form prox of the conjugate) and
/// the aggregated consistency residual, whose conjugate prox is a shrinkage of
/// the dual vector. The primal prox of sum(z) + indicator(z >= 0) is a
/// shift-and-clip. The consistency rows are scaled by sqrt(w), w = (|A| / |G|)^2,
/// so both blocks share one dual step; steps satisfy tau_p * sigma * |K_w|^2 < 1
/// with |K_w| from power iteration. Every `window` iterations the fixed-point
/// residual of the current iterate and of the epoch average are compared; the
/// better one becomes a restart point when the residual has dropped enough,
/// and the primal weight tau_p / sigma is rebalanced from the distance
/// travelled since the last restart.
inline ReducedSolution solve_reduced(const ReducedProblem& prob, const SolverOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  if (!prob.op) throw std::invalid_argument("solve_reduced: missing operator");
  const ReducedOperator& op = *prob.op;
  op.validate();
  if (!(prob.alpha > 0.0) || !std::isfinite(prob.alpha)) throw std::invalid_argument("solve_reduced: alpha must be positive");
  if (!(prob.tau >= 0.0) || !std::isfinite(prob.tau)) throw std::invalid_argument("solve_reduced: tau must be nonnegative");
  if (prob.data.size() != op.observations.size()) throw std::invalid_argument("solve_reduced: data/observation count mismatch");
  for (std::size_t b = 0; b < prob.data.size(); ++b) {
    if (prob.data[b].size() != op.observations[b].matrix.rows()) throw std::invalid_argument("solve_reduced: data length mismatch");
    if (!prob.data[b].allFinite()) throw std::invalid_argument("solve_reduced: non-finite data");
  }
  if (opts.window < 1) throw std::invalid_argument("solve_reduced: window must be >= 1");

  const detail::StackedOperator K(op);
  const Eigen::Index n = K.cols(), md = K.data_rows(), mc = K.cons_rows();
  Eigen::VectorXd f(md);
  for (std::size_t b = 0; b < prob.data.size(); ++b) f.segment(K.data_offset(b), prob.data[b].size()) = prob.data[b];

  const double alpha = prob.alpha, tau = prob.tau;
  const double feas_tol = opts.feas_tol >= 0.0 ? opts.feas_tol : 1e-5 * std::sqrt(double(mc));

  Eigen::VectorXd zero_d = Eigen::VectorXd::Zero(md);
  double norm_d = 0.0;
  for (const auto& o : op.observations) norm_d = std::max(norm_d, operator_norm_estimate(o.matrix));
  const double norm_c = operator_norm_estimate(
      [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y;
        K.apply_cons(x, y);
        return y;
      },
      [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd x;
        K.adjoint(zero_d, y, x, 0.0, 1.0);
        return x;
      },
      n);
  const double wc = opts.consistency_scale * ((norm_c > 0.0 && norm_d > 0.0) ? (norm_d * norm_d) / (norm_c * norm_c) : 1.0);
  const double sw = std::sqrt(wc);
  const double radius = sw * tau;
  const double L = operator_norm_estimate(
      [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd yd, yc, y(md + mc);
        K.apply_data(x, yd);
        K.apply_cons(x, yc);
        y << yd, sw * yc;
        return y;
      },
      [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd x;
        K.adjoint(y.head(md), y.tail(mc), x, 1.0, sw);
        return x;
      },
      n);

  ReducedSolution sol;
  SolverReport& rep = sol.report;
  detail::PdState cur, nxt, avg, img, anchor;
  cur.zeros(n, md, mc);

  auto objective_of = [&](const detail::PdState& s) { return s.x.sum() + (s.Kxd - f).squaredNorm() / (2.0 * alpha); };

  if (L == 0.0) {
    // No observations and no coupling: z = 0 is optimal.
    rep.converged = true;
  } else {
    const double eta = 0.99 / L;
    double omega = opts.primal_weight;
    if (!(omega > 0.0)) omega = f.norm() > 0.0 ? std::sqrt(double(n)) / f.norm() : 1.0;
    double tp = eta / omega, sg = eta * omega;

    auto step = [&](const detail::PdState& s, detail::PdState& o) {
      o.x = (s.x - tp * (s.KTy.array() + 1.0).matrix()).cwiseMax(0.0);
      K.apply_data(o.x, o.Kxd);
      o.yd = (s.yd + sg * (2.0 * o.Kxd - s.Kxd) - sg * f) / (1.0 + sg * alpha);
      if (mc > 0) {
        K.apply_cons(o.x, o.Kxc);
        o.yc = s.yc + (sg * sw) * (2.0 * o.Kxc - s.Kxc);
        const double nrm = o.yc.norm(), shrink = sg * radius;
        o.yc *= nrm > shrink ? (1.0 - shrink / nrm) : 0.0;
      } else {
        o.Kxc.resize(0);
        o.yc.resize(0);
      }
      K.adjoint(o.yd, o.yc, o.KTy, 1.0, sw);
    };
    // Fixed-point residual in the PDHG metric, and the optimality residuals.
    struct Residuals {
      double fixed_point, primal, dual;
    };
    auto residuals = [&](const detail::PdState& s, const detail::PdState& o) {
      const Eigen::VectorXd dx = s.x - o.x;
      const Eigen::VectorXd dyd = s.yd - o.yd, dKd = s.Kxd - o.Kxd;
      double fp = dx.squaredNorm() / tp + dyd.squaredNorm() / sg - 2.0 * dyd.dot(dKd);
      double dual_sq = (dyd / sg - dKd).squaredNorm();
      if (mc > 0) {
        const Eigen::VectorXd dyc = s.yc - o.yc, dKc = sw * (s.Kxc - o.Kxc);
        fp += dyc.squaredNorm() / sg - 2.0 * dyc.dot(dKc);
        dual_sq += (dyc / sg - dKc).squaredNorm();
      }
      return Residuals{std::sqrt(std::max(fp, 0.0)), (dx / tp - (s.KTy - o.KTy)).norm(), std::sqrt(dual_sq)};
    };
    auto axpy_state = [](detail::PdState& acc, const detail::PdState& s, double a, double b) {
      acc.x = a * acc.x + b * s.x;
      acc.yd = a * acc.yd + b * s.yd;
      acc.yc = a * acc.yc + b * s.yc;
      acc.Kxd = a * acc.Kxd + b * s.Kxd;
      acc.Kxc = a * acc.Kxc + b * s.Kxc;
      acc.KTy = a * acc.KTy + b * s.KTy;
    };

    anchor = cur;
    avg.zeros(n, md, mc);
    double r_anchor = -1.0, r_last_candidate = std::numeric_limits<double>::infinity();
    int epoch = 0;
    double obj_prev_window = objective_of(cur);
    const double sqrt_n = std::sqrt(double(n));

    int it = 0;
    for (; it < opts.max_iters; ++it) {
      step(cur, nxt);
      ++epoch;
      const bool check = (it + 1) % opts.window == 0;
      Residuals res{};
      if (r_anchor < 0.0 || check) res = residuals(cur, nxt);
      if (r_anchor < 0.0) r_anchor = res.fixed_point;
      axpy_state(avg, nxt, double(epoch - 1) / epoch, 1.0 / epoch);
      std::swap(cur, nxt);
      if (!check) continue;

      const double obj = objective_of(cur);
      rep.objective_trace.push_back(obj);
      const double denom = std::max(std::abs(obj), 1e-300);
      const double rel_change = (obj == obj_prev_window) ? 0.0 : std::abs(obj - obj_prev_window) / denom;
      obj_prev_window = obj;
      const double cons = mc > 0 ? cur.Kxc.norm() : 0.0;
      const double p_rel = res.primal / sqrt_n;
      const double d_rel = res.dual / std::max({1.0, f.norm(), cur.Kxd.norm()});
      if (opts.monitor) opts.monitor(it + 1, obj, cons, p_rel, d_rel);
      if (rel_change < opts.obj_tol && cons <= tau + feas_tol && p_rel <= opts.res_tol && d_rel <= opts.res_tol) {
        rep.converged = true;
        ++it;
        break;
      }
      if (!opts.restart) continue;

      step(avg, img);
      const double r_avg = residuals(avg, img).fixed_point;
      const bool use_avg = r_avg < res.fixed_point;
      const double r_cand = std::min(r_avg, res.fixed_point);
      const bool restart = r_cand <= 0.2 * r_anchor || (r_cand <= 0.8 * r_anchor && r_cand > r_last_candidate) ||
                           epoch >= 0.36 * (it + 1);
      r_last_candidate = r_cand;
      if (!restart) continue;
      if (use_avg) cur = avg;
      const double dx = (cur.x - anchor.x).norm();
      const double dy = std::sqrt((cur.yd - anchor.yd).squaredNorm() + (cur.yc - anchor.yc).squaredNorm());
      if (dx > 1e-10 && dy > 1e-10) {
        omega = std::exp(0.5 * std::log(dy / dx) + 0.5 * std::log(omega));
        tp = eta / omega;
        sg = eta * omega;
      }
      anchor = cur;
      r_anchor = r_cand;
      r_last_candidate = std::numeric_limits<double>::infinity();
      avg = cur;
      epoch = 0;
      ++rep.restarts;
    }
    rep.iterations = it;
    rep.hit_max_iters = !rep.converged;

    // Certified lower bound: restrict z to sum(z) <= P(0) = |f|^2/(2 alpha).
    const double bound = f.squaredNorm() / (2.0 * alpha);
    const double dual = -0.5 * alpha * cur.yd.squaredNorm() - f.dot(cur.yd) - radius * cur.yc.norm() +
                        bound * std::min(0.0, (cur.KTy.array() + 1.0).minCoeff());
    rep.gap_estimate = objective_of(cur) - dual;
  }

  rep.objective = objective_of(cur);
  rep.consistency_residual = mc > 0 ? cur.Kxc.norm() : 0.0;
  for (std::size_t b = 0; b < op.observations.size(); ++b) {
    rep.data_residuals.push_back((cur.Kxd.segment(K.data_offset(b), prob.data[b].size()) - prob.data[b]).norm());
  }
  for (std::size_t i = 0; i < op.gamma_sizes.size(); ++i) sol.gamma.push_back(cur.x.segment(K.gamma_offset(i), op.gamma_sizes[i]));
  for (std::size_t i = 0; i < op.snapshot_sizes.size(); ++i) sol.u.push_back(cur.x.segment(K.snapshot_offset(i), op.snapshot_sizes[i]));
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

struct StaticSolution {
  Eigen::VectorXd u;
  SolverReport report;
};

/// Static reconstruction: the reduced problem with no directions and one snapshot.
inline StaticSolution solve_static(const Eigen::MatrixXd& A, const Eigen::VectorXd& f, double alpha,
                                   const SolverOptions& opts = {}) {
  if (A.rows() != f.size()) throw std::invalid_argument("solve_static: data length mismatch");
  auto op = std::make_shared<ReducedOperator>();
  op->snapshot_sizes = {A.cols()};
  op->observations.push_back({0, A});
  ReducedProblem prob{op, {f}, alpha, 0.0};
  ReducedSolution s = solve_reduced(prob, opts);
  return {std::move(s.u.front()), std::move(s.report)};
}

}  // namespace dynsr
