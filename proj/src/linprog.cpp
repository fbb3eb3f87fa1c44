#include "lethargy/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lethargy/error.hpp"

namespace lethargy {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;
constexpr int kDegenerateSwitch = 50;

class Tableau {
 public:
  Tableau(const MatrixXd& a, const VectorXd& b, std::vector<Index> basis)
      : rows_(a.rows()), cols_(a.cols()), basis_(std::move(basis)),
        allowed_(static_cast<std::size_t>(cols_), true) {
    t_.resize(rows_ + 1, cols_ + 1);
    t_.topLeftCorner(rows_, cols_) = a;
    t_.topRightCorner(rows_, 1) = b;
    t_.bottomRows(1).setZero();
    active_.assign(static_cast<std::size_t>(rows_), true);
  }

  void set_cost(const VectorXd& c) {
    t_.row(rows_).setZero();
    t_.block(rows_, 0, 1, cols_) = c.transpose();
    for (Index i = 0; i < rows_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const double cb = c(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  void forbid(Index col) { allowed_[static_cast<std::size_t>(col)] = false; }

  // Returns status; iterations accumulated into `iters`.
  LpStatus iterate(int max_iterations, int& iters) {
    int degenerate_run = 0;
    while (iters < max_iterations) {
      const bool bland = degenerate_run >= kDegenerateSwitch;
      Index enter = -1;
      double best = -kCostEps;
      for (Index j = 0; j < cols_; ++j) {
        if (!allowed_[static_cast<std::size_t>(j)]) continue;
        const double rc = t_(rows_, j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < rows_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) continue;
        const double a = t_(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = t_(i, cols_) / a;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = std::min(ratio, best_ratio);
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_run = (best_ratio <= 1e-14) ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++iters;
    }
    return LpStatus::kIterationLimit;
  }

  void pivot(Index r, Index e) {
    t_.row(r) /= t_(r, e);
    for (Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, e);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = e;
  }

  double objective_rhs() const { return -t_(rows_, cols_); }
  double entry(Index i, Index j) const { return t_(i, j); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::vector<Index>& basis() { return basis_; }
  std::vector<bool>& active() { return active_; }
  const std::vector<bool>& allowed() const { return allowed_; }

 private:
  Index rows_;
  Index cols_;
  MatrixXd t_;
  std::vector<Index> basis_;
  std::vector<bool> allowed_;
  std::vector<bool> active_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, int max_iterations) {
  const Index n = lp.cost.size();
  const Index m_ub = lp.a_ub.rows();
  const Index m_eq = lp.a_eq.rows();
  if ((m_ub && lp.a_ub.cols() != n) || (m_eq && lp.a_eq.cols() != n) || lp.b_ub.size() != m_ub ||
      lp.b_eq.size() != m_eq || (!lp.free.empty() && static_cast<Index>(lp.free.size()) != n))
    throw Error(ErrorCode::kDimensionMismatch, "linear program has inconsistent shapes");

  // Structural columns: x_j (or x_j^+ , x_j^- when free).
  std::vector<Index> pos(static_cast<std::size_t>(n)), neg(static_cast<std::size_t>(n), -1);
  Index n_struct = 0;
  for (Index j = 0; j < n; ++j) {
    pos[static_cast<std::size_t>(j)] = n_struct++;
    if (!lp.free.empty() && lp.free[static_cast<std::size_t>(j)]) neg[static_cast<std::size_t>(j)] = n_struct++;
  }
  const Index m = m_ub + m_eq;

  MatrixXd rows_a = MatrixXd::Zero(m, n_struct);
  VectorXd rhs(m);
  auto fill = [&](Index row, const auto& src_row, double b) {
    for (Index j = 0; j < n; ++j) {
      rows_a(row, pos[static_cast<std::size_t>(j)]) = src_row(j);
      if (neg[static_cast<std::size_t>(j)] >= 0) rows_a(row, neg[static_cast<std::size_t>(j)]) = -src_row(j);
    }
    rhs(row) = b;
  };
  for (Index i = 0; i < m_ub; ++i) fill(i, lp.a_ub.row(i), lp.b_ub(i));
  for (Index i = 0; i < m_eq; ++i) fill(m_ub + i, lp.a_eq.row(i), lp.b_eq(i));

  // Slack per inequality row; artificial per row without a +1 slack basis.
  std::vector<double> slack_sign(static_cast<std::size_t>(m), 0.0);
  std::vector<bool> needs_art(static_cast<std::size_t>(m), false);
  for (Index i = 0; i < m; ++i) {
    const bool is_ub = i < m_ub;
    double sign = 1.0;
    if (rhs(i) < 0.0) {
      rows_a.row(i) *= -1.0;
      rhs(i) = -rhs(i);
      sign = -1.0;
    }
    if (is_ub) slack_sign[static_cast<std::size_t>(i)] = sign;
    needs_art[static_cast<std::size_t>(i)] = !is_ub || sign < 0.0;
  }
  const Index n_art = std::count(needs_art.begin(), needs_art.end(), true);
  const Index total = n_struct + m_ub + n_art;

  MatrixXd a = MatrixXd::Zero(m, total);
  a.leftCols(n_struct) = rows_a;
  std::vector<Index> basis(static_cast<std::size_t>(m));
  Index art_col = n_struct + m_ub;
  for (Index i = 0; i < m; ++i) {
    if (i < m_ub) a(i, n_struct + i) = slack_sign[static_cast<std::size_t>(i)];
    if (needs_art[static_cast<std::size_t>(i)]) {
      a(i, art_col) = 1.0;
      basis[static_cast<std::size_t>(i)] = art_col++;
    } else {
      basis[static_cast<std::size_t>(i)] = n_struct + i;
    }
  }

  Tableau tab(a, rhs, basis);
  LpSolution sol;
  const double b_scale = 1.0 + (m ? rhs.cwiseAbs().maxCoeff() : 0.0);

  if (n_art > 0) {
    VectorXd c1 = VectorXd::Zero(total);
    c1.tail(n_art).setOnes();
    tab.set_cost(c1);
    const LpStatus st = tab.iterate(max_iterations, sol.iterations);
    if (st == LpStatus::kIterationLimit) {
      sol.status = st;
      return sol;
    }
    if (tab.objective_rhs() > 1e-9 * b_scale) {
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    for (Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < n_struct + m_ub) continue;
      Index replacement = -1;
      for (Index j = 0; j < n_struct + m_ub; ++j)
        if (std::abs(tab.entry(i, j)) > 1e-9) {
          replacement = j;
          break;
        }
      if (replacement >= 0) tab.pivot(i, replacement);
      else tab.active()[static_cast<std::size_t>(i)] = false;
    }
    for (Index j = n_struct + m_ub; j < total; ++j) tab.forbid(j);
  }

  VectorXd c2 = VectorXd::Zero(total);
  for (Index j = 0; j < n; ++j) {
    c2(pos[static_cast<std::size_t>(j)]) = lp.cost(j);
    if (neg[static_cast<std::size_t>(j)] >= 0) c2(neg[static_cast<std::size_t>(j)]) = -lp.cost(j);
  }
  tab.set_cost(c2);
  sol.status = tab.iterate(max_iterations, sol.iterations);
  if (sol.status != LpStatus::kOptimal) return sol;

  // Re-solve the final basis from the original data.
  std::vector<Index> rows_kept;
  for (Index i = 0; i < m; ++i)
    if (tab.active()[static_cast<std::size_t>(i)]) rows_kept.push_back(i);
  const auto k = static_cast<Index>(rows_kept.size());
  MatrixXd bmat(k, k);
  VectorXd bvec(k), cb(k);
  for (Index r = 0; r < k; ++r) {
    const Index i = rows_kept[static_cast<std::size_t>(r)];
    bvec(r) = rhs(i);
    for (Index s = 0; s < k; ++s) bmat(r, s) = a(i, tab.basis()[static_cast<std::size_t>(rows_kept[static_cast<std::size_t>(s)])]);
  }
  for (Index s = 0; s < k; ++s) cb(s) = c2(tab.basis()[static_cast<std::size_t>(rows_kept[static_cast<std::size_t>(s)])]);
  Eigen::PartialPivLU<MatrixXd> lu;
  VectorXd full = VectorXd::Zero(total);
  double dual_infeas = 0.0;
  if (k > 0) {
    lu.compute(bmat);
    const VectorXd xb = lu.solve(bvec);
    for (Index s = 0; s < k; ++s) full(tab.basis()[static_cast<std::size_t>(rows_kept[static_cast<std::size_t>(s)])]) = xb(s);
    const VectorXd y = lu.transpose().solve(cb);
    for (Index j = 0; j < total; ++j) {
      if (!tab.allowed()[static_cast<std::size_t>(j)]) continue;
      double col_dot = 0.0;
      for (Index r = 0; r < k; ++r) col_dot += a(rows_kept[static_cast<std::size_t>(r)], j) * y(r);
      dual_infeas = std::max(dual_infeas, -(c2(j) - col_dot));
    }
  }

  sol.x.resize(n);
  for (Index j = 0; j < n; ++j) {
    double v = full(pos[static_cast<std::size_t>(j)]);
    if (neg[static_cast<std::size_t>(j)] >= 0) v -= full(neg[static_cast<std::size_t>(j)]);
    sol.x(j) = v;
  }
  sol.objective = lp.cost.dot(sol.x);
  double primal = 0.0;
  if (m_ub) primal = std::max(primal, (lp.a_ub * sol.x - lp.b_ub).maxCoeff());
  if (m_eq) primal = std::max(primal, (lp.a_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff());
  for (Index j = 0; j < n; ++j)
    if (lp.free.empty() || !lp.free[static_cast<std::size_t>(j)]) primal = std::max(primal, -sol.x(j));
  sol.residual = std::max(std::max(primal, 0.0), dual_infeas);
  return sol;
}

}  // namespace lethargy
