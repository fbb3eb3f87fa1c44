#include "lethargy/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "lethargy/distance.hpp"
#include "lethargy/error.hpp"
#include "lethargy/linprog.hpp"
#include "lethargy/rng.hpp"

namespace lethargy {

namespace {

constexpr Index kMaxEnumeration = 16;  // sign-vector enumeration limit
constexpr long kMaxCompound = 400;     // compound-matrix size limit for powers

double conjugate(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double singular_max(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector(0);
  return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

// Calls f(s) for every sign vector of length n with s(0) = +1.
template <class F>
void for_each_sign(Index n, F&& f) {
  Vector s = Vector::Ones(n);
  const long count = 1L << std::max<Index>(n - 1, 0);
  for (long mask = 0; mask < count; ++mask) {
    for (Index j = 1; j < n; ++j) s(j) = (mask >> (j - 1)) & 1 ? -1.0 : 1.0;
    f(s);
  }
}

// sign(y) |y|^{r-1} / ||y||_r^{r-1}: the unit-norm dual vector of y in l_r.
Vector dual_vector(const Vector& y, double r) {
  const double ny = lp_norm(y, r);
  if (ny == 0.0) return Vector::Zero(y.size());
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const double a = std::abs(y(i)) / ny;
    out(i) = (y(i) > 0 ? 1.0 : (y(i) < 0 ? -1.0 : 0.0)) * std::pow(a, r - 1.0);
  }
  return out;
}

double power_lower_bound(const Matrix& a, double p, double q, std::uint64_t seed) {
  const double pc = conjugate(p);
  Rng rng(seed);
  double best = 0.0;
  std::vector<Vector> starts;
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinV);
  starts.push_back(svd.matrixV().col(0));
  for (int s = 0; s < 16; ++s) starts.push_back(rng.normal_vector(a.cols()));
  for (Vector x : starts) {
    x /= lp_norm(x, p);
    for (int it = 0; it < 200; ++it) {
      const Vector y = a * x;
      best = std::max(best, lp_norm(y, q));
      const Vector z = a.transpose() * dual_vector(y, q);
      if (z.isZero(0.0)) break;
      Vector nx = dual_vector(z, pc);
      if ((nx - x).cwiseAbs().maxCoeff() <= 1e-14) break;
      x = nx / lp_norm(nx, p);
    }
    best = std::max(best, lp_norm(a * x, q));
  }
  return best;
}

double lp_exponent(const NormSpec& n) {
  if (n.family() != NormFamily::kLp)
    throw Error(ErrorCode::kUnsupported, "operators take l_p norms, got " + n.describe());
  return n.p();
}

Matrix orthonormal_columns(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

// Extreme points of the l_p unit ball (p in {1, inf}) up to sign.
std::vector<Vector> ball_extremes(Index n, double p) {
  std::vector<Vector> out;
  if (p == 1.0) {
    for (Index j = 0; j < n; ++j) out.push_back(Vector::Unit(n, j));
  } else {
    for_each_sign(n, [&](const Vector& s) { out.push_back(s); });
  }
  return out;
}

// min over theta of max_{e in E} ||(t - sum_k theta_k m_k) e||_q, q in {1, inf}.
struct PolyhedralFit {
  double value = kInf;
  Vector theta;
};

PolyhedralFit fit_polyhedral(const Matrix& t, const std::vector<Matrix>& m,
                             const std::vector<Vector>& extremes, double q) {
  const Index rows = t.rows();
  const auto kk = static_cast<Index>(m.size());
  const auto ne = static_cast<Index>(extremes.size());
  const bool l1 = q == 1.0;
  const Index n_aux = l1 ? ne * rows : 0;
  const Index nv = kk + 1 + n_aux;  // theta, t, aux
  const Index n_rows = 2 * ne * rows + (l1 ? ne : 0);

  LinearProgram lp;
  lp.cost = Vector::Zero(nv);
  lp.cost(kk) = 1.0;
  lp.a_ub = Matrix::Zero(n_rows, nv);
  lp.b_ub = Vector::Zero(n_rows);
  lp.free.assign(static_cast<std::size_t>(nv), false);
  for (Index k = 0; k < kk; ++k) lp.free[static_cast<std::size_t>(k)] = true;

  Index row = 0;
  for (Index e = 0; e < ne; ++e) {
    const Vector te = t * extremes[static_cast<std::size_t>(e)];
    Matrix me(rows, kk);
    for (Index k = 0; k < kk; ++k) me.col(k) = m[static_cast<std::size_t>(k)] * extremes[static_cast<std::size_t>(e)];
    for (Index i = 0; i < rows; ++i) {
      // (te - me theta)_i <= bound  and  -(te - me theta)_i <= bound
      const Index bound = l1 ? kk + 1 + e * rows + i : kk;
      lp.a_ub.row(row).head(kk) = -me.row(i);
      lp.a_ub(row, bound) = -1.0;
      lp.b_ub(row++) = -te(i);
      lp.a_ub.row(row).head(kk) = me.row(i);
      lp.a_ub(row, bound) = -1.0;
      lp.b_ub(row++) = te(i);
    }
    if (l1) {
      for (Index i = 0; i < rows; ++i) lp.a_ub(row, kk + 1 + e * rows + i) = 1.0;
      lp.a_ub(row, kk) = -1.0;
      ++row;
    }
  }
  const LpSolution sol = solve_lp(lp);
  PolyhedralFit fit;
  if (sol.status != LpStatus::kOptimal) return fit;
  fit.theta = sol.x.head(kk);
  fit.value = sol.objective;
  return fit;
}

Matrix low_rank(const Matrix& u, const Matrix& w) { return u * w.transpose(); }

// Upper end of the a_n oracle: best ||T - U W^T|| over rank-r competitors.
double oracle_upper(const Matrix& t, Index r, double p, double q, int restarts, std::uint64_t seed) {
  const Index rows = t.rows();
  const Index cols = t.cols();
  auto norm_of = [&](const Matrix& a) { return matrix_norm(a, p, q, seed).value; };
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u0 = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal();
  const Matrix w0 = svd.matrixV().leftCols(r);
  const double scale = std::max(t.cwiseAbs().maxCoeff(), 1e-300);
  const bool polyhedral = (p == 1.0 || std::isinf(p)) && (q == 1.0 || std::isinf(q));
  const std::vector<Vector> extremes = polyhedral ? ball_extremes(cols, p) : std::vector<Vector>{};

  double best = norm_of(t - low_rank(u0, w0));
  Rng rng(seed);
  for (int s = 0; s < restarts; ++s) {
    Matrix u = s == 0 ? u0 : Matrix(scale * rng.normal_matrix(rows, r));
    Matrix w = s == 0 ? w0 : Matrix(rng.normal_matrix(cols, r));
    double cur = norm_of(t - low_rank(u, w));
    if (polyhedral) {
      for (int it = 0; it < 40; ++it) {
        // Fix U, solve for W.
        std::vector<Matrix> basis;
        for (Index j = 0; j < cols; ++j)
          for (Index k = 0; k < r; ++k) basis.push_back(u.col(k) * Vector::Unit(cols, j).transpose());
        PolyhedralFit fw = fit_polyhedral(t, basis, extremes, q);
        if (fw.theta.size()) {
          Matrix wn(cols, r);
          for (Index j = 0; j < cols; ++j)
            for (Index k = 0; k < r; ++k) wn(j, k) = fw.theta(j * r + k);
          w = wn;
        }
        // Fix W, solve for U.
        basis.clear();
        for (Index i = 0; i < rows; ++i)
          for (Index k = 0; k < r; ++k) basis.push_back(Vector::Unit(rows, i) * w.col(k).transpose());
        PolyhedralFit fu = fit_polyhedral(t, basis, extremes, q);
        if (fu.theta.size()) {
          Matrix un(rows, r);
          for (Index i = 0; i < rows; ++i)
            for (Index k = 0; k < r; ++k) un(i, k) = fu.theta(i * r + k);
          u = un;
        }
        const double next = norm_of(t - low_rank(u, w));
        const bool stalled = !(next < cur - 1e-13 * (1.0 + cur));
        cur = std::min(cur, next);
        if (stalled) break;
      }
    } else {
      // Coordinate pattern search over the entries of U and W.
      double step = 0.25 * scale;
      long budget = 20000;  // norm evaluations per restart
      while (step > 1e-11 * scale && budget > 0) {
        bool moved = false;
        for (int block = 0; block < 2; ++block) {
          Matrix& mtx = block == 0 ? u : w;
          for (Index i = 0; i < mtx.size(); ++i) {
            for (double sign : {1.0, -1.0}) {
              mtx.data()[i] += sign * step;
              const double v = norm_of(t - low_rank(u, w));
              --budget;
              if (v < cur - 1e-12 * (1.0 + cur)) {
                cur = v;
                moved = true;
                break;
              }
              mtx.data()[i] -= sign * step;
            }
          }
        }
        if (!moved) step *= 0.5;
      }
    }
    best = std::min(best, cur);
  }
  return best;
}

// 1 / sup{||x||_p : x in span(e), ||T x||_q <= 1}: T is bounded below by this
// on span(e), so every rank < n competitor leaves at least this much.
double bounded_below(const Matrix& t, const Matrix& e, double p, double q) {
  const Index n = e.cols();
  const Matrix g = t * e;
  Eigen::JacobiSVD<Matrix> svd(g);
  const Vector sv = svd.singularValues();
  if (sv.size() < n || sv(n - 1) <= 1e-12 * std::max(1.0, sv(0))) return 0.0;

  // Objectives w^T c whose max over the feasible set gives the sup.
  std::vector<Vector> objectives;
  if (std::isinf(p)) {
    for (Index i = 0; i < e.rows(); ++i) objectives.push_back(e.row(i).transpose());
  } else if (p == 1.0) {
    if (e.rows() > kMaxEnumeration) return 0.0;
    for_each_sign(e.rows(), [&](const Vector& s) { objectives.push_back(e.transpose() * s); });
  } else if (p == 2.0 && q == 2.0) {
    return sv(n - 1) / singular_max(e);
  } else {
    return 0.0;
  }

  double sup = 0.0;
  if (q == 2.0) {
    const Matrix gram_inv = (g.transpose() * g).inverse();
    for (const auto& w : objectives) sup = std::max(sup, std::sqrt(std::max(0.0, w.dot(gram_inv * w))));
  } else if (q == 1.0 || std::isinf(q)) {
    const Index rows = g.rows();
    const bool l1 = q == 1.0;
    const Index nv = n + (l1 ? rows : 0);
    LinearProgram lp;
    lp.a_ub = Matrix::Zero(2 * rows + (l1 ? 1 : 0), nv);
    lp.b_ub = Vector::Zero(lp.a_ub.rows());
    lp.free.assign(static_cast<std::size_t>(nv), false);
    for (Index k = 0; k < n; ++k) lp.free[static_cast<std::size_t>(k)] = true;
    for (Index i = 0; i < rows; ++i) {
      lp.a_ub.row(2 * i).head(n) = g.row(i);
      lp.a_ub.row(2 * i + 1).head(n) = -g.row(i);
      if (l1) {
        lp.a_ub(2 * i, n + i) = -1.0;
        lp.a_ub(2 * i + 1, n + i) = -1.0;
      } else {
        lp.b_ub(2 * i) = lp.b_ub(2 * i + 1) = 1.0;
      }
    }
    if (l1) {
      lp.a_ub.row(2 * rows).tail(rows).setOnes();
      lp.b_ub(2 * rows) = 1.0;
    }
    for (const auto& w : objectives) {
      lp.cost = Vector::Zero(nv);
      lp.cost.head(n) = -w;
      const LpSolution sol = solve_lp(lp);
      if (sol.status != LpStatus::kOptimal) return 0.0;
      sup = std::max(sup, -sol.objective);
    }
  } else {
    return 0.0;
  }
  return sup > 0 ? 1.0 / sup : 0.0;
}

void combinations(Index n, Index k, const std::function<void(const std::vector<Index>&)>& f) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

long binomial(Index n, Index k) {
  long r = 1;
  for (Index i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// k-th compound matrix: the k x k minors of t, rows and columns indexed by
// k-subsets in lexicographic order.
Matrix compound(const Matrix& t, Index k) {
  if (k == 0) return Matrix::Ones(1, 1);
  std::vector<std::vector<Index>> subsets;
  combinations(t.rows(), k, [&](const std::vector<Index>& idx) { subsets.push_back(idx); });
  const auto m = static_cast<Index>(subsets.size());
  Matrix c(m, m);
  Matrix sub(k, k);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      for (Index a = 0; a < k; ++a)
        for (Index b = 0; b < k; ++b)
          sub(a, b) = t(subsets[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)],
                        subsets[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)]);
      c(i, j) = sub.determinant();
    }
  return c;
}

// log ||c^m|| for m = 1..m_max (-inf once the power vanishes), from
// normalized repeated multiplication.
std::vector<double> log_power_norms(const Matrix& c, int m_max) {
  std::vector<double> out;
  Matrix power = Matrix::Identity(c.rows(), c.cols());
  double log_scale = 0.0;
  for (int m = 1; m <= m_max; ++m) {
    power = c * power;
    const double s = power.norm();
    if (s == 0.0 || !std::isfinite(log_scale)) {
      log_scale = -kInf;
      out.push_back(-kInf);
      continue;
    }
    power /= s;
    log_scale += std::log(s);
    out.push_back(log_scale + std::log(singular_max(power)));
  }
  return out;
}

}  // namespace

std::string_view to_string(ApproxMethod method) {
  switch (method) {
    case ApproxMethod::kSvdExact: return "SVD_EXACT";
    case ApproxMethod::kClosedForm: return "CLOSED_FORM";
    case ApproxMethod::kOracle: return "ORACLE";
  }
  return "UNKNOWN";
}

std::string_view to_string(WidthMethod method) {
  return method == WidthMethod::kEllipsoidExact ? "ELLIPSOID_EXACT" : "UPPER_BOUND";
}

bool OperatorSpec::hilbert() const {
  return domain.family() == NormFamily::kLp && codomain.family() == NormFamily::kLp &&
         domain.p() == 2.0 && codomain.p() == 2.0;
}

void OperatorSpec::validate() const {
  if (!matrix.allFinite()) throw Error(ErrorCode::kInvalidArgument, "operator has non-finite entries");
  lp_exponent(domain);
  lp_exponent(codomain);
  if (h_constant && !(*h_constant > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "H-operator constant must be positive");
  if (h_constant && *h_constant == 1.0 && hilbert()) {
    const double asym = matrix.rows() == matrix.cols()
                            ? (matrix - matrix.transpose()).cwiseAbs().maxCoeff()
                            : kInf;
    if (asym > 1e-12 * (1.0 + matrix.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::kHypothesisViolation, "C = 1 requires a symmetric matrix");
  }
}

NormValue matrix_norm(const Matrix& a, double p, double q, std::uint64_t seed) {
  if (a.size() == 0 || a.isZero(0.0)) return {0.0, true};
  if (p == 2.0 && q == 2.0) return {singular_max(a), true};
  if (p == 1.0) {
    double best = 0.0;
    for (Index j = 0; j < a.cols(); ++j) best = std::max(best, lp_norm(a.col(j), q));
    return {best, true};
  }
  if (std::isinf(q)) {
    const double pc = conjugate(p);
    double best = 0.0;
    for (Index i = 0; i < a.rows(); ++i) best = std::max(best, lp_norm(a.row(i).transpose(), pc));
    return {best, true};
  }
  if (std::isinf(p) && a.cols() <= kMaxEnumeration) {
    double best = 0.0;
    for_each_sign(a.cols(), [&](const Vector& s) { best = std::max(best, lp_norm(a * s, q)); });
    return {best, true};
  }
  if (q == 1.0 && a.rows() <= kMaxEnumeration) {
    const double pc = conjugate(p);
    double best = 0.0;
    for_each_sign(a.rows(), [&](const Vector& s) {
      best = std::max(best, lp_norm(a.transpose() * s, pc));
    });
    return {best, true};
  }
  return {power_lower_bound(a, p, q, seed), false};
}

NormValue operator_norm(const OperatorSpec& op, std::uint64_t seed) {
  op.validate();
  return matrix_norm(op.matrix, lp_exponent(op.domain), lp_exponent(op.codomain), seed);
}

OracleInterval approximation_numbers_oracle(const OperatorSpec& op, std::size_t n, int restarts,
                                            std::uint64_t seed) {
  op.validate();
  const Matrix& t = op.matrix;
  if (t.rows() > kOracleMaxDim || t.cols() > kOracleMaxDim)
    throw Error(ErrorCode::kRankTooLarge, "approximation-number oracle supports dimension <= " +
                                              std::to_string(kOracleMaxDim));
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "approximation numbers are indexed from 1");
  const double p = lp_exponent(op.domain);
  const double q = lp_exponent(op.codomain);
  const Index rows = t.rows();
  const Index cols = t.cols();
  const auto ni = static_cast<Index>(n);

  OracleInterval out;
  const Vector sv = singular_values(t);
  const Index rank = std::count_if(sv.begin(), sv.end(), [&](double s) {
    return s > kRankTolerance * std::max(1.0, sv.size() ? sv(0) : 0.0);
  });
  if (ni > rank) return out;  // S = T has rank < n

  if (n == 1) {
    const NormValue nv = matrix_norm(t, p, q, seed);
    out.value = out.upper = nv.value;
    out.lower = nv.exact ? nv.value : 0.0;
    if (!nv.exact) out.upper = kInf;
    return out;
  }

  out.upper = oracle_upper(t, ni - 1, p, q, restarts, seed);
  out.value = out.upper;

  const double alpha = std::pow(static_cast<double>(rows), std::min(0.0, 1.0 / q - 0.5));
  const double beta = std::pow(static_cast<double>(cols), std::max(0.0, 1.0 / p - 0.5));
  double lower = alpha / beta * sv(ni - 1);

  std::vector<Matrix> subspaces;
  combinations(cols, ni, [&](const std::vector<Index>& idx) {
    Matrix e = Matrix::Zero(cols, ni);
    for (Index k = 0; k < ni; ++k) e(idx[static_cast<std::size_t>(k)], k) = 1.0;
    subspaces.push_back(e);
  });
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullV);
  subspaces.push_back(svd.matrixV().leftCols(ni));
  for (const auto& e : subspaces) lower = std::max(lower, bounded_below(t, e, p, q));
  out.lower = std::min(lower, out.upper);
  return out;
}

ApproxNumberReport approximation_numbers(const OperatorSpec& op, std::uint64_t seed) {
  op.validate();
  const Matrix& t = op.matrix;
  const double p = lp_exponent(op.domain);
  const double q = lp_exponent(op.codomain);
  const Index len = std::min(t.rows(), t.cols());
  ApproxNumberReport rep;

  if (p == 2.0 && q == 2.0) {
    const Vector sv = singular_values(t);
    rep.values.assign(sv.data(), sv.data() + len);
    rep.method = ApproxMethod::kSvdExact;
    return rep;
  }

  bool diagonal = p == q && t.rows() == t.cols();
  for (Index i = 0; diagonal && i < t.rows(); ++i)
    for (Index j = 0; j < t.cols(); ++j) {
      if (i != j && t(i, j) != 0.0) diagonal = false;
      if (i == j && (t(i, i) < 0.0 || (i > 0 && t(i, i) > t(i - 1, i - 1)))) diagonal = false;
    }
  if (diagonal) {
    for (Index i = 0; i < len; ++i) rep.values.push_back(t(i, i));
    rep.method = ApproxMethod::kClosedForm;
    return rep;
  }

  if (t.rows() > kOracleMaxDim || t.cols() > kOracleMaxDim)
    throw Error(ErrorCode::kUnsupported,
                "no closed form for this operator and the oracle is limited to dimension " +
                    std::to_string(kOracleMaxDim));
  rep.method = ApproxMethod::kOracle;
  for (Index n = 1; n <= len; ++n) {
    const OracleInterval iv =
        approximation_numbers_oracle(op, static_cast<std::size_t>(n), 32, Rng::split(seed, n));
    rep.lower.push_back(iv.lower);
    rep.upper.push_back(iv.upper);
  }
  // a_n is non-increasing, so bounds propagate along the index.
  for (std::size_t i = 1; i < rep.upper.size(); ++i) rep.upper[i] = std::min(rep.upper[i], rep.upper[i - 1]);
  for (std::size_t i = rep.lower.size(); i-- > 1;) rep.lower[i - 1] = std::max(rep.lower[i - 1], rep.lower[i]);
  rep.values = rep.upper;
  return rep;
}

OperatorSpec bernstein_pair_diagonal(std::span<const double> d, double p, Index dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (static_cast<Index>(d.size()) < dim)
    throw Error(ErrorCode::kInvalidArgument, "sequence shorter than the dimension");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 0.0) || !std::isfinite(d[i]))
      throw Error(ErrorCode::kHypothesisViolation, "sequence entries must be finite and nonnegative");
    if (i > 0 && d[i] > d[i - 1])
      throw Error(ErrorCode::kHypothesisViolation, "sequence increases at n = " + std::to_string(i + 1));
  }
  OperatorSpec op;
  op.matrix = Matrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) op.matrix(i, i) = d[static_cast<std::size_t>(i)];
  op.domain = NormSpec::lp(p);
  op.codomain = NormSpec::lp(p);
  return op;
}

WidthReport kolmogorov_diameters(const OperatorSpec& op, std::uint64_t seed) {
  op.validate();
  const Matrix& t = op.matrix;
  const double p = lp_exponent(op.domain);
  const double q = lp_exponent(op.codomain);
  const Index len = std::min(t.rows(), t.cols());
  const Vector sv = singular_values(t);
  WidthReport rep;

  if (p == 2.0 && q == 2.0) {
    for (Index n = 0; n <= len; ++n) rep.values.push_back(n < sv.size() ? sv(n) : 0.0);
    rep.method = WidthMethod::kEllipsoidExact;
    return rep;
  }
  if (!(p == 1.0 || std::isinf(p)) || (std::isinf(p) && t.cols() > kMaxEnumeration))
    throw Error(ErrorCode::kUnsupported, "widths outside (2 -> 2) need a domain of l_1 or l_inf");

  rep.method = WidthMethod::kUpperBound;
  const NormSpec qn = NormSpec::lp(q);
  const std::vector<Vector> extremes = ball_extremes(t.cols(), p);
  std::vector<Vector> images;
  for (const auto& e : extremes) images.push_back(t * e);
  auto deviation = [&](const Matrix& l) {
    double worst = 0.0;
    for (const auto& y : images) worst = std::max(worst, distance(y, l, qn).value);
    return worst;
  };

  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU);
  const Index rank = std::count_if(sv.begin(), sv.end(), [&](double s) {
    return s > kRankTolerance * std::max(1.0, sv.size() ? sv(0) : 0.0);
  });
  Rng rng(seed);
  rep.values.push_back(deviation(Matrix(t.rows(), 0)));
  for (Index n = 1; n <= len; ++n) {
    if (n >= rank) {
      rep.values.push_back(0.0);
      continue;
    }
    std::vector<Matrix> candidates;
    candidates.push_back(svd.matrixU().leftCols(n));
    if (binomial(t.cols(), n) <= 200)
      combinations(t.cols(), n, [&](const std::vector<Index>& idx) {
        Matrix l(t.rows(), n);
        for (Index k = 0; k < n; ++k) l.col(k) = t.col(idx[static_cast<std::size_t>(k)]);
        if (numerical_rank(l) == n) candidates.push_back(l);
      });
    if (binomial(t.rows(), n) <= 200)
      combinations(t.rows(), n, [&](const std::vector<Index>& idx) {
        Matrix l = Matrix::Zero(t.rows(), n);
        for (Index k = 0; k < n; ++k) l(idx[static_cast<std::size_t>(k)], k) = 1.0;
        candidates.push_back(l);
      });
    for (int s = 0; s < 8; ++s) candidates.push_back(rng.normal_matrix(t.rows(), n));
    double best = kInf;
    for (const auto& l : candidates) best = std::min(best, deviation(l));
    rep.values.push_back(std::min(best, rep.values.back()));
  }
  return rep;
}

double sampled_width(const Matrix& t, Index n, int samples, std::uint64_t seed) {
  if (n <= 0) return singular_max(t);
  if (n >= t.rows()) return 0.0;
  Rng rng(seed);
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU);
  const Matrix top = svd.matrixU().leftCols(n);
  double best = kInf;
  for (int s = 0; s < samples; ++s) {
    // Mix pure random subspaces with perturbations of the dominant one.
    const double eps = s % 2 == 0 ? 1e3 : std::pow(10.0, -1.0 - (s % 7));
    const Matrix l = orthonormal_columns(top + eps * rng.normal_matrix(t.rows(), n));
    best = std::min(best, singular_max(t - l * (l.transpose() * t)));
  }
  return best;
}

SpectrumReport eigenvalues(const Matrix& t) {
  if (t.rows() != t.cols()) throw Error(ErrorCode::kDimensionMismatch, "eigenvalues need a square matrix");
  SpectrumReport rep;
  if (t.rows() == 0) return rep;
  Eigen::EigenSolver<Matrix> es(t, false);
  rep.converged = es.info() == Eigen::Success;
  const auto ev = es.eigenvalues();
  rep.values.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(rep.values.begin(), rep.values.end(), [](const auto& a, const auto& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return rep;
}

KoenigReport koenig_limit_check(const OperatorSpec& op, std::size_t n, int m_max) {
  op.validate();
  if (!op.hilbert()) throw Error(ErrorCode::kUnsupported, "the limit check runs on (2 -> 2)");
  const Matrix& t = op.matrix;
  if (t.rows() != t.cols()) throw Error(ErrorCode::kDimensionMismatch, "powers need a square matrix");
  if (n < 1 || static_cast<Index>(n) > t.rows())
    throw Error(ErrorCode::kInvalidArgument, "index n must lie in 1..dim");
  if (m_max < 1) throw Error(ErrorCode::kInvalidArgument, "m_max must be positive");

  KoenigReport rep;
  rep.lambda_abs = std::abs(eigenvalues(t).values[n - 1]);
  const auto k = static_cast<Index>(n);
  if (binomial(t.rows(), k) <= kMaxCompound) {
    // s_1 ... s_n(T^m) = ||(C_n T)^m||, so s_n is a ratio of two top singular
    // values, each accurate to relative rounding even when s_n << s_1.
    const std::vector<double> upper = log_power_norms(compound(t, k), m_max);
    const std::vector<double> lower = k > 1 ? log_power_norms(compound(t, k - 1), m_max)
                                            : std::vector<double>(static_cast<std::size_t>(m_max), 0.0);
    for (int m = 1; m <= m_max; ++m) {
      const double lu = upper[static_cast<std::size_t>(m - 1)];
      const double ll = lower[static_cast<std::size_t>(m - 1)];
      rep.g.push_back(std::isfinite(lu) && std::isfinite(ll) ? std::exp((lu - ll) / m) : 0.0);
    }
  } else {
    Matrix power = Matrix::Identity(t.rows(), t.cols());
    double log_scale = 0.0;  // T^m = exp(log_scale) * power
    bool vanished = false;
    for (int m = 1; m <= m_max; ++m) {
      if (!vanished) {
        power = t * power;
        const double s = power.norm();
        if (s == 0.0) {
          vanished = true;
        } else {
          power /= s;
          log_scale += std::log(s);
        }
      }
      double g = 0.0;
      if (!vanished) {
        const double sn = singular_values(power)(k - 1);
        if (sn > 0.0) g = std::exp((std::log(sn) + log_scale) / m);
      }
      rep.g.push_back(g);
    }
  }
  rep.gap = std::abs(rep.g.back() - rep.lambda_abs);
  return rep;
}

MarcusReport marcus_chain_check(const OperatorSpec& op, double tol_rel) {
  op.validate();
  if (!op.hilbert()) throw Error(ErrorCode::kUnsupported, "the Marcus chain runs on (2 -> 2)");
  const Matrix& t = op.matrix;
  if (t.rows() != t.cols() ||
      (t - t.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + t.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::kInvalidArgument, "the Marcus chain needs a symmetric matrix");

  MarcusReport rep;
  rep.C = op.h_constant.value_or(1.0);
  const double c = rep.C;
  const WidthReport widths = kolmogorov_diameters(op);
  const ApproxNumberReport a = approximation_numbers(op);
  const SpectrumReport spec = eigenvalues(t);
  const double tol = tol_rel * std::max(1.0, a.values.empty() ? 0.0 : a.values[0]);
  for (std::size_t n = 1; n <= a.values.size(); ++n) {
    MarcusLevel lv;
    lv.n = n;
    lv.width = widths.values[n - 1];
    lv.literal_width = widths.values[n];
    lv.a = a.values[n - 1];
    lv.lambda_term = 2.0 * std::sqrt(2.0) * c * std::abs(spec.values[n - 1]);
    lv.width_term = 8.0 * c * (c + 1.0) * lv.width;
    auto chain = [&](double w) {
      return w <= lv.a + tol && lv.a <= lv.lambda_term + tol &&
             lv.lambda_term <= 8.0 * c * (c + 1.0) * w + tol;
    };
    lv.pass = chain(lv.width);
    lv.literal_pass = chain(lv.literal_width);
    rep.pass = rep.pass && lv.pass;
    rep.literal_pass = rep.literal_pass && lv.literal_pass;
    rep.levels.push_back(lv);
  }
  return rep;
}

ToReport to_bound_check(const OperatorSpec& op, const TargetSequence& d, std::uint64_t seed) {
  const ApproxNumberReport a = approximation_numbers(op, seed);
  ToReport rep;
  const NormValue nv = operator_norm(op, seed);
  rep.norm = nv.value;
  const double tol = 1e-9 * std::max(1.0, nv.value);
  rep.norm_pass = nv.value <= 2.0 * d(1) + tol;
  rep.pass = rep.norm_pass;
  const std::size_t count = std::min(a.values.size(), d.size());
  for (std::size_t m = 1; m <= count; ++m) {
    ToLevel lv;
    lv.m = m;
    lv.a = a.values[m - 1];
    lv.lower = d(m) / 9.0;
    lv.upper = 3.0 * d(std::max<std::size_t>(1, m / 4));
    // ORACLE values are intervals; both sides must hold for the whole interval.
    const double a_lo = a.lower.empty() ? lv.a : a.lower[m - 1];
    const double a_hi = a.upper.empty() ? lv.a : a.upper[m - 1];
    lv.pass = a_lo >= lv.lower - tol && a_hi <= lv.upper + tol;
    rep.pass = rep.pass && lv.pass;
    rep.levels.push_back(lv);
  }
  return rep;
}

}  // namespace lethargy
