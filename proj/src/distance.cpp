#include "lethargy/distance.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lethargy/error.hpp"
#include "lethargy/linprog.hpp"
#include "lethargy/rng.hpp"

namespace lethargy {

std::string_view to_string(DistanceMethod method) {
  switch (method) {
    case DistanceMethod::kProjection: return "PROJECTION";
    case DistanceMethod::kLinearProgram: return "LINEAR_PROGRAM";
    case DistanceMethod::kConvexDescent: return "CONVEX_DESCENT";
    case DistanceMethod::kClosedForm: return "CLOSED_FORM";
    case DistanceMethod::kTransformed: return "TRANSFORMED";
    case DistanceMethod::kMultiStart: return "MULTI_START";
  }
  return "UNKNOWN";
}

namespace {

struct Projected {
  Vector a;  // coefficients in the orthonormal basis q
  double value = 0.0;
  Certificate cert;
  bool unconverged = false;
};

DistanceResult finish(const Vector& x, const Matrix& basis, const Matrix& q, const Projected& p,
                      bool exact) {
  DistanceResult r;
  r.value = std::max(0.0, p.value);
  r.minimizer = q.cols() ? Vector(q * p.a) : Vector::Zero(x.size());
  r.coefficients = basis.cols() ? Vector(basis.colPivHouseholderQr().solve(r.minimizer))
                                : Vector(0);
  r.certificate = p.cert;
  r.is_exact = exact;
  r.unconverged = p.unconverged;
  return r;
}

// Solves min_a sum_i w_i |x_i - (q a)_i| (weighted = true) or
// min_a max_i |x_i - (q a)_i|. Offsets keep every right-hand side nonnegative
// so no phase-one pass is needed.
Projected lp_distance(const Vector& x, const Matrix& q, const Vector* weights, bool canonical) {
  const Index n = x.size();
  const Index k = q.cols();
  const bool l1 = weights != nullptr;
  const Index extra = l1 ? n : 1;
  const Index nv = k + extra;

  LinearProgram lp;
  lp.cost = Vector::Zero(nv);
  lp.a_ub = Matrix::Zero(2 * n, nv);
  lp.b_ub.resize(2 * n);
  lp.free.assign(static_cast<std::size_t>(nv), true);
  const double xinf = x.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    const Index s = l1 ? k + i : k;
    const double offset = l1 ? std::abs(x(i)) : xinf;
    // x_i - q_i a <= s  and  q_i a - x_i <= s, with s = s' + offset.
    lp.a_ub.row(2 * i).head(k) = -q.row(i);
    lp.a_ub(2 * i, s) = -1.0;
    lp.b_ub(2 * i) = offset - x(i);
    lp.a_ub.row(2 * i + 1).head(k) = q.row(i);
    lp.a_ub(2 * i + 1, s) = -1.0;
    lp.b_ub(2 * i + 1) = offset + x(i);
  }
  double constant = 0.0;
  if (l1) {
    for (Index i = 0; i < n; ++i) {
      lp.cost(k + i) = (*weights)(i);
      constant += (*weights)(i) * std::abs(x(i));
    }
  } else {
    lp.cost(k) = 1.0;
    constant = xinf;
  }

  LpSolution sol = solve_lp(lp);
  Projected out;
  if (sol.status != LpStatus::kOptimal) {
    out.a = Vector::Zero(k);
    out.value = l1 ? constant : xinf;
    out.unconverged = true;
    out.cert = {DistanceMethod::kLinearProgram, kInf, sol.iterations, 0};
    return out;
  }
  Vector a = sol.x.head(k);
  int iterations = sol.iterations;
  double residual = sol.residual;

  if (canonical && k > 0) {
    // Among optimal points pick the one with least ||a||_1.
    LinearProgram c2;
    const Index nv2 = nv + k;
    c2.cost = Vector::Zero(nv2);
    c2.cost.tail(k).setOnes();
    c2.a_ub = Matrix::Zero(2 * n + 2 * k + 1, nv2);
    c2.b_ub = Vector::Zero(2 * n + 2 * k + 1);
    c2.a_ub.topLeftCorner(2 * n, nv) = lp.a_ub;
    c2.b_ub.head(2 * n) = lp.b_ub;
    for (Index j = 0; j < k; ++j) {
      c2.a_ub(2 * n + 2 * j, j) = 1.0;
      c2.a_ub(2 * n + 2 * j, nv + j) = -1.0;
      c2.a_ub(2 * n + 2 * j + 1, j) = -1.0;
      c2.a_ub(2 * n + 2 * j + 1, nv + j) = -1.0;
    }
    c2.a_ub.row(2 * n + 2 * k).head(nv) = lp.cost.transpose();
    c2.b_ub(2 * n + 2 * k) = sol.objective + 1e-12 * (1.0 + constant);
    c2.free.assign(static_cast<std::size_t>(nv2), false);
    for (Index j = 0; j < nv; ++j) c2.free[static_cast<std::size_t>(j)] = true;
    LpSolution s2 = solve_lp(c2);
    iterations += s2.iterations;
    if (s2.status == LpStatus::kOptimal) a = s2.x.head(k);
  }

  out.a = a;
  const Vector r = x - q * a;
  out.value = l1 ? weights->dot(r.cwiseAbs()) : r.cwiseAbs().maxCoeff();
  out.cert = {DistanceMethod::kLinearProgram, residual, iterations, 0};
  return out;
}

// Damped Newton on sum |r_i|^p with x scaled to unit max-abs.
Projected lp_descent(const Vector& x, const Matrix& q, double p, const SolverConfig& cfg) {
  const Index k = q.cols();
  const double scale = x.cwiseAbs().maxCoeff();
  Projected out;
  out.cert.method = DistanceMethod::kConvexDescent;
  if (scale == 0.0 || k == 0) {
    out.a = Vector::Zero(k);
    out.value = lp_norm(x, p);
    return out;
  }
  const Vector xs = x / scale;
  const double tol = cfg.grad_tol * (1.0 + xs.norm());

  auto objective = [&](const Vector& a) { return (xs - q * a).cwiseAbs().array().pow(p).sum(); };
  Vector a = q.transpose() * xs;  // l2 start
  double f = objective(a);
  double gnorm = kInf;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const Vector r = xs - q * a;
    const Eigen::ArrayXd ar = r.cwiseAbs().array();
    const Vector dr = (p * ar.pow(p - 1.0) * r.array().sign()).matrix();
    const Vector g = -q.transpose() * dr;
    // Gradient of ||r||_p itself: g / (p ||r||_p^{p-1}).
    const double np = std::pow(f, 1.0 / p);
    gnorm = np > 0 ? g.norm() / (p * std::pow(np, p - 1.0)) : 0.0;
    if (gnorm <= tol) break;
    const Eigen::ArrayXd hw = p * (p - 1.0) * ar.max(1e-12).pow(p - 2.0);
    Matrix h = q.transpose() * hw.matrix().asDiagonal() * q;
    h.diagonal().array() += 1e-12 * (1.0 + h.diagonal().maxCoeff());
    Vector step = -h.ldlt().solve(g);
    if (!step.allFinite() || g.dot(step) >= 0) step = -g;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Vector cand = a + t * step;
      const double fc = objective(cand);
      if (fc <= f + 1e-4 * t * g.dot(step)) {
        a = cand;
        f = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;  // at the floating-point floor
  }
  out.a = scale * a;
  out.value = scale * std::pow(f, 1.0 / p);
  out.cert.residual = gnorm;
  out.cert.iterations = it;
  out.unconverged = it >= cfg.max_iterations;
  return out;
}

double product_fnorm(const Vector& r, const std::vector<double>& w) {
  double s = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double t = std::abs(r(i));
    s += w[static_cast<std::size_t>(i)] * t / (1.0 + t);
  }
  return s;
}

// Majorize-minimize: t/(1+t) is concave, so its tangent at the incumbent is a
// weighted-l1 majorant; each step is one weighted-l1 LP.
Projected product_fnorm_descent(const Vector& x, const Matrix& q, const NormSpec& norm,
                                const SolverConfig& cfg) {
  const Index n = x.size();
  const Index k = q.cols();
  const auto& w = norm.weights();
  Vector wv(n);
  for (Index i = 0; i < n; ++i) wv(i) = w[static_cast<std::size_t>(i)];

  std::vector<Vector> starts;
  starts.push_back(Vector::Zero(k));
  starts.push_back(q.transpose() * x);
  starts.push_back(lp_distance(x, q, &wv, false).a);
  Rng rng(cfg.seed);
  const double spread = 1.0 + x.norm();
  for (int s = 0; s < cfg.restarts; ++s) starts.push_back(spread * rng.normal_vector(k));

  Projected best;
  best.value = kInf;
  int iterations = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Vector a = starts[s];
    double f = product_fnorm(x - q * a, w);
    for (int it = 0; it < 200; ++it) {
      const Vector r = x - q * a;
      Vector mw(n);
      for (Index i = 0; i < n; ++i) mw(i) = wv(i) / std::pow(1.0 + std::abs(r(i)), 2);
      Projected step = lp_distance(x, q, &mw, false);
      ++iterations;
      const double fc = product_fnorm(x - q * step.a, w);
      if (!(fc < f - 1e-15 * (1.0 + f))) break;
      a = step.a;
      f = fc;
    }
    if (f < best.value) {
      best.value = f;
      best.a = a;
    }
  }
  best.cert = {DistanceMethod::kMultiStart, 0.0, iterations, static_cast<int>(starts.size())};
  return best;
}

bool coordinate_aligned(const Matrix& q, std::vector<bool>& support) {
  const Index n = q.rows();
  support.assign(static_cast<std::size_t>(n), false);
  const Vector diag = q.rowwise().squaredNorm();
  const Matrix proj = q * q.transpose();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(diag(i) - 1.0) <= 1e-10) support[static_cast<std::size_t>(i)] = true;
    else if (std::abs(diag(i)) > 1e-10) return false;
  }
  return (proj - Matrix(diag.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-10;
}

DistanceResult norm_distance(const Vector& x, const Matrix& basis, const Matrix& q,
                             const NormSpec& norm, const SolverConfig& cfg) {
  const double p = norm.p();
  if (p == 2.0) {
    Projected pr;
    pr.a = q.transpose() * x;
    pr.value = (x - q * pr.a).norm();
    pr.cert.method = DistanceMethod::kProjection;
    DistanceResult r = finish(x, basis, q, pr, true);
    // Orthogonality of the residual to the subspace.
    r.certificate.residual = (q.transpose() * (x - r.minimizer)).cwiseAbs().maxCoeff();
    return r;
  }
  if (p == 1.0) {
    const Vector ones = Vector::Ones(x.size());
    const Projected pr = lp_distance(x, q, &ones, cfg.canonical_witness);
    return finish(x, basis, q, pr, !pr.unconverged);
  }
  if (std::isinf(p)) {
    const Projected pr = lp_distance(x, q, nullptr, cfg.canonical_witness);
    return finish(x, basis, q, pr, !pr.unconverged);
  }
  return finish(x, basis, q, lp_descent(x, q, p, cfg), false);
}

}  // namespace

DistanceResult distance(const Vector& x, const Matrix& basis, const NormSpec& norm,
                        const SolverConfig& config) {
  if (basis.cols() > 0 && basis.rows() != x.size())
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has dimension " + std::to_string(x.size()) + ", basis has " +
                    std::to_string(basis.rows()) + " rows");
  if (auto d = norm.required_dim(); d && *d != x.size())
    throw Error(ErrorCode::kDimensionMismatch,
                norm.describe() + " needs dimension " + std::to_string(*d));
  if (!x.allFinite()) throw Error(ErrorCode::kInvalidArgument, "vector has non-finite entries");

  const Matrix q = basis.cols() ? orthonormal_basis(basis) : Matrix(x.size(), 0);

  if (q.cols() == 0) {
    DistanceResult r;
    r.value = norm.evaluate(x);
    r.minimizer = Vector::Zero(x.size());
    r.coefficients = Vector::Zero(basis.cols());
    return r;
  }

  switch (norm.family()) {
    case NormFamily::kLp:
    case NormFamily::kGridSup:
      return norm_distance(x, basis, q, norm, config);
    case NormFamily::kFNormOfNorm: {
      DistanceResult r = norm_distance(x, basis, q, norm.base(), config);
      r.value = r.value / (1.0 + r.value);
      r.certificate.method = DistanceMethod::kTransformed;
      return r;
    }
    case NormFamily::kFNormProduct: {
      std::vector<bool> support;
      if (coordinate_aligned(q, support)) {
        Projected pr;
        pr.a = Vector::Zero(q.cols());
        Vector y = Vector::Zero(x.size());
        for (Index i = 0; i < x.size(); ++i)
          if (support[static_cast<std::size_t>(i)]) y(i) = x(i);
        pr.a = q.transpose() * y;
        pr.value = product_fnorm(x - y, norm.weights());
        pr.cert.method = DistanceMethod::kClosedForm;
        return finish(x, basis, q, pr, true);
      }
      DistanceResult r = finish(x, basis, q, product_fnorm_descent(x, q, norm, config), false);
      r.upper_bound = true;
      return r;
    }
  }
  throw Error(ErrorCode::kUnsupported, "unknown norm family");
}

double distance_oracle(const Vector& x, const Matrix& basis, const NormSpec& norm,
                       double resolution) {
  if (basis.cols() > 0 && basis.rows() != x.size())
    throw Error(ErrorCode::kDimensionMismatch, "oracle: basis rows differ from vector dimension");
  const Matrix q = basis.cols() ? orthonormal_basis(basis) : Matrix(x.size(), 0);
  const Index k = q.cols();
  if (k > 3) throw Error(ErrorCode::kRankTooLarge, "oracle supports rank <= 3, got " + std::to_string(k));
  if (k == 0) return norm.evaluate(x);
  if (!(resolution > 0)) throw Error(ErrorCode::kInvalidArgument, "oracle resolution must be positive");

  // Lipschitz constant of a -> N(x - q a) in the Euclidean coefficient metric.
  double lip2 = 0.0;
  for (Index j = 0; j < k; ++j) {
    const Vector col = q.col(j);
    double lj = 0.0;
    if (norm.family() == NormFamily::kFNormProduct) {
      for (Index i = 0; i < col.size(); ++i) lj += norm.weights()[static_cast<std::size_t>(i)] * std::abs(col(i));
    } else if (norm.family() == NormFamily::kFNormOfNorm) {
      lj = norm.base().evaluate(col);
    } else {
      lj = norm.evaluate(col);
    }
    lip2 += lj * lj;
  }
  const double lip = std::sqrt(lip2);
  const double root_k = std::sqrt(static_cast<double>(k));

  // Minimizers satisfy ||y||_2 <= sqrt(n) N(y) <= 2 sqrt(n) N(x) for lp norms.
  const double radius =
      2.0 * std::sqrt(static_cast<double>(x.size())) * std::max(norm.evaluate(x), x.norm()) + 1e-300;

  // Nested grid refinement with Lipschitz pruning: a cell of width h whose
  // center value exceeds the incumbent by more than lip * h sqrt(k) / 2 cannot
  // hold a better point. The cell holding the minimizer always survives, so
  // the incumbent ends within lip * h sqrt(k) / 2 of the infimum.
  constexpr int kSide = 17;
  constexpr std::size_t kMaxCells = 400000;
  double h = 2.0 * radius / kSide;
  std::vector<Vector> cells;
  const int total = static_cast<int>(std::pow(kSide, k));
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    Vector c(k);
    for (Index j = 0; j < k; ++j) {
      c(j) = -radius + h * (rem % kSide + 0.5);
      rem /= kSide;
    }
    cells.push_back(std::move(c));
  }
  double best = norm.evaluate(x);
  std::vector<double> values;
  while (true) {
    values.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      values[i] = norm.evaluate(x - q * cells[i]);
      best = std::min(best, values[i]);
    }
    const double slack = lip * 0.5 * h * root_k;
    if (slack <= resolution) break;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (values[i] - slack <= best) keep.push_back(i);
    if (keep.size() << k > kMaxCells) {
      std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      keep.resize(kMaxCells >> k);
    }
    std::vector<Vector> next;
    next.reserve(keep.size() << k);
    for (const std::size_t i : keep)
      for (int corner = 0; corner < (1 << k); ++corner) {
        Vector c = cells[i];
        for (Index j = 0; j < k; ++j) c(j) += ((corner >> j) & 1 ? 0.25 : -0.25) * h;
        next.push_back(std::move(c));
      }
    cells = std::move(next);
    h *= 0.5;
  }
  return best;
}

DistanceProfile distance_profile(const Vector& x, const SubspaceChain& chain, const NormSpec& norm,
                                 const SolverConfig& config) {
  DistanceProfile prof;
  prof.levels.reserve(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    SolverConfig cfg = config;
    cfg.seed = Rng::split(config.seed, k);
    prof.levels.push_back(distance(x, chain.basis(k), norm, cfg));
  }
  for (std::size_t k = 1; k < prof.levels.size(); ++k) {
    const auto& a = prof.levels[k - 1];
    const auto& b = prof.levels[k];
    if (a.is_exact && b.is_exact && b.value > a.value + 1e-9 * (1.0 + a.value)) prof.monotone = false;
  }
  return prof;
}

DistanceResult weighted_l1_distance(const Vector& x, const Matrix& basis, const Vector& weights) {
  if (weights.size() != x.size() || (basis.cols() > 0 && basis.rows() != x.size()))
    throw Error(ErrorCode::kDimensionMismatch, "weighted l1 distance: shapes differ");
  const Matrix q = basis.cols() ? orthonormal_basis(basis) : Matrix(x.size(), 0);
  return finish(x, basis, q, lp_distance(x, q, &weights, true), true);
}

}  // namespace lethargy
