#include "lethargy/frechet.hpp"

#include <algorithm>
#include <cmath>

#include "lethargy/error.hpp"
#include "lethargy/rng.hpp"

namespace lethargy {

namespace {

// Support of a coordinate-aligned subspace; nullopt when not aligned.
std::optional<std::vector<bool>> coordinate_support(const Matrix& basis, Index dim) {
  std::vector<bool> support(static_cast<std::size_t>(dim), false);
  if (basis.cols() == 0) return support;
  const Matrix q = orthonormal_basis(basis);
  const Matrix proj = q * q.transpose();
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      const double want = (i == j && std::abs(proj(i, i) - 1.0) <= 1e-10) ? 1.0 : 0.0;
      if (std::abs(proj(i, j) - want) > 1e-10) return std::nullopt;
    }
    support[static_cast<std::size_t>(i)] = std::abs(proj(i, i) - 1.0) <= 1e-10;
  }
  return support;
}

Vector complement_sample(const Matrix& outer_q, const Matrix& inner_q, Rng& rng) {
  Vector v = outer_q * rng.normal_vector(outer_q.cols());
  for (int pass = 0; pass < 2; ++pass)
    if (inner_q.cols()) v -= inner_q * (inner_q.transpose() * v);
  const double nv = v.norm();
  return nv > 0 ? Vector(v / nv) : v;
}

}  // namespace

std::string_view to_string(DeviationMethod method) {
  switch (method) {
    case DeviationMethod::kClosedForm: return "CLOSED_FORM";
    case DeviationMethod::kRayLimit: return "RAY_LIMIT";
    case DeviationMethod::kSampledLowerBound: return "SAMPLED_LOWER_BOUND";
  }
  return "UNKNOWN";
}

std::string_view to_string(DeviationTrend trend) {
  return trend == DeviationTrend::kDecaying ? "DECAYING" : "BOUNDED_BELOW";
}

std::string_view to_string(AlStatus status) {
  switch (status) {
    case AlStatus::kOk: return "OK";
    case AlStatus::kTruncated: return "TRUNCATED";
    case AlStatus::kDivergentTail: return "DIVERGENT_TAIL";
  }
  return "UNKNOWN";
}

double ray_distance(const Vector& v, const Matrix& basis, const NormSpec& fnorm, double t,
                    const SolverConfig& config) {
  return distance(t * v, basis, fnorm, config).value;
}

DeviationEntry deviation(const SubspaceChain& chain, const NormSpec& fnorm, std::size_t n,
                         const RayConfig& ray) {
  if (!fnorm.is_fnorm())
    throw Error(ErrorCode::kInvalidArgument, "deviation needs an F-norm, got " + fnorm.describe());
  if (n < 1 || n > chain.size())
    throw Error(ErrorCode::kInvalidArgument, "deviation index out of range");
  const Index dim = chain.ambient_dim();
  const Matrix& inner = chain.basis(n - 1);
  const Matrix outer = n < chain.size() ? chain.basis(n) : Matrix(Matrix::Identity(dim, dim));

  DeviationEntry entry;
  entry.n = n;
  if (fnorm.family() == NormFamily::kFNormProduct) {
    const auto in = coordinate_support(inner, dim);
    const auto out = coordinate_support(outer, dim);
    if (in && out) {
      // Each new coordinate contributes w_j sup_t t / (1 + t) = w_j.
      for (Index j = 0; j < dim; ++j)
        if ((*out)[static_cast<std::size_t>(j)] && !(*in)[static_cast<std::size_t>(j)])
          entry.value += fnorm.weights()[static_cast<std::size_t>(j)];
      entry.method = DeviationMethod::kClosedForm;
      return entry;
    }
  }

  const Matrix outer_q = orthonormal_basis(outer);
  const Matrix inner_q = inner.cols() ? orthonormal_basis(inner) : Matrix(dim, 0);
  Rng rng(ray.seed);
  SolverConfig cfg;
  cfg.seed = Rng::split(ray.seed, n);

  if (fnorm.family() == NormFamily::kFNormOfNorm) {
    // t -> t / (1 + t) is increasing, so the ray value at t_max is the best
    // finite witness along each direction.
    double best = 0.0;
    for (int s = 0; s < std::max(1, ray.samples); ++s) {
      const Vector v = complement_sample(outer_q, inner_q, rng);
      const double r = distance(v, inner, fnorm.base(), cfg).value;
      best = std::max(best, ray.t_max * r / (1.0 + ray.t_max * r));
    }
    entry.value = best;
    entry.method = DeviationMethod::kRayLimit;
    entry.residual = 1.0 - best;
    return entry;
  }

  double best = 0.0;
  for (int s = 0; s < std::max(1, ray.samples); ++s) {
    const Vector v = complement_sample(outer_q, inner_q, rng);
    for (double t = 1.0; t <= ray.t_max * (1.0 + 1e-12); t *= 10.0)
      best = std::max(best, ray_distance(v, inner, fnorm, t, cfg));
  }
  entry.value = best;
  entry.method = DeviationMethod::kSampledLowerBound;
  return entry;
}

DeviationReport deviation_inf(const SubspaceChain& chain, const NormSpec& fnorm, std::size_t N,
                              const RayConfig& ray) {
  if (N < 1 || N > chain.size())
    throw Error(ErrorCode::kInvalidArgument, "truncation must lie in 1..chain length");
  DeviationReport rep;
  rep.truncation = N;
  rep.inf = kInf;
  double sup = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    rep.entries.push_back(deviation(chain, fnorm, n, ray));
    rep.inf = std::min(rep.inf, rep.entries.back().value);
    sup = std::max(sup, rep.entries.back().value);
  }
  // Finite evidence only: a drop by more than half over the range reads as decay.
  rep.trend = rep.inf < 0.5 * sup ? DeviationTrend::kDecaying : DeviationTrend::kBoundedBelow;
  return rep;
}

AlConditionReport check_al_condition(const TargetSequence& e, const TargetSequence& delta,
                                     const std::optional<std::vector<double>>& deviations) {
  AlConditionReport rep;
  rep.banach_mode = !deviations.has_value();
  const std::size_t N = e.size();
  if (delta.size() != N) throw Error(ErrorCode::kDimensionMismatch, "e and delta lengths differ");
  for (std::size_t j = 1; j <= N; ++j) {
    if (!(e(j) > 0.0)) throw Error(ErrorCode::kInvalidArgument, "e must be positive");
    if (!rep.banach_mode && !(delta(j) > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "delta must be positive outside Banach mode");
  }
  std::size_t levels = N;
  if (deviations) levels = std::min(levels, deviations->size());

  const bool delta_zero = std::all_of(delta.values().begin(), delta.values().end(),
                                      [](double v) { return v == 0.0; });
  bool truncated = !e.tail() || (!delta_zero && !delta.tail());
  const double re = e.tail() ? e.tail()->ratio : 0.0;
  const double rd = delta.tail() ? delta.tail()->ratio : 0.0;
  if ((e.tail() && re >= 0.5) || (!delta_zero && delta.tail() && rd >= 0.5)) {
    rep.status = AlStatus::kDivergentTail;
    rep.pass = false;
    return rep;
  }
  // sum_{j>N} 2^{j-N} x_N r^{j-N} = x_N 2r / (1 - 2r).
  const double tail_at_N = (e.tail() ? e(N) * 2.0 * re / (1.0 - 2.0 * re) : 0.0) +
                           (!delta_zero && delta.tail() ? delta(N) * 2.0 * rd / (1.0 - 2.0 * rd) : 0.0);

  rep.pass = true;
  for (std::size_t n = 1; n <= levels; ++n) {
    AlLevel lv;
    lv.n = n;
    for (std::size_t j = n; j <= N; ++j)
      lv.partial_sum += std::ldexp(delta(j) + e(j), static_cast<int>(j - n));
    lv.tail_bound = std::ldexp(tail_at_N, static_cast<int>(N - n));
    const double dev = rep.banach_mode ? kInf : (*deviations)[n - 1];
    const double prev = n == 1 ? kInf : e(n - 1);
    lv.threshold = std::min(dev, prev);
    lv.pass = lv.partial_sum + lv.tail_bound < lv.threshold;
    rep.pass = rep.pass && lv.pass;
    rep.levels.push_back(lv);
  }
  rep.status = truncated ? AlStatus::kTruncated : AlStatus::kOk;
  return rep;
}

FrechetReport verify_frechet_bounds(const Vector& x, const SubspaceChain& chain,
                                    const TargetSequence& e, std::size_t n0, const NormSpec& fnorm,
                                    const SolverConfig& config) {
  if (!fnorm.is_fnorm())
    throw Error(ErrorCode::kInvalidArgument, "Frechet bounds need an F-norm, got " + fnorm.describe());
  if (e.size() < chain.size()) throw Error(ErrorCode::kDimensionMismatch, "sequence shorter than the chain");
  if (n0 < 1) throw Error(ErrorCode::kInvalidArgument, "n0 must be at least 1");
  FrechetReport rep;
  for (std::size_t n = n0; n <= chain.size(); ++n) {
    FrechetLevel lv;
    lv.n = n;
    lv.e = e(n);
    SolverConfig cfg = config;
    cfg.seed = Rng::split(config.seed, n);
    const DistanceResult r = distance(x, chain.basis(n - 1), fnorm, cfg);
    lv.rho = r.value;
    lv.one_sided = r.upper_bound;
    lv.lower = lv.e / 3.0;
    lv.upper = 3.0 * lv.e;
    const double tol = 1e-9 * lv.e;
    lv.pass = lv.rho >= lv.lower - tol && lv.rho <= lv.upper + tol;
    rep.pass = rep.pass && lv.pass;
    rep.levels.push_back(lv);
  }
  return rep;
}

std::vector<CorollaryLevel> corollary_transforms(const TargetSequence& e) {
  std::vector<CorollaryLevel> out;
  for (std::size_t n = 1; n <= e.size(); ++n) {
    CorollaryLevel lv;
    lv.n = n;
    lv.e = e(n);
    lv.shapiro = std::sqrt(lv.e);
    lv.tyuremskikh = 3.0 * lv.shapiro;
    lv.implication = lv.shapiro >= lv.e;
    lv.boundary = std::abs(lv.shapiro - lv.e) <= 1e-12 * std::max(1.0, lv.e);
    out.push_back(lv);
  }
  return out;
}

}  // namespace lethargy
