#include "lethargy/lethargy.hpp"

#include <algorithm>
#include <cmath>

#include "lethargy/error.hpp"
#include "lethargy/rng.hpp"

namespace lethargy {

namespace {

constexpr double kConditionTolerance = 1e-12;

ConditionReport check_condition(const TargetSequence& d, bool strict) {
  ConditionReport rep;
  const std::size_t n_levels = d.size();
  rep.truncated = !d.tail().has_value();
  rep.tail_sums.assign(n_levels, 0.0);
  rep.margins.assign(n_levels, 0.0);
  rep.level_pass.assign(n_levels, true);
  // Backward accumulation: sum_{k>n} d_k = tail + d_{n+1} + ... + d_N.
  double acc = d.tail_sum();
  for (std::size_t n = n_levels; n >= 1; --n) {
    rep.tail_sums[n - 1] = acc;
    rep.margins[n - 1] = d(n) - acc;
    acc += d(n);
  }
  for (std::size_t n = d.n0(); n <= n_levels; ++n) {
    const double tol = kConditionTolerance * std::max(d(n), rep.tail_sums[n - 1]);
    const double margin = rep.margins[n - 1];
    bool ok;
    if (strict) ok = !(d(n) > 0.0) || margin > tol;
    else ok = margin >= -tol;
    rep.level_pass[n - 1] = ok;
    if (!ok && !rep.first_violation) {
      rep.first_violation = n;
      rep.pass = false;
    }
  }
  return rep;
}

// Unit vector of span(outer) orthogonal to span(inner); sign fixed so the
// largest-magnitude entry is positive.
Vector complement_direction(const Matrix& outer_q, const Matrix& inner_q, Rng& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vector v = outer_q.cols() ? Vector(outer_q * rng.normal_vector(outer_q.cols()))
                              : rng.normal_vector(inner_q.rows());
    for (int pass = 0; pass < 2; ++pass)
      if (inner_q.cols()) v -= inner_q * (inner_q.transpose() * v);
    const double nv = v.norm();
    if (nv > 1e-6) {
      Index imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      return (v(imax) < 0 ? -1.0 : 1.0) * v / nv;
    }
  }
  throw Error(ErrorCode::kInsufficientDimension, "no complement direction available");
}

// Root of the convex, increasing-past-zero g on [lo, hi] with g(lo) < 0 <= g(hi).
template <class F>
double illinois(F&& g, double lo, double hi, double glo, double ghi, double ftol) {
  int side = 0;
  double mid = hi;
  for (int it = 0; it < 300; ++it) {
    mid = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::abs(gm) <= ftol) return mid;
    if (gm < 0) {
      lo = mid;
      glo = gm;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      ghi = gm;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
  }
  return mid;
}

}  // namespace

ConditionReport check_condition_strict(const TargetSequence& d) { return check_condition(d, true); }
ConditionReport check_condition_weak(const TargetSequence& d) { return check_condition(d, false); }

std::string_view to_string(SynthesisStatus status) {
  return status == SynthesisStatus::kOk ? "OK" : "INFEASIBLE_AT_BUDGET";
}

std::string_view to_string(LevelRole role) {
  switch (role) {
    case LevelRole::kPrefix: return "PREFIX";
    case LevelRole::kDyadic: return "DYADIC";
    case LevelRole::kIntermediate: return "INTERMEDIATE";
    case LevelRole::kSuffix: return "SUFFIX";
  }
  return "UNKNOWN";
}

SynthesisResult synthesize_exact(const SubspaceChain& chain, const TargetSequence& d,
                                 const Vector& z, const NormSpec& norm,
                                 const SolverConfig& config) {
  if (norm.is_fnorm())
    throw Error(ErrorCode::kHypothesisViolation, "exact synthesis needs a norm, got " + norm.describe());
  if (const auto rep = validate_chain(chain); !rep.pass)
    throw Error(ErrorCode::kInvalidArgument, "chain fails validation: " + rep.issues.front().detail);
  const std::size_t m = chain.size();
  if (d.size() < m)
    throw Error(ErrorCode::kDimensionMismatch, "sequence shorter than the chain");
  if (z.size() != chain.ambient_dim())
    throw Error(ErrorCode::kDimensionMismatch, "exterior point has the wrong dimension");

  std::vector<double> t(d.values().begin(), d.values().begin() + static_cast<long>(m));
  std::size_t positive = 0;
  while (positive < m && t[positive] > 0.0) ++positive;
  if (positive == 0) throw Error(ErrorCode::kHypothesisViolation, "all targets are zero");

  SynthesisResult best;
  best.max_residual = kInf;
  for (std::size_t k = 0; k + 1 < positive; ++k)
    if (!(t[k] > t[k + 1])) best.outside_lemma_hypothesis = true;

  std::vector<Matrix> q(m);
  for (std::size_t k = 0; k < m; ++k) q[k] = orthonormal_basis(chain.basis(k));

  const bool trailing_zeros = positive < m;
  if (!trailing_zeros) {
    const double zdist = distance(z, chain.last(), norm, config).value;
    if (!(zdist > 1e-10 * std::max(1.0, norm.evaluate(z))))
      throw Error(ErrorCode::kHypothesisViolation, "exterior point lies in the last chain level");
  }

  const double scale = std::max(t[0], 1.0);
  const double accept = kSynthesisTolerance * scale;
  auto dist = [&](const Vector& v, std::size_t level) {
    return distance(v, chain.basis(level), norm, config);
  };

  for (int restart = 0; restart < kSynthesisRestarts; ++restart) {
    Rng rng(Rng::split(config.seed, static_cast<std::uint64_t>(restart)));
    const std::size_t top = positive - 1;  // last level with a positive target
    const Vector ext = trailing_zeros ? complement_direction(q[positive], q[top], rng) : z;
    const double lambda = t[top] / dist(ext, top).value;
    Vector x = lambda * ext;

    for (std::size_t k = top; k-- > 0;) {
      x -= dist(x, k + 1).minimizer;  // now rho(x, Y_k) = t[k + 1]
      if (!(t[k] > t[k + 1])) continue;
      const Vector v = complement_direction(q[k + 1], q[k], rng);
      const double target = t[k];
      auto g = [&](double s) { return dist(x + s * v, k).value - target; };
      const double hi = (t[k] + t[k + 1]) / dist(v, k).value;
      const double s = illinois(g, 0.0, hi, t[k + 1] - target, g(hi), 1e-14 * scale);
      x += s * v;
    }
    x -= dist(x, 0).minimizer;

    SynthesisResult cur;
    cur.x = x;
    cur.lambda = lambda;
    cur.exterior = ext;
    cur.restarts_used = restart;
    cur.outside_lemma_hypothesis = best.outside_lemma_hypothesis;
    const DistanceProfile prof = distance_profile(x, chain, norm, config);
    for (std::size_t k = 0; k < m; ++k) {
      cur.rho.push_back(prof.levels[k].value);
      cur.residuals.push_back(std::abs(prof.levels[k].value - t[k]));
      cur.max_residual = std::max(cur.max_residual, cur.residuals.back());
    }
    cur.norm_bound_slack = t[0] + 1.0 - norm.evaluate(x);
    const bool ok = cur.max_residual <= accept && cur.norm_bound_slack >= -kSynthesisTolerance;
    cur.status = ok ? SynthesisStatus::kOk : SynthesisStatus::kInfeasibleAtBudget;
    if (cur.max_residual < best.max_residual) best = cur;
    if (ok) break;
  }
  return best;
}

BoundReport verify_bounds(const Vector& x, const SubspaceChain& chain, const TargetSequence& d,
                          double c, const NormSpec& norm, double tol_rel,
                          const SolverConfig& config) {
  if (d.size() < chain.size())
    throw Error(ErrorCode::kDimensionMismatch, "sequence shorter than the chain");
  BoundReport rep;
  const DistanceProfile prof = distance_profile(x, chain, norm, config);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    BoundLevel lv;
    lv.n = k + 1;
    lv.d = d(k + 1);
    lv.rho = prof.levels[k].value;
    lv.ratio = lv.d > 0 ? lv.rho / lv.d : kInf;
    lv.lower = c * lv.d;
    lv.upper = 4.0 * c * lv.d;
    const double tol = tol_rel * lv.d + 1e-15;
    lv.pass = lv.rho >= lv.lower - tol && lv.rho <= lv.upper + tol;
    rep.pass = rep.pass && lv.pass;
    rep.levels.push_back(lv);
  }
  return rep;
}

KonyaginResult synthesize_konyagin(const SubspaceChain& chain, const TargetSequence& d,
                                   const KonyaginConfig& cfg, const NormSpec& norm,
                                   const SolverConfig& solver) {
  if (!(cfg.c > 0.0 && cfg.c <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "c must lie in (0, 1]");
  if (d.size() < chain.size())
    throw Error(ErrorCode::kDimensionMismatch, "sequence shorter than the chain");
  const TargetSequence dm(std::vector<double>(d.values().begin(),
                                              d.values().begin() + static_cast<long>(chain.size())),
                          1, d.tail());

  KonyaginResult out;
  out.interleave = interleave_chain(chain, dm, cfg.K, Rng::split(cfg.seed, 0));
  const auto& merged = out.interleave;
  const std::size_t total = merged.chain.size();

  // Prefix/suffix and dyadic levels keep their targets; levels strictly
  // between two dyadic levels are pinned to the next dyadic value below.
  std::vector<double> pinned = merged.sequence.values();
  std::optional<double> next_dyadic;
  std::vector<bool> after_dyadic(total, false), before_dyadic(total, false);
  for (std::size_t j = total; j-- > 0;) {
    if (merged.levels[j].dyadic_exponent) {
      next_dyadic = pinned[j];
    } else if (next_dyadic) {
      before_dyadic[j] = true;
      pinned[j] = *next_dyadic;
    }
  }
  bool seen = false;
  for (std::size_t j = 0; j < total; ++j) {
    after_dyadic[j] = seen;
    if (merged.levels[j].dyadic_exponent) seen = true;
    // Prefix levels (no dyadic above) keep their own target.
    if (!after_dyadic[j] && !merged.levels[j].dyadic_exponent) pinned[j] = merged.sequence.values()[j];
  }
  out.pinned_targets = pinned;

  for (std::size_t n = 0; n < chain.size(); ++n) {
    const std::size_t j = merged.index_map[n];
    if (merged.levels[j].dyadic_exponent) out.roles.push_back(LevelRole::kDyadic);
    else if (!after_dyadic[j]) out.roles.push_back(LevelRole::kPrefix);
    else if (!before_dyadic[j]) out.roles.push_back(LevelRole::kSuffix);
    else out.roles.push_back(LevelRole::kIntermediate);
  }

  Rng rng(Rng::split(cfg.seed, 1));
  const Vector z = complement_direction(Matrix(chain.ambient_dim(), 0),
                                        orthonormal_basis(merged.chain.last()), rng);
  SolverConfig sc = solver;
  sc.seed = Rng::split(cfg.seed, 2);
  out.synthesis = synthesize_exact(merged.chain, TargetSequence(pinned), z, norm, sc);
  out.x = out.synthesis.x;
  out.x_c = 4.0 * cfg.c * out.x;

  constexpr double kTol = 1e-6;
  out.report = verify_bounds(out.x_c, chain, dm, cfg.c, norm, kTol, solver);
  if (std::abs(cfg.c - 0.25) <= 1e-15) {
    bool ok = true;
    for (const auto& lv : out.report.levels) ok = ok && lv.ratio >= 0.25 - kTol && lv.ratio <= 1.0 + kTol;
    out.narrow_interval_pass = ok;
  }
  const double top = 4.0 * cfg.c;
  for (std::size_t n = 0; n < chain.size(); ++n) {
    const double r = out.report.levels[n].ratio;
    if (out.roles[n] == LevelRole::kIntermediate)
      out.dichotomy = out.dichotomy && r > cfg.c - kTol && r < top + kTol;
    else
      out.dichotomy = out.dichotomy && std::abs(r - top) <= kTol * top;
  }
  return out;
}

RatioReport ratio_report(const Vector& x, const SubspaceChain& chain, const TargetSequence& d,
                         const NormSpec& norm, const SolverConfig& config) {
  if (d.size() < chain.size())
    throw Error(ErrorCode::kDimensionMismatch, "sequence shorter than the chain");
  RatioReport rep;
  const DistanceProfile prof = distance_profile(x, chain, norm, config);
  rep.sup = -kInf;
  rep.inf = kInf;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    RatioLevel lv;
    lv.n = k + 1;
    lv.d = d(k + 1);
    lv.rho = prof.levels[k].value;
    lv.ratio = lv.d > 0 ? lv.rho / lv.d : kInf;
    lv.at_least_d = lv.rho >= lv.d * (1.0 - 1e-12);
    if (lv.d > 0) {
      rep.sup = std::max(rep.sup, lv.ratio);
      rep.inf = std::min(rep.inf, lv.ratio);
    }
    rep.levels.push_back(lv);
  }
  if (rep.sup == -kInf) rep.sup = rep.inf = kInf;
  return rep;
}

}  // namespace lethargy
