#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lethargy/distance.hpp"
#include "lethargy/spaces.hpp"

namespace lethargy {

/// Outcome of d_n vs sum_{k>n} d_k over the represented levels.
struct ConditionReport {
  bool pass = true;
  bool truncated = false;  // no tail model: sums stop at N
  std::optional<std::size_t> first_violation;  // 1-based n
  std::vector<double> tail_sums;  // sum_{k>n} d_k, index n-1
  std::vector<double> margins;    // d_n - tail_sums[n-1]
  std::vector<bool> level_pass;   // per n; levels below n0 pass
};

/// d_n > sum_{k>n} d_k for every n >= n0 with d_n > 0.
ConditionReport check_condition_strict(const TargetSequence& d);
/// d_n >= sum_{k>n} d_k for every n >= n0, at relative tolerance 1e-12.
ConditionReport check_condition_weak(const TargetSequence& d);

enum class SynthesisStatus { kOk, kInfeasibleAtBudget };

std::string_view to_string(SynthesisStatus status);

struct SynthesisResult {
  Vector x;
  double lambda = 0.0;
  /// Exterior point actually used: z itself, or a point of Y_{m'+1} outside
  /// Y_{m'} when d vanishes from level m'+1 on.
  Vector exterior;
  std::vector<double> rho;        // rho(x, Y_k)
  std::vector<double> residuals;  // |rho(x, Y_k) - d_k|
  double max_residual = 0.0;
  double norm_bound_slack = 0.0;  // d_1 + 1 - ||x||
  int restarts_used = 0;
  SynthesisStatus status = SynthesisStatus::kOk;
  /// d had ties before its trailing zeros.
  bool outside_lemma_hypothesis = false;
};

inline constexpr double kSynthesisTolerance = 1e-6;  // relative to max(d_1, 1)
inline constexpr int kSynthesisRestarts = 16;

/// x with rho(x, Y_k) = d_k on every level and x - lambda z in Y_m, lambda > 0.
/// Uses the first chain.size() entries of d.
SynthesisResult synthesize_exact(const SubspaceChain& chain, const TargetSequence& d,
                                 const Vector& z, const NormSpec& norm,
                                 const SolverConfig& config = {});

struct KonyaginConfig {
  double c = 1.0;
  std::optional<double> K;  // default 2 d_1
  std::uint64_t seed = 0;
};

struct BoundLevel {
  std::size_t n = 0;  // 1-based
  double d = 0.0;
  double rho = 0.0;
  double ratio = 0.0;
  double lower = 0.0;  // c d_n
  double upper = 0.0;  // 4c d_n
  bool pass = false;
};

struct BoundReport {
  std::vector<BoundLevel> levels;
  bool pass = true;
};

/// c d_n - tol <= rho(x, Y_n) <= 4c d_n + tol with tol = tol_rel * d_n.
BoundReport verify_bounds(const Vector& x, const SubspaceChain& chain, const TargetSequence& d,
                          double c, const NormSpec& norm, double tol_rel = 1e-6,
                          const SolverConfig& config = {});

enum class LevelRole { kPrefix, kDyadic, kIntermediate, kSuffix };

std::string_view to_string(LevelRole role);

struct KonyaginResult {
  Vector x_c;  // 4c x
  Vector x;    // exact solution on the interleaved chain
  BoundReport report;
  /// Only meaningful for c = 1/4: every ratio in [1/4, 1] up to tolerance.
  std::optional<bool> narrow_interval_pass;
  /// Dyadic, prefix and suffix ratios equal 4c; intermediate ratios in (c, 4c).
  bool dichotomy = true;
  std::vector<LevelRole> roles;  // per original level
  InterleaveResult interleave;
  std::vector<double> pinned_targets;  // per merged level
  SynthesisResult synthesis;
};

KonyaginResult synthesize_konyagin(const SubspaceChain& chain, const TargetSequence& d,
                                   const KonyaginConfig& cfg, const NormSpec& norm,
                                   const SolverConfig& solver = {});

struct RatioLevel {
  std::size_t n = 0;
  double d = 0.0;
  double rho = 0.0;
  double ratio = 0.0;  // +inf when d_n = 0
  bool at_least_d = false;  // rho >= d_n
};

struct RatioReport {
  std::vector<RatioLevel> levels;
  double sup = 0.0;
  double inf = 0.0;
};

RatioReport ratio_report(const Vector& x, const SubspaceChain& chain, const TargetSequence& d,
                         const NormSpec& norm, const SolverConfig& config = {});

}  // namespace lethargy
