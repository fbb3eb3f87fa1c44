#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lethargy/distance.hpp"
#include "lethargy/spaces.hpp"

namespace lethargy {

enum class DeviationMethod { kClosedForm, kRayLimit, kSampledLowerBound };

std::string_view to_string(DeviationMethod method);

struct RayConfig {
  double t_max = 1e6;
  int samples = 16;  // ray directions tried
  std::uint64_t seed = 0;
};

struct DeviationEntry {
  std::size_t n = 0;  // 1-based
  double value = 0.0;
  DeviationMethod method = DeviationMethod::kClosedForm;
  double residual = 0.0;  // RAY_LIMIT: 1 - value
};

/// d_{n,V} = sup{rho_F(v, V_n) : v in V_{n+1}}. The last level is measured
/// against the ambient space.
DeviationEntry deviation(const SubspaceChain& chain, const NormSpec& fnorm, std::size_t n,
                         const RayConfig& ray = {});

/// rho_F(t v, V_n) for a fixed direction v.
double ray_distance(const Vector& v, const Matrix& basis, const NormSpec& fnorm, double t,
                    const SolverConfig& config = {});

enum class DeviationTrend { kDecaying, kBoundedBelow };

std::string_view to_string(DeviationTrend trend);

struct DeviationReport {
  std::vector<DeviationEntry> entries;
  double inf = 0.0;
  std::size_t truncation = 0;
  DeviationTrend trend = DeviationTrend::kBoundedBelow;
};

DeviationReport deviation_inf(const SubspaceChain& chain, const NormSpec& fnorm, std::size_t N,
                              const RayConfig& ray = {});

enum class AlStatus { kOk, kTruncated, kDivergentTail };

std::string_view to_string(AlStatus status);

struct AlLevel {
  std::size_t n = 0;
  double partial_sum = 0.0;  // sum_{j=n}^{N} 2^{j-n} (delta_j + e_j)
  double tail_bound = 0.0;   // closed-form sum over j > N
  double threshold = 0.0;    // min(d_{n,V}, e_{n-1}), e_0 = +inf
  bool pass = false;
};

struct AlConditionReport {
  std::vector<AlLevel> levels;
  bool pass = false;
  bool banach_mode = false;
  AlStatus status = AlStatus::kOk;
};

/// Summability condition for Frechet lethargy. Without `deviations` the
/// Banach reduction is used (d_{n,V} = +inf, delta may vanish).
AlConditionReport check_al_condition(const TargetSequence& e, const TargetSequence& delta,
                                     const std::optional<std::vector<double>>& deviations);

struct FrechetLevel {
  std::size_t n = 0;
  double e = 0.0;
  double rho = 0.0;
  double lower = 0.0;  // e_n / 3
  double upper = 0.0;  // 3 e_n
  bool pass = false;
  bool one_sided = false;  // rho is only an upper bound
};

struct FrechetReport {
  std::vector<FrechetLevel> levels;
  bool pass = true;
};

/// e_n / 3 <= rho_F(x, V_n) <= 3 e_n for n0 <= n <= chain length.
FrechetReport verify_frechet_bounds(const Vector& x, const SubspaceChain& chain,
                                    const TargetSequence& e, std::size_t n0, const NormSpec& fnorm,
                                    const SolverConfig& config = {});

struct CorollaryLevel {
  std::size_t n = 0;
  double e = 0.0;
  double shapiro = 0.0;       // sqrt(e_n)
  double tyuremskikh = 0.0;   // 3 sqrt(e_n)
  bool implication = false;   // sqrt(e_n) >= e_n
  bool boundary = false;      // sqrt(e_n) = e_n
};

std::vector<CorollaryLevel> corollary_transforms(const TargetSequence& e);

}  // namespace lethargy
