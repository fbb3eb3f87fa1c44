#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "lethargy/spaces.hpp"

namespace lethargy {

enum class DistanceMethod {
  kProjection,       // LP(2): orthogonal projection
  kLinearProgram,    // LP(1), LP(inf), GRID_SUP
  kConvexDescent,    // LP(p), 1 < p < inf, p != 2
  kClosedForm,       // FNORM_PRODUCT on coordinate-aligned subspaces; rank 0
  kTransformed,      // FNORM_OF_NORM: rho_base / (1 + rho_base)
  kMultiStart,       // FNORM_PRODUCT on general subspaces (upper bound)
};

std::string_view to_string(DistanceMethod method);

struct Certificate {
  DistanceMethod method = DistanceMethod::kClosedForm;
  double residual = 0.0;  // optimality residual of the method
  int iterations = 0;
  int restarts = 0;
};

struct DistanceResult {
  double value = 0.0;
  Vector minimizer;     // y in span(Y) attaining (or approaching) the infimum
  Vector coefficients;  // minimizer in the supplied basis
  Certificate certificate;
  bool is_exact = true;
  bool upper_bound = false;  // UPPER_BOUND: value >= true distance
  bool unconverged = false;  // UNCONVERGED: iteration budget hit
};

struct SolverConfig {
  double grad_tol = 1e-8;  // scaled by (1 + ||x||)
  int max_iterations = 10000;
  int restarts = 8;
  std::uint64_t seed = 0;
  /// Canonicalize LP witnesses (minimal coefficient norm among minimizers).
  bool canonical_witness = true;
};

/// rho(x, span(basis)) under `norm`.
DistanceResult distance(const Vector& x, const Matrix& basis, const NormSpec& norm,
                        const SolverConfig& config = {});

/// Independent check: nested coefficient-grid refinement over an orthonormal
/// parametrization of span(basis). Requires rank(basis) <= 3.
double distance_oracle(const Vector& x, const Matrix& basis, const NormSpec& norm,
                       double resolution);

struct DistanceProfile {
  std::vector<DistanceResult> levels;
  /// Values of exact levels are non-increasing to tolerance.
  bool monotone = true;
};

DistanceProfile distance_profile(const Vector& x, const SubspaceChain& chain, const NormSpec& norm,
                                 const SolverConfig& config = {});

/// Weighted l1 distance: min_c sum_i w_i |x_i - (B c)_i|. Used by the F-norm
/// majorize-minimize path.
DistanceResult weighted_l1_distance(const Vector& x, const Matrix& basis, const Vector& weights);

}  // namespace lethargy
