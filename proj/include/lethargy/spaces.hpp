#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lethargy {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Rank and span-containment tolerance, relative to the largest column norm.
inline constexpr double kRankTolerance = 1e-10;

enum class NormFamily { kLp, kGridSup, kFNormProduct, kFNormOfNorm };

/// Which distance structure governs a space.
///
/// kLp and kGridSup are norms. kFNormProduct is the weighted F-norm
/// sum_i w_i |x_i| / (1 + |x_i|); kFNormOfNorm is ||x|| / (1 + ||x||) over a
/// base norm. Neither F-norm is homogeneous.
class NormSpec {
 public:
  static NormSpec lp(double p);
  static NormSpec grid_sup(std::vector<double> grid);
  static NormSpec fnorm_product(std::vector<double> weights);
  /// Weights w_i = 2^-i, i = 1..dim.
  static NormSpec fnorm_product_dyadic(Index dim);
  static NormSpec fnorm_of_norm(const NormSpec& base);

  NormFamily family() const { return family_; }
  bool is_fnorm() const {
    return family_ == NormFamily::kFNormProduct || family_ == NormFamily::kFNormOfNorm;
  }
  /// Exponent of an LP norm; GRID_SUP reports infinity.
  double p() const;
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight_sum() const { return weight_sum_; }
  const NormSpec& base() const;

  /// Ambient dimension forced by the structure (grid size, weight count).
  std::optional<Index> required_dim() const;

  double evaluate(const Vector& x) const;
  std::string describe() const;

 private:
  NormFamily family_ = NormFamily::kLp;
  double p_ = 2.0;
  std::vector<double> grid_;
  std::vector<double> weights_;
  double weight_sum_ = 0.0;
  std::shared_ptr<const NormSpec> base_;
};

/// ||x||_p for p in [1, inf].
double lp_norm(const Vector& x, double p);

/// Strictly nested finite-dimensional subspaces given by basis columns.
/// Construction only checks shapes; strictness is a validate_chain concern.
class SubspaceChain {
 public:
  SubspaceChain() = default;
  SubspaceChain(Index ambient_dim, std::vector<Matrix> bases);

  Index ambient_dim() const { return ambient_dim_; }
  std::size_t size() const { return bases_.size(); }
  bool empty() const { return bases_.empty(); }
  /// Level k, 0-based.
  const Matrix& basis(std::size_t k) const { return bases_.at(k); }
  const Matrix& last() const { return bases_.back(); }
  const std::vector<Matrix>& bases() const { return bases_; }
  std::vector<Index> ranks() const;

  SubspaceChain subfamily(std::span<const std::size_t> levels) const;

 private:
  Index ambient_dim_ = 0;
  std::vector<Matrix> bases_;
};

struct ChainIssue {
  enum class Kind { kEmpty, kRankDeficient, kNotNested, kRankNotIncreasing, kNoExteriorRoom };
  Kind kind;
  std::size_t level;  // 0-based
  std::string detail;
};

struct ChainReport {
  bool pass = true;
  std::vector<ChainIssue> issues;
};

ChainReport validate_chain(const SubspaceChain& chain);

/// Numerical rank via column-pivoted QR at kRankTolerance.
Index numerical_rank(const Matrix& basis);

/// Orthonormal basis (columns) for span(basis), numerical rank columns.
Matrix orthonormal_basis(const Matrix& basis);

struct GeometricTail {
  double ratio;  // 0 <= ratio < 1; values beyond N are d_N * ratio^k
};

/// A prescribed sequence d_1 >= d_2 >= ... >= d_N >= 0, indexed from 1.
class TargetSequence {
 public:
  TargetSequence() = default;
  explicit TargetSequence(std::vector<double> values, std::size_t n0 = 1,
                          std::optional<GeometricTail> tail = std::nullopt);

  static TargetSequence geometric(double first, double ratio, std::size_t length,
                                  bool with_tail = true);

  std::size_t size() const { return values_.size(); }
  double operator()(std::size_t n) const { return values_.at(n - 1); }
  const std::vector<double>& values() const { return values_; }
  std::size_t n0() const { return n0_; }
  const std::optional<GeometricTail>& tail() const { return tail_; }
  /// Sum of d_k for k > N from the tail model (0 when absent).
  double tail_sum() const;
  bool strictly_decreasing() const;
  TargetSequence scaled(double factor) const;

 private:
  std::vector<double> values_;
  std::size_t n0_ = 1;
  std::optional<GeometricTail> tail_;
};

std::vector<double> uniform_grid(std::size_t points);

/// Polynomial subspaces P_deg sampled on `grid`, columns orthonormalized.
SubspaceChain chain_polynomials(std::span<const double> grid, std::span<const int> degrees);

/// span{e_1, ..., e_{rank_k}} per level.
SubspaceChain coordinate_chain(Index ambient_dim, std::span<const Index> ranks);

/// Gaussian nested chain: level k holds the first rank_k columns.
SubspaceChain random_chain(Index ambient_dim, std::span<const Index> ranks, std::uint64_t seed);

struct InterleaveLevel {
  enum class Origin { kOriginal, kInserted };
  Origin origin;
  std::optional<int> dyadic_exponent;  // i with d~ = K 2^-i
};

struct InterleaveResult {
  SubspaceChain chain;
  TargetSequence sequence;
  std::vector<std::size_t> index_map;  // original level n (0-based) -> merged index
  std::vector<InterleaveLevel> levels;
  double K = 0.0;
  int i0 = 0;
  std::size_t inserted = 0;
};

/// Merge the ladder {K 2^-i} covering [d_N, d_1] into (d, Y). Without K the
/// default 2 d_1 is used, so the ladder starts at d_1.
InterleaveResult interleave_chain(const SubspaceChain& chain, const TargetSequence& d,
                                  std::optional<double> K, std::uint64_t seed);

}  // namespace lethargy
