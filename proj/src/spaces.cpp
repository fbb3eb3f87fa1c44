#include "lethargy/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lethargy/error.hpp"
#include "lethargy/rng.hpp"

namespace lethargy {

// ---------------------------------------------------------------------------
// NormSpec

NormSpec NormSpec::lp(double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "LP norm requires p >= 1");
  NormSpec n;
  n.family_ = NormFamily::kLp;
  n.p_ = p;
  return n;
}

NormSpec NormSpec::grid_sup(std::vector<double> grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "GRID_SUP requires a non-empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0 || grid[i] > 1.0)
      throw Error(ErrorCode::kInvalidArgument, "GRID_SUP points must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "GRID_SUP grid must be strictly increasing");
  }
  NormSpec n;
  n.family_ = NormFamily::kGridSup;
  n.p_ = kInf;
  n.grid_ = std::move(grid);
  return n;
}

NormSpec NormSpec::fnorm_product(std::vector<double> weights) {
  if (weights.empty()) throw Error(ErrorCode::kInvalidArgument, "FNORM_PRODUCT requires weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::kInvalidArgument, "FNORM_PRODUCT weights must be positive and finite");
    sum += w;
  }
  NormSpec n;
  n.family_ = NormFamily::kFNormProduct;
  n.weights_ = std::move(weights);
  n.weight_sum_ = sum;
  return n;
}

NormSpec NormSpec::fnorm_product_dyadic(Index dim) {
  std::vector<double> w(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) w[static_cast<std::size_t>(i)] = std::ldexp(1.0, -static_cast<int>(i + 1));
  return fnorm_product(std::move(w));
}

NormSpec NormSpec::fnorm_of_norm(const NormSpec& base) {
  if (base.is_fnorm())
    throw Error(ErrorCode::kInvalidArgument, "FNORM_OF_NORM base must be an LP or GRID_SUP norm");
  NormSpec n;
  n.family_ = NormFamily::kFNormOfNorm;
  n.base_ = std::make_shared<const NormSpec>(base);
  return n;
}

double NormSpec::p() const {
  if (family_ == NormFamily::kLp) return p_;
  if (family_ == NormFamily::kGridSup) return kInf;
  throw Error(ErrorCode::kInvalidArgument, "p() requested for an F-norm");
}

const NormSpec& NormSpec::base() const {
  if (!base_) throw Error(ErrorCode::kInvalidArgument, "norm has no base");
  return *base_;
}

std::optional<Index> NormSpec::required_dim() const {
  switch (family_) {
    case NormFamily::kGridSup: return static_cast<Index>(grid_.size());
    case NormFamily::kFNormProduct: return static_cast<Index>(weights_.size());
    case NormFamily::kFNormOfNorm: return base_->required_dim();
    case NormFamily::kLp: break;
  }
  return std::nullopt;
}

double lp_norm(const Vector& x, double p) {
  if (x.size() == 0) return 0.0;
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return scale * std::pow((x.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p);
}

double NormSpec::evaluate(const Vector& x) const {
  if (auto dim = required_dim(); dim && *dim != x.size())
    throw Error(ErrorCode::kDimensionMismatch, "vector dimension does not match " + describe());
  switch (family_) {
    case NormFamily::kLp: return lp_norm(x, p_);
    case NormFamily::kGridSup: return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    case NormFamily::kFNormProduct: {
      double s = 0.0;
      for (Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x(i));
        s += weights_[static_cast<std::size_t>(i)] * a / (1.0 + a);
      }
      return s;
    }
    case NormFamily::kFNormOfNorm: {
      const double b = base_->evaluate(x);
      return b / (1.0 + b);
    }
  }
  return 0.0;
}

std::string NormSpec::describe() const {
  std::ostringstream os;
  switch (family_) {
    case NormFamily::kLp:
      if (std::isinf(p_)) os << "LP(inf)";
      else os << "LP(" << p_ << ")";
      break;
    case NormFamily::kGridSup: os << "GRID_SUP(" << grid_.size() << " points)"; break;
    case NormFamily::kFNormProduct: os << "FNORM_PRODUCT(" << weights_.size() << " weights)"; break;
    case NormFamily::kFNormOfNorm: os << "FNORM_OF_NORM(" << base_->describe() << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Chains

SubspaceChain::SubspaceChain(Index ambient_dim, std::vector<Matrix> bases)
    : ambient_dim_(ambient_dim), bases_(std::move(bases)) {
  if (ambient_dim_ <= 0) throw Error(ErrorCode::kInvalidArgument, "ambient dimension must be positive");
  for (std::size_t k = 0; k < bases_.size(); ++k) {
    if (bases_[k].rows() != ambient_dim_)
      throw Error(ErrorCode::kDimensionMismatch,
                  "level " + std::to_string(k + 1) + " basis has wrong row count");
    if (!bases_[k].allFinite())
      throw Error(ErrorCode::kInvalidArgument, "level " + std::to_string(k + 1) + " has non-finite entries");
  }
}

std::vector<Index> SubspaceChain::ranks() const {
  std::vector<Index> r;
  r.reserve(bases_.size());
  for (const auto& b : bases_) r.push_back(b.cols());
  return r;
}

SubspaceChain SubspaceChain::subfamily(std::span<const std::size_t> levels) const {
  std::vector<Matrix> picked;
  picked.reserve(levels.size());
  for (std::size_t k : levels) picked.push_back(bases_.at(k));
  return SubspaceChain(ambient_dim_, std::move(picked));
}

namespace {

double max_column_norm(const Matrix& b) {
  return b.cols() ? b.colwise().norm().maxCoeff() : 0.0;
}

Eigen::ColPivHouseholderQR<Matrix> pivoted_qr(const Matrix& basis) {
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  qr.setThreshold(kRankTolerance);
  return qr;
}

}  // namespace

Index numerical_rank(const Matrix& basis) {
  if (basis.cols() == 0 || max_column_norm(basis) == 0.0) return 0;
  return pivoted_qr(basis).rank();
}

Matrix orthonormal_basis(const Matrix& basis) {
  const Index r = numerical_rank(basis);
  if (r == 0) return Matrix(basis.rows(), 0);
  auto qr = pivoted_qr(basis);
  Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), r);
  return q;
}

ChainReport validate_chain(const SubspaceChain& chain) {
  ChainReport report;
  auto fail = [&](ChainIssue::Kind kind, std::size_t level, std::string detail) {
    report.pass = false;
    report.issues.push_back({kind, level, std::move(detail)});
  };
  if (chain.empty()) {
    fail(ChainIssue::Kind::kEmpty, 0, "chain has no levels");
    return report;
  }
  std::vector<Index> ranks(chain.size());
  std::vector<Matrix> ortho(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Matrix& b = chain.basis(k);
    ranks[k] = numerical_rank(b);
    ortho[k] = orthonormal_basis(b);
    if (ranks[k] != b.cols() || b.cols() == 0)
      fail(ChainIssue::Kind::kRankDeficient, k,
           "numerical rank " + std::to_string(ranks[k]) + " < " + std::to_string(b.cols()) + " columns");
  }
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    if (!(ranks[k + 1] > ranks[k]))
      fail(ChainIssue::Kind::kRankNotIncreasing, k + 1,
           "rank " + std::to_string(ranks[k + 1]) + " does not exceed previous rank " +
               std::to_string(ranks[k]));
    const Matrix& b = chain.basis(k);
    const Matrix& q = ortho[k + 1];
    const double scale = std::max(max_column_norm(b), max_column_norm(chain.basis(k + 1)));
    for (Index j = 0; j < b.cols(); ++j) {
      const Vector col = b.col(j);
      const double resid = (col - q * (q.transpose() * col)).norm();
      if (resid > kRankTolerance * scale) {
        fail(ChainIssue::Kind::kNotNested, k,
             "column " + std::to_string(j + 1) + " leaves span of the next level");
        break;
      }
    }
  }
  if (ranks.back() >= chain.ambient_dim())
    fail(ChainIssue::Kind::kNoExteriorRoom, chain.size() - 1,
         "last level fills the ambient space; no exterior point exists");
  return report;
}

// ---------------------------------------------------------------------------
// TargetSequence

TargetSequence::TargetSequence(std::vector<double> values, std::size_t n0,
                               std::optional<GeometricTail> tail)
    : values_(std::move(values)), n0_(n0), tail_(tail) {
  if (values_.empty()) throw Error(ErrorCode::kInvalidArgument, "sequence is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw Error(ErrorCode::kInvalidArgument,
                  "sequence entry " + std::to_string(i + 1) + " must be finite and nonnegative");
    if (i > 0 && values_[i] > values_[i - 1])
      throw Error(ErrorCode::kInvalidArgument,
                  "sequence increases at n = " + std::to_string(i + 1));
  }
  if (n0_ < 1 || n0_ > values_.size())
    throw Error(ErrorCode::kInvalidArgument, "n0 must satisfy 1 <= n0 <= N");
  if (tail_ && !(tail_->ratio >= 0.0 && tail_->ratio < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "geometric tail ratio must lie in [0, 1)");
}

TargetSequence TargetSequence::geometric(double first, double ratio, std::size_t length,
                                         bool with_tail) {
  std::vector<double> v(length);
  double cur = first;
  for (auto& e : v) {
    e = cur;
    cur *= ratio;
  }
  std::optional<GeometricTail> tail;
  if (with_tail) tail = GeometricTail{ratio};
  return TargetSequence(std::move(v), 1, tail);
}

double TargetSequence::tail_sum() const {
  if (!tail_) return 0.0;
  return values_.back() * tail_->ratio / (1.0 - tail_->ratio);
}

bool TargetSequence::strictly_decreasing() const {
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (!(values_[i] < values_[i - 1])) return false;
  return true;
}

TargetSequence TargetSequence::scaled(double factor) const {
  std::vector<double> v = values_;
  for (auto& e : v) e *= factor;
  return TargetSequence(std::move(v), n0_, tail_);
}

// ---------------------------------------------------------------------------
// Generators

std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw Error(ErrorCode::kInvalidArgument, "uniform grid needs at least 2 points");
  std::vector<double> g(points);
  for (std::size_t j = 0; j < points; ++j)
    g[j] = static_cast<double>(j) / static_cast<double>(points - 1);
  return g;
}

SubspaceChain chain_polynomials(std::span<const double> grid, std::span<const int> degrees) {
  if (degrees.empty()) throw Error(ErrorCode::kInvalidArgument, "no degrees given");
  for (std::size_t k = 0; k < degrees.size(); ++k) {
    if (degrees[k] < 0) throw Error(ErrorCode::kInvalidArgument, "degrees must be nonnegative");
    if (k > 0 && degrees[k] <= degrees[k - 1])
      throw Error(ErrorCode::kInvalidArgument, "degrees must be strictly increasing");
  }
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (!(grid[j] > grid[j - 1]))
      throw Error(ErrorCode::kInvalidArgument, "grid must be strictly increasing (repeated or unsorted points)");
  const int max_deg = degrees.back();
  const auto n = static_cast<Index>(grid.size());
  if (n < max_deg + 1)
    throw Error(ErrorCode::kInvalidArgument, "grid has fewer points than max degree + 1");

  // Chebyshev columns T_k(2t - 1) span the same spaces as monomials.
  Matrix cheb(n, max_deg + 1);
  for (Index j = 0; j < n; ++j) {
    const double s = 2.0 * grid[static_cast<std::size_t>(j)] - 1.0;
    cheb(j, 0) = 1.0;
    if (max_deg >= 1) cheb(j, 1) = s;
    for (int k = 2; k <= max_deg; ++k) cheb(j, k) = 2.0 * s * cheb(j, k - 1) - cheb(j, k - 2);
  }
  Eigen::HouseholderQR<Matrix> qr(cheb);
  Matrix q = qr.householderQ() * Matrix::Identity(n, max_deg + 1);
  const Matrix r = qr.matrixQR().topRows(max_deg + 1).triangularView<Eigen::Upper>();
  for (int k = 0; k <= max_deg; ++k)
    if (r(k, k) < 0.0) q.col(k) *= -1.0;

  std::vector<Matrix> bases;
  for (int d : degrees) bases.push_back(q.leftCols(d + 1));
  return SubspaceChain(n, std::move(bases));
}

SubspaceChain coordinate_chain(Index ambient_dim, std::span<const Index> ranks) {
  std::vector<Matrix> bases;
  for (Index r : ranks) {
    if (r < 0 || r > ambient_dim) throw Error(ErrorCode::kInvalidArgument, "coordinate rank out of range");
    bases.push_back(Matrix::Identity(ambient_dim, ambient_dim).leftCols(r));
  }
  return SubspaceChain(ambient_dim, std::move(bases));
}

SubspaceChain random_chain(Index ambient_dim, std::span<const Index> ranks, std::uint64_t seed) {
  Index max_rank = 0;
  for (Index r : ranks) {
    if (r < 0 || r > ambient_dim) throw Error(ErrorCode::kInvalidArgument, "random chain rank out of range");
    max_rank = std::max(max_rank, r);
  }
  Rng rng(seed);
  const Matrix g = rng.normal_matrix(ambient_dim, max_rank);
  std::vector<Matrix> bases;
  for (Index r : ranks) bases.push_back(g.leftCols(r));
  return SubspaceChain(ambient_dim, std::move(bases));
}

// ---------------------------------------------------------------------------
// Interleaving

namespace {

constexpr double kLadderTieTolerance = 1e-12;

bool ladder_tie(double a, double b) {
  return std::abs(a - b) <= kLadderTieTolerance * std::max(std::abs(a), std::abs(b));
}

// Unit vector in span(outer) orthogonal to span(inner), drawn from `rng`.
Vector complement_direction(const Matrix& outer_q, const Matrix& inner_q, Rng& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vector v = outer_q * rng.normal_vector(outer_q.cols());
    for (int pass = 0; pass < 2; ++pass)
      if (inner_q.cols()) v -= inner_q * (inner_q.transpose() * v);
    const double nv = v.norm();
    if (nv > 1e-6) return v / nv;
  }
  throw Error(ErrorCode::kInsufficientDimension, "no complement direction available");
}

}  // namespace

InterleaveResult interleave_chain(const SubspaceChain& chain, const TargetSequence& d,
                                  std::optional<double> K, std::uint64_t seed) {
  if (const auto rep = validate_chain(chain); !rep.pass)
    throw Error(ErrorCode::kInvalidArgument, "chain fails validation: " + rep.issues.front().detail);
  if (d.size() != chain.size())
    throw Error(ErrorCode::kDimensionMismatch, "sequence length differs from chain length");
  for (std::size_t n = 1; n <= d.size(); ++n)
    if (!(d(n) > 0.0))
      throw Error(ErrorCode::kNonMergeable,
                  "entry n = " + std::to_string(n) + " is not strictly positive; a dyadic ladder cannot reach it");
  const double k_value = K.value_or(2.0 * d(1));
  if (!(k_value > 0.0) || !std::isfinite(k_value))
    throw Error(ErrorCode::kNonMergeable, "K must be positive");

  const double d1 = d(1);
  const double dN = d(d.size());
  // First exponent whose ladder value does not exceed d_1.
  int i0 = std::max(1, static_cast<int>(std::ceil(std::log2(k_value / d1))));
  while (i0 > 1 && k_value * std::ldexp(1.0, -(i0 - 1)) <= d1 * (1.0 + kLadderTieTolerance)) --i0;
  while (k_value * std::ldexp(1.0, -i0) > d1 * (1.0 + kLadderTieTolerance)) ++i0;

  struct Pending {
    double value;
    int exponent;
  };
  // Per original level n (0-based): ladder values inserted right after it.
  std::vector<std::vector<Pending>> after(d.size());
  std::vector<std::optional<int>> original_exponent(d.size());
  for (int i = i0;; ++i) {
    const double v = k_value * std::ldexp(1.0, -i);
    if (v < dN * (1.0 - kLadderTieTolerance)) break;
    std::optional<std::size_t> tied;
    for (std::size_t n = 0; n < d.size(); ++n)
      if (ladder_tie(d.values()[n], v)) tied = n;  // keep the last tied level
    if (tied) {
      original_exponent[*tied] = i;
      continue;
    }
    std::size_t gap = 0;
    while (gap + 1 < d.size() && !(d.values()[gap] > v && v > d.values()[gap + 1])) ++gap;
    after[gap].push_back({v, i});
  }

  Rng rng(seed);
  std::vector<Matrix> bases;
  std::vector<double> values;
  InterleaveResult out;
  out.K = k_value;
  out.i0 = i0;
  out.index_map.resize(d.size());
  for (std::size_t n = 0; n < d.size(); ++n) {
    out.index_map[n] = bases.size();
    bases.push_back(chain.basis(n));
    values.push_back(d.values()[n]);
    out.levels.push_back({InterleaveLevel::Origin::kOriginal, original_exponent[n]});
    if (after[n].empty()) continue;
    const Matrix outer_q = orthonormal_basis(chain.basis(n + 1));
    Matrix current = chain.basis(n);
    for (const auto& pending : after[n]) {
      const Index room = outer_q.cols() - current.cols();
      if (room < 2)
        throw Error(ErrorCode::kInsufficientDimension,
                    "no room to insert level " + std::to_string(pending.value) + " between levels " +
                        std::to_string(n + 1) + " and " + std::to_string(n + 2));
      const Vector dir = complement_direction(outer_q, orthonormal_basis(current), rng);
      Matrix grown(current.rows(), current.cols() + 1);
      grown << current, dir;
      current = std::move(grown);
      bases.push_back(current);
      values.push_back(pending.value);
      out.levels.push_back({InterleaveLevel::Origin::kInserted, pending.exponent});
      ++out.inserted;
    }
  }
  out.chain = SubspaceChain(chain.ambient_dim(), std::move(bases));
  out.sequence = TargetSequence(std::move(values), 1, d.tail());
  return out;
}

}  // namespace lethargy
