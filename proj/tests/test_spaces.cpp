#include "doctest.h"
#include "lethargy/error.hpp"
#include "lethargy/spaces.hpp"
#include "support.hpp"

using namespace lethargy;

namespace {

Matrix cols(Index dim, std::initializer_list<std::initializer_list<double>> columns) {
  Matrix b(dim, static_cast<Index>(columns.size()));
  Index j = 0;
  for (const auto& c : columns) {
    Index i = 0;
    for (double v : c) b(i++, j) = v;
    ++j;
  }
  return b;
}

}  // namespace

TEST_CASE("norm specs enforce their invariants") {
  CHECK(oracle::code_of([] { NormSpec::lp(0.5); }) == ErrorCode::kInvalidArgument);
  CHECK(NormSpec::lp(kInf).p() == kInf);
  CHECK(oracle::code_of([] { NormSpec::fnorm_product({1.0, 0.0}); }) == ErrorCode::kInvalidArgument);
  CHECK(oracle::code_of([] { NormSpec::fnorm_of_norm(NormSpec::fnorm_product_dyadic(3)); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(oracle::code_of([] { NormSpec::grid_sup({0.5, 0.2}); }) == ErrorCode::kInvalidArgument);

  const NormSpec w = NormSpec::fnorm_product_dyadic(5);
  CHECK(w.weight_sum() == doctest::Approx(1.0 - std::ldexp(1.0, -5)).epsilon(1e-15));
  CHECK(w.required_dim() == Index{5});

  Vector x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(NormSpec::lp(1.0).evaluate(x) == doctest::Approx(3.5));
  CHECK(NormSpec::lp(kInf).evaluate(x) == doctest::Approx(2.0));
  CHECK(NormSpec::fnorm_of_norm(NormSpec::lp(1.0)).evaluate(x) == doctest::Approx(3.5 / 4.5));
  CHECK(NormSpec::fnorm_product_dyadic(3).evaluate(x) ==
        doctest::Approx(0.5 * 0.5 + 0.25 * 2.0 / 3.0 + 0.125 * 0.5 / 1.5));
}

TEST_CASE("validate_chain examples") {
  const Matrix e1 = cols(3, {{1, 0, 0}});
  const Matrix e12 = cols(3, {{1, 0, 0}, {0, 1, 0}});
  CHECK(validate_chain(SubspaceChain(3, {e1, e12})).pass);

  const ChainReport reversed = validate_chain(SubspaceChain(3, {e12, e1}));
  CHECK_FALSE(reversed.pass);

  const Matrix nearly = cols(3, {{1, 0, 0}, {1, 1e-14, 0}});
  const ChainReport deficient = validate_chain(SubspaceChain(3, {e1, nearly}));
  CHECK_FALSE(deficient.pass);
  CHECK(deficient.issues.front().kind == ChainIssue::Kind::kRankDeficient);
  CHECK(deficient.issues.front().level == 1);

  const Matrix all3 = Matrix::Identity(3, 3);
  const ChainReport full = validate_chain(SubspaceChain(3, {e1, all3}));
  CHECK_FALSE(full.pass);
  CHECK(full.issues.back().kind == ChainIssue::Kind::kNoExteriorRoom);

  CHECK_FALSE(validate_chain(SubspaceChain()).pass);
}

TEST_CASE("validate_chain is idempotent and independent of the basis representation") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Index dim = 3 + rng.integer(0, 5);
    std::vector<Index> ranks;
    for (Index r = 1; r < dim && ranks.size() < 4; r += 1 + rng.integer(0, 1)) ranks.push_back(r);
    SubspaceChain chain = random_chain(dim, ranks, static_cast<std::uint64_t>(trial));
    if (trial % 3 == 1 && chain.size() >= 2) {
      std::vector<Matrix> swapped = chain.bases();
      std::swap(swapped[0], swapped[1]);
      chain = SubspaceChain(dim, swapped);
    }
    const ChainReport first = validate_chain(chain);
    CHECK(validate_chain(chain).pass == first.pass);

    std::vector<Matrix> mixed;
    for (const Matrix& b : chain.bases()) {
      Matrix m = rng.normal_matrix(b.cols(), b.cols());
      m += 3.0 * Matrix::Identity(b.cols(), b.cols());  // keep it comfortably invertible
      mixed.push_back(b * m);
    }
    const ChainReport second = validate_chain(SubspaceChain(dim, mixed));
    CHECK(second.pass == first.pass);
    CHECK(second.issues.size() == first.issues.size());
  }
}

TEST_CASE("polynomial chains") {
  const auto grid = uniform_grid(33);
  const std::vector<int> degrees{0, 1, 2};
  const SubspaceChain chain = chain_polynomials(grid, degrees);
  CHECK(chain.ranks() == std::vector<Index>{1, 2, 3});
  CHECK(validate_chain(chain).pass);

  // Monomials t^k, k <= deg, lie in each level: the span is preserved.
  for (std::size_t level = 0; level < chain.size(); ++level) {
    const Matrix q = orthonormal_basis(chain.basis(level));
    CHECK((q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k <= degrees[level]; ++k) {
      Vector mono(33);
      for (Index i = 0; i < 33; ++i) mono(i) = std::pow(grid[static_cast<std::size_t>(i)], k);
      CHECK(oracle::l2_distance(mono, chain.basis(level)) < 1e-10);
    }
  }

  const std::vector<int> repeated{1, 1};
  CHECK(oracle::code_of([&] { chain_polynomials(grid, repeated); }) == ErrorCode::kInvalidArgument);

  const auto tiny = uniform_grid(3);
  const SubspaceChain crowded = chain_polynomials(tiny, degrees);
  CHECK(crowded.ranks().back() == 3);
  CHECK_FALSE(validate_chain(crowded).pass);

  const std::vector<double> dup{0.0, 0.5, 0.5, 1.0};
  const std::vector<int> low{0, 1};
  CHECK(oracle::code_of([&] { chain_polynomials(dup, low); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("target sequences") {
  CHECK(oracle::code_of([] { TargetSequence({1.0, 2.0}); }) == ErrorCode::kInvalidArgument);
  CHECK(oracle::code_of([] { TargetSequence({1.0, -0.5}); }) == ErrorCode::kInvalidArgument);
  CHECK(oracle::code_of([] { TargetSequence({1.0}, 2); }) == ErrorCode::kInvalidArgument);
  const TargetSequence g = TargetSequence::geometric(0.5, 0.5, 10);
  CHECK(g(10) == std::ldexp(1.0, -10));
  CHECK(g.tail_sum() == doctest::Approx(oracle::geometric_sum(std::ldexp(1.0, -11), 0.5)).epsilon(1e-15));
  CHECK(TargetSequence({1.0, 0.5}).tail_sum() == 0.0);
}

TEST_CASE("interleave examples") {
  const SubspaceChain c3 = coordinate_chain(8, std::vector<Index>{1, 3, 5});

  const InterleaveResult same = interleave_chain(c3, TargetSequence({1.0, 0.5, 0.25}), 2.0, 1);
  CHECK(same.inserted == 0);
  CHECK(same.index_map == std::vector<std::size_t>{0, 1, 2});
  for (const auto& lv : same.levels) CHECK(lv.dyadic_exponent.has_value());

  const SubspaceChain c2 = coordinate_chain(8, std::vector<Index>{1, 4});
  const InterleaveResult one = interleave_chain(c2, TargetSequence({1.0, 1.0 / 3.0}), 2.0, 1);
  CHECK(one.inserted == 1);
  REQUIRE(one.sequence.size() == 3);
  CHECK(one.sequence(2) == 0.5);
  CHECK(one.index_map == std::vector<std::size_t>{0, 2});
  CHECK(validate_chain(one.chain).pass);

  // Rank gap of one leaves no room for an inserted level.
  const SubspaceChain tight = coordinate_chain(3, std::vector<Index>{1, 2});
  CHECK(oracle::code_of([&] { interleave_chain(tight, TargetSequence({1.0, 1.0 / 3.0}), 2.0, 1); }) ==
        ErrorCode::kInsufficientDimension);

  CHECK(oracle::code_of([&] { interleave_chain(c2, TargetSequence({1.0, 0.0}), 2.0, 1); }) == ErrorCode::kNonMergeable);
}

TEST_CASE("interleaving preserves the original pairs") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t len = 2 + static_cast<std::size_t>(rng.integer(0, 3));
    std::vector<Index> ranks;
    for (std::size_t k = 0; k < len; ++k) ranks.push_back(static_cast<Index>(1 + 6 * k));
    const Index dim = ranks.back() + 2;
    const SubspaceChain chain = random_chain(dim, ranks, static_cast<std::uint64_t>(100 + trial));
    const TargetSequence d(oracle::random_decreasing(rng, len, 0.35, 0.7));
    const std::optional<double> K = trial % 2 ? std::optional<double>(rng.uniform(0.5, 4.0)) : std::nullopt;
    const InterleaveResult r = interleave_chain(chain, d, K, static_cast<std::uint64_t>(trial));

    CHECK(validate_chain(r.chain).pass);
    for (std::size_t n = 2; n <= r.sequence.size(); ++n) CHECK(r.sequence(n) <= r.sequence(n - 1));
    for (std::size_t n = 0; n < len; ++n) {
      CHECK(r.sequence(r.index_map[n] + 1) == d(n + 1));
      CHECK(oracle::same_span(r.chain.basis(r.index_map[n]), chain.basis(n)));
    }
    // Every ladder value inside [d_N, d_1] appears in the merged sequence.
    for (int i = r.i0;; ++i) {
      const double v = r.K * std::ldexp(1.0, -i);
      if (v < d(len) * (1 - 1e-12)) break;
      const bool present = std::any_of(r.sequence.values().begin(), r.sequence.values().end(),
                                       [&](double s) { return std::abs(s - v) <= 1e-12 * v; });
      CHECK(present);
    }
  }
}
