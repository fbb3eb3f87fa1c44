#include "doctest.h"
#include "lethargy/distance.hpp"
#include "lethargy/error.hpp"
#include "support.hpp"

using namespace lethargy;

TEST_CASE("l2 distance obeys Pythagoras and matches the normal equations") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Index dim = 2 + rng.integer(0, 8);
    const Index rank = 1 + rng.integer(0, dim - 2);
    const Vector x = rng.normal_vector(dim);
    const Matrix b = rng.normal_matrix(dim, rank);
    const DistanceResult r = distance(x, b, NormSpec::lp(2.0));
    CHECK(r.certificate.method == DistanceMethod::kProjection);
    const double pyth = r.value * r.value + r.minimizer.squaredNorm();
    CHECK(std::abs(pyth - x.squaredNorm()) <= 1e-9 * x.squaredNorm());
    CHECK(r.value == doctest::Approx(oracle::l2_distance(x, b)).epsilon(1e-9));
    CHECK((b * r.coefficients - r.minimizer).norm() < 1e-9 * (1 + x.norm()));
  }
}

TEST_CASE("polyhedral and smooth l_p distances match the grid-refinement oracle") {
  Rng rng(22);
  for (int trial = 0; trial < 12; ++trial) {
    const Index dim = 3 + rng.integer(0, 3);
    const Index rank = 1 + rng.integer(0, 1);
    const Vector x = rng.normal_vector(dim);
    const Matrix b = rng.normal_matrix(dim, rank);
    for (double p : {1.0, 3.0, kInf}) {
      const NormSpec norm = NormSpec::lp(p);
      const DistanceResult r = distance(x, b, norm);
      CHECK(r.value == doctest::Approx(distance_oracle(x, b, norm, 1e-7)).epsilon(1e-5));
      CHECK(norm.evaluate(x - r.minimizer) == doctest::Approx(r.value).epsilon(1e-9));
    }
  }
}

TEST_CASE("Chebyshev distance of |t - 1/2| to low-degree polynomials") {
  const auto grid = uniform_grid(257);
  const std::vector<int> degrees{0, 1};
  const SubspaceChain chain = chain_polynomials(grid, degrees);
  Vector f(257);
  for (Index i = 0; i < 257; ++i) f(i) = std::abs(grid[static_cast<std::size_t>(i)] - 0.5);
  const DistanceProfile prof = distance_profile(f, chain, NormSpec::grid_sup(grid));
  // Equioscillation: the best constant and the best line both leave error 1/4.
  CHECK(prof.levels[0].value == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(prof.levels[1].value == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(prof.monotone);
}

TEST_CASE("homogeneity, translation invariance and chain monotonicity") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Index dim = 3 + rng.integer(0, 4);
    std::vector<Index> ranks{1};
    while (ranks.back() + 1 < dim && ranks.size() < 3) ranks.push_back(ranks.back() + 1);
    const SubspaceChain chain = random_chain(dim, ranks, static_cast<std::uint64_t>(trial));
    const double ps[] = {1.0, 2.0, 3.0, kInf};
    const NormSpec norm = NormSpec::lp(ps[trial % 4]);
    const Vector x = rng.normal_vector(dim);
    const std::size_t level = static_cast<std::size_t>(rng.integer(0, static_cast<long>(chain.size()) - 1));
    const Matrix& b = chain.basis(level);
    const double base = distance(x, b, norm).value;
    const double t = rng.uniform(-5.0, 5.0);
    CHECK(std::abs(distance(t * x, b, norm).value - std::abs(t) * base) <= 1e-9 * (1 + std::abs(t) * base));
    const Vector y = b * rng.normal_vector(b.cols());
    CHECK(std::abs(distance(x + y, b, norm).value - base) <= 1e-9 * (1 + base));
    const DistanceProfile prof = distance_profile(x, chain, norm);
    CHECK(prof.monotone);
    for (std::size_t k = 1; k < prof.levels.size(); ++k)
      CHECK(prof.levels[k].value <= prof.levels[k - 1].value + 1e-9 * (1 + prof.levels[k - 1].value));
  }
}

TEST_CASE("F-norm distances") {
  Rng rng(24);
  SUBCASE("product F-norm on coordinate subspaces has a closed form") {
    const NormSpec f = NormSpec::fnorm_product_dyadic(6);
    const SubspaceChain chain = coordinate_chain(6, std::vector<Index>{2, 4});
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = 3.0 * rng.normal_vector(6);
      for (std::size_t level = 0; level < 2; ++level) {
        const Index r = chain.ranks()[level];
        double want = 0.0;
        for (Index i = r; i < 6; ++i) want += std::ldexp(1.0, -static_cast<int>(i + 1)) * std::abs(x(i)) / (1 + std::abs(x(i)));
        const DistanceResult got = distance(x, chain.basis(level), f);
        CHECK(got.certificate.method == DistanceMethod::kClosedForm);
        CHECK(got.value == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
  SUBCASE("norm-transform F-norm is rho / (1 + rho)") {
    const NormSpec base = NormSpec::lp(kInf);
    const NormSpec f = NormSpec::fnorm_of_norm(base);
    const Vector x = rng.normal_vector(5);
    const Matrix b = rng.normal_matrix(5, 2);
    const double rho = distance(x, b, base).value;
    CHECK(distance(x, b, f).value == doctest::Approx(rho / (1 + rho)).epsilon(1e-12));
  }
  SUBCASE("product F-norm on general subspaces is an upper bound") {
    const NormSpec f = NormSpec::fnorm_product_dyadic(4);
    for (int trial = 0; trial < 6; ++trial) {
      const Vector x = 2.0 * rng.normal_vector(4);
      const Matrix b = rng.normal_matrix(4, 1);
      const DistanceResult r = distance(x, b, f);
      CHECK(r.upper_bound);
      CHECK(r.value <= f.evaluate(x) + 1e-12);
      CHECK(r.value >= distance_oracle(x, b, f, 1e-7) - 1e-7);
      CHECK(f.evaluate(x - r.minimizer) == doctest::Approx(r.value).epsilon(1e-9));
    }
  }
}

TEST_CASE("distance edge cases") {
  const Vector x = Vector::Ones(5);
  CHECK(distance(x, Matrix(5, 0), NormSpec::lp(1.0)).value == doctest::Approx(5.0));
  CHECK(oracle::code_of([&] { distance(x, Matrix::Identity(4, 2), NormSpec::lp(2.0)); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(oracle::code_of([&] { distance_oracle(x, Matrix::Identity(5, 4), NormSpec::lp(1.0), 1e-3); }) ==
        ErrorCode::kRankTooLarge);
  // x inside the subspace.
  const Matrix b = Matrix::Identity(5, 2);
  const Vector inside = b * Vector::Ones(2);
  CHECK(distance(inside, b, NormSpec::lp(kInf)).value == doctest::Approx(0.0));
}

TEST_CASE("distance is deterministic for a fixed seed") {
  Rng rng(25);
  const Vector x = rng.normal_vector(5);
  const Matrix b = rng.normal_matrix(5, 2);
  const NormSpec f = NormSpec::fnorm_product_dyadic(5);
  SolverConfig cfg;
  cfg.seed = 9;
  const DistanceResult a = distance(x, b, f, cfg);
  const DistanceResult c = distance(x, b, f, cfg);
  CHECK(a.value == c.value);
  CHECK(a.minimizer == c.minimizer);
}
