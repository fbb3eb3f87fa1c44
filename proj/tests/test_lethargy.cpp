#include "doctest.h"
#include "lethargy/error.hpp"
#include "lethargy/lethargy.hpp"
#include "support.hpp"

using namespace lethargy;

namespace {

Matrix coord(Index dim, Index rank) { return Matrix::Identity(dim, rank); }

Vector unit(Index dim, Index i) { return Vector::Unit(dim, i); }

}  // namespace

TEST_CASE("summability conditions on the two reference sequences") {
  // 2.5^-n: sum_{k>n} d_k = d_n / 1.5.
  const TargetSequence fast = TargetSequence::geometric(0.4, 0.4, 30);
  const ConditionReport s = check_condition_strict(fast);
  CHECK(s.pass);
  CHECK_FALSE(s.truncated);
  for (std::size_t n = 1; n <= fast.size(); ++n)
    CHECK(s.margins[n - 1] == doctest::Approx(fast(n) * (1.0 - 1.0 / 1.5)).epsilon(1e-12));

  // 2^-n: equality at every level.
  const TargetSequence dyadic = TargetSequence::geometric(0.5, 0.5, 30);
  const ConditionReport ds = check_condition_strict(dyadic);
  const ConditionReport dw = check_condition_weak(dyadic);
  CHECK_FALSE(ds.pass);
  CHECK(ds.first_violation == std::size_t{1});
  CHECK(dw.pass);
  for (double m : dw.margins) CHECK(m == 0.0);
}

TEST_CASE("summability condition edge cases") {
  CHECK(check_condition_strict(TargetSequence({0.0, 0.0, 0.0})).pass);

  std::vector<double> harmonic;
  for (int n = 1; n <= 20; ++n) harmonic.push_back(1.0 / n);
  const ConditionReport h = check_condition_weak(TargetSequence(harmonic));
  CHECK(h.truncated);
  CHECK_FALSE(h.pass);
  CHECK(h.first_violation == std::size_t{1});
  double partial = 0.0;
  for (int n = 2; n <= 20; ++n) partial += 1.0 / n;
  CHECK(h.tail_sums[0] == doctest::Approx(partial));

  const ConditionReport finite = check_condition_weak(TargetSequence({1.0, 0.5, 0.25, 0.0}));
  CHECK(finite.pass);
  CHECK(finite.tail_sums == std::vector<double>{0.75, 0.25, 0.0, 0.0});

  // Levels before n0 are not checked.
  CHECK(check_condition_strict(TargetSequence({1.0, 1.0, 0.25, 0.1}, 3)).pass);
}

TEST_CASE("strict condition implies the weak one") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.integer(0, 12));
    const auto v = oracle::random_decreasing(rng, len, 0.2, 0.8);
    std::optional<GeometricTail> tail;
    if (trial % 2) tail = GeometricTail{rng.uniform(0.0, 0.9)};
    const TargetSequence d(v, 1, tail);
    if (check_condition_strict(d).pass) CHECK(check_condition_weak(d).pass);
  }
}

TEST_CASE("exact synthesis examples") {
  {
    const SubspaceChain chain(2, {coord(2, 1)});
    const SynthesisResult s = synthesize_exact(chain, TargetSequence({1.0}), unit(2, 1), NormSpec::lp(2.0));
    CHECK(s.status == SynthesisStatus::kOk);
    CHECK((s.x - unit(2, 1)).norm() < 1e-12);
    CHECK(s.max_residual < 1e-12);
  }
  {
    const SubspaceChain chain(3, {coord(3, 1), coord(3, 2)});
    const SynthesisResult s =
        synthesize_exact(chain, TargetSequence({std::sqrt(2.0), 1.0}), unit(3, 2), NormSpec::lp(2.0));
    Vector want(3);
    want << 0.0, 1.0, 1.0;
    CHECK((s.x - want).norm() < 1e-9);
    CHECK(s.lambda == doctest::Approx(1.0));
  }
}

TEST_CASE("exact synthesis post-conditions on random instances") {
  Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const Index dim = 3 + rng.integer(0, 5);
    const std::size_t len = 1 + static_cast<std::size_t>(rng.integer(0, std::min<long>(3, dim - 2)));
    std::vector<Index> ranks;
    for (std::size_t k = 0; k < len; ++k) ranks.push_back(static_cast<Index>(k + 1));
    const SubspaceChain chain = random_chain(dim, ranks, static_cast<std::uint64_t>(trial));
    const Vector z = rng.normal_vector(dim);
    const double ps[] = {1.0, 2.0, 3.0, kInf};
    const NormSpec norm = NormSpec::lp(ps[trial % 4]);
    const TargetSequence d(oracle::random_decreasing(rng, len, 0.2, 0.8));
    const SynthesisResult s = synthesize_exact(chain, d, z, norm);
    REQUIRE(s.status == SynthesisStatus::kOk);
    CHECK(s.lambda > 0.0);
    CHECK(oracle::l2_distance(s.x - s.lambda * z, chain.last()) < 1e-8 * (1 + s.x.norm()));
    CHECK(norm.evaluate(s.x) <= d(1) + 1.0 + 1e-6);
    for (std::size_t k = 1; k <= len; ++k)
      CHECK(std::abs(distance(s.x, chain.basis(k - 1), norm).value - d(k)) <= 1e-6 * std::max(d(1), 1.0));

    // Scaling equivariance, checked by re-verification.
    const double t = rng.uniform(0.1, 10.0);
    for (std::size_t k = 1; k <= len; ++k)
      CHECK(std::abs(distance(t * s.x, chain.basis(k - 1), norm).value - t * d(k)) <=
            1e-6 * t * std::max(d(1), 1.0));
  }
}

TEST_CASE("exact synthesis rejects inadmissible input") {
  const SubspaceChain chain(3, {coord(3, 1), coord(3, 2)});
  const TargetSequence d({1.0, 0.5});
  CHECK(oracle::code_of([&] { synthesize_exact(chain, d, unit(3, 2), NormSpec::fnorm_product_dyadic(3)); }) ==
        ErrorCode::kHypothesisViolation);
  CHECK(oracle::code_of([&] { synthesize_exact(chain, d, unit(3, 1), NormSpec::lp(2.0)); }) ==
        ErrorCode::kHypothesisViolation);
  CHECK(oracle::code_of([&] { synthesize_exact(chain, TargetSequence({0.0, 0.0}), unit(3, 2), NormSpec::lp(2.0)); }) ==
        ErrorCode::kHypothesisViolation);

  const SynthesisResult tied = synthesize_exact(chain, TargetSequence({1.0, 1.0}), unit(3, 2), NormSpec::lp(2.0));
  CHECK(tied.outside_lemma_hypothesis);
  CHECK(tied.max_residual < 1e-9);

  const SynthesisResult zero_tail =
      synthesize_exact(chain, TargetSequence({1.0, 0.0}), unit(3, 2), NormSpec::lp(2.0));
  CHECK(zero_tail.status == SynthesisStatus::kOk);
  CHECK(distance(zero_tail.x, chain.basis(1), NormSpec::lp(2.0)).value < 1e-12);
  CHECK(distance(zero_tail.x, chain.basis(0), NormSpec::lp(2.0)).value == doctest::Approx(1.0));
}

TEST_CASE("Konyagin pipeline") {
  SUBCASE("dyadic targets with c = 1 sit on the upper endpoint") {
    const SubspaceChain chain = random_chain(8, std::vector<Index>{1, 2, 3, 4}, 3);
    const TargetSequence d({1.0, 0.5, 0.25, 0.125});
    KonyaginConfig kc;
    kc.K = 2.0;
    const KonyaginResult k = synthesize_konyagin(chain, d, kc, NormSpec::lp(2.0));
    CHECK(k.interleave.inserted == 0);
    for (const BoundLevel& lv : k.report.levels) CHECK(lv.ratio == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(k.report.pass);
  }
  SUBCASE("c = 1/4 keeps every ratio in [1/4, 1]") {
    Rng rng(33);
    for (int trial = 0; trial < 8; ++trial) {
      const std::size_t len = 3 + static_cast<std::size_t>(rng.integer(0, 4));
      std::vector<Index> ranks;
      for (std::size_t k = 0; k < len; ++k) ranks.push_back(static_cast<Index>(1 + 3 * k));
      const SubspaceChain chain = random_chain(ranks.back() + 2, ranks, static_cast<std::uint64_t>(trial));
      const TargetSequence d(oracle::random_decreasing(rng, len, 0.3, 0.9));
      KonyaginConfig kc;
      kc.c = 0.25;
      kc.seed = static_cast<std::uint64_t>(trial);
      const NormSpec norm = NormSpec::lp(trial % 2 ? kInf : 2.0);
      const KonyaginResult k = synthesize_konyagin(chain, d, kc, norm);
      REQUIRE(k.narrow_interval_pass.has_value());
      CHECK(*k.narrow_interval_pass);
      CHECK(k.report.pass);
      CHECK(k.dichotomy);
      for (std::size_t n = 1; n <= len; ++n) {
        const double rx = distance(k.x, chain.basis(n - 1), norm).value;
        const double rxc = distance(k.x_c, chain.basis(n - 1), norm).value;
        CHECK(rxc == doctest::Approx(4 * kc.c * rx).epsilon(1e-9));
        const double ratio = k.report.levels[n - 1].ratio;
        if (k.roles[n - 1] == LevelRole::kIntermediate) {
          CHECK(ratio > kc.c);
          CHECK(ratio < 4 * kc.c + 1e-9);
        } else {
          CHECK(ratio == doctest::Approx(4 * kc.c).epsilon(1e-6));
        }
      }
    }
  }
  SUBCASE("c outside (0, 1] is rejected") {
    const SubspaceChain chain = random_chain(6, std::vector<Index>{1, 2}, 1);
    KonyaginConfig kc;
    kc.c = 1.5;
    CHECK(oracle::code_of([&] { synthesize_konyagin(chain, TargetSequence({1.0, 0.5}), kc, NormSpec::lp(2.0)); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("bound verifier") {
  const SubspaceChain chain = coordinate_chain(5, std::vector<Index>{1, 2, 3});
  const TargetSequence d({1.0, 0.5, 0.25});
  const BoundReport zero = verify_bounds(Vector::Zero(5), chain, d, 1.0, NormSpec::lp(2.0));
  CHECK_FALSE(zero.pass);
  for (const BoundLevel& lv : zero.levels) CHECK_FALSE(lv.pass);

  KonyaginConfig kc;
  const KonyaginResult k = synthesize_konyagin(chain, d, kc, NormSpec::lp(2.0));
  CHECK(verify_bounds(k.x_c, chain, d, 1.0, NormSpec::lp(2.0)).pass);
  const BoundReport scaled = verify_bounds(10.0 * k.x_c, chain, d, 1.0, NormSpec::lp(2.0));
  CHECK_FALSE(scaled.pass);
  for (const BoundLevel& lv : scaled.levels) CHECK(lv.rho > lv.upper);
}

TEST_CASE("ratio report") {
  const Index dim = 6;
  const SubspaceChain chain = coordinate_chain(dim, std::vector<Index>{1, 2, 3, 4, 5});
  const TargetSequence d = TargetSequence::geometric(0.5, 0.5, 5);
  const RatioReport r = ratio_report(unit(dim, dim - 1), chain, d, NormSpec::lp(2.0));
  for (std::size_t n = 1; n <= 5; ++n) {
    CHECK(r.levels[n - 1].ratio == doctest::Approx(std::ldexp(1.0, static_cast<int>(n))));
    CHECK(r.levels[n - 1].at_least_d);
  }
  CHECK(r.sup == doctest::Approx(32.0));
  CHECK(r.inf == doctest::Approx(2.0));

  const RatioReport z = ratio_report(unit(dim, dim - 1), chain, TargetSequence({1.0, 0.5, 0.0, 0.0, 0.0}),
                                     NormSpec::lp(2.0));
  CHECK(std::isinf(z.levels[2].ratio));

  // Output of the exact solver reads as ratio 1 everywhere.
  const SynthesisResult s = synthesize_exact(chain, TargetSequence({1.0, 0.6, 0.3, 0.2, 0.1}), unit(dim, 5),
                                             NormSpec::lp(kInf));
  const RatioReport one = ratio_report(s.x, chain, TargetSequence({1.0, 0.6, 0.3, 0.2, 0.1}), NormSpec::lp(kInf));
  for (const RatioLevel& lv : one.levels) CHECK(std::abs(lv.ratio - 1.0) <= 1e-6);
}
