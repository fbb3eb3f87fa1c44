#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lethargy/error.hpp"
#include "lethargy/rng.hpp"
#include "lethargy/spaces.hpp"

// Test-side oracles. None of these share code paths with the library.
namespace oracle {

using lethargy::Index;
using lethargy::Matrix;
using lethargy::Vector;

/// l2 distance via the normal equations.
inline double l2_distance(const Vector& x, const Matrix& b) {
  if (b.cols() == 0) return x.norm();
  const Vector c = (b.transpose() * b).ldlt().solve(b.transpose() * x);
  return (x - b * c).norm();
}

/// Orthogonal projector onto span(b) via the normal equations.
inline Matrix projector(const Matrix& b) {
  return b * (b.transpose() * b).ldlt().solve(b.transpose());
}

inline bool same_span(const Matrix& a, const Matrix& b, double tol = 1e-9) {
  return a.cols() == b.cols() && (projector(a) - projector(b)).cwiseAbs().maxCoeff() <= tol;
}

/// Singular values from the eigenvalues of a^T a, non-increasing.
inline std::vector<double> singular_values(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
  std::vector<double> s;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) s.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
  std::sort(s.rbegin(), s.rend());
  s.resize(static_cast<std::size_t>(std::min(a.rows(), a.cols())));
  return s;
}

/// Roots of the characteristic polynomial of a symmetric 3x3 matrix
/// (trigonometric form), sorted by non-increasing modulus.
inline std::array<double, 3> symmetric_cubic_roots(const Matrix& a) {
  // det(lambda I - A) = lambda^3 - c2 lambda^2 + c1 lambda - c0
  const double c2 = a.trace();
  const double c1 = a(0, 0) * a(1, 1) + a(0, 0) * a(2, 2) + a(1, 1) * a(2, 2) - a(0, 1) * a(1, 0) -
                    a(0, 2) * a(2, 0) - a(1, 2) * a(2, 1);
  const double c0 = a.determinant();
  // Depressed cubic t^3 + p t + q with lambda = t + c2 / 3.
  const double s = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = -2.0 * s * s * s + c1 * s - c0;
  std::array<double, 3> r{};
  if (std::abs(p) < 1e-300) {
    r = {s + std::cbrt(-q), s + std::cbrt(-q), s + std::cbrt(-q)};
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) r[k] = s + m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
  }
  std::sort(r.begin(), r.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
  return r;
}

/// ||a||_{inf -> inf} by enumerating sign vectors (extreme points of the ball).
inline double inf_norm_by_signs(const Matrix& a) {
  double best = 0.0;
  const Index n = a.cols();
  for (long mask = 0; mask < (1L << n); ++mask) {
    Vector s(n);
    for (Index j = 0; j < n; ++j) s(j) = (mask >> j) & 1 ? 1.0 : -1.0;
    best = std::max(best, (a * s).cwiseAbs().maxCoeff());
  }
  return best;
}

/// sum_{k >= 0} first * r^k.
inline double geometric_sum(double first, double r) { return first / (1.0 - r); }

/// Error code thrown by f; fails the test when nothing is thrown.
inline lethargy::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const lethargy::Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return lethargy::ErrorCode::kInvalidArgument;
}

inline Matrix random_symmetric(lethargy::Rng& rng, Index n) {
  const Matrix g = rng.normal_matrix(n, n);
  return 0.5 * (g + g.transpose());
}

/// Strictly decreasing positive sequence with ratios in [lo, hi].
inline std::vector<double> random_decreasing(lethargy::Rng& rng, std::size_t len, double lo = 0.3,
                                             double hi = 0.9) {
  std::vector<double> v{rng.uniform(0.5, 2.0)};
  while (v.size() < len) v.push_back(v.back() * rng.uniform(lo, hi));
  return v;
}

}  // namespace oracle
