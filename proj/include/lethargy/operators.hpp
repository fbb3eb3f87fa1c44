#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lethargy/spaces.hpp"

namespace lethargy {

/// A matrix acting from (R^cols, domain) to (R^rows, codomain).
struct OperatorSpec {
  Matrix matrix;
  NormSpec domain = NormSpec::lp(2.0);
  NormSpec codomain = NormSpec::lp(2.0);
  std::optional<double> h_constant;

  /// Throws on non-finite entries, non-LP norms, or a C = 1 claim on a
  /// non-symmetric Hilbert operator.
  void validate() const;
  bool hilbert() const;
};

struct NormValue {
  double value = 0.0;
  bool exact = true;  // false: LOWER_BOUND from multi-start maximization
};

/// ||a||_{p -> q}. Exact when p = q = 2, p = 1, q = inf, or by extreme-point
/// enumeration when p = inf or q = 1 at moderate size.
NormValue matrix_norm(const Matrix& a, double p, double q, std::uint64_t seed = 0);

NormValue operator_norm(const OperatorSpec& op, std::uint64_t seed = 0);

enum class ApproxMethod { kSvdExact, kClosedForm, kOracle };

std::string_view to_string(ApproxMethod method);

struct ApproxNumberReport {
  std::vector<double> values;  // a_1 >= a_2 >= ...
  ApproxMethod method = ApproxMethod::kSvdExact;
  std::vector<double> lower;  // ORACLE only
  std::vector<double> upper;  // ORACLE only
};

inline constexpr Index kOracleMaxDim = 4;

/// a_n(T) = inf{||T - S|| : rank S < n}, n = 1..min(rows, cols).
ApproxNumberReport approximation_numbers(const OperatorSpec& op, std::uint64_t seed = 0);

struct OracleInterval {
  double value = 0.0;  // best competitor found (upper end)
  double lower = 0.0;
  double upper = 0.0;
};

/// Interval containing a_n(T): the upper end from rank-(n-1) competitors
/// (multi-start), the lower end from norm equivalence and from subspaces E of
/// dimension n on which T is bounded below.
OracleInterval approximation_numbers_oracle(const OperatorSpec& op, std::size_t n,
                                            int restarts = 32, std::uint64_t seed = 0);

/// diag(d_1, ..., d_dim) on (l_p -> l_p).
OperatorSpec bernstein_pair_diagonal(std::span<const double> d, double p, Index dim);

enum class WidthMethod { kEllipsoidExact, kUpperBound };

std::string_view to_string(WidthMethod method);

struct WidthReport {
  std::vector<double> values;  // index = dimension of the approximating subspace
  WidthMethod method = WidthMethod::kEllipsoidExact;
};

WidthReport kolmogorov_diameters(const OperatorSpec& op, std::uint64_t seed = 0);

/// min over sampled n-dimensional L of ||(I - P_L) T||_2; an upper bound on the
/// (2 -> 2) width d_n(T).
double sampled_width(const Matrix& t, Index n, int samples, std::uint64_t seed);

struct SpectrumReport {
  std::vector<std::complex<double>> values;  // non-increasing modulus
  bool converged = true;
};

SpectrumReport eigenvalues(const Matrix& t);

struct KoenigReport {
  std::vector<double> g;  // g_m, m = 1..m_max
  double lambda_abs = 0.0;
  double gap = 0.0;
};

/// g_m = a_n(T^m)^{1/m} on (2 -> 2), powers kept normalized with a log ledger.
KoenigReport koenig_limit_check(const OperatorSpec& op, std::size_t n, int m_max);

struct MarcusLevel {
  std::size_t n = 0;
  double width = 0.0;  // width with dim L <= n - 1
  double a = 0.0;
  double lambda_term = 0.0;  // 2 sqrt2 C |lambda_n|
  double width_term = 0.0;   // 8 C (C + 1) width
  bool pass = false;
  double literal_width = 0.0;  // width with dim L <= n
  bool literal_pass = false;
};

struct MarcusReport {
  std::vector<MarcusLevel> levels;
  double C = 1.0;
  bool pass = true;
  bool literal_pass = true;
};

MarcusReport marcus_chain_check(const OperatorSpec& op, double tol_rel = 1e-9);

struct ToLevel {
  std::size_t m = 0;
  double a = 0.0;
  double lower = 0.0;  // d_m / 9
  double upper = 0.0;  // 3 d_{max(1, floor(m/4))}
  bool pass = false;
};

struct ToReport {
  double norm = 0.0;
  bool norm_pass = false;  // ||T|| <= 2 d_1
  std::vector<ToLevel> levels;
  bool pass = false;
};

ToReport to_bound_check(const OperatorSpec& op, const TargetSequence& d, std::uint64_t seed = 0);

}  // namespace lethargy
