#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace lethargy {

/// Seeded generator with platform-independent output. std::mt19937_64 is
/// fully specified by the standard; the distributions on top of it are not,
/// so uniform and normal draws are derived here by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi] inclusive.
  long integer(long lo, long hi);
  /// Standard normal via Box-Muller.
  double normal();

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  /// Derive an independent stream for restart `index`.
  static std::uint64_t split(std::uint64_t seed, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lethargy
