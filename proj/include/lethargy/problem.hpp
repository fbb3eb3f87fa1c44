#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lethargy/operators.hpp"
#include "lethargy/spaces.hpp"

namespace lethargy {

inline constexpr int kProblemVersion = 1;

/// Subcommand options that may also come from the file's "run" block.
struct RunBlock {
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<double> tol;
  std::optional<double> c;
  std::optional<double> K;
  std::optional<double> t_max;
  std::optional<double> p;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n0;
  std::optional<std::size_t> N;
  std::optional<int> m_max;
  std::optional<Index> dim;
  std::optional<bool> banach;
  std::optional<std::vector<double>> deviations;
};

struct Problem {
  int version = kProblemVersion;
  std::optional<Index> ambient_dim;
  std::optional<NormSpec> norm;
  std::optional<NormSpec> fnorm;
  std::optional<SubspaceChain> chain;
  std::optional<TargetSequence> sequence;
  std::optional<TargetSequence> e;
  std::optional<TargetSequence> delta;
  std::optional<Vector> x;
  std::optional<Vector> z;
  std::optional<OperatorSpec> op;
  RunBlock run;
  std::optional<std::uint64_t> seed;
};

/// Parses the JSON problem schema. Relative paths (operator "csv") resolve
/// against base_dir. Throws Error(kMalformedProblem) naming the line or field.
Problem parse_problem(const std::string& text, const std::filesystem::path& base_dir = {});
Problem load_problem(const std::filesystem::path& path);

/// Row-major matrix CSV: an optional literal "rows,cols" line, a line with the
/// two sizes, then one line per row.
Matrix parse_matrix_csv(const std::string& text);
/// CSV (by the header) or JSON ({"matrix": [[...]]} or a bare array of rows).
Matrix load_matrix(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace lethargy
