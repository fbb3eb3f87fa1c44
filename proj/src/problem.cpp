#include "lethargy/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lethargy/error.hpp"

namespace lethargy {

namespace {

using json = nlohmann::json;

[[noreturn]] void malformed(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kMalformedProblem, "field '" + field + "': " + what);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double number(const json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = lower(j.get<std::string>());
    if (s == "inf" || s == "infinity") return kInf;
  }
  malformed(field, "expected a number");
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) malformed(field, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) malformed(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Vector vector_of(const json& j, const std::string& field) {
  const auto v = numbers(j, field);
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

const json* member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

NormSpec parse_norm(const json& j, const std::string& field, std::optional<Index> dim) {
  if (!j.is_object()) malformed(field, "expected an object");
  const json* fam = member(j, "family");
  if (!fam || !fam->is_string()) malformed(field + ".family", "expected a string");
  const std::string f = lower(fam->get<std::string>());
  try {
    if (f == "lp") {
      const json* p = member(j, "p");
      if (!p) malformed(field + ".p", "missing");
      return NormSpec::lp(number(*p, field + ".p"));
    }
    if (f == "grid_sup") {
      if (const json* g = member(j, "grid")) return NormSpec::grid_sup(numbers(*g, field + ".grid"));
      if (const json* pts = member(j, "points")) return NormSpec::grid_sup(uniform_grid(count(*pts, field + ".points")));
      if (dim) return NormSpec::grid_sup(uniform_grid(static_cast<std::size_t>(*dim)));
      malformed(field, "grid_sup needs 'grid', 'points' or ambient_dim");
    }
    if (f == "fnorm_product" || f == "product") {
      const json* w = member(j, "weights");
      if (!w || (w->is_string() && lower(w->get<std::string>()) == "dyadic")) {
        if (!dim) malformed(field, "dyadic weights need ambient_dim");
        return NormSpec::fnorm_product_dyadic(*dim);
      }
      return NormSpec::fnorm_product(numbers(*w, field + ".weights"));
    }
    if (f == "fnorm_of_norm" || f == "of_norm") {
      const json* b = member(j, "base");
      if (!b) malformed(field + ".base", "missing");
      return NormSpec::fnorm_of_norm(parse_norm(*b, field + ".base", dim));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedProblem) throw;
    malformed(field, e.what());
  }
  malformed(field + ".family", "unknown family '" + f + "'");
}

TargetSequence parse_sequence(const json& j, const std::string& field) {
  if (!j.is_object()) malformed(field, "expected an object");
  std::size_t n0 = 1;
  if (const json* v = member(j, "n0")) n0 = count(*v, field + ".n0");
  std::optional<GeometricTail> tail;
  if (const json* t = member(j, "tail")) {
    if (t->is_object()) {
      const json* type = member(*t, "type");
      if (!type || !type->is_string()) malformed(field + ".tail.type", "expected a string");
      const std::string ty = lower(type->get<std::string>());
      if (ty == "geometric") {
        const json* r = member(*t, "ratio");
        if (!r) malformed(field + ".tail.ratio", "missing");
        tail = GeometricTail{number(*r, field + ".tail.ratio")};
      } else if (ty != "none") {
        malformed(field + ".tail.type", "unknown tail '" + ty + "'");
      }
    } else if (!t->is_null()) {
      malformed(field + ".tail", "expected an object");
    }
  }
  std::vector<double> values;
  if (const json* v = member(j, "values")) {
    values = numbers(*v, field + ".values");
  } else if (const json* fm = member(j, "formula")) {
    if (!fm->is_string()) malformed(field + ".formula", "expected a string");
    const std::string f = lower(fm->get<std::string>());
    const json* len = member(j, "length");
    if (!len) malformed(field + ".length", "missing");
    const std::size_t n = count(*len, field + ".length");
    if (f == "geometric") {
      const json* r = member(j, "ratio");
      if (!r) malformed(field + ".ratio", "missing");
      const double ratio = number(*r, field + ".ratio");
      double first = ratio;
      if (const json* a = member(j, "first")) first = number(*a, field + ".first");
      for (std::size_t k = 0; k < n; ++k) values.push_back(first * std::pow(ratio, static_cast<double>(k)));
      // A geometric formula carries its own tail unless one was given.
      if (!member(j, "tail") && ratio >= 0.0 && ratio < 1.0) tail = GeometricTail{ratio};
    } else if (f == "harmonic") {
      double offset = 0.0;
      if (const json* o = member(j, "offset")) offset = number(*o, field + ".offset");
      for (std::size_t k = 1; k <= n; ++k) values.push_back(1.0 / (static_cast<double>(k) + offset));
    } else {
      malformed(field + ".formula", "unknown formula '" + f + "'");
    }
  } else {
    malformed(field, "needs 'values' or 'formula'");
  }
  try {
    return TargetSequence(std::move(values), n0, tail);
  } catch (const Error& e) {
    malformed(field, e.what());
  }
}

SubspaceChain parse_chain(const json& j, const std::string& field, std::optional<Index>& dim,
                          std::optional<std::uint64_t> seed) {
  if (j.is_object()) {
    const json* type = member(j, "type");
    if (!type || !type->is_string()) malformed(field + ".type", "expected a string");
    const std::string ty = lower(type->get<std::string>());
    try {
      if (ty == "polynomial") {
        std::vector<double> grid;
        if (const json* g = member(j, "grid")) grid = numbers(*g, field + ".grid");
        else if (const json* pts = member(j, "grid_points")) grid = uniform_grid(count(*pts, field + ".grid_points"));
        else if (dim) grid = uniform_grid(static_cast<std::size_t>(*dim));
        else malformed(field, "polynomial chain needs 'grid' or 'grid_points'");
        const json* deg = member(j, "degrees");
        if (!deg || !deg->is_array()) malformed(field + ".degrees", "expected an array of integers");
        std::vector<int> degrees;
        for (std::size_t i = 0; i < deg->size(); ++i)
          degrees.push_back(static_cast<int>(count((*deg)[i], field + ".degrees[" + std::to_string(i) + "]")));
        if (dim && *dim != static_cast<Index>(grid.size())) malformed(field, "grid size differs from ambient_dim");
        dim = static_cast<Index>(grid.size());
        return chain_polynomials(grid, degrees);
      }
      if (ty == "coordinate" || ty == "random") {
        if (!dim) malformed(field, ty + " chain needs ambient_dim");
        const json* rk = member(j, "ranks");
        if (!rk || !rk->is_array()) malformed(field + ".ranks", "expected an array of integers");
        std::vector<Index> ranks;
        for (std::size_t i = 0; i < rk->size(); ++i)
          ranks.push_back(static_cast<Index>(count((*rk)[i], field + ".ranks[" + std::to_string(i) + "]")));
        if (ty == "coordinate") return coordinate_chain(*dim, ranks);
        std::uint64_t s = seed.value_or(0);
        if (const json* sv = member(j, "seed")) s = count(*sv, field + ".seed");
        return random_chain(*dim, ranks, s);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedProblem) throw;
      malformed(field, e.what());
    }
    malformed(field + ".type", "unknown chain type '" + ty + "'");
  }
  if (!j.is_array() || j.empty()) malformed(field, "expected a non-empty array of levels or a generator object");
  std::vector<Matrix> bases;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string lf = field + "[" + std::to_string(k) + "]";
    const json& level = j[k];
    if (!level.is_array() || level.empty()) malformed(lf, "expected a non-empty array of column vectors");
    std::vector<Vector> cols;
    for (std::size_t c = 0; c < level.size(); ++c) cols.push_back(vector_of(level[c], lf + "[" + std::to_string(c) + "]"));
    const Index n = cols.front().size();
    if (!dim) dim = n;
    Matrix b(*dim, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].size() != *dim)
        malformed(lf + "[" + std::to_string(c) + "]", "column has " + std::to_string(cols[c].size()) +
                                                          " entries, ambient_dim is " + std::to_string(*dim));
      b.col(static_cast<Index>(c)) = cols[c];
    }
    bases.push_back(std::move(b));
  }
  return SubspaceChain(*dim, std::move(bases));
}

Matrix parse_rows(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) malformed(field, "expected a non-empty array of rows");
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(vector_of(j[i], field + "[" + std::to_string(i) + "]"));
  Matrix m(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) malformed(field + "[" + std::to_string(i) + "]", "ragged row");
    m.row(static_cast<Index>(i)) = rows[i].transpose();
  }
  return m;
}

RunBlock parse_run(const json& j) {
  RunBlock r;
  if (!j.is_object()) malformed("run", "expected an object");
  auto num = [&](const char* key, std::optional<double>& dst) {
    if (const json* v = member(j, key)) dst = number(*v, std::string("run.") + key);
  };
  auto cnt = [&](const char* key, auto& dst) {
    using T = typename std::remove_reference_t<decltype(dst)>::value_type;
    if (const json* v = member(j, key)) dst = static_cast<T>(count(*v, std::string("run.") + key));
  };
  cnt("seed", r.seed);
  cnt("restarts", r.restarts);
  num("tol", r.tol);
  num("c", r.c);
  num("K", r.K);
  num("t_max", r.t_max);
  num("p", r.p);
  cnt("n", r.n);
  cnt("n0", r.n0);
  cnt("N", r.N);
  cnt("m_max", r.m_max);
  cnt("dim", r.dim);
  if (const json* v = member(j, "banach")) {
    if (!v->is_boolean()) malformed("run.banach", "expected a boolean");
    r.banach = v->get<bool>();
  }
  if (const json* v = member(j, "deviations")) r.deviations = numbers(*v, "run.deviations");
  return r;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMalformedProblem, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Problem parse_problem(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kMalformedProblem,
                "JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (!j.is_object()) malformed("<root>", "expected an object");

  Problem pb;
  if (const json* v = member(j, "version")) {
    if (!v->is_number_integer() || v->get<int>() != kProblemVersion)
      malformed("version", "expected " + std::to_string(kProblemVersion));
  } else {
    malformed("version", "missing");
  }
  if (const json* v = member(j, "seed")) pb.seed = count(*v, "seed");
  if (const json* v = member(j, "run")) pb.run = parse_run(*v);
  if (!pb.seed && pb.run.seed) pb.seed = pb.run.seed;
  if (const json* v = member(j, "ambient_dim")) {
    const std::size_t d = count(*v, "ambient_dim");
    if (d == 0) malformed("ambient_dim", "must be positive");
    pb.ambient_dim = static_cast<Index>(d);
  }
  if (const json* v = member(j, "chain")) pb.chain = parse_chain(*v, "chain", pb.ambient_dim, pb.seed);
  if (const json* v = member(j, "norm")) pb.norm = parse_norm(*v, "norm", pb.ambient_dim);
  if (const json* v = member(j, "fnorm")) {
    pb.fnorm = parse_norm(*v, "fnorm", pb.ambient_dim);
    if (!pb.fnorm->is_fnorm()) malformed("fnorm", "expected an F-norm family");
  }
  if (const json* v = member(j, "sequence")) pb.sequence = parse_sequence(*v, "sequence");
  if (const json* v = member(j, "e")) pb.e = parse_sequence(*v, "e");
  if (const json* v = member(j, "delta")) pb.delta = parse_sequence(*v, "delta");
  auto point = [&](const char* key, std::optional<Vector>& dst) {
    const json* v = member(j, key);
    if (!v) return;
    dst = vector_of(*v, key);
    if (pb.ambient_dim && dst->size() != *pb.ambient_dim)
      malformed(key, "has " + std::to_string(dst->size()) + " entries, ambient_dim is " +
                         std::to_string(*pb.ambient_dim));
  };
  point("x", pb.x);
  point("z", pb.z);
  if (const json* v = member(j, "operator")) {
    if (!v->is_object()) malformed("operator", "expected an object");
    OperatorSpec op;
    if (const json* m = member(*v, "matrix")) {
      op.matrix = parse_rows(*m, "operator.matrix");
    } else if (const json* c = member(*v, "csv")) {
      if (!c->is_string()) malformed("operator.csv", "expected a path");
      try {
        op.matrix = parse_matrix_csv(read_text(base_dir / c->get<std::string>()));
      } catch (const Error& e) {
        malformed("operator.csv", e.what());
      }
    } else {
      malformed("operator", "needs 'matrix' or 'csv'");
    }
    if (const json* d = member(*v, "domain")) op.domain = parse_norm(*d, "operator.domain", std::nullopt);
    if (const json* d = member(*v, "codomain")) op.codomain = parse_norm(*d, "operator.codomain", std::nullopt);
    if (const json* h = member(*v, "h_constant")) op.h_constant = number(*h, "operator.h_constant");
    try {
      op.validate();
    } catch (const Error& e) {
      malformed("operator", e.what());
    }
    pb.op = std::move(op);
  }
  return pb;
}

Problem load_problem(const std::filesystem::path& path) {
  return parse_problem(read_text(path), path.parent_path());
}

Matrix parse_matrix_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  };
  auto fields = [&]() {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedProblem,
                  "matrix CSV line " + std::to_string(line_no) + ": '" + s + "' is not a number");
    }
  };
  if (!next_line()) throw Error(ErrorCode::kMalformedProblem, "matrix CSV is empty");
  if (lower(line).find("rows") != std::string::npos && !next_line())
    throw Error(ErrorCode::kMalformedProblem, "matrix CSV has no size line");
  const auto dims = fields();
  if (dims.size() != 2)
    throw Error(ErrorCode::kMalformedProblem, "matrix CSV line " + std::to_string(line_no) + ": expected 'rows,cols'");
  const double r = to_double(dims[0]), c = to_double(dims[1]);
  if (r < 1 || c < 1 || r != std::floor(r) || c != std::floor(c))
    throw Error(ErrorCode::kMalformedProblem, "matrix CSV line " + std::to_string(line_no) + ": bad sizes");
  Matrix m(static_cast<Index>(r), static_cast<Index>(c));
  for (Index i = 0; i < m.rows(); ++i) {
    if (!next_line())
      throw Error(ErrorCode::kMalformedProblem, "matrix CSV ends after " + std::to_string(i) + " rows");
    const auto row = fields();
    if (static_cast<Index>(row.size()) != m.cols())
      throw Error(ErrorCode::kMalformedProblem, "matrix CSV line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(m.cols()) + " values");
    for (Index k = 0; k < m.cols(); ++k) m(i, k) = to_double(row[static_cast<std::size_t>(k)]);
  }
  if (next_line())
    throw Error(ErrorCode::kMalformedProblem, "matrix CSV line " + std::to_string(line_no) + ": extra data");
  if (!m.allFinite()) throw Error(ErrorCode::kMalformedProblem, "matrix CSV has non-finite entries");
  return m;
}

Matrix load_matrix(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::kMalformedProblem, "matrix file '" + path.string() + "' is not valid JSON");
    }
    if (j.is_object()) {
      const json* m = member(j, "matrix");
      if (!m) malformed("matrix", "missing");
      return parse_rows(*m, "matrix");
    }
    return parse_rows(j, "matrix");
  }
  return parse_matrix_csv(text);
}

}  // namespace lethargy
