#include "lethargy/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "lethargy/error.hpp"
#include "lethargy/frechet.hpp"
#include "lethargy/lethargy.hpp"
#include "lethargy/operators.hpp"
#include "lethargy/problem.hpp"
#include "lethargy/rng.hpp"

namespace lethargy {

namespace {

using ojson = nlohmann::ordered_json;

enum class Verdict { kPass, kFail, kBudget };

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kBudget: return "BUDGET_EXHAUSTED";
  }
  return "UNKNOWN";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::kPass: return kExitPass;
    case Verdict::kFail: return kExitFail;
    case Verdict::kBudget: return kExitBudget;
  }
  return kExitFail;
}

Verdict worst(Verdict a, Verdict b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

using Cell = std::variant<double, std::size_t, bool, std::string>;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Same digits as the CSV; non-finite values become strings.
ojson json_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::stod(format_number(v));
}

std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_number(v);
        else if constexpr (std::is_same_v<T, std::size_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return v;
      },
      c);
}

ojson json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> ojson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return json_number(v);
        else return v;
      },
      c);
}

ojson json_vector(const Vector& x) {
  ojson a = ojson::array();
  for (Index i = 0; i < x.size(); ++i) a.push_back(json_number(x(i)));
  return a;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
      os << '\n';
    }
  }

  ojson json_rows() const {
    ojson a = ojson::array();
    for (const auto& row : rows) {
      ojson r = ojson::object();
      for (std::size_t i = 0; i < row.size(); ++i) r[header[i]] = json_cell(row[i]);
      a.push_back(std::move(r));
    }
    return a;
  }
};

struct Report {
  Verdict verdict = Verdict::kPass;
  Table table;
  ojson summary = ojson::object();
};

// Options shared by every subcommand; CLI flags override the run block.
struct Options {
  std::string file, out, format = "csv", p_text, marcus_matrix;
  bool json = false, banach = false, strict = false;
  std::uint64_t seed = 0;
  double c = 1.0, tol = 0.0, K = 0.0, t_max = 1e6;
  int restarts = kSynthesisRestarts, m_max = 64;
  std::size_t n = 1, n0 = 1, N = 0;
  long dim = 0;
};

struct Context {
  std::string name;
  const CLI::App* sub = nullptr;
  Options opt;
  Problem pb;
  std::uint64_t seed = 0;

  bool given(const char* flag) const { return sub->count(flag) > 0; }

  template <class T, class R>
  T pick(const char* flag, const T& cli, const std::optional<R>& run, const T& fallback) const {
    if (given(flag)) return cli;
    if (run) return static_cast<T>(*run);
    return fallback;
  }

  template <class T>
  const T& need(const std::optional<T>& v, const char* block) const {
    if (!v) throw Error(ErrorCode::kMalformedProblem, "field '" + std::string(block) + "': required by '" + name + "'");
    return *v;
  }

  SolverConfig solver(std::uint64_t stream) const {
    SolverConfig cfg;
    cfg.seed = Rng::split(seed, stream);
    return cfg;
  }

  double p() const {
    if (given("--p")) {
      const std::string s = opt.p_text;
      if (s == "inf" || s == "INF" || s == "infinity") return kInf;
      try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      throw Error(ErrorCode::kInvalidArgument, "--p expects a number or 'inf', got '" + s + "'");
    }
    return pb.run.p.value_or(2.0);
  }
};

Vector complement_point(const SubspaceChain& chain, std::uint64_t seed) {
  const Matrix q = orthonormal_basis(chain.last());
  Rng rng(seed);
  Vector v = rng.normal_vector(chain.ambient_dim());
  for (int pass = 0; pass < 2; ++pass) v -= q * (q.transpose() * v);
  return v / v.norm();
}

void check_dimensions(const Context& ctx) {
  const Problem& pb = ctx.pb;
  if (!pb.chain) return;
  const Index dim = pb.chain->ambient_dim();
  auto mismatch = [&](const std::string& what, Index got) {
    throw Error(ErrorCode::kDimensionMismatch,
                what + " has dimension " + std::to_string(got) + ", the chain lives in " + std::to_string(dim));
  };
  for (const auto* spec : {&pb.norm, &pb.fnorm})
    if (*spec)
      if (const auto req = (*spec)->required_dim(); req && *req != dim) mismatch("the " + (*spec)->describe() + " norm", *req);
  if (pb.x && pb.x->size() != dim) mismatch("x", pb.x->size());
  if (pb.z && pb.z->size() != dim) mismatch("z", pb.z->size());
}

void require_valid_chain(const SubspaceChain& chain) {
  const ChainReport rep = validate_chain(chain);
  if (!rep.pass)
    throw Error(ErrorCode::kInvalidArgument, "chain level " + std::to_string(rep.issues.front().level + 1) + ": " +
                                                 rep.issues.front().detail);
}

// ---------------------------------------------------------------- lethargy

Report cmd_check(const Context& ctx) {
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const ConditionReport strict = check_condition_strict(d);
  const ConditionReport weak = check_condition_weak(d);
  Report r;
  r.table.header = {"n", "d", "tail_sum", "margin", "strict", "weak"};
  for (std::size_t n = 1; n <= d.size(); ++n)
    r.table.rows.push_back({n, d(n), strict.tail_sums[n - 1], strict.margins[n - 1],
                            static_cast<bool>(strict.level_pass[n - 1]), static_cast<bool>(weak.level_pass[n - 1])});
  r.summary["strict_pass"] = strict.pass;
  r.summary["strict_first_violation"] = strict.first_violation ? ojson(*strict.first_violation) : ojson();
  r.summary["weak_pass"] = weak.pass;
  r.summary["weak_first_violation"] = weak.first_violation ? ojson(*weak.first_violation) : ojson();
  r.summary["truncated"] = strict.truncated;
  r.summary["verdict_condition"] = ctx.opt.strict ? "strict" : "weak";
  r.verdict = (ctx.opt.strict ? strict.pass : weak.pass) ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_synth(const Context& ctx) {
  const SubspaceChain& chain = ctx.need(ctx.pb.chain, "chain");
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const NormSpec& norm = ctx.need(ctx.pb.norm, "norm");
  require_valid_chain(chain);
  const Vector z = ctx.pb.z ? *ctx.pb.z : complement_point(chain, Rng::split(ctx.seed, 1));
  SolverConfig cfg = ctx.solver(2);
  cfg.restarts = ctx.pick("--restarts", ctx.opt.restarts, ctx.pb.run.restarts, kSynthesisRestarts);
  const SynthesisResult s = synthesize_exact(chain, d, z, norm, cfg);
  const double tol = ctx.pick("--tol", ctx.opt.tol, ctx.pb.run.tol, kSynthesisTolerance);

  Report r;
  r.table.header = {"level", "rank", "d_target", "rho", "method", "exact", "residual"};
  for (std::size_t k = 1; k <= chain.size(); ++k) {
    SolverConfig lc = ctx.solver(3);
    lc.seed = Rng::split(lc.seed, k);
    const DistanceResult dr = distance(s.x, chain.basis(k - 1), norm, lc);
    r.table.rows.push_back({k, static_cast<std::size_t>(numerical_rank(chain.basis(k - 1))), d(k), s.rho[k - 1],
                            std::string(to_string(dr.certificate.method)), dr.is_exact, s.residuals[k - 1]});
  }
  r.summary["status"] = std::string(to_string(s.status));
  r.summary["lambda"] = json_number(s.lambda);
  r.summary["max_residual"] = json_number(s.max_residual);
  r.summary["norm_bound_slack"] = json_number(s.norm_bound_slack);
  r.summary["restarts_used"] = s.restarts_used;
  r.summary["outside_lemma_hypothesis"] = s.outside_lemma_hypothesis;
  r.summary["x"] = json_vector(s.x);
  if (s.status == SynthesisStatus::kInfeasibleAtBudget) r.verdict = Verdict::kBudget;
  else r.verdict = s.max_residual <= tol * std::max(d(1), 1.0) ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_konyagin(const Context& ctx) {
  const SubspaceChain& chain = ctx.need(ctx.pb.chain, "chain");
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const NormSpec& norm = ctx.need(ctx.pb.norm, "norm");
  KonyaginConfig kc;
  kc.c = ctx.pick("--c", ctx.opt.c, ctx.pb.run.c, 1.0);
  if (ctx.given("--K")) kc.K = ctx.opt.K;
  else if (ctx.pb.run.K) kc.K = *ctx.pb.run.K;
  kc.seed = ctx.seed;
  SolverConfig sc = ctx.solver(4);
  sc.restarts = ctx.pick("--restarts", ctx.opt.restarts, ctx.pb.run.restarts, kSynthesisRestarts);
  const KonyaginResult k = synthesize_konyagin(chain, d, kc, norm, sc);

  Report r;
  r.table.header = {"n", "ratio", "lower", "upper"};
  for (const BoundLevel& lv : k.report.levels) r.table.rows.push_back({lv.n, lv.ratio, kc.c, 4.0 * kc.c});
  r.summary["c"] = json_number(kc.c);
  r.summary["K"] = json_number(k.interleave.K);
  r.summary["inserted"] = k.interleave.inserted;
  r.summary["bounds_pass"] = k.report.pass;
  r.summary["narrow_interval_pass"] = k.narrow_interval_pass ? ojson(*k.narrow_interval_pass) : ojson();
  r.summary["dichotomy"] = k.dichotomy;
  r.summary["synthesis_status"] = std::string(to_string(k.synthesis.status));
  ojson roles = ojson::array();
  for (LevelRole role : k.roles) roles.push_back(std::string(to_string(role)));
  r.summary["roles"] = roles;
  r.summary["x_c"] = json_vector(k.x_c);
  if (k.synthesis.status == SynthesisStatus::kInfeasibleAtBudget) r.verdict = Verdict::kBudget;
  else r.verdict = k.report.pass && k.narrow_interval_pass.value_or(true) ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_verify(const Context& ctx) {
  const SubspaceChain& chain = ctx.need(ctx.pb.chain, "chain");
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const NormSpec& norm = ctx.need(ctx.pb.norm, "norm");
  const Vector& x = ctx.need(ctx.pb.x, "x");
  const double c = ctx.pick("--c", ctx.opt.c, ctx.pb.run.c, 1.0);
  const double tol = ctx.pick("--tol", ctx.opt.tol, ctx.pb.run.tol, 1e-6);
  const BoundReport rep = verify_bounds(x, chain, d, c, norm, tol, ctx.solver(5));
  Report r;
  r.table.header = {"n", "d", "rho", "ratio", "lower", "upper", "pass"};
  for (const BoundLevel& lv : rep.levels) r.table.rows.push_back({lv.n, lv.d, lv.rho, lv.ratio, lv.lower, lv.upper, lv.pass});
  r.summary["c"] = json_number(c);
  r.summary["pass"] = rep.pass;
  r.verdict = rep.pass ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_ratios(const Context& ctx) {
  const SubspaceChain& chain = ctx.need(ctx.pb.chain, "chain");
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const NormSpec& norm = ctx.need(ctx.pb.norm, "norm");
  const Vector& x = ctx.need(ctx.pb.x, "x");
  const RatioReport rep = ratio_report(x, chain, d, norm, ctx.solver(6));
  Report r;
  r.table.header = {"n", "d", "rho", "ratio", "tyuriemskih"};
  for (const RatioLevel& lv : rep.levels) r.table.rows.push_back({lv.n, lv.d, lv.rho, lv.ratio, lv.at_least_d});
  r.summary["sup"] = json_number(rep.sup);
  r.summary["inf"] = json_number(rep.inf);
  return r;
}

// ---------------------------------------------------------------- frechet

RayConfig ray_config(const Context& ctx) {
  RayConfig ray;
  ray.t_max = ctx.pick("--t-max", ctx.opt.t_max, ctx.pb.run.t_max, 1e6);
  ray.seed = Rng::split(ctx.seed, 7);
  return ray;
}

Report cmd_dev(const Context& ctx) {
  const SubspaceChain& chain = ctx.need(ctx.pb.chain, "chain");
  const NormSpec& fnorm = ctx.need(ctx.pb.fnorm, "fnorm");
  require_valid_chain(chain);
  const std::size_t N = ctx.pick("--N", ctx.opt.N, ctx.pb.run.N, chain.size());
  const DeviationReport rep = deviation_inf(chain, fnorm, N, ray_config(ctx));
  Report r;
  r.table.header = {"n", "deviation", "method", "residual"};
  for (const DeviationEntry& e : rep.entries)
    r.table.rows.push_back({e.n, e.value, std::string(to_string(e.method)), e.residual});
  r.summary["inf"] = json_number(rep.inf);
  r.summary["truncation"] = rep.truncation;
  r.summary["trend"] = std::string(to_string(rep.trend));
  return r;
}

Report cmd_alcheck(const Context& ctx) {
  const TargetSequence& e = ctx.need(ctx.pb.e, "e");
  const TargetSequence& delta = ctx.need(ctx.pb.delta, "delta");
  const bool banach = ctx.opt.banach || ctx.pb.run.banach.value_or(false);
  std::optional<std::vector<double>> dev;
  std::string source = "banach";
  if (!banach) {
    if (ctx.pb.run.deviations) {
      dev = ctx.pb.run.deviations;
      source = "run.deviations";
    } else if (ctx.pb.chain && ctx.pb.fnorm) {
      const std::size_t N = std::min(ctx.pb.chain->size(), e.size());
      const DeviationReport rep = deviation_inf(*ctx.pb.chain, *ctx.pb.fnorm, N, ray_config(ctx));
      dev.emplace();
      for (const DeviationEntry& en : rep.entries) dev->push_back(en.value);
      source = "computed";
    }
  }
  const AlConditionReport rep = check_al_condition(e, delta, dev);
  Report r;
  r.table.header = {"n", "partial_sum", "tail_bound", "threshold", "pass"};
  for (const AlLevel& lv : rep.levels) r.table.rows.push_back({lv.n, lv.partial_sum, lv.tail_bound, lv.threshold, lv.pass});
  r.summary["status"] = std::string(to_string(rep.status));
  r.summary["banach_mode"] = rep.banach_mode;
  r.summary["deviation_source"] = source;
  r.summary["pass"] = rep.pass;
  r.verdict = rep.pass ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_fverify(const Context& ctx) {
  const SubspaceChain& chain = ctx.need(ctx.pb.chain, "chain");
  const NormSpec& fnorm = ctx.need(ctx.pb.fnorm, "fnorm");
  const TargetSequence& e = ctx.need(ctx.pb.e, "e");
  const Vector& x = ctx.need(ctx.pb.x, "x");
  const std::size_t n0 = ctx.pick("--n0", ctx.opt.n0, ctx.pb.run.n0, e.n0());
  const FrechetReport rep = verify_frechet_bounds(x, chain, e, n0, fnorm, ctx.solver(8));
  Report r;
  r.table.header = {"n", "e", "rho", "lower", "upper", "pass"};
  bool one_sided = false;
  for (const FrechetLevel& lv : rep.levels) {
    r.table.rows.push_back({lv.n, lv.e, lv.rho, lv.lower, lv.upper, lv.pass});
    one_sided = one_sided || lv.one_sided;
  }
  r.summary["n0"] = n0;
  r.summary["pass"] = rep.pass;
  r.summary["rho_upper_bound_only"] = one_sided;
  r.verdict = rep.pass ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_corollary(const Context& ctx) {
  const TargetSequence& e = ctx.need(ctx.pb.e, "e");
  Report r;
  r.table.header = {"n", "e", "shapiro", "tyuremskikh", "implication", "boundary"};
  bool all = true;
  for (const CorollaryLevel& lv : corollary_transforms(e)) {
    r.table.rows.push_back({lv.n, lv.e, lv.shapiro, lv.tyuremskikh, lv.implication, lv.boundary});
    all = all && lv.implication;
  }
  r.summary["implication_everywhere"] = all;
  return r;
}

// ---------------------------------------------------------------- operators

Report cmd_appnum(const Context& ctx) {
  const OperatorSpec& op = ctx.need(ctx.pb.op, "operator");
  const ApproxNumberReport rep = approximation_numbers(op, Rng::split(ctx.seed, 9));
  Report r;
  r.table.header = {"n", "a", "method", "lower", "upper"};
  const bool oracle = rep.method == ApproxMethod::kOracle;
  for (std::size_t i = 0; i < rep.values.size(); ++i)
    r.table.rows.push_back({i + 1, rep.values[i], std::string(to_string(rep.method)),
                            oracle ? rep.lower[i] : rep.values[i], oracle ? rep.upper[i] : rep.values[i]});
  const NormValue nv = operator_norm(op, Rng::split(ctx.seed, 10));
  r.summary["method"] = std::string(to_string(rep.method));
  r.summary["operator_norm"] = json_number(nv.value);
  r.summary["operator_norm_exact"] = nv.exact;
  return r;
}

Report cmd_widths(const Context& ctx) {
  const OperatorSpec& op = ctx.need(ctx.pb.op, "operator");
  const WidthReport rep = kolmogorov_diameters(op, Rng::split(ctx.seed, 11));
  Report r;
  r.table.header = {"n", "width", "method"};
  for (std::size_t i = 0; i < rep.values.size(); ++i)
    r.table.rows.push_back({i, rep.values[i], std::string(to_string(rep.method))});
  r.summary["method"] = std::string(to_string(rep.method));
  return r;
}

struct PairRow {
  std::size_t n;
  double d, a;
  std::string method;
  double lower, upper;
  bool match;
};

// Diagonal construction and its independent validation.
std::vector<PairRow> bernstein_rows(const std::vector<double>& d, double p, Index dim, std::uint64_t seed) {
  const OperatorSpec op = bernstein_pair_diagonal(d, p, dim);
  const double tol = 1e-10 * std::max(1.0, d.front());
  std::vector<PairRow> rows;
  if (p == 2.0) {
    const ApproxNumberReport rep = approximation_numbers(op, seed);
    for (std::size_t i = 0; i < rep.values.size(); ++i)
      rows.push_back({i + 1, d[i], rep.values[i], std::string(to_string(rep.method)), rep.values[i], rep.values[i],
                      std::abs(rep.values[i] - d[i]) <= tol});
    return rows;
  }
  const ApproxNumberReport claim = approximation_numbers(op, seed);
  for (std::size_t i = 0; i < claim.values.size(); ++i) {
    PairRow row{i + 1, d[i], claim.values[i], std::string(to_string(claim.method)), claim.values[i], claim.values[i],
                std::abs(claim.values[i] - d[i]) <= tol};
    if (dim <= kOracleMaxDim) {
      const OracleInterval iv = approximation_numbers_oracle(op, i + 1, 32, Rng::split(seed, i + 1));
      row.method = "ORACLE";
      row.lower = iv.lower;
      row.upper = iv.upper;
      row.match = row.match && d[i] >= iv.lower - tol && d[i] <= iv.upper + tol;
    }
    rows.push_back(row);
  }
  return rows;
}

Report cmd_bp(const Context& ctx) {
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const double p = ctx.p();
  const Index dim = ctx.pick("--dim", static_cast<Index>(ctx.opt.dim), ctx.pb.run.dim, static_cast<Index>(d.size()));
  const auto rows = bernstein_rows(d.values(), p, dim, Rng::split(ctx.seed, 12));
  Report r;
  r.table.header = {"n", "d", "a", "method", "lower", "upper", "match"};
  bool all = true;
  for (const PairRow& row : rows) {
    r.table.rows.push_back({row.n, row.d, row.a, row.method, row.lower, row.upper, row.match});
    all = all && row.match;
  }
  r.summary["p"] = json_number(p);
  r.summary["dim"] = dim;
  r.summary["match"] = all;
  r.verdict = all ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_koenig(const Context& ctx) {
  const OperatorSpec& op = ctx.need(ctx.pb.op, "operator");
  const std::size_t n = ctx.pick("--n", ctx.opt.n, ctx.pb.run.n, std::size_t{1});
  const int m_max = ctx.pick("--m-max", ctx.opt.m_max, ctx.pb.run.m_max, 64);
  const double tol = ctx.pick("--tol", ctx.opt.tol, ctx.pb.run.tol, 1e-2);
  const KoenigReport rep = koenig_limit_check(op, n, m_max);
  Report r;
  r.table.header = {"m", "g", "gap"};
  for (std::size_t m = 1; m <= rep.g.size(); ++m)
    r.table.rows.push_back({m, rep.g[m - 1], std::abs(rep.g[m - 1] - rep.lambda_abs)});
  r.summary["n"] = n;
  r.summary["lambda_abs"] = json_number(rep.lambda_abs);
  r.summary["gap"] = json_number(rep.gap);
  r.summary["tol"] = json_number(tol);
  r.verdict = rep.gap <= tol ? Verdict::kPass : Verdict::kFail;
  return r;
}

Table marcus_table(const MarcusReport& rep) {
  Table t;
  t.header = {"n", "width", "a", "two_sqrt2_lambda", "sixteen_width", "pass"};
  for (const MarcusLevel& lv : rep.levels)
    t.rows.push_back({lv.n, lv.width, lv.a, lv.lambda_term, lv.width_term, lv.pass});
  return t;
}

Report cmd_marcus(const Context& ctx) {
  const OperatorSpec& op = ctx.need(ctx.pb.op, "operator");
  const double tol = ctx.pick("--tol", ctx.opt.tol, ctx.pb.run.tol, 1e-9);
  const MarcusReport rep = marcus_chain_check(op, tol);
  Report r;
  r.table = marcus_table(rep);
  r.summary["C"] = json_number(rep.C);
  r.summary["pass"] = rep.pass;
  r.summary["literal_index_pass"] = rep.literal_pass;
  r.verdict = rep.pass ? Verdict::kPass : Verdict::kFail;
  return r;
}

Report cmd_tobound(const Context& ctx) {
  const OperatorSpec& op = ctx.need(ctx.pb.op, "operator");
  const TargetSequence& d = ctx.need(ctx.pb.sequence, "sequence");
  const ToReport rep = to_bound_check(op, d, Rng::split(ctx.seed, 13));
  Report r;
  r.table.header = {"m", "a", "lower", "upper", "pass"};
  for (const ToLevel& lv : rep.levels) r.table.rows.push_back({lv.m, lv.a, lv.lower, lv.upper, lv.pass});
  r.summary["norm"] = json_number(rep.norm);
  r.summary["norm_pass"] = rep.norm_pass;
  r.summary["pass"] = rep.pass;
  r.verdict = rep.pass ? Verdict::kPass : Verdict::kFail;
  return r;
}

// ---------------------------------------------------------------- demo

struct DemoItem {
  std::string name;
  Report report;
};

DemoItem demo_condition() {
  DemoItem item{"condition", {}};
  Table& t = item.report.table;
  t.header = {"sequence", "n", "d", "tail_sum", "margin", "strict", "weak"};
  bool ok = true;
  const auto run = [&](const std::string& label, double base, bool want_strict) {
    const TargetSequence d = TargetSequence::geometric(1.0 / base, 1.0 / base, 20);
    const ConditionReport s = check_condition_strict(d);
    const ConditionReport w = check_condition_weak(d);
    for (std::size_t n = 1; n <= d.size(); ++n)
      t.rows.push_back({label, n, d(n), s.tail_sums[n - 1], s.margins[n - 1], static_cast<bool>(s.level_pass[n - 1]),
                        static_cast<bool>(w.level_pass[n - 1])});
    ok = ok && s.pass == want_strict && w.pass;
    if (!want_strict)
      for (std::size_t n = 1; n <= d.size(); ++n) ok = ok && std::abs(s.margins[n - 1]) <= 1e-12 * d(n);
  };
  run("2^-n", 2.0, false);
  run("2.5^-n", 2.5, true);
  item.report.verdict = ok ? Verdict::kPass : Verdict::kFail;
  return item;
}

DemoItem demo_konyagin(std::uint64_t seed) {
  DemoItem item{"konyagin", {}};
  Table& t = item.report.table;
  t.header = {"c", "n", "ratio", "lower", "upper", "pass"};
  std::vector<Index> ranks;
  std::vector<double> values;
  for (Index n = 1; n <= 12; ++n) {
    ranks.push_back(n);
    values.push_back(1.0 / static_cast<double>(n + 1));
  }
  const SubspaceChain chain = random_chain(16, ranks, Rng::split(seed, 1));
  const TargetSequence d(values);
  bool ok = true;
  for (double c : {0.25, 0.5, 1.0}) {
    KonyaginConfig kc;
    kc.c = c;
    kc.seed = Rng::split(seed, 2);
    const KonyaginResult k = synthesize_konyagin(chain, d, kc, NormSpec::lp(2.0));
    for (const BoundLevel& lv : k.report.levels) t.rows.push_back({c, lv.n, lv.ratio, c, 4.0 * c, lv.pass});
    ok = ok && k.report.pass && k.narrow_interval_pass.value_or(true) && k.dichotomy;
  }
  item.report.verdict = ok ? Verdict::kPass : Verdict::kFail;
  return item;
}

DemoItem demo_bernstein(std::uint64_t seed) {
  DemoItem item{"bernstein", {}};
  Table& t = item.report.table;
  t.header = {"p", "n", "d", "a", "method", "lower", "upper", "match"};
  bool ok = true;
  const auto run = [&](double p, std::vector<double> d, std::uint64_t stream) {
    for (const PairRow& row : bernstein_rows(d, p, static_cast<Index>(d.size()), Rng::split(seed, stream))) {
      t.rows.push_back({p, row.n, row.d, row.a, row.method, row.lower, row.upper, row.match});
      ok = ok && row.match && row.upper - row.lower <= 0.05 * d.front();
    }
  };
  run(2.0, {1.0, 0.5, 0.25, 0.125}, 1);
  run(kInf, {1.0, 0.5, 0.25}, 2);
  run(1.0, {1.0, 0.5}, 3);
  item.report.verdict = ok ? Verdict::kPass : Verdict::kFail;
  return item;
}

DemoItem demo_marcus(const std::string& matrix_path) {
  DemoItem item{"marcus", {}};
  item.report.table.header = {"n", "width", "a", "two_sqrt2_lambda", "sixteen_width", "pass"};
  try {
    OperatorSpec op;
    op.matrix = matrix_path.empty() ? Matrix(Vector::LinSpaced(3, 3.0, 1.0).asDiagonal()) : load_matrix(matrix_path);
    op.h_constant = 1.0;
    op.validate();
    const MarcusReport rep = marcus_chain_check(op);
    item.report.table = marcus_table(rep);
    item.report.verdict = rep.pass ? Verdict::kPass : Verdict::kFail;
  } catch (const Error& e) {
    item.report.summary["error"] = e.what();
    item.report.verdict = Verdict::kFail;
  }
  return item;
}

DemoItem demo_fnorm(std::uint64_t seed) {
  DemoItem item{"fnorm", {}};
  Table& t = item.report.table;
  t.header = {"family", "n", "deviation", "expected", "method", "residual", "pass"};
  bool ok = true;
  {
    std::vector<Index> ranks;
    for (Index n = 1; n <= 11; ++n) ranks.push_back(n);
    const SubspaceChain chain = coordinate_chain(12, ranks);
    const NormSpec f = NormSpec::fnorm_product_dyadic(12);
    for (std::size_t n = 1; n <= 10; ++n) {
      const DeviationEntry e = deviation(chain, f, n);
      const double want = std::ldexp(1.0, -static_cast<int>(n + 1));
      const bool pass = std::abs(e.value - want) <= 1e-9;
      t.rows.push_back({std::string("product"), n, e.value, want, std::string(to_string(e.method)), e.residual, pass});
      ok = ok && pass;
    }
  }
  {
    const SubspaceChain chain = random_chain(8, std::vector<Index>{1, 2, 3, 4, 5, 6}, Rng::split(seed, 1));
    const NormSpec f = NormSpec::fnorm_of_norm(NormSpec::lp(2.0));
    RayConfig ray;
    ray.seed = Rng::split(seed, 2);
    for (std::size_t n = 1; n <= chain.size(); ++n) {
      const DeviationEntry e = deviation(chain, f, n, ray);
      const bool pass = e.value >= 1.0 - 1e-3;
      t.rows.push_back({std::string("of_norm"), n, e.value, 1.0, std::string(to_string(e.method)), e.residual, pass});
      ok = ok && pass;
    }
  }
  item.report.verdict = ok ? Verdict::kPass : Verdict::kFail;
  return item;
}

// ---------------------------------------------------------------- plumbing

std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int error_exit(ErrorCode code) {
  switch (code) {
    case ErrorCode::kHypothesisViolation:
    case ErrorCode::kInsufficientDimension:
    case ErrorCode::kNonMergeable: return kExitFail;
    default: return kExitUsage;
  }
}

void write_to(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream f(target, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  f << text;
}

ojson envelope(const std::string& sub, std::uint64_t seed, const std::string& dig, Verdict v) {
  ojson j = ojson::object();
  j["subcommand"] = sub;
  j["seed"] = seed;
  j["input_digest"] = dig;
  j["verdict"] = std::string(to_string(v));
  return j;
}

using Handler = std::function<Report(const Context&)>;

const std::vector<std::pair<std::string, std::pair<std::string, Handler>>>& commands() {
  static const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> table = {
      {"check", {"summability conditions d_n >(=) sum_{k>n} d_k", cmd_check}},
      {"synth", {"element with prescribed distances to a chain", cmd_synth}},
      {"konyagin", {"two-sided bounds c d_n <= rho <= 4c d_n", cmd_konyagin}},
      {"verify", {"re-check the two-sided bounds for a given x", cmd_verify}},
      {"ratios", {"ratio curve rho(x, Y_n) / d_n", cmd_ratios}},
      {"dev", {"F-norm deviations of a chain", cmd_dev}},
      {"alcheck", {"summability condition for Frechet lethargy", cmd_alcheck}},
      {"fverify", {"e_n / 3 <= rho_F(x, V_n) <= 3 e_n", cmd_fverify}},
      {"corollary", {"square-root transforms of e", cmd_corollary}},
      {"appnum", {"approximation numbers", cmd_appnum}},
      {"widths", {"Kolmogorov widths of the image of the unit ball", cmd_widths}},
      {"bp", {"diagonal Bernstein pair construction", cmd_bp}},
      {"koenig", {"a_n(T^m)^(1/m) against |lambda_n|", cmd_koenig}},
      {"marcus", {"width / approximation / eigenvalue chain", cmd_marcus}},
      {"tobound", {"norm and approximation-number bounds for a sequence", cmd_tobound}},
  };
  return table;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Output path (directory for demo)");
  sub->add_option("--seed", o.seed, "Seed (overrides the file and LETHARGY_SEED)");
  sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--json", o.json, "Shorthand for --format json");
}

void add_problem_options(CLI::App* sub, Options& o) {
  sub->add_option("--file", o.file, "Problem file (JSON)")->required();
  sub->add_option("--c", o.c, "Scale c in (0, 1]");
  sub->add_option("--tol", o.tol, "Tolerance");
  sub->add_option("--K", o.K, "Dyadic ladder constant");
  sub->add_option("--restarts", o.restarts, "Solver restarts");
  sub->add_option("--t-max", o.t_max, "Largest ray parameter");
  sub->add_option("--p", o.p_text, "Exponent p (number or inf)");
  sub->add_option("--n", o.n, "Index n");
  sub->add_option("--n0", o.n0, "First certified level");
  sub->add_option("--N", o.N, "Truncation level");
  sub->add_option("--m-max", o.m_max, "Largest power");
  sub->add_option("--dim", o.dim, "Dimension");
  sub->add_flag("--banach", o.banach, "Treat deviations as +inf");
  sub->add_flag("--strict", o.strict, "Verdict from the strict condition");
}

std::uint64_t resolve_seed(const Context& ctx) {
  if (ctx.given("--seed")) return ctx.opt.seed;
  if (ctx.pb.seed) return *ctx.pb.seed;
  if (const char* env = std::getenv("LETHARGY_SEED"); env && *env) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(env, &pos);
      if (pos == std::strlen(env)) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::kInvalidArgument, "LETHARGY_SEED must be a nonnegative integer");
  }
  return 0;
}

int run_demo(Context& ctx, std::ostream& out, std::ostream& err) {
  std::string input;
  if (!ctx.opt.marcus_matrix.empty()) {
    try {
      input = read_text(ctx.opt.marcus_matrix);
    } catch (const Error&) {
    }
  }
  ctx.seed = resolve_seed(ctx);
  std::vector<DemoItem> items;
  items.push_back(demo_condition());
  items.push_back(demo_konyagin(Rng::split(ctx.seed, 1)));
  items.push_back(demo_bernstein(Rng::split(ctx.seed, 2)));
  items.push_back(demo_marcus(ctx.opt.marcus_matrix));
  items.push_back(demo_fnorm(Rng::split(ctx.seed, 3)));

  Verdict v = Verdict::kPass;
  ojson failed = ojson::array();
  for (const DemoItem& it : items) {
    v = worst(v, it.report.verdict);
    if (it.report.verdict != Verdict::kPass) failed.push_back(it.name);
  }
  const std::string dig = digest(input);
  const bool json = ctx.opt.json || ctx.opt.format == "json";
  if (json) {
    ojson j = envelope("demo", ctx.seed, dig, v);
    ojson arr = ojson::array();
    for (const DemoItem& it : items) {
      ojson e = ojson::object();
      e["item"] = it.name;
      e["verdict"] = std::string(to_string(it.report.verdict));
      e["rows"] = it.report.table.json_rows();
      e["summary"] = it.report.summary;
      arr.push_back(std::move(e));
    }
    j["rows"] = arr;
    j["summary"] = ojson{{"failed", failed}};
    const std::string text = j.dump(2) + "\n";
    write_to(ctx.opt.out.empty() ? "" : (std::filesystem::path(ctx.opt.out) / "demo.json").string(), text, out);
  } else if (!ctx.opt.out.empty()) {
    for (const DemoItem& it : items) {
      std::ostringstream ss;
      it.report.table.write_csv(ss);
      write_to((std::filesystem::path(ctx.opt.out) / (it.name + ".csv")).string(), ss.str(), out);
    }
  } else {
    for (std::size_t i = 0; i < items.size(); ++i) {
      out << (i ? "\n" : "") << "# " << items[i].name << ": " << to_string(items[i].report.verdict) << '\n';
      items[i].report.table.write_csv(out);
    }
  }
  for (const DemoItem& it : items)
    if (it.report.verdict != Verdict::kPass) {
      err << "demo: item '" << it.name << "' failed";
      if (it.report.summary.contains("error")) err << " (" << it.report.summary["error"].get<std::string>() << ")";
      err << '\n';
    }
  return exit_code(v);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Finite-scale lethargy laboratory", "lethargy"};
  app.require_subcommand(1, 1);
  Options opt;
  for (const auto& [name, entry] : commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    add_common(sub, opt);
    add_problem_options(sub, opt);
  }
  CLI::App* demo = app.add_subcommand("demo", "run the curated bundle of reference checks");
  add_common(demo, opt);
  demo->add_option("--marcus-matrix", opt.marcus_matrix, "Matrix file for the Marcus item");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Context ctx;
  ctx.sub = app.get_subcommands().front();
  ctx.name = ctx.sub->get_name();
  ctx.opt = opt;
  int code = kExitPass;
  std::string verdict_text;
  try {
    if (ctx.name == "demo") {
      code = run_demo(ctx, out, err);
    } else {
      const std::string text = read_text(opt.file);
      ctx.pb = parse_problem(text, std::filesystem::path(opt.file).parent_path());
      check_dimensions(ctx);
      ctx.seed = resolve_seed(ctx);
      Handler handler;
      for (const auto& [name, entry] : commands())
        if (name == ctx.name) handler = entry.second;
      const Report rep = handler(ctx);
      const bool json = opt.json || opt.format == "json";
      std::ostringstream ss;
      if (json) {
        ojson j = envelope(ctx.name, ctx.seed, digest(text), rep.verdict);
        j["rows"] = rep.table.json_rows();
        j["summary"] = rep.summary;
        ss << j.dump(2) << '\n';
      } else {
        rep.table.write_csv(ss);
        err << "summary: " << rep.summary.dump() << '\n';
      }
      write_to(opt.out, ss.str(), out);
      code = exit_code(rep.verdict);
      err << "verdict: " << to_string(rep.verdict) << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = error_exit(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = kExitUsage;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "wall_time_s: %.3f", wall);
  err << buf << '\n';
  return code;
}

}  // namespace lethargy
