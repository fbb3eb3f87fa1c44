#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lethargy/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lethargy");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = lethargy::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& name) { return (fs::path(LETHARGY_TEST_DATA) / name).string(); }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lethargy_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> golden_headers() {
  std::map<std::string, std::string> g;
  std::ifstream f(data("golden_headers.txt"));
  std::string line;
  while (std::getline(f, line))
    if (const auto bar = line.find('|'); bar != std::string::npos) g[line.substr(0, bar)] = line.substr(bar + 1);
  return g;
}

}  // namespace

TEST_CASE("every subcommand emits its golden CSV header") {
  const auto golden = golden_headers();
  REQUIRE(golden.size() == 20);
  for (const auto& [key, header] : golden) {
    if (key.rfind("demo/", 0) == 0) continue;
    CAPTURE(key);
    const std::string fixture = key == "check" ? "check_dyadic" : key;
    const Run r = run({key, "--file", data(fixture + ".json")});
    CHECK(first_line(r.out) == header);
  }
  const fs::path dir = scratch_dir("headers");
  REQUIRE(run({"demo", "--out", dir.string()}).code == lethargy::kExitPass);
  for (const auto& [key, header] : golden) {
    if (key.rfind("demo/", 0) != 0) continue;
    CAPTURE(key);
    CHECK(first_line(slurp(dir / (key.substr(5) + ".csv"))) == header);
  }
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit 64") {
  CHECK(run({}).code == lethargy::kExitUsage);
  CHECK(run({"frobnicate"}).code == lethargy::kExitUsage);
  CHECK(run({"check"}).code == lethargy::kExitUsage);
  CHECK(run({"check", "--file", data("check_dyadic.json"), "--format", "xml"}).code == lethargy::kExitUsage);
  CHECK(run({"check", "--file", data("missing.json")}).code == lethargy::kExitUsage);

  const Run bad = run({"check", "--file", data("malformed.json")});
  CHECK(bad.code == lethargy::kExitUsage);
  CHECK(bad.err.find("line 3") != std::string::npos);

  const Run missing = run({"check", "--file", data("appnum.json")});
  CHECK(missing.code == lethargy::kExitUsage);
  CHECK(missing.err.find("sequence") != std::string::npos);

  CHECK(run({"--help"}).code == lethargy::kExitPass);
}

TEST_CASE("verdicts and exit codes") {
  SUBCASE("2^-n: strict fails, weak passes, exit 0") {
    const Run r = run({"check", "--file", data("check_dyadic.json")});
    CHECK(r.code == lethargy::kExitPass);
    for (const auto& row : csv_rows(r.out)) {
      CHECK(row[4] == "false");
      CHECK(row[5] == "true");
    }
    CHECK(run({"check", "--file", data("check_dyadic.json"), "--strict"}).code == lethargy::kExitFail);
    CHECK(run({"check", "--file", data("check_harmonic.json")}).code == lethargy::kExitFail);
  }
  SUBCASE("Konyagin curve at c = 1/4 stays in [1/4, 1]") {
    const Run r = run({"konyagin", "--file", data("konyagin.json"), "--c", "0.25"});
    CHECK(r.code == lethargy::kExitPass);
    const auto rows = csv_rows(r.out);
    CHECK(rows.size() == 12);
    for (const auto& row : rows) {
      const double ratio = std::stod(row[1]);
      CHECK(ratio >= 0.25 - 1e-6);
      CHECK(ratio <= 1.0 + 1e-6);
      CHECK(row[2] == "0.25");
      CHECK(row[3] == "1");
    }
  }
  SUBCASE("other subcommands") {
    for (const char* sub : {"synth", "verify", "ratios", "dev", "alcheck", "fverify", "corollary", "appnum", "widths",
                            "bp", "marcus", "tobound"}) {
      CAPTURE(sub);
      CHECK(run({sub, "--file", data(std::string(sub) + ".json")}).code == lethargy::kExitPass);
    }
    CHECK(run({"appnum", "--file", data("appnum_inf.json")}).code == lethargy::kExitPass);
    CHECK(run({"alcheck", "--file", data("alcheck_divergent.json")}).code == lethargy::kExitFail);
    CHECK(run({"verify", "--file", data("verify.json"), "--c", "2"}).code == lethargy::kExitFail);
    // [[2,1],[0,1]] reaches the 1e-2 gap only after m = 64.
    CHECK(run({"koenig", "--file", data("koenig.json")}).code == lethargy::kExitFail);
    CHECK(run({"koenig", "--file", data("koenig.json"), "--m-max", "80"}).code == lethargy::kExitPass);
  }
}

TEST_CASE("reports are deterministic") {
  for (const char* fmt : {"csv", "json"}) {
    const Run a = run({"konyagin", "--file", data("konyagin.json"), "--format", fmt});
    const Run b = run({"konyagin", "--file", data("konyagin.json"), "--format", fmt});
    CHECK(a.code == lethargy::kExitPass);
    CHECK(a.out == b.out);
  }
  const Run d1 = run({"demo", "--json"});
  const Run d2 = run({"demo", "--json"});
  CHECK(d1.out == d2.out);
}

TEST_CASE("JSON envelope and seed precedence") {
  const Run r = run({"konyagin", "--file", data("konyagin.json"), "--json"});
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["subcommand"] == "konyagin");
  CHECK(j["seed"] == 3);
  CHECK(j["verdict"] == "PASS");
  CHECK(j["input_digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(j["rows"].size() == 12);
  CHECK(j["summary"].contains("dichotomy"));

  CHECK(nlohmann::json::parse(run({"konyagin", "--file", data("konyagin.json"), "--json", "--seed", "8"}).out)["seed"] ==
        8);
  setenv("LETHARGY_SEED", "41", 1);
  CHECK(nlohmann::json::parse(run({"ratios", "--file", data("ratios.json"), "--json"}).out)["seed"] == 41);
  CHECK(nlohmann::json::parse(run({"konyagin", "--file", data("konyagin.json"), "--json"}).out)["seed"] == 3);
  setenv("LETHARGY_SEED", "not-a-number", 1);
  CHECK(run({"ratios", "--file", data("ratios.json")}).code == lethargy::kExitUsage);
  unsetenv("LETHARGY_SEED");
  CHECK(nlohmann::json::parse(run({"ratios", "--file", data("ratios.json"), "--json"}).out)["seed"] == 0);
}

TEST_CASE("--out writes the report to a file") {
  const fs::path dir = scratch_dir("out");
  const fs::path target = dir / "nested" / "check.csv";
  const Run r = run({"check", "--file", data("check_dyadic.json"), "--out", target.string()});
  CHECK(r.code == lethargy::kExitPass);
  CHECK(r.out.empty());
  CHECK(first_line(slurp(target)) == "n,d,tail_sum,margin,strict,weak");
  fs::remove_all(dir);
}

TEST_CASE("demo bundle") {
  const Run plain = run({"demo"});
  CHECK(plain.code == lethargy::kExitPass);
  for (const char* item : {"condition", "konyagin", "bernstein", "marcus", "fnorm"})
    CHECK(plain.out.find(std::string("# ") + item + ": PASS") != std::string::npos);

  const auto j = nlohmann::json::parse(run({"demo", "--json"}).out);
  CHECK(j["subcommand"] == "demo");
  CHECK(j["verdict"] == "PASS");
  CHECK(j["rows"].size() == 5);

  const Run asym = run({"demo", "--marcus-matrix", data("asymmetric.csv")});
  CHECK(asym.code == lethargy::kExitFail);
  CHECK(asym.err.find("'marcus'") != std::string::npos);

  const Run garbage = run({"demo", "--marcus-matrix", data("malformed.json")});
  CHECK(garbage.code == lethargy::kExitFail);
  CHECK(garbage.err.find("'marcus'") != std::string::npos);

  CHECK(run({"demo", "--marcus-matrix", data("tobound_matrix.csv")}).code == lethargy::kExitPass);
}
