#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "parserank/cli.hpp"
#include "parserank/params_io.hpp"
#include "parserank/synthlab.hpp"
#include "support.hpp"

using namespace parserank;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("parserank_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

Corpus sample_corpus() {
  Rng rng(61);
  const auto u = testsupport::random_universe(rng, 4, 12, 5);
  return generate_corpus(GroundTruth{testsupport::random_theta(rng, 4, -1, 1), u}, 60, 2);
}

}  // namespace

TEST_CASE("stats and diagnose tables") {
  TempDir dir;
  const std::string path = dir / "c.jsonl";
  save_corpus(path, testsupport::make_corpus(2, {{{{1, 0}, {1, 1}}, 0}, {{{2, 0}}, 0}, {{{1, 3}, {1, 0}, {1, 1}}, 1}}));

  auto r = invoke({"stats", path});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(r.out.find("Number of sentences") != std::string::npos);
  CHECK(r.out.find("Number of parses of ambiguous sentences") != std::string::npos);

  r = invoke({"stats", path, "--json"});
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["n_sentences"] == 3);
  CHECK(j["n_ambiguous"] == 2);
  CHECK(j["n_parses_of_ambiguous"] == 5);

  const std::string report = dir / "diag.json";
  r = invoke({"diagnose", path, "--json", "--report", report});
  REQUIRE(r.code == cli::kSuccess);
  const auto d = nlohmann::json::parse(r.out);
  CHECK(d["n_features"] == 2);
  CHECK(d["n_pseudo_constant"] == 1);
  CHECK(d["n_pseudo_minimal"] == 1);
  CHECK(d["features"][0]["feature"] == "f0");
  CHECK(d["features"][1]["exceeds_correct_in"].is_string());
  CHECK(d["features"][1]["below_correct_in"].is_null());
  CHECK(nlohmann::json::parse(slurp(report)) == d);

  r = invoke({"diagnose", path});
  CHECK(r.out.find("Number of pseudo-maximal features") != std::string::npos);

  const std::string drop = dir / "drop.txt";
  std::ofstream(drop) << "# comment\nf1\n";
  r = invoke({"diagnose", path, "--json", "--drop-features", drop});
  CHECK(nlohmann::json::parse(r.out)["n_features"] == 1);
}

TEST_CASE("train pl is reproducible and evaluate reads its output") {
  TempDir dir;
  const std::string path = dir / "c.jsonl";
  save_corpus(path, sample_corpus());
  const std::string p1 = dir / "p1.json", p2 = dir / "p2.json", t1 = dir / "t1.json";
  auto r = invoke({"train", path, "--estimator", "pl", "-o", p1, "--trace", t1});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(r.out.find("# sigma_multiplier = 7") != std::string::npos);
  CHECK(r.out.find("Training corpus") != std::string::npos);
  REQUIRE(invoke({"train", path, "--estimator", "pl", "-o", p2, "--jobs", "3"}).code == cli::kSuccess);
  CHECK(slurp(p1) == slurp(p2));

  const auto trace = nlohmann::json::parse(slurp(t1));
  CHECK(trace["estimator"] == "pl");
  CHECK(trace["iterations"].size() > 0);
  CHECK(trace["settings"].contains("cg_gradient_norm_tol"));

  r = invoke({"evaluate", path, "--params", p1, "--json"});
  REQUIRE(r.code == cli::kSuccess);
  const auto trained = nlohmann::json::parse(r.out);
  r = invoke({"evaluate", path, "--json"});
  const auto base = nlohmann::json::parse(r.out);
  CHECK(trained["neg_log_pl"].get<double>() < base["neg_log_pl"].get<double>());

  // Stdout output is the same parameter file.
  r = invoke({"train", path, "-o", "-"});
  CHECK(r.out == slurp(p1));
}

TEST_CASE("train correct with a seed is reproducible") {
  TempDir dir;
  const std::string path = dir / "c.jsonl";
  save_corpus(path, sample_corpus());
  const std::vector<std::string> base{"train", path, "--estimator", "correct", "--seed", "5",
                                      "--cooling", "0.6", "--moves", "40"};
  auto a = base, b = base;
  a.insert(a.end(), {"-o", dir / "a.json", "--trace", dir / "ta.json"});
  b.insert(b.end(), {"-o", dir / "b.json"});
  REQUIRE(invoke(a).code == cli::kSuccess);
  REQUIRE(invoke(b).code == cli::kSuccess);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  const auto trace = nlohmann::json::parse(slurp(dir / "ta.json"));
  CHECK(trace["settings"]["anneal_seed"] == 5);
  CHECK(trace["stages"].size() > 0);
}

TEST_CASE("crossval table and report") {
  TempDir dir;
  const std::string path = dir / "c.jsonl";
  save_corpus(path, sample_corpus());
  const std::string report = dir / "cv.json";
  auto r = invoke({"crossval", path, "--k", "5", "--estimators", "baseline,pl", "--report", report});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(r.out.find("C(test)") != std::string::npos);
  CHECK(r.out.find("-log PL(test)") != std::string::npos);
  CHECK(r.out.find("Baseline estimator") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc["rows"].size() == 2);
  CHECK(doc["rows"][0]["folds"].size() == 5);
  CHECK(doc["rows"][0]["n_test"] == 60);
}

TEST_CASE("synth writes a loadable corpus") {
  TempDir dir;
  Rng rng(62);
  const auto u = testsupport::random_universe(rng, 3, 4, 3);
  const std::string up = dir / "u.json", tp = dir / "theta.json", out = dir / "s.jsonl";
  {
    std::ofstream f(up);
    write_universe(f, u);
  }
  save_parameters(tp, u.catalog(), ParameterVector({0.5, -0.5, 1.0}), {});
  auto r = invoke({"synth", "--universe", up, "--theta", tp, "--n", "25", "--seed", "3", "-o", out});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(load_corpus(out).size() == 25);
  r = invoke({"synth", "--universe", up, "--theta", tp, "--n", "25", "--seed", "3", "--yields", "joint"});
  CHECK(r.code == cli::kSuccess);
  CHECK(invoke({"synth", "--universe", up, "--yields", "zipf"}).code == cli::kUsageError);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(invoke({}).code == cli::kUsageError);
  CHECK(invoke({"frobnicate"}).code == cli::kUsageError);
  CHECK(invoke({"stats", dir / "missing.jsonl"}).code == cli::kDataError);
  const std::string bad = dir / "bad.jsonl";
  std::ofstream(bad) << "{not json\n";
  const auto r = invoke({"stats", bad});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("error:") != std::string::npos);
  const std::string path = dir / "c.jsonl";
  save_corpus(path, sample_corpus());
  CHECK(invoke({"train", path, "--estimator", "baseline"}).code == cli::kUsageError);
  CHECK(invoke({"crossval", path, "--k", "1"}).code == cli::kUsageError);
  CHECK(invoke({"train", path, "--cooling", "1.5", "--estimator", "correct", "-o", dir / "x.json"}).code ==
        cli::kUsageError);
}

TEST_CASE("the installed binary maps errors to exit codes") {
  const char* exe = std::getenv("PARSERANK_CLI");
  if (exe == nullptr) return;
  TempDir dir;
  const std::string q = std::string("\"") + exe + "\"";
  auto status = [](int raw) { return WEXITSTATUS(raw); };
  CHECK(status(std::system((q + " --help > /dev/null").c_str())) == 0);
  CHECK(status(std::system((q + " stats " + (dir / "nope.jsonl") + " 2> /dev/null").c_str())) == 2);
  CHECK(status(std::system((q + " stats 2> /dev/null > /dev/null").c_str())) == 1);
}
