#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrbms/config.hpp"
#include "lrbms/experiments.hpp"
#include "test_support.hpp"

using namespace lrbms;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("lrbms_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("config parsing") {
  Config cfg = Config::parse_string("a = 1\n# comment\nb = hello  # trailing\nflag = true\nx = 2.5\n");
  CHECK(cfg.get_int("a", 0) == 1);
  CHECK(cfg.get_string("b", "") == "hello");
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_double("x", 0.0) == 2.5);
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK_NOTHROW(cfg.require_all_consumed());
  CHECK(cfg.resolved().at("missing") == "7");
}

TEST_CASE("config rejects malformed input with line numbers") {
  CHECK_THROWS_WITH_AS(Config::parse_string("a = 1\nnonsense\n"), doctest::Contains("line 2"), config_error);
  CHECK_THROWS_WITH_AS(Config::parse_string("a = 1\na = 2\n"), doctest::Contains("duplicate"), config_error);
  Config bad = Config::parse_string("a = 1\nn = x\n");
  CHECK_THROWS_WITH_AS(bad.get_int("n", 0), doctest::Contains("line 2"), config_error);
  Config unknown = Config::parse_string("a = 1\nmystery = 2\n");
  unknown.get_int("a", 0);
  CHECK_THROWS_WITH_AS(unknown.require_all_consumed(), doctest::Contains("mystery"), config_error);
}

TEST_CASE("unknown experiment and unknown keys are configuration errors") {
  const std::string out = temp_dir("badexp");
  Config cfg = Config::parse_string("experiment = warp\n");
  CHECK_THROWS_AS(run_experiment(cfg, out), config_error);
  Config cfg2 = Config::parse_string("experiment = eigdecay\nbogus_key = 3\n");
  CHECK_THROWS_AS(run_experiment(cfg2, out), config_error);
}

TEST_CASE("fomcheck writes a second-order convergence table") {
  const std::string out = temp_dir("fomcheck");
  Config cfg = Config::parse_string("experiment = fomcheck\nkind = dg\nnx0 = 8\nrefinements = 3\n");
  run_experiment(cfg, out);
  const std::string csv = slurp(out + "/fomcheck.csv");
  CHECK(csv.rfind("kind,nx,ny,l2_error,rate", 0) == 0);
  // last refinement's observed rate is close to two
  std::istringstream lines(csv);
  std::string line, last;
  while (std::getline(lines, line))
    if (!line.empty()) last = line;
  const double rate = std::stod(last.substr(last.rfind(',') + 1));
  CHECK(rate > 1.8);
  CHECK(rate < 2.2);
  CHECK(slurp(out + "/manifest.txt").find("experiment = fomcheck") != std::string::npos);
}

TEST_CASE("eigdecay emits a strictly decreasing spectrum on a plain patch") {
  const std::string out = temp_dir("eigdecay");
  Config cfg = Config::parse_string(
      "experiment = eigdecay\nproblem = manufactured\nnx = 20\nny = 20\nmx = 5\nmy = 5\n"
      "target_i = 2\ntarget_j = 2\nn_eigs = 10\nmu = 0.5\n");
  run_experiment(cfg, out);
  std::istringstream lines(slurp(out + "/eigdecay.csv"));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "n,lambda");
  double prev = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const double lambda = std::stod(line.substr(line.find(',') + 1));
    CHECK(lambda < prev);
    prev = lambda;
    ++rows;
  }
  CHECK(rows == 10);
}

TEST_CASE("experiments are byte-deterministic for a fixed seed") {
  const std::string cfg_text =
      "experiment = randrange\nproblem = twoterm\nnx = 16\nny = 16\nmx = 4\nmy = 4\n"
      "target_i = 1\ntarget_j = 1\ntol_hi = 0.1\ntol_decades = 2\nruns = 3\nseed = 42\nmu = 0.4\n";
  const std::string out1 = temp_dir("det1"), out2 = temp_dir("det2");
  Config c1 = Config::parse_string(cfg_text);
  Config c2 = Config::parse_string(cfg_text);
  run_experiment(c1, out1);
  run_experiment(c2, out2);
  CHECK(slurp(out1 + "/randrange.csv") == slurp(out2 + "/randrange.csv"));
  CHECK(slurp(out1 + "/manifest.txt") == slurp(out2 + "/manifest.txt"));
  CHECK(slurp(out1 + "/randrange.csv").find("run,tol,n,true_err,estimator") == 0);
}

TEST_CASE("greedy experiment records its deviation trace") {
  const std::string out = temp_dir("greedy");
  Config cfg = Config::parse_string(
      "experiment = greedy\nproblem = twoterm\nnx = 16\nny = 16\nmx = 4\nmy = 4\n"
      "target_i = 1\ntarget_j = 1\nepsilon = 0.05\nxi_count = 3\nseed = 7\n");
  run_experiment(cfg, out);
  const std::string csv = slurp(out + "/greedy.csv");
  CHECK(csv.find("iteration,mu_star,E") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);
}

TEST_CASE("enrichment experiment on a small channel terminates") {
  const std::string out = temp_dir("enrich");
  Config cfg = Config::parse_string(
      "experiment = enrichment\nproblem = channel\nnx = 50\nny = 10\nmx = 5\nmy = 5\n"
      "kind = dg\nmarking = combined\nn_online = 2\nseed = 3\nsnapshots = true\ndelta_factor = 3\n");
  run_experiment(cfg, out);
  const std::string csv = slurp(out + "/enrichment.csv");
  CHECK(csv.find("step,mu,eta,marked,accepted,rejected,total_basis") == 0);
  const std::string sizes = slurp(out + "/subdomain_sizes.csv");
  CHECK(sizes.find("m,I,J,size") == 0);
  CHECK(std::count(sizes.begin(), sizes.end(), '\n') == 26);  // header + 25 subdomains
}
