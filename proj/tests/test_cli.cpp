#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "specdist/spectral.hpp"

using namespace specdist;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = SPECDIST_FIXTURES;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / ("specdist_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("sample parsing") {
  std::istringstream real("1, 2.5\n-3e-1,4\n\n0,1\n");
  const auto m = std::get<Eigen::MatrixXd>(cli::parse_samples(real));
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(0, 1) == -0.3);
  CHECK(m(1, 0) == 2.5);

  std::istringstream cx("1+2i,3\n-1e-2-4.5i,i\n-i,2.5e+1+1e-3i\n");
  const auto c = std::get<Eigen::MatrixXcd>(cli::parse_samples(cx));
  CHECK(c(0, 0) == cplx(1, 2));
  CHECK(c(0, 1) == cplx(-0.01, -4.5));
  CHECK(c(1, 1) == cplx(0, 1));
  CHECK(c(0, 2) == cplx(0, -1));
  CHECK(c(1, 2) == cplx(25, 1e-3));

  std::istringstream bad("1,2\n3,x\n");
  CHECK_THROWS_AS(cli::parse_samples(bad), cli::InputError);
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(cli::parse_samples(ragged), cli::InputError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125})
    CHECK(std::stod(cli::format_double(v)) == v);
}

TEST_CASE("estimate on identical files is zero") {
  const std::string x = kFixtures + "/p4_x1.csv";
  const Run r = run({"estimate", "--x1", x, "--x2", x, "--distance", "fisher", "--method", "plugin"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["result"]["value"].get<double>()) < 1e-20);
  CHECK(j["schema_version"] == 1);
  CHECK(j["manifest"]["command"] == "estimate");
}

TEST_CASE("domain errors exit with code 3") {
  const Run r = run({"estimate", "--x1", kFixtures + "/p4_small.csv", "--x2",
                     kFixtures + "/p4_x2.csv", "--no-timing"});
  CHECK(r.code == 3);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["error"] == "DomainError: n1 must exceed p");
  CHECK_FALSE(j.contains("result"));
}

TEST_CASE("input errors exit with code 2") {
  CHECK(run({"estimate", "--x1", "/nonexistent.csv", "--x2", "/nonexistent.csv"}).code == 2);
  CHECK(run({"estimate", "--x1", "a"}).code == 2);
  CHECK(run({"simulate", "--estimators", "nope"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const fs::path d = scratch("bad");
  std::ofstream(d / "bad.csv") << "1,2\nfoo,3\n";
  CHECK(run({"estimate", "--x1", (d / "bad.csv").string(), "--x2", (d / "bad.csv").string()})
            .code == 2);
}

TEST_CASE("all methods and distances run on the fixture") {
  for (std::string dist : {"fisher", "bhattacharyya", "kl", "renyi"})
    for (std::string method : {"rmt", "plugin", "contour"}) {
      const Run r = run({"estimate", "--x1", kFixtures + "/p4_x1.csv", "--x2",
                         kFixtures + "/p4_x2.csv", "--distance", dist, "--method", method,
                         "--alpha", "0.4"});
      INFO(dist, " ", method, " ", r.err);
      CHECK(r.code == 0);
    }
}

TEST_CASE("simulate is byte-for-byte reproducible") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  for (const fs::path &d : {a, b}) {
    const Run r = run({"simulate", "--p-list", "2,4", "--n1", "16", "--n2", "24", "--trials",
                       "1", "--seed", "7", "--estimators", "plugin,rmt,rmt-exact",
                       "--out-dir", d.string(), "--no-timing"});
    CHECK(r.code == 0);
  }
  const std::string csv = slurp(a / "results.csv");
  CHECK(csv == slurp(b / "results.csv"));
  CHECK(csv.rfind("p,n1,n2,method,mean,std,rel_error,population,trials,note\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 7);
  const auto man = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(man["manifest"]["config"]["seed"] == 7);
}

TEST_CASE("simulate records failing cells") {
  const fs::path d = scratch("sim_fail");
  const Run r = run({"simulate", "--p-list", "8", "--n1", "16", "--n2", "4", "--trials", "2",
                     "--estimators", "rmt", "--out-dir", d.string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(d / "results.csv");
  CHECK(csv.find("8,16,4,rmt,,,,") != std::string::npos);
}

TEST_CASE("fixed-ratio sweep") {
  const fs::path d = scratch("sim_ratio");
  const Run r = run({"simulate", "--p-list", "4,8", "--c1", "0.25", "--c2", "0.5", "--trials",
                     "2", "--out-dir", d.string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(d / "results.csv");
  CHECK(csv.find("\n8,32,16,plugin,") != std::string::npos);
}

TEST_CASE("verify") {
  const Run ok = run({"verify", "--suite", "dilog", "--json", "-"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  CHECK(ok.out.find("FAIL ") == std::string::npos);
  const auto pos = ok.out.find('{');
  REQUIRE(pos != std::string::npos);
  const auto j = nlohmann::json::parse(ok.out.substr(pos));
  CHECK(j["passed"] == true);
  CHECK(j["checks"].size() == 5);
  CHECK(run({"verify", "--suite", "spectral", "--models", "20", "--seed", "3"}).code == 0);
  CHECK(run({"verify", "--suite", "bogus"}).code == 2);
}

}
