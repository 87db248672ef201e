#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "contact_decay/cli.hpp"

using namespace contact_decay;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto cfg = cli::parse_config_text("# comment\n\nlambda = 0.2\nt_grid=0:6:0.5  # trailing\nd=3\n");
  CHECK(cfg.size() == 3);
  CHECK(cfg.at("lambda") == "0.2");
  CHECK(cfg.at("t-grid") == "0:6:0.5");
  CHECK(cfg.at("d") == "3");
  CHECK_THROWS_AS(cli::parse_config_text("lambda 0.2\n"), std::runtime_error);
  CHECK_THROWS_AS(cli::parse_config_text("=3\n"), std::runtime_error);
}

TEST_CASE("config entries are spliced before explicit flags") {
  const std::string path = "cli_test_config.txt";
  {
    std::ofstream f(path);
    f << "lambda=0.1\nd=2\n";
  }
  const auto args = cli::expand_config({"bounds", "--config", path, "--lambda", "0.2"});
  CHECK(args == std::vector<std::string>{"bounds", "--d=2", "--lambda=0.1", "--lambda", "0.2"});

  const auto file_only = run({"bounds", "--config", path});
  const auto flag_wins = run({"bounds", "--config", path, "--d", "1", "--lambda", "0.2"});
  std::remove(path.c_str());
  REQUIRE(file_only.code == 0);
  REQUIRE(flag_wins.code == 0);
  CHECK(json::parse(file_only.out)["d"] == 2);
  CHECK(json::parse(file_only.out)["lambda"] == 0.1);
  CHECK(json::parse(flag_wins.out)["d"] == 1);
  CHECK(json::parse(flag_wins.out)["lambda"] == 0.2);
  CHECK(run({"bounds", "--config", "/nonexistent/file"}).code == cli::kExitUsage);
}

TEST_CASE("doubles are printed with 17 significant digits") {
  CHECK(cli::format_double(0.1) == "0.10000000000000001");
  CHECK(cli::format_double(-1.0) == "-1");
  CHECK(std::stod(cli::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("bounds output") {
  const auto r = run({"bounds", "--d", "1", "--lambda", "0.2"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  for (const char* key : {"lambda", "d", "model", "lower", "upper", "p_star", "mu", "r_e1", "r_error"})
    CHECK(j.contains(key));
  CHECK(j["lower"].get<double>() == doctest::Approx(-0.743).epsilon(1e-3));
  CHECK(j["upper"].get<double>() == doctest::Approx(-0.6));
  CHECK(j["config"].contains("version"));

  const auto zero = json::parse(run({"bounds", "--d", "2", "--lambda", "0"}).out);
  CHECK(zero["lower"] == -1.0);
  CHECK(zero["upper"] == -1.0);

  const auto super = run({"bounds", "--d", "2", "--lambda", "0.4"});
  CHECK(super.code == 0);
  const auto sj = json::parse(super.out);
  CHECK(sj["lower"].is_null());
  CHECK_FALSE(sj["warning"].get<std::string>().empty());
}

TEST_CASE("survive csv schema and reproducibility") {
  const std::vector<std::string> args{"survive", "--model", "classic", "--d", "2", "--lambda", "0.05",
                                      "--reps", "20000", "--t-grid", "0:4:0.5", "--seed", "7"};
  auto one = args;
  one.insert(one.end(), {"--threads", "1"});
  auto four = args;
  four.insert(four.end(), {"--threads", "4"});
  const auto a = run(one), b = run(four);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const auto la = data_lines(a.out), lb = data_lines(b.out);
  CHECK(la == lb);
  REQUIRE(la.size() == 10);
  CHECK(la[0] == "t,n,k,p_hat,ci_lo,ci_hi");
  CHECK(la[1].rfind("0,20000,20000,1,", 0) == 0);
  double prev = 2.0;
  for (std::size_t i = 1; i < la.size(); ++i) {
    std::istringstream row(la[i]);
    std::string cell;
    for (int c = 0; c < 4; ++c) std::getline(row, cell, ',');
    const double p = std::stod(cell);
    CHECK(p <= prev);
    prev = p;
  }
  CHECK(a.out.find("# config: ") != std::string::npos);
}

TEST_CASE("survive json carries both estimators") {
  const auto r = run({"survive", "--d", "1", "--lambda", "0", "--reps", "100000", "--t-grid",
                      "0:6:0.5", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j["fekete"]["rate"].get<double>() + 1.0) < 0.05);
  CHECK(std::abs(j["regression"]["rate"].get<double>() + 1.0) < 0.05);
  CHECK(j["curve"].size() == 13);
}

TEST_CASE("theorem22 rows") {
  const auto r = run({"theorem22", "--lambda", "0.25", "--d-list", "1,2,3"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["rows"].size() == 3);
  double prev = 1.0;
  for (const auto& row : j["rows"]) {
    CHECK(row["upper"] == -0.5);
    CHECK(row["gap_lower"].get<double>() < prev);
    prev = row["gap_lower"].get<double>();
  }
}

TEST_CASE("exit codes") {
  CHECK(run({"survive", "--lambda", "0", "--reps", "0"}).code == cli::kExitUsage);
  CHECK(run({"bounds", "--lambda", "0.1", "--bogus", "3"}).code == cli::kExitUsage);
  CHECK(run({"theorem22", "--lambda", "0.25", "--d-list", ""}).code == cli::kExitUsage);
  CHECK(run({"theorem22", "--lambda", "0.7", "--d-list", "1"}).code == cli::kExitUsage);
  CHECK(run({"survive", "--lambda", "0.1", "--t-grid", "0:6"}).code == cli::kExitUsage);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitPass);
  CHECK(run({"bounds", "--d", "1", "--lambda", "0.2", "--tol", "1e-30"}).code == cli::kExitNumerical);
  CHECK(run({"verify", "--suite", "eigencheck", "--force-fail"}).code == cli::kExitViolation);
  CHECK(run({"verify", "--suite", "nosuch"}).code == cli::kExitUsage);
}

TEST_CASE("verify report") {
  const auto r = run({"verify", "--suite", "coupling,heat_kernel", "--d", "2", "--L", "8", "--t-max", "5"});
  CHECK(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["suites"].size() == 2);
  for (const auto& s : j["suites"]) CHECK(s["passed"] == true);
}
