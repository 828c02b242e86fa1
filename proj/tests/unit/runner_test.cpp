#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chaosint/report.hpp"
#include "chaosint/runner.hpp"

using namespace chaosint;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("chaosint_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

int run(const std::string& cmd, const std::string& cfg) {
  std::ostringstream log, err;
  const int rc = run_command(cmd, cfg, log, err);
  if (rc == kExitConfigError) INFO(err.str());
  return rc;
}

}  // namespace

TEST_CASE("exit codes") {
  SUBCASE("pass") {
    const std::string dir = tmp_dir("pass");
    CHECK(run("ibp", R"({"pairs":3,"level":2,"out_dir":")" + dir + R"("})") == kExitPass);
    CHECK(fs::exists(dir + "/ibp.csv"));
    CHECK(fs::exists(dir + "/ibp_summary.json"));
  }
  SUBCASE("config errors") {
    const std::string dir = tmp_dir("cfg");
    CHECK(run("qv", R"({"t":0.37,"out_dir":")" + dir + R"("})") == kExitConfigError);
    CHECK(run("ibp", "not json at all") == kExitConfigError);
    CHECK(run("ibp", R"({"families":["cauchy"]})") == kExitConfigError);
    CHECK(run("nonsense", "{}") == kExitConfigError);
    CHECK(run("ibp", R"({"level":"three"})") == kExitConfigError);
  }
}

TEST_CASE("csv schema of the quadratic variation report") {
  const std::string dir = tmp_dir("qvschema");
  const std::string cfg = R"({"level":5,"levels":"2:3","replicates":500,"models":["gaussian"],)"
                          R"("out_dir":")" + dir + R"("})";
  CHECK(run("qv", cfg) == kExitPass);
  std::ifstream in(dir + "/qv_gaussian.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "level,mesh,residual_mean,residual_ci,residual_nocorr_mean,replicates,seed");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("selftest reports are byte-identical across runs and workers") {
  const std::string d1 = tmp_dir("st1");
  const std::string d2 = tmp_dir("st2");
  const std::string d3 = tmp_dir("st3");
  const std::string base =
      R"!({"seed":3,"replicates":4000,"out_dir":"DIR","threads":TH})!";
  auto cfg = [&](const std::string& dir, int threads) {
    std::string s = base;
    s.replace(s.find("DIR"), 3, dir);
    s.replace(s.find("TH"), 2, std::to_string(threads));
    return s;
  };
  CHECK(run("selftest", cfg(d1, 1)) == kExitPass);
  CHECK(run("selftest", cfg(d2, 1)) == kExitPass);
  CHECK(run("selftest", cfg(d3, 8)) == kExitPass);
  CHECK(read_text(d1 + "/selftest.csv") == read_text(d2 + "/selftest.csv"));
  CHECK(read_text(d1 + "/selftest.csv") == read_text(d3 + "/selftest.csv"));
}

TEST_CASE("summary embeds version and config digest") {
  const std::string dir = tmp_dir("digest");
  CHECK(run("ibp", R"({"pairs":2,"level":1,"out_dir":")" + dir + R"("})") == kExitPass);
  const std::string s = read_text(dir + "/ibp_summary.json");
  CHECK(s.find("\"config_digest\"") != std::string::npos);
  CHECK(s.find("\"version\"") != std::string::npos);
  CHECK(s.find("\"tool\": \"chaosint\"") != std::string::npos);
}

TEST_CASE("config merge lets flags win") {
  const auto p = fs::temp_directory_path() / "chaosint_runner_merge.json";
  {
    std::ofstream out(p);
    out << R"({"pairs": 50, "level": 3})";
  }
  const std::string merged = merge_config(p.string(), R"({"pairs": 4})");
  CHECK(merged.find("\"pairs\":4") != std::string::npos);
  CHECK(merged.find("\"level\":3") != std::string::npos);
  fs::remove(p);
}

TEST_CASE("format_double round trips") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
}
