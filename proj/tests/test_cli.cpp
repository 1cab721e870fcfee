#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sgldv/cli/commands.hpp"
#include "sgldv/cli/config.hpp"
#include "sgldv/errors.hpp"
#include "sgldv/schedule.hpp"

using namespace sgldv;
using namespace sgldv::cli;
namespace fs = std::filesystem;

namespace {

const char* kGaussian = R"(# unit Gaussian
[target]
family = gaussian
n = 1
[sampler]
kind = sgld
eta = 0.01
K = 100
R = 10
r = 1
seed = 3
[experiment]
eps = 0.1
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const InvalidConfig& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sgldv_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the tool binary; returns its exit status.
int run_tool(const std::string& args) {
  const char* bin = std::getenv("SGLDV_BIN");
  REQUIRE(bin != nullptr);
  const int status = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("parsing: values, comments and sections") {
  const auto cfg = parse_config(kGaussian, "g.ini");
  CHECK(cfg.target.text("family", "") == "gaussian");
  CHECK(cfg.sampler.number("eta") == 0.01);
  CHECK(cfg.sampler.integer("K") == 100);
  CHECK(cfg.sampler.lines.at("K") == 8);
  const auto m = parse_config("[target]\nfamily = double_well\nshifts = 0.5; -0.5 # trailing\n");
  const Matrix s = m.target.matrix("shifts");
  CHECK(s.rows() == 2);
  CHECK(s(1, 0) == -0.5);
  CHECK(parse_config("[target]\nfamily = gaussian\n[sampler]\nK = 1e4\n").sampler.integer("K") == 10000);
}

TEST_CASE("parse errors name the file, line and key") {
  CHECK(error_of("[target]\nfamily = gaussian\nbogus = 1\n").find("t.ini:3") != std::string::npos);
  CHECK(error_of("[target]\nfamily = gaussian\nfamily = gaussian\n").find(":3") != std::string::npos);
  CHECK(error_of("[nowhere]\n").find(":1") != std::string::npos);
  CHECK(error_of("[target]\njust text\n").find(":2") != std::string::npos);
  CHECK_FALSE(error_of("key = 1\n").empty());
  const std::string bad_number = error_of("[target]\nfamily = gaussian\n[sampler]\n\neta = fast\n");
  CHECK(bad_number.find(":5") != std::string::npos);
  CHECK(bad_number.find("eta") != std::string::npos);
  CHECK_FALSE(error_of("[target]\nfamily = gaussian\n[sampler]\nK = 1.5\n").empty());
}

TEST_CASE("canonical INI round-trips") {
  const auto a = parse_config(kGaussian);
  const auto b = parse_config(to_ini(a));
  CHECK(a == b);
  CHECK(to_ini(b) == to_ini(a));
}

TEST_CASE("target and chain construction") {
  const auto cfg = parse_config(kGaussian);
  const auto model = build_target(cfg);
  CHECK(model.dim() == 1);
  CHECK(sampler_kind(cfg) == SamplerKind::Sgld);
  const auto chain = chain_config(cfg, model);
  CHECK(chain.eta == 0.01);
  CHECK(chain.K == 100);
  CHECK(chain.B == 1);
  CHECK(*chain.R == 10);

  const auto dw = parse_config(
      "[target]\nfamily = double_well\nn = 4\nL = 5\n[sampler]\nkind = projected\neta = 0.01\nK = 10\n"
      "R = auto\nr = lemma63\n[experiment]\neps = 0.1\n");
  const auto dwm = build_target(dw);
  CHECK(dwm.n() == 4);
  CHECK(dwm.constants().L == 5);
  const auto c = chain_config(dw, dwm);
  CHECK(c.B == 4);
  CHECK(*c.R > 10);
  CHECK(*c.r > 0);
  CHECK(*c.r == doctest::Approx(proj_radii(0.01, 1, 1.0, 10, 0.1).r_lemma63).epsilon(1e-12));
  CHECK_THROWS_AS(build_target(parse_config("[target]\nfamily = banana\n")), InvalidConfig);
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(InvalidConfig("x")) == 2);
  CHECK(exit_code_for(MissingConstant("x")) == 2);
  CHECK(exit_code_for(UnsupportedConfiguration("x")) == 3);
  CHECK(exit_code_for(EnumerationTooLarge("x")) == 3);
  CHECK(exit_code_for(DomainError("x")) == 1);
}

TEST_CASE("schedule command report") {
  const auto dir = scratch("schedule");
  CommandOptions opt;
  opt.out_dir = dir.string();
  std::ostringstream out;
  CHECK(cmd_schedule(parse_config(std::string(kGaussian)), opt, out) == 0);
  const std::string csv = slurp(dir / "schedule.csv");
  for (const char* key : {"\nR,", "\neta,", "\nK,", "\ndelta,", "\nr_lemma62,", "\nr_lemma63,",
                          "\nbinding_constraint,", "\nrho,"})
    CHECK(csv.find(key) != std::string::npos);
  CHECK(fs::exists(dir / "schedule.txt"));
}

TEST_CASE("tool: repeated runs are byte identical") {
  const auto dir = scratch("repeat");
  write(dir / "g.ini", kGaussian);
  const std::string cfg = (dir / "g.ini").string();
  REQUIRE(run_tool("run --config " + cfg + " --out " + (dir / "a").string() + " --jobs 1") == 0);
  REQUIRE(run_tool("run --config " + cfg + " --out " + (dir / "b").string() + " --jobs 3") == 0);
  for (const char* f : {"trajectory.csv", "histogram.csv", "summary.txt"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_FALSE(slurp(dir / "a" / f).empty());
  }
  REQUIRE(run_tool("run --config " + cfg + " --out " + (dir / "c").string() + " --seed-override 4") == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
}

TEST_CASE("tool: exit codes") {
  const auto dir = scratch("codes");
  const std::string out = " --out " + (dir / "o").string();

  write(dir / "noH.ini",
        "[target]\nfamily = double_well\nn = 2\nH = none\n[sampler]\nkind = sgld\neta = 0.01\nK = 10\n"
        "[experiment]\nmode = hessian\nrho = 0.5\n");
  CHECK(run_tool("schedule --config " + (dir / "noH.ini").string() + out) == 2);

  write(dir / "d3.ini",
        "[target]\nfamily = gaussian\ndim = 3\n[sampler]\nkind = metropolized\neta = 0.01\nK = 10\nR = 5\nr = 1\n");
  CHECK(run_tool("kernel --config " + (dir / "d3.ini").string() + out) == 3);

  write(dir / "lowL.ini", "[target]\nfamily = double_well\nn = 2\nL = 2\n[sampler]\nkind = sgld\neta = 0.01\n"
                          "K = 10\n[experiment]\nprobe_points = 200\n");
  CHECK(run_tool("check --config " + (dir / "lowL.ini").string() + out) == 1);

  write(dir / "bad.ini", "[target]\nfamily = gaussian\nunknown = 1\n");
  CHECK(run_tool("run --config " + (dir / "bad.ini").string() + out) == 2);
  CHECK(run_tool("run" + out) == 2);
  CHECK(run_tool("schedule --config " + (dir / "missing.ini").string() + out) == 2);
}
