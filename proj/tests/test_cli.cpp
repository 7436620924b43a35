#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(NLSG_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string source(const std::string& rel) { return std::string(NLSG_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST(Cli, ExponentsPLaplace) {
  auto r = run("exponents --theorem plaplace --d 3 --p 2 --s 1 --m0 2");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_NEAR(j["alpha"].get<double>(), 1.5, 1e-12);
  EXPECT_TRUE(j["valid"].get<bool>());
}

TEST(Cli, ExponentsInvalidCaseNamesCondition) {
  auto r = run("exponents --theorem s --q 2 --r inf --gamma 1 --alpha 0.75 --beta 2 --s 2");
  auto j = json::parse(r.out);
  EXPECT_FALSE(j["valid"].get<bool>());
  ASSERT_TRUE(j["conditions"].contains("s_lt_q")) << r.out;
  EXPECT_FALSE(j["conditions"]["s_lt_q"].get<bool>()) << r.out;
}

TEST(Cli, SequenceIteration) {
  auto r = run("sequence --kind iteration --kappa 2 --r 1 --gamma 1 --m0 1 --n 5");
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["values"], json({1.0, 2.0, 4.0, 8.0, 16.0, 32.0}));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("exponents --theorem nope").code, 2);
  EXPECT_EQ(run("sequence --kind iteration --kappa 0.5 --n 3").code, 2);
  EXPECT_EQ(run("verify decay --config /nonexistent.cfg").code, 2);
  EXPECT_EQ(run("verify decay grid.bogus=1").code, 2);
}

TEST(Cli, VerifyDecayFromConfig) {
  auto r = run("verify decay --config " + source("configs/p3_d1.cfg"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  ASSERT_TRUE(j.is_array());
  EXPECT_TRUE(j[0]["pass"].get<bool>());
  EXPECT_LE(j[0]["metrics"]["rel_err"].get<double>(), 0.15);
}

TEST(Cli, OutputIsReproducible) {
  const std::string args = "verify contraction --threads 2 --seed 7";
  auto a = run(args);
  auto b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SimulateWritesCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "nlsg_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "traj.csv").string();
  auto r = run("simulate --out " + csv + " --snapshots " + (dir / "snaps").string() +
               " grid.n=101 grid.lo=-3 grid.hi=3 time.t_end=1 time.steps=20");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,norm_l1,norm_l2,norm_linf,mass\r");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 21);
  EXPECT_FALSE(std::filesystem::is_empty(dir / "snaps"));
  EXPECT_EQ(run("simulate").code, 2);
  std::filesystem::remove_all(dir);
}
