#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(ORBITMEASURE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, InfoGue) {
  const auto r = run("info gaussian-beta2 --n 2");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "{\"dimX\":4,\"dimL\":2,\"r\":2,\"d\":2}\n");
}

TEST(Cli, DensityOneByOne) {
  const auto r = run("density gaussian-beta2 --n 1 --grid -1:1:3");
  ASSERT_EQ(r.status, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t1", "J", "p", "density_intrinsic", "density_chart"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    EXPECT_EQ(std::stod(rows[i][1]), 1.0);
    EXPECT_NEAR(std::stod(rows[i][3]), std::exp(-0.5 * t * t), 1e-15);
  }
}

TEST(Cli, DensityGridOrderIsLexicographic) {
  const auto r = run("density gaussian-beta2 --n 2 --grid 0:1:2 --grid 2:3:2");
  ASSERT_EQ(r.status, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1][0] + "," + rows[1][1], "0,2");
  EXPECT_EQ(rows[2][0] + "," + rows[2][1], "0,3");
  EXPECT_EQ(rows[3][0] + "," + rows[3][1], "1,2");
  EXPECT_EQ(rows[4][0] + "," + rows[4][1], "1,3");
}

TEST(Cli, VerifySu2) {
  const auto r = run("verify su2-group --seed 7");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"schema\": \"1\""), std::string::npos);
  EXPECT_NE(r.out.find("\"passed\": true"), std::string::npos);
  EXPECT_EQ(r.out.find("\"passed\": false"), std::string::npos);
}

TEST(Cli, VerifyFailureExitsOne) {
  // an impossible mode-agreement threshold turns one check red
  const auto r = run("verify gaussian-beta2 --n 2 --tol-mode 0");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("\"passed\": false"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("info no-such-instance").status, 2);
  EXPECT_EQ(run("info spd-wishart --n 2 --m 1").status, 2);
  EXPECT_EQ(run("density gaussian-beta2 --n 2 --grid 0:1:1").status, 2);
  EXPECT_EQ(run("density gaussian-beta2 --n 2").status, 2);
  EXPECT_EQ(run("info gaussian-beta2 --beta 4").status, 2);
  EXPECT_EQ(run("sample gaussian-beta2 --N 0").status, 2);
  EXPECT_EQ(run("integrate gaussian-beta2 --function nope").status, 2);
  EXPECT_EQ(run("bogus gaussian-beta2").status, 2);
  EXPECT_EQ(run("--format xml info gaussian-beta2").status, 2);
}

TEST(Cli, SampleCsv) {
  const auto r = run("sample unitary-group --n 2 --N 5 --seed 3");
  ASSERT_EQ(r.status, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t1", "t2"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i][0]), std::stod(rows[i][1]));
}

TEST(Cli, IntegrateSu2) {
  const auto r = run("integrate su2-group --N 20000 --seed 4");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"function\": \"tr-x2\""), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagPrecedence) {
  const std::string path = testing::TempDir() + "orbitmeasure_cli.ini";
  FILE* f = std::fopen(path.c_str(), "w");
  ASSERT_NE(f, nullptr);
  std::fputs("n=3\nformat=json\n", f);
  std::fclose(f);
  EXPECT_EQ(run("info gaussian-beta2 --config " + path).out, "{\"dimX\":9,\"dimL\":6,\"r\":3,\"d\":6}\n");
  EXPECT_EQ(run("info gaussian-beta2 --config " + path + " --n 1").out, "{\"dimX\":1,\"dimL\":0,\"r\":1,\"d\":1}\n");
}

TEST(Cli, ByteIdenticalReruns) {
  for (const char* args : {"verify gaussian-beta2 --n 2 --seed 9", "sample spd-wishart --n 2 --N 2000 --seed 9",
                           "integrate gaussian-beta2 --n 2 --N 5000 --seed 9 --quad-grid 200",
                           "sample gaussian-beta4 --n 2 --N 100 --seed 9 --format json"}) {
    const auto a = run(args);
    const auto b = run(args);
    EXPECT_FALSE(a.out.empty()) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}
