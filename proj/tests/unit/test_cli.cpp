#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef HJD_CLI
#error "HJD_CLI must name the hjd executable"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + HJD_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "hjd_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, HelpAndParseErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("decompose --model osher --in x.pgm --out o"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, DecomposeWritesImagesAndRerunIsIdentical) {
  const fs::path d = fresh_dir("decompose");
  ASSERT_EQ(run("generate step --rows 4 --cols 6 --out " + (d / "step.pgm").string()), 0);
  ASSERT_EQ(run("decompose --model a2bc --mu 5 --lambda 2 --in " + (d / "step.pgm").string() + " --out " +
                (d / "a").string()),
            0);
  for (const char* f : {"result.json", "manifest.json", "u.pgm", "v.pgm", "w.pgm"})
    EXPECT_TRUE(fs::exists(d / "a" / f)) << f;
  ASSERT_EQ(run("rerun --manifest " + (d / "a" / "manifest.json").string() + " --out " + (d / "b").string()), 0);
  EXPECT_EQ(slurp(d / "a" / "result.json"), slurp(d / "b" / "result.json"));
  EXPECT_EQ(slurp(d / "a" / "u.pgm"), slurp(d / "b" / "u.pgm"));
}

TEST(Cli, ExitCodesByFailureKind) {
  const fs::path d = fresh_dir("codes");
  EXPECT_EQ(run("decompose --model rof --lambda 1 --in " + (d / "missing.pgm").string() + " --out " +
                (d / "o").string()),
            3);
  {
    std::ofstream f(d / "trunc.pgm", std::ios::binary);
    f << "P5\n4 4\n255\nabc";
  }
  EXPECT_EQ(run("decompose --model rof --lambda 1 --in " + (d / "trunc.pgm").string() + " --out " +
                (d / "o").string()),
            3);
  ASSERT_EQ(run("generate constant --rows 3 --cols 3 --value 7 --out " + (d / "c.pgm").string()), 0);
  // a2bc without lambda
  EXPECT_EQ(run("decompose --model a2bc --mu 1 --in " + (d / "c.pgm").string() + " --out " + (d / "o").string()), 2);
}

TEST(Cli, ScanCsvHasOneRowPerStep) {
  const fs::path d = fresh_dir("scan");
  ASSERT_EQ(run("generate step --rows 2 --cols 4 --out " + (d / "s.json").string()), 0);
  ASSERT_EQ(run("scan --model a2bc --in " + (d / "s.json").string() +
                " --axis mu --range 0.05:0.5 --steps 5 --lambda 0.2 --tv full --out " + (d / "o").string()),
            0);
  const std::string csv = slurp(d / "o" / "scan.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(Cli, CheckSuitePasses) {
  const fs::path d = fresh_dir("check");
  EXPECT_EQ(run("check --suite limits --out " + d.string()), 0);
  EXPECT_TRUE(fs::exists(d / "result.json"));
}
