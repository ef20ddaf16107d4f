#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

#ifdef PROMPT_CLI_PATH

namespace {

int run(const std::string& args) {
  const std::string command = std::string(PROMPT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "prompt_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("bogus"), 1);
  EXPECT_EQ(run("run /nonexistent/config.json"), 1);
  EXPECT_EQ(run("verify --jobs 0"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, VerifyWritesResultsAndPlotReadsThem) {
  const auto dir = scratch("verify");
  EXPECT_EQ(run("verify -n 4 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "metadata.txt"));
  EXPECT_EQ(run("plot " + (dir / "results.csv").string() + " --out " + (dir / "again.svg").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "again.svg"));
}

TEST(Cli, FailureThresholdExitsWithTwo) {
  const auto dir = scratch("threshold");
  std::ofstream(dir / "bad.json") << R"({"experiment": "gp", "n_simulations": 2, "grid_resolution": 5,
                                         "theta_star": 20, "output_dir": ")"
                                  << (dir / "out").string() << "\"}";
  EXPECT_EQ(run("run " + (dir / "bad.json").string()), 2);
}

TEST(Cli, InvalidConfigExitsWithOne) {
  const auto dir = scratch("invalid");
  std::ofstream(dir / "bad.json") << R"({"experiment": "linear", "surprise": 1})";
  EXPECT_EQ(run("run " + (dir / "bad.json").string()), 1);
}

TEST(Cli, SmokingSubcommandWritesCsv) {
  const auto dir = scratch("smoking");
  const auto csv = dir / "two.csv";
  std::ofstream(csv) << "study,treatment,events,total\n01,A,9,140\n01,B,23,140\n02,A,11,78\n02,C,12,85\n";
  EXPECT_EQ(run("smoking " + csv.string() + " --mode strong --samples 1000 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "smoking_strong.csv"));
}

#endif
