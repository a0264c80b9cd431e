#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kSample = fs::path(CESMARKET_SOURCE_DIR) / "samples" / "instances" / "two_bc.json";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cesmarket_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + CESMARKET_CLI + "\" " + args + " > \"" +
                            (dir_ / "stdout.txt").string() + "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  static std::size_t lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string s; std::getline(in, s);) ++n;
    return n;
  }
  fs::path dir_;
};

TEST_F(Cli, CompareOnTwoBuildingSample) {
  const auto out = dir_ / "bundle";
  ASSERT_EQ(run("run --model compare --instance \"" + kSample.string() + "\" --out \"" + out.string() + "\""), 0);
  const auto doc = nlohmann::json::parse(slurp(out / "results.json"));
  EXPECT_EQ(doc["schema"], 1);
  EXPECT_EQ(doc["status"], "ok");
  const auto& sc = doc["metrics"]["social_cost"];
  EXPECT_NEAR(sc["WO_ES"].get<double>(), 6.0, 1e-9);
  EXPECT_NEAR(sc["IES"].get<double>(), 4.0, 1e-6);
  EXPECT_NEAR(sc["CES"].get<double>(), 2.0, 1e-6);
  EXPECT_NEAR(sc["CMES"].get<double>(), 2.0, 1e-6);
  EXPECT_TRUE(sc.contains("VES"));
  EXPECT_TRUE(doc["equilibrium_report"]["passed"].get<bool>());
  EXPECT_EQ(doc["equilibrium_report"]["accepted"], 2);

  EXPECT_EQ(lines(out / "ves_sweep.csv"), 227u);
  EXPECT_EQ(lines(out / "table_social_cost.csv"), 6u);
  EXPECT_EQ(lines(out / "table_rus_price.csv"), 3u);
  EXPECT_EQ(lines(out / "table_eso_profit.csv"), 3u);
  EXPECT_EQ(lines(out / "schedules.csv"), 1u + 5u * 2u * 4u);
  EXPECT_EQ(lines(out / "incentives.csv"), 1u + 5u * 2u);
  EXPECT_EQ(lines(out / "utilization.csv"), 1u + 3u * 4u);
  EXPECT_TRUE(fs::exists(out / "ies_curve.csv"));
  for (const auto& e : fs::directory_iterator(out)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST_F(Cli, CesRunsIndividualSizingImplicitly) {
  const auto out = dir_ / "ces";
  ASSERT_EQ(run("run --model ces --instance \"" + kSample.string() + "\" --out \"" + out.string() + "\""), 0);
  const auto doc = nlohmann::json::parse(slurp(out / "results.json"));
  ASSERT_TRUE(doc.contains("ies"));
  EXPECT_NEAR(doc["ies"][0]["j_ind"].get<double>(), 2.0, 1e-6);
  EXPECT_NEAR(doc["ces"]["eso_profit"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(doc["ces"]["buildings"][1]["q_star"].get<double>(), 0.015, 1e-9);
  EXPECT_FALSE(fs::exists(out / "ves_sweep.csv"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("run --instance \"" + (dir_ / "missing.json").string() + "\" --out \"" + (dir_ / "a").string() + "\""), 2);
  const auto failure = nlohmann::json::parse(slurp(dir_ / "a" / "results.json"));
  EXPECT_EQ(failure["status"], "error");
  EXPECT_EQ(failure["error"]["exit_code"], 2);

  std::ofstream(dir_ / "plain_file") << "x";
  EXPECT_EQ(run("run --instance \"" + kSample.string() + "\" --out \"" + (dir_ / "plain_file" / "sub").string() + "\""), 2);
  EXPECT_EQ(run("run --model nonsense --out \"" + (dir_ / "b").string() + "\""), 2);
  EXPECT_EQ(run("run --price-step 0 --out \"" + (dir_ / "c").string() + "\""), 2);
  EXPECT_EQ(run("run --no-such-flag"), 2);
  EXPECT_EQ(run("run --model ces --seed 3 --buildings 4 --periods 8 --scenarios 2 --node-limit 2 --out \"" +
                (dir_ / "d").string() + "\""),
            3);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "d" / "results.json"))["error"]["kind"], "solver_limit");

  auto bad = nlohmann::json::parse(slurp(kSample));
  bad["buildings"][0]["scenarios"][0]["prob"] = 0.9;
  std::ofstream(dir_ / "bad.json") << bad.dump();
  EXPECT_EQ(run("validate --instance \"" + (dir_ / "bad.json").string() + "\""), 2);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("buildings[0].scenarios"), std::string::npos);
}

TEST_F(Cli, GenerateIsDeterministic) {
  const auto a = dir_ / "a.json", b = dir_ / "b.json";
  ASSERT_EQ(run("generate --seed 1 --buildings 5 --periods 24 --scenarios 3 --out \"" + a.string() + "\""), 0);
  ASSERT_EQ(run("generate --seed 1 --buildings 5 --periods 24 --scenarios 3 --out \"" + b.string() + "\""), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(run("validate --instance \"" + a.string() + "\""), 0);
  EXPECT_EQ(run("generate --buildings 0"), 2);
}

TEST_F(Cli, SweepPrice) {
  const auto out = dir_ / "sweep";
  ASSERT_EQ(run("sweep-price --instance \"" + kSample.string() + "\" --out \"" + out.string() + "\""), 0);
  EXPECT_EQ(lines(out / "ves_sweep.csv"), 227u);
  ASSERT_EQ(run("sweep-price --instance \"" + kSample.string() + "\" --price-start 0.1 --price-stop 0.1 --out \"" +
                out.string() + "\""),
            0);
  std::ifstream in(out / "ves_sweep.csv");
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(row.substr(0, 4), "0.1,");
  EXPECT_NE(row.find(",1,"), std::string::npos);
}

}  // namespace
