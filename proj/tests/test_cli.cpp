#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "featrank/cli.hpp"
#include "featrank/pipeline.hpp"
#include "helpers.hpp"

using namespace featrank;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "featrank");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "featrank_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    auto spec = featrank::testing::recovery_spec(5, 60, 2.0, 5);
    spec.category_id = "widgets";
    write_json_file(dir_ / "spec.json", synthetic_spec_to_json(spec));
    write_json_file(dir_ / "config.json", config_to_json(featrank::testing::fast_config()));
    const auto r = invoke({"synth", "--spec", (dir_ / "spec.json").string(), "--out", (dir_ / "catalog.csv").string(),
                           "--labels-out", (dir_ / "labels.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = invoke({"--config", (dir_ / "config.json").string(), "train", "--input",
                           (dir_ / "catalog.csv").string(), "--out", (dir_ / "run").string()});
    ASSERT_EQ(t.code, 0) << t.err;
  }

  static fs::path dir_;
};

fs::path CliFixture::dir_;

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"train", "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"rank", "--run", "x"}).code, cli::kExitUsage);
}

TEST(Cli, MissingInputIsDataError) {
  const auto r = invoke({"schema", "--input", "/nonexistent/catalog.csv", "--out", "/tmp/featrank_cli_none"});
  EXPECT_EQ(r.code, cli::kExitData) << r.err;
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliFixture, RankTop) {
  const auto r = invoke({"rank", "--run", (dir_ / "run").string(), "--category", "widgets", "--top", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 5u);
  EXPECT_EQ(j[0]["rank"], 1);
  const auto table = invoke({"rank", "--run", (dir_ / "run").string(), "--category", "widgets", "--table"});
  EXPECT_NE(table.out.find("x1"), std::string::npos);
  EXPECT_EQ(invoke({"rank", "--run", (dir_ / "run").string(), "--category", "nope"}).code, cli::kExitData);
}

TEST_F(CliFixture, ExplainForcePlot) {
  const auto r = invoke({"explain", "--run", (dir_ / "run").string(), "--category", "widgets", "--product",
                         "widgets-0003", "--plot", "force"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["instance_id"], "widgets-0003");
  EXPECT_EQ(invoke({"explain", "--run", (dir_ / "run").string(), "--category", "widgets", "--plot", "pie"}).code,
            cli::kExitUsage);
}

TEST_F(CliFixture, EvalWritesReport) {
  const auto out = dir_ / "eval";
  write_json_file(dir_ / "clicks.json", nlohmann::json{{"widgets", nullptr}});
  const auto r = invoke({"eval", "--run", (dir_ / "run").string(), "--labels", (dir_ / "labels.json").string(),
                         "--clicks", (dir_ / "clicks.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = read_json_file(out / "eval_report.json");
  EXPECT_EQ(rep["categories"]["widgets"]["shap_fusion"]["ndcg"], 1.0);
  EXPECT_EQ(rep["coverage"]["shap_fusion"], 1.0);
  EXPECT_EQ(rep["coverage"]["left_nav"], 0.0);
  EXPECT_TRUE(fs::exists(out / "eval_report.txt"));
}

TEST_F(CliFixture, MessageBetweenProducts) {
  const auto r = invoke({"--json", "message", "--run", (dir_ / "run").string(), "--anchor", "widgets-0001", "--alt",
                         "widgets-0002"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["text"].get<std::string>().empty());
}

TEST_F(CliFixture, GlobalFlagsAfterSubcommand) {
  const auto r = invoke({"rank", "--run", (dir_ / "run").string(), "--category", "widgets", "--config",
                         (dir_ / "config.json").string(), "--json", "--top", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).size(), 1u);
}
