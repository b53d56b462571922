#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "featrank/pipeline.hpp"
#include "helpers.hpp"

using namespace featrank;
using namespace featrank::testing;
namespace fs = std::filesystem;

namespace {

CategoryCorpus single_driver(const std::string& id, std::uint64_t seed) {
  SyntheticSpec s;
  s.category_id = id;
  s.n_products = 80;
  s.numeric = {{"weight", 20.0, 0.0, 10.0, "lb"}};
  s.nuisance = 2;
  s.seed = seed;
  return generate_synthetic(s).corpus;
}

CategoryCorpus textual_only(const std::string& id) {
  CategoryCorpus c;
  c.category_id = id;
  for (int i = 0; i < 40; ++i) {
    c.products.push_back({id + std::to_string(i), 10.0 + i, {{"Description", "unique text number " + std::to_string(i)}}});
  }
  c.attribute_universe = {"Description"};
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("featrank_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunCategory, NoiselessSingleDriverRanksFirst) {
  const auto r = run_category(single_driver("one", 1), fast_config());
  ASSERT_FALSE(r.ranking.empty());
  EXPECT_EQ(r.ranking.entries[0].feature, "weight");
  EXPECT_EQ(r.ranking.entries[0].sign, Sign::positive);
  EXPECT_EQ(r.explanations.size(), 3u);
  EXPECT_FALSE(r.ranking.degenerate);
  ASSERT_TRUE(r.oracle_max_abs_diff.has_value());
  EXPECT_LE(*r.oracle_max_abs_diff, 1e-6);
  EXPECT_EQ(r.ranking.provenance.config_hash, config_hash(fast_config()));
  for (const auto& e : r.explanations) {
    for (std::size_t i = 0; i < e.phi.rows(); ++i) {
      double s = e.base_value;
      for (double p : e.phi.row(i)) s += p;
      EXPECT_NEAR(s, e.predictions[i], 1e-6);
    }
  }
}

TEST(RunCategory, AllExcludedIsDegenerate) {
  const auto r = run_category(textual_only("text"), fast_config());
  EXPECT_TRUE(r.ranking.empty());
  EXPECT_TRUE(r.ranking.degenerate);
  EXPECT_EQ(r.ranking.note, "no usable features");
  EXPECT_FALSE(r.linear.has_value());
}

TEST(RunCategory, ConstantPricesAreDegenerate) {
  auto c = single_driver("flat", 2);
  for (auto& p : c.products) p.price = 5.0;
  const auto r = run_category(c, fast_config());
  EXPECT_TRUE(r.ranking.empty());
  EXPECT_TRUE(r.ranking.degenerate);
}

TEST(RunCategory, RerunWritesIdenticalRanking) {
  const auto corpus = single_driver("again", 3);
  auto cfg = fast_config();
  const auto a = scratch("a"), b = scratch("b");
  write_category_artifacts(run_category(corpus, cfg), corpus, cfg, a);
  write_category_artifacts(run_category(corpus, cfg), corpus, cfg, b);
  const auto ra = slurp(a / "ranking.json");
  EXPECT_FALSE(ra.empty());
  EXPECT_EQ(ra, slurp(b / "ranking.json"));
  for (const char* f : {"schema.json", "corpus.json", "cv_leafwise.json", "model_ordinal.json", "shap_linear.json",
                        "plots/force_leafwise.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
}

TEST(RunCatalog, CoverageWithDegenerateCategory) {
  std::map<std::string, CategoryCorpus> corpora = {
      {"a", single_driver("a", 4)}, {"b", single_driver("b", 5)}, {"t", textual_only("t")}};
  auto cfg = fast_config();
  cfg.jobs = 2;
  const auto run = run_catalog(corpora, cfg);
  EXPECT_EQ(run.results.size(), 3u);
  EXPECT_EQ(run.ranked, 2u);
  ASSERT_TRUE(run.coverage.has_value());
  EXPECT_NEAR(*run.coverage, 2.0 / 3.0, 1e-12);
  const auto summary = run_summary_json(run, cfg);
  EXPECT_EQ(summary["categories"]["t"]["status"], "degenerate");
}

TEST(RunCatalog, EmptyCatalogHasNoCoverage) {
  const auto run = run_catalog({}, fast_config());
  EXPECT_TRUE(run.results.empty());
  EXPECT_FALSE(run.coverage.has_value());
  EXPECT_TRUE(run_summary_json(run, fast_config())["coverage"].is_null());
}

TEST(RunCatalog, FailureIsIsolated) {
  CategoryCorpus tiny;
  tiny.category_id = "tiny";
  tiny.products = {{"t1", 10.0, {{"w", "1 lb"}}}, {"t2", 20.0, {{"w", "2 lb"}}}};
  tiny.attribute_universe = {"w"};
  std::map<std::string, CategoryCorpus> corpora = {{"ok", single_driver("ok", 6)}, {"tiny", tiny}};
  const auto run = run_catalog(corpora, fast_config());
  ASSERT_EQ(run.failures.size(), 1u);
  EXPECT_EQ(run.failures[0].category_id, "tiny");
  EXPECT_EQ(run.failures[0].error, "data");
  EXPECT_EQ(run.results.count("ok"), 1u);
  EXPECT_EQ(run.ranked, 1u);
  EXPECT_NEAR(*run.coverage, 0.5, 1e-12);
}
