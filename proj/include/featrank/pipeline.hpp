#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "featrank/config.hpp"
#include "featrank/ingest.hpp"
#include "featrank/linear.hpp"
#include "featrank/ranking.hpp"
#include "featrank/schema.hpp"
#include "featrank/shapley.hpp"
#include "featrank/tuning.hpp"
#include "json.hpp"

namespace featrank {

struct CategoryRunResult {
  std::string category_id;
  CategorySchema schema;
  std::optional<CvResult> cv_leafwise;
  std::optional<CvResult> cv_ordinal;
  std::optional<LinearModel> linear;
  std::optional<GbdtModel> leafwise;
  std::optional<GbdtModel> ordinal;
  std::vector<ShapExplanation> explanations;  // linear, leafwise, ordinal
  FeatureRanking ranking;
  // Largest |shap - shap_exact| over the spot-checked instance, when run.
  std::optional<double> oracle_max_abs_diff;
  std::map<std::string, double> timings_ms;
};

/// schema -> encode -> tune both GBDT variants -> refit on all rows ->
/// attribute every product against a seeded background -> fuse.
/// A category with no usable feature or constant prices yields an empty
/// ranking flagged degenerate.
CategoryRunResult run_category(const CategoryCorpus& corpus, const RunConfig& config);

/// Writes schema.json, cv_{variant}.json, model_{tag}.json, shap_{tag}.json,
/// ranking.json, corpus.json and plots/*.json under `dir`.
void write_category_artifacts(const CategoryRunResult& result, const CategoryCorpus& corpus, const RunConfig& config,
                              const std::filesystem::path& dir);

struct CategoryFailure {
  std::string category_id;
  std::string error;  // "data" or "internal"
  std::string message;
};

struct CatalogRunResult {
  std::map<std::string, CategoryRunResult> results;
  std::vector<CategoryFailure> failures;
  std::vector<SkipEntry> skipped;
  std::size_t ranked = 0;  // categories with a non-empty ranking
  /// Over every category seen, skipped ones included; empty when there are none.
  std::optional<double> coverage;
};

/// Runs every category independently on up to `jobs` threads. A failing
/// category is reported in `failures` and leaves the others untouched.
/// Artifacts are written under config.output_dir when it is set.
CatalogRunResult run_catalog(const std::map<std::string, CategoryCorpus>& corpora, const RunConfig& config,
                             const std::vector<SkipEntry>& skipped = {});

nlohmann::json run_summary_json(const CatalogRunResult& run, const RunConfig& config);

/// Writes `j` pretty-printed and newline-terminated.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace featrank
