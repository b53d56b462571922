#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "featrank/evaluation.hpp"
#include "featrank/gbdt.hpp"
#include "featrank/ingest.hpp"
#include "featrank/schema.hpp"
#include "json.hpp"

namespace featrank {

struct Seeds {
  std::uint64_t folds = 17;
  std::uint64_t permutation = 29;
  std::uint64_t background = 41;
  std::uint64_t synthetic = 53;
};

struct GridSpec {
  std::vector<double> learning_rates;
  std::vector<int> sizes;  // num_leaves or depth
};

/// Everything that determines a run. Loaded from a versioned JSON document;
/// absent keys take the defaults below, unknown keys are rejected.
struct RunConfig {
  static constexpr int kVersion = 1;

  // Paths and execution knobs; not part of the provenance hash.
  std::string input;
  std::string input_format = "auto";  // auto | long_csv | json_lines
  std::string output_dir;
  std::size_t jobs = 1;

  std::size_t min_products = 30;
  DuplicatePolicy duplicate_policy = DuplicatePolicy::keep_first;
  SchemaRules schema;

  double ridge_lambda = 1e-6;
  double sign_epsilon = 1e-9;

  Hyperparams gbdt_defaults;
  double prior_weight = 1.0;
  GridSpec leafwise_grid{{0.04, 0.05, 0.06, 0.09}, {25, 30, 35, 40}};
  GridSpec ordinal_grid{{0.10, 0.15, 0.20, 0.25}, {3, 6, 9, 12}};
  std::size_t k_folds = 5;

  Seeds seeds;
  std::size_t background_size = 128;
  std::size_t exact_max_features = 15;
  bool oracle_check = true;  // compare against shap_exact on one instance when small enough
  bool write_plots = true;

  NdcgOptions evaluation;
  std::string generated_at = "1970-01-01T00:00:00Z";
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON of every model-affecting setting, as 16
/// hex digits. Paths, jobs and generated_at are left out.
std::string config_hash(const RunConfig& config);

std::vector<Hyperparams> config_grid(const RunConfig& config, GbdtVariant variant);

std::string to_string(DuplicatePolicy policy);
std::string to_string(Relevance relevance);

}  // namespace featrank
