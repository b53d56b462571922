#include "featrank/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "featrank/tuning.hpp"

namespace featrank {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidSpec("config: unknown key '" + where + key + "'");
  }
}

GridSpec grid_from_json(const nlohmann::json& j, const char* size_key, GridSpec defaults) {
  reject_unknown(j, {"learning_rates", size_key}, "grid.");
  if (j.contains("learning_rates")) defaults.learning_rates = j["learning_rates"].get<std::vector<double>>();
  if (j.contains(size_key)) defaults.sizes = j[size_key].get<std::vector<int>>();
  if (defaults.learning_rates.empty() || defaults.sizes.empty()) throw InvalidSpec("config: empty tuning grid");
  return defaults;
}

DuplicatePolicy duplicate_policy_from_string(const std::string& s) {
  if (s == "keep_first") return DuplicatePolicy::keep_first;
  if (s == "error") return DuplicatePolicy::error;
  throw InvalidSpec("config: unknown duplicate_policy '" + s + "'");
}

Relevance relevance_from_string(const std::string& s) {
  if (s == "binary") return Relevance::binary;
  if (s == "graded") return Relevance::graded;
  throw InvalidSpec("config: unknown relevance '" + s + "'");
}

nlohmann::json model_json(const RunConfig& c) {
  return {{"min_products", c.min_products},
          {"duplicate_policy", to_string(c.duplicate_policy)},
          {"schema",
           {{"numeric_ratio", c.schema.numeric_ratio},
            {"categorical_max_levels", c.schema.categorical_max_levels},
            {"max_categorical_len", c.schema.max_categorical_len},
            {"max_missing_ratio", c.schema.max_missing_ratio}}},
          {"linear", {{"ridge_lambda", c.ridge_lambda}, {"sign_epsilon", c.sign_epsilon}}},
          {"gbdt",
           {{"defaults", hyperparams_to_json(c.gbdt_defaults)},
            {"prior_weight", c.prior_weight},
            {"leafwise_grid", {{"learning_rates", c.leafwise_grid.learning_rates}, {"num_leaves", c.leafwise_grid.sizes}}},
            {"ordinal_grid", {{"learning_rates", c.ordinal_grid.learning_rates}, {"depths", c.ordinal_grid.sizes}}}}},
          {"k_folds", c.k_folds},
          {"seeds",
           {{"folds", c.seeds.folds},
            {"permutation", c.seeds.permutation},
            {"background", c.seeds.background},
            {"synthetic", c.seeds.synthetic}}},
          {"background_size", c.background_size},
          {"exact_max_features", c.exact_max_features},
          {"oracle_check", c.oracle_check},
          {"write_plots", c.write_plots},
          {"evaluation", {{"relevance", to_string(c.evaluation.relevance)}, {"depth", c.evaluation.depth}}}};
}

}  // namespace

std::string to_string(DuplicatePolicy policy) { return policy == DuplicatePolicy::error ? "error" : "keep_first"; }
std::string to_string(Relevance relevance) { return relevance == Relevance::graded ? "graded" : "binary"; }

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidSpec("config must be a JSON object");
  RunConfig c;
  try {
    reject_unknown(j,
                   {"config_version", "input", "input_format", "output_dir", "jobs", "min_products",
                    "duplicate_policy", "schema", "linear", "gbdt", "k_folds", "seeds", "background_size",
                    "exact_max_features", "oracle_check", "write_plots", "evaluation", "generated_at"},
                   "");
    const int version = j.value("config_version", RunConfig::kVersion);
    if (version != RunConfig::kVersion) {
      throw InvalidSpec("config: unsupported config_version " + std::to_string(version));
    }
    c.input = j.value("input", c.input);
    c.input_format = j.value("input_format", c.input_format);
    if (c.input_format != "auto") catalog_format_from_string(c.input_format);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.jobs = j.value("jobs", c.jobs);
    c.min_products = j.value("min_products", c.min_products);
    if (j.contains("duplicate_policy")) c.duplicate_policy = duplicate_policy_from_string(j["duplicate_policy"]);

    if (j.contains("schema")) {
      const auto& s = j["schema"];
      reject_unknown(s, {"numeric_ratio", "categorical_max_levels", "max_categorical_len", "max_missing_ratio"}, "schema.");
      c.schema.numeric_ratio = s.value("numeric_ratio", c.schema.numeric_ratio);
      c.schema.categorical_max_levels = s.value("categorical_max_levels", c.schema.categorical_max_levels);
      c.schema.max_categorical_len = s.value("max_categorical_len", c.schema.max_categorical_len);
      c.schema.max_missing_ratio = s.value("max_missing_ratio", c.schema.max_missing_ratio);
    }
    if (j.contains("linear")) {
      const auto& l = j["linear"];
      reject_unknown(l, {"ridge_lambda", "sign_epsilon"}, "linear.");
      c.ridge_lambda = l.value("ridge_lambda", c.ridge_lambda);
      c.sign_epsilon = l.value("sign_epsilon", c.sign_epsilon);
    }
    if (j.contains("gbdt")) {
      const auto& g = j["gbdt"];
      reject_unknown(g, {"defaults", "prior_weight", "leafwise_grid", "ordinal_grid"}, "gbdt.");
      if (g.contains("defaults")) c.gbdt_defaults = hyperparams_from_json(g["defaults"], c.gbdt_defaults);
      c.prior_weight = g.value("prior_weight", c.prior_weight);
      if (g.contains("leafwise_grid")) c.leafwise_grid = grid_from_json(g["leafwise_grid"], "num_leaves", c.leafwise_grid);
      if (g.contains("ordinal_grid")) c.ordinal_grid = grid_from_json(g["ordinal_grid"], "depths", c.ordinal_grid);
    }
    c.k_folds = j.value("k_folds", c.k_folds);
    if (j.contains("seeds")) {
      const auto& s = j["seeds"];
      reject_unknown(s, {"folds", "permutation", "background", "synthetic"}, "seeds.");
      c.seeds.folds = s.value("folds", c.seeds.folds);
      c.seeds.permutation = s.value("permutation", c.seeds.permutation);
      c.seeds.background = s.value("background", c.seeds.background);
      c.seeds.synthetic = s.value("synthetic", c.seeds.synthetic);
    }
    c.background_size = j.value("background_size", c.background_size);
    c.exact_max_features = j.value("exact_max_features", c.exact_max_features);
    c.oracle_check = j.value("oracle_check", c.oracle_check);
    c.write_plots = j.value("write_plots", c.write_plots);
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      reject_unknown(e, {"relevance", "depth"}, "evaluation.");
      if (e.contains("relevance")) c.evaluation.relevance = relevance_from_string(e["relevance"]);
      c.evaluation.depth = e.value("depth", c.evaluation.depth);
    }
    c.generated_at = j.value("generated_at", c.generated_at);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("config: ") + e.what());
  }

  if (c.k_folds < 2) throw InvalidSpec("config: k_folds must be >= 2");
  if (c.background_size == 0) throw InvalidSpec("config: background_size must be >= 1");
  if (c.jobs == 0) throw InvalidSpec("config: jobs must be >= 1");
  if (!(c.ridge_lambda >= 0.0)) throw InvalidSpec("config: ridge_lambda must be >= 0");
  if (!(c.prior_weight > 0.0)) throw InvalidSpec("config: prior_weight must be > 0");
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j = model_json(c);
  j["config_version"] = RunConfig::kVersion;
  j["input"] = c.input;
  j["input_format"] = c.input_format;
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  j["generated_at"] = c.generated_at;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidSpec("config file '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
  nlohmann::json j = model_json(config);
  j["config_version"] = RunConfig::kVersion;
  return hex64(fnv1a64(j.dump()));
}

std::vector<Hyperparams> config_grid(const RunConfig& config, GbdtVariant variant) {
  const GridSpec& g = variant == GbdtVariant::leafwise_onehot ? config.leafwise_grid : config.ordinal_grid;
  return make_grid(variant, g.learning_rates, g.sizes, config.gbdt_defaults);
}

}  // namespace featrank
