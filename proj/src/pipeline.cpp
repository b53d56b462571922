#include "featrank/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "featrank/plots.hpp"

namespace featrank {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool constant_target(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
}

// Per product and feature: numeric value (level index for categoricals) or
// NaN when missing, plus the raw attribute string.
void attach_feature_values(ShapExplanation& expl, const DesignMatrix& native, const CategoryCorpus& corpus) {
  expl.instance_ids = native.product_ids;
  expl.feature_values = Matrix(native.rows(), native.cols());
  expl.display_values.assign(native.rows(), std::vector<std::string>(native.cols()));
  for (std::size_t i = 0; i < native.rows(); ++i) {
    const auto& attrs = corpus.products[i].attributes;
    for (std::size_t f = 0; f < native.cols(); ++f) {
      double v = native.values(i, f);
      if (native.missing(i, f)) v = std::nan("");
      if (native.column_kinds[f] == ColumnKind::categorical &&
          native.feature_levels[f][static_cast<std::size_t>(v)] == kMissingLevel) {
        v = std::nan("");
      }
      expl.feature_values(i, f) = v;
      auto it = attrs.find(native.feature_names[f]);
      if (it != attrs.end()) expl.display_values[i][f] = trim(it->second);
    }
  }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
  return worst;
}

std::string tag_name(ModelTag tag) { return to_string(tag); }

}  // namespace

CategoryRunResult run_category(const CategoryCorpus& corpus, const RunConfig& config) {
  CategoryRunResult result;
  result.category_id = corpus.category_id;
  result.ranking.category_id = corpus.category_id;
  result.ranking.provenance.seed = config.seeds.folds;
  result.ranking.provenance.config_hash = config_hash(config);

  auto t = Clock::now();
  result.schema = infer_schema(corpus, config.schema);
  result.timings_ms["schema"] = elapsed_ms(t);

  if (result.schema.included_features().empty()) {
    result.ranking.degenerate = true;
    result.ranking.note = "no usable features";
    return result;
  }

  t = Clock::now();
  const DesignMatrix onehot = encode(corpus, result.schema, MatrixView::onehot);
  const DesignMatrix native = encode(corpus, result.schema, MatrixView::native);
  result.timings_ms["encode"] = elapsed_ms(t);

  if (constant_target(onehot.target)) {
    result.ranking.degenerate = true;
    result.ranking.note = "constant prices";
    return result;
  }

  const GbdtOptions gbdt_options{config.seeds.permutation, config.prior_weight};

  t = Clock::now();
  result.cv_leafwise = grid_search_cv(onehot, config_grid(config, GbdtVariant::leafwise_onehot), config.k_folds,
                                      config.seeds.folds, GbdtVariant::leafwise_onehot, gbdt_options);
  result.cv_ordinal = grid_search_cv(native, config_grid(config, GbdtVariant::ordinal_categorical), config.k_folds,
                                     config.seeds.folds, GbdtVariant::ordinal_categorical, gbdt_options);
  result.timings_ms["tune"] = elapsed_ms(t);

  t = Clock::now();
  result.linear = fit_linear(onehot, config.ridge_lambda);
  result.leafwise = fit_gbdt(onehot, result.cv_leafwise->best_hyperparams, GbdtVariant::leafwise_onehot, gbdt_options);
  result.ordinal =
      fit_gbdt(native, result.cv_ordinal->best_hyperparams, GbdtVariant::ordinal_categorical, gbdt_options);
  result.timings_ms["fit"] = elapsed_ms(t);

  t = Clock::now();
  const std::size_t n = onehot.rows();
  Rng rng(config.seeds.background);
  const auto bg_rows = rng.sample_without_replacement(n, std::min(config.background_size, n));
  const Matrix onehot_nan = onehot.with_missing_as_nan();
  const Matrix native_nan = native.with_missing_as_nan();
  const Matrix bg_linear = onehot.values.select_rows(bg_rows);
  const Matrix bg_leafwise = onehot_nan.select_rows(bg_rows);
  const Matrix bg_ordinal = native_nan.select_rows(bg_rows);
  const auto& features = native.feature_names;

  result.explanations.push_back(explain_linear(*result.linear, onehot.values, bg_linear, onehot.dummy_map, features));
  result.explanations.push_back(explain_tree(*result.leafwise, onehot_nan, bg_leafwise, onehot.dummy_map, features));
  result.explanations.push_back(explain_tree(*result.ordinal, native_nan, bg_ordinal, {}, features));
  for (auto& expl : result.explanations) attach_feature_values(expl, native, corpus);
  result.timings_ms["attribute"] = elapsed_ms(t);

  if (config.oracle_check && onehot.cols() <= config.exact_max_features) {
    t = Clock::now();
    std::vector<std::size_t> head(std::min<std::size_t>(16, bg_rows.size()));
    std::iota(head.begin(), head.end(), std::size_t{0});
    const Matrix bg_l = bg_linear.select_rows(head);
    const Matrix bg_lw = bg_leafwise.select_rows(head);
    const Matrix bg_or = bg_ordinal.select_rows(head);
    double worst = 0.0;
    {
      const PredictFn f = [&](std::span<const double> r) { return result.linear->predict(r); };
      worst = std::max(worst, max_abs_diff(shap_linear(*result.linear, bg_l, onehot.values.row(0)),
                                           shap_exact(f, bg_l, onehot.values.row(0), config.exact_max_features)));
    }
    {
      const PredictFn f = [&](std::span<const double> r) { return result.leafwise->predict(r); };
      worst = std::max(worst, max_abs_diff(shap_tree(*result.leafwise, bg_lw, onehot_nan.row(0)),
                                           shap_exact(f, bg_lw, onehot_nan.row(0), config.exact_max_features)));
    }
    {
      const PredictFn f = [&](std::span<const double> r) { return result.ordinal->predict(r); };
      worst = std::max(worst, max_abs_diff(shap_tree(*result.ordinal, bg_or, native_nan.row(0)),
                                           shap_exact(f, bg_or, native_nan.row(0), config.exact_max_features)));
    }
    result.oracle_max_abs_diff = worst;
    result.timings_ms["oracle_check"] = elapsed_ms(t);
  }

  const auto signs = feature_signs(*result.linear, onehot.dummy_map, config.sign_epsilon);
  result.ranking = fuse_rankings(corpus.category_id, mean_abs_shap(result.explanations[0]),
                                 mean_abs_shap(result.explanations[1]), mean_abs_shap(result.explanations[2]), signs);
  result.ranking.provenance.seed = config.seeds.folds;
  result.ranking.provenance.config_hash = config_hash(config);
  result.ranking.provenance.model_versions = {
      {"linear", "ridge-svd/1"}, {"leafwise", "gbdt-leafwise/1"}, {"ordinal", "gbdt-ordinal/1"}};
  return result;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_category_artifacts(const CategoryRunResult& result, const CategoryCorpus& corpus, const RunConfig& config,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_json_file(dir / "corpus.json", corpus_to_json(corpus));
  write_json_file(dir / "schema.json", schema_to_json(result.schema));
  if (result.cv_leafwise) write_json_file(dir / "cv_leafwise.json", cv_result_to_json(*result.cv_leafwise));
  if (result.cv_ordinal) write_json_file(dir / "cv_ordinal.json", cv_result_to_json(*result.cv_ordinal));
  if (result.linear) write_json_file(dir / "model_linear.json", linear_to_json(*result.linear));
  if (result.leafwise) write_json_file(dir / "model_leafwise.json", gbdt_to_json(*result.leafwise));
  if (result.ordinal) write_json_file(dir / "model_ordinal.json", gbdt_to_json(*result.ordinal));
  for (const auto& expl : result.explanations) {
    const std::string tag = tag_name(expl.model_tag);
    write_json_file(dir / ("shap_" + tag + ".json"), explanation_to_json(expl));
    if (config.write_plots && expl.phi.rows() > 0) {
      write_json_file(dir / "plots" / ("bar_" + tag + ".json"), export_plot_data(expl, PlotKind::bar_mean));
      write_json_file(dir / "plots" / ("beeswarm_" + tag + ".json"),
                      export_plot_data(expl, PlotKind::beeswarm_summary));
      write_json_file(dir / "plots" / ("force_" + tag + ".json"), export_plot_data(expl, PlotKind::force_single, 0));
    }
  }
  write_json_file(dir / "ranking.json", ranking_to_json(result.ranking, config.generated_at));
}

CatalogRunResult run_catalog(const std::map<std::string, CategoryCorpus>& corpora, const RunConfig& config,
                             const std::vector<SkipEntry>& skipped) {
  std::vector<const CategoryCorpus*> work;
  for (const auto& [_, corpus] : corpora) work.push_back(&corpus);

  std::vector<std::optional<CategoryRunResult>> results(work.size());
  std::vector<std::optional<CategoryFailure>> failures(work.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const CategoryCorpus& corpus = *work[i];
      try {
        auto r = run_category(corpus, config);
        if (!config.output_dir.empty()) {
          write_category_artifacts(r, corpus, config, std::filesystem::path(config.output_dir) / corpus.category_id);
        }
        r.explanations.clear();
        results[i] = std::move(r);
      } catch (const DataError& e) {
        failures[i] = CategoryFailure{corpus.category_id, "data", e.what()};
      } catch (const std::exception& e) {
        failures[i] = CategoryFailure{corpus.category_id, "internal", e.what()};
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(config.jobs, work.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < n_threads; ++k) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  CatalogRunResult run;
  run.skipped = skipped;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (results[i]) {
      if (!results[i]->ranking.empty()) ++run.ranked;
      run.results.emplace(work[i]->category_id, std::move(*results[i]));
    } else if (failures[i]) {
      run.failures.push_back(std::move(*failures[i]));
    }
  }
  const std::size_t universe = run.results.size() + run.failures.size() + run.skipped.size();
  if (universe > 0) run.coverage = static_cast<double>(run.ranked) / static_cast<double>(universe);
  return run;
}

nlohmann::json run_summary_json(const CatalogRunResult& run, const RunConfig& config) {
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [id, r] : run.results) {
    nlohmann::json entry = {{"status", r.ranking.degenerate ? "degenerate" : "ranked"},
                            {"features", r.ranking.entries.size()},
                            {"note", r.ranking.note}};
    if (r.cv_leafwise) entry["best_leafwise"] = hyperparams_to_json(r.cv_leafwise->best_hyperparams);
    if (r.cv_ordinal) entry["best_ordinal"] = hyperparams_to_json(r.cv_ordinal->best_hyperparams);
    if (r.oracle_max_abs_diff) entry["oracle_max_abs_diff"] = *r.oracle_max_abs_diff;
    categories[id] = std::move(entry);
  }
  for (const auto& f : run.failures) {
    categories[f.category_id] = {{"status", "failed"}, {"error", f.error}, {"message", f.message}};
  }
  for (const auto& s : run.skipped) {
    categories[s.category_id] = {{"status", "skipped"}, {"reason", s.reason}, {"products", s.count}};
  }
  nlohmann::json coverage = nullptr;
  if (run.coverage) coverage = *run.coverage;
  return {{"summary_version", 1},
          {"config_hash", config_hash(config)},
          {"generated_at", config.generated_at},
          {"n_categories", categories.size()},
          {"ranked", run.ranked},
          {"coverage", coverage},
          {"categories", std::move(categories)}};
}

}  // namespace featrank
