#include "featrank/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "featrank/config.hpp"
#include "featrank/evaluation.hpp"
#include "featrank/pipeline.hpp"
#include "featrank/plots.hpp"
#include "featrank/synthetic.hpp"

namespace featrank::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  bool json = false;
  std::string config_path;
  std::size_t jobs = 0;

  std::string input;
  std::string format = "auto";
  std::string out;
  std::string run_dir;
  std::string category;
  std::string product;
  std::string plot = "force";
  std::string model = "ordinal";
  std::string labels;
  std::string clicks;
  std::string relevance;
  std::size_t depth = 0;
  bool depth_set = false;
  std::size_t top = 0;
  bool table = false;
  std::string anchor;
  std::string alt;
  std::string spec;
  std::string labels_out;
};

struct Context {
  Options opt;
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
};

RunConfig resolve_config(const Options& opt) {
  std::string path = opt.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("FEATRANK_CONFIG"); env && *env) path = env;
  }
  RunConfig config = path.empty() ? RunConfig{} : load_config(path);
  if (opt.jobs > 0) config.jobs = opt.jobs;
  return config;
}

void emit_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

AssembleResult load_catalog(const Context& ctx) {
  const std::string input = ctx.opt.input.empty() ? ctx.config.input : ctx.opt.input;
  if (input.empty()) throw DataError("no input catalog (use --input or the config's \"input\")");
  std::string format = ctx.opt.format != "auto" ? ctx.opt.format : ctx.config.input_format;
  const CatalogFormat fmt = format == "auto" ? catalog_format_for_path(input) : catalog_format_from_string(format);
  const auto rows = parse_catalog(input, fmt);
  auto assembled = assemble_corpora(rows, ctx.config.min_products, ctx.config.duplicate_policy);
  for (const auto& w : assembled.warnings) ctx.err << "warning: " << w << '\n';
  return assembled;
}

fs::path output_dir(const Context& ctx) {
  const std::string out = ctx.opt.out.empty() ? ctx.config.output_dir : ctx.opt.out;
  if (out.empty()) throw DataError("no output directory (use --out or the config's \"output_dir\")");
  return out;
}

int cmd_schema(Context& ctx) {
  const auto assembled = load_catalog(ctx);
  const fs::path out = output_dir(ctx);
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [id, corpus] : assembled.corpora) {
    const auto schema = infer_schema(corpus, ctx.config.schema);
    write_json_file(out / id / "schema.json", schema_to_json(schema));
    summary[id] = {{"products", corpus.products.size()},
                   {"features", schema.specs.size()},
                   {"included", schema.included_features().size()}};
  }
  write_json_file(out / "skipped.json", skip_report_json(assembled.skipped));
  if (ctx.opt.json) {
    emit_json(ctx.out, {{"categories", summary}, {"skipped", skip_report_json(assembled.skipped)}});
  } else {
    for (const auto& [id, s] : summary.items()) {
      ctx.out << id << ": " << s["included"].get<std::size_t>() << " of " << s["features"].get<std::size_t>()
              << " features usable\n";
    }
  }
  return kExitOk;
}

int cmd_train(Context& ctx) {
  auto assembled = load_catalog(ctx);
  const fs::path out = output_dir(ctx);
  RunConfig config = ctx.config;
  config.output_dir = out.string();

  std::map<std::string, CategoryCorpus> corpora = std::move(assembled.corpora);
  std::vector<SkipEntry> skipped = assembled.skipped;
  if (!ctx.opt.category.empty()) {
    auto it = corpora.find(ctx.opt.category);
    if (it == corpora.end()) throw DataError("category '" + ctx.opt.category + "' not found or below min_products");
    std::map<std::string, CategoryCorpus> one;
    one.emplace(it->first, std::move(it->second));
    corpora = std::move(one);
    skipped.clear();
  }

  const auto run = run_catalog(corpora, config, skipped);
  const auto summary = run_summary_json(run, config);
  write_json_file(out / "run_summary.json", summary);
  write_json_file(out / "config.json", config_to_json(config));

  for (const auto& f : run.failures) ctx.err << "error: category '" << f.category_id << "': " << f.message << '\n';
  if (ctx.opt.json) {
    emit_json(ctx.out, summary);
  } else {
    for (const auto& [id, r] : run.results) {
      ctx.out << id << ": " << (r.ranking.degenerate ? "degenerate (" + r.ranking.note + ")" : "ranked") << ", "
              << r.ranking.entries.size() << " features\n";
    }
    ctx.out << "coverage: " << (run.coverage ? format_double(*run.coverage) : std::string("n/a")) << " ("
            << run.ranked << " of " << summary["n_categories"].get<std::size_t>() << " categories)\n";
  }
  if (!ctx.opt.category.empty() && !run.failures.empty()) {
    return run.failures.front().error == "data" ? kExitData : kExitInternal;
  }
  return kExitOk;
}

fs::path category_dir(const Context& ctx, const std::string& category) {
  const fs::path dir = fs::path(ctx.opt.run_dir) / category;
  if (!fs::is_directory(dir)) throw DataError("no artifacts for category '" + category + "' in '" + ctx.opt.run_dir + "'");
  return dir;
}

int cmd_explain(Context& ctx) {
  const fs::path dir = category_dir(ctx, ctx.opt.category);
  const ModelTag tag = model_tag_from_string(ctx.opt.model);
  const PlotKind kind = plot_kind_from_string(ctx.opt.plot);
  const fs::path shap_path = dir / ("shap_" + to_string(tag) + ".json");
  if (!fs::exists(shap_path)) throw DataError("category '" + ctx.opt.category + "' has no attributions (degenerate?)");
  const ShapExplanation expl = explanation_from_json(read_json_file(shap_path));

  std::size_t instance = 0;
  if (kind == PlotKind::force_single) {
    if (ctx.opt.product.empty()) throw DataError("--product is required for --plot force");
    auto it = std::find(expl.instance_ids.begin(), expl.instance_ids.end(), ctx.opt.product);
    if (it == expl.instance_ids.end()) {
      throw IndexOutOfRange("product '" + ctx.opt.product + "' not in category '" + ctx.opt.category + "'");
    }
    instance = static_cast<std::size_t>(it - expl.instance_ids.begin());
  }
  const auto doc = export_plot_data(expl, kind, instance);
  if (ctx.opt.out.empty()) {
    emit_json(ctx.out, doc);
  } else {
    write_json_file(ctx.opt.out, doc);
  }
  return kExitOk;
}

int cmd_rank(Context& ctx) {
  const fs::path dir = category_dir(ctx, ctx.opt.category);
  const FeatureRanking ranking = ranking_from_json(read_json_file(dir / "ranking.json"));
  const std::size_t k = ctx.opt.top > 0 ? ctx.opt.top : std::max<std::size_t>(1, ranking.entries.size());
  if (ctx.opt.table && !ctx.opt.json) {
    ctx.out << ranking_table(ranking, k);
  } else {
    emit_json(ctx.out, entries_to_json(top_k(ranking, k)));
  }
  return kExitOk;
}

std::set<std::string> run_categories(const fs::path& run_dir) {
  const auto summary = read_json_file(run_dir / "run_summary.json");
  std::set<std::string> out;
  for (const auto& [id, _] : summary.at("categories").items()) out.insert(id);
  return out;
}

int cmd_eval(Context& ctx) {
  const fs::path run_dir = ctx.opt.run_dir;
  const auto universe = run_categories(run_dir);
  const auto labels = labels_from_json(read_json_file(ctx.opt.labels));

  RankingSet ml;
  for (const auto& category : universe) {
    const fs::path path = run_dir / category / "ranking.json";
    if (fs::exists(path)) ml[category] = ranking_from_json(read_json_file(path));
  }
  std::vector<std::pair<std::string, RankingSet>> algorithms;
  algorithms.emplace_back("shap_fusion", std::move(ml));
  if (!ctx.opt.clicks.empty()) {
    RankingSet baseline;
    for (const auto& [category, log] : clicks_from_json(read_json_file(ctx.opt.clicks))) {
      baseline[category] = left_nav_ranking(log);
    }
    algorithms.emplace_back("left_nav", std::move(baseline));
  }

  NdcgOptions options = ctx.config.evaluation;
  if (!ctx.opt.relevance.empty()) {
    if (ctx.opt.relevance != "binary" && ctx.opt.relevance != "graded") {
      throw InvalidSpec("unknown relevance '" + ctx.opt.relevance + "'");
    }
    options.relevance = ctx.opt.relevance == "graded" ? Relevance::graded : Relevance::binary;
  }
  if (ctx.opt.depth_set) options.depth = ctx.opt.depth;

  const EvalReport report = evaluate(labels, algorithms, universe, options);
  const fs::path out = output_dir(ctx);
  const auto doc = report_to_json(report);
  write_json_file(out / "eval_report.json", doc);
  const std::string table = report_table(report);
  {
    fs::create_directories(out);
    std::ofstream txt(out / "eval_report.txt", std::ios::binary | std::ios::trunc);
    txt << table;
  }
  if (ctx.opt.json) {
    emit_json(ctx.out, doc);
  } else {
    ctx.out << table;
  }
  return kExitOk;
}

std::optional<std::size_t> find_product(const CategoryCorpus& corpus, const std::string& id) {
  auto it = std::lower_bound(corpus.products.begin(), corpus.products.end(), id,
                             [](const ProductRecord& p, const std::string& key) { return p.product_id < key; });
  if (it == corpus.products.end() || it->product_id != id) return std::nullopt;
  return static_cast<std::size_t>(it - corpus.products.begin());
}

int cmd_message(Context& ctx) {
  const fs::path run_dir = ctx.opt.run_dir;
  std::vector<std::string> candidates;
  if (!ctx.opt.category.empty()) {
    candidates.push_back(ctx.opt.category);
  } else {
    for (const auto& c : run_categories(run_dir)) candidates.push_back(c);
  }
  for (const auto& category : candidates) {
    const fs::path dir = run_dir / category;
    if (!fs::exists(dir / "corpus.json")) continue;
    const CategoryCorpus corpus = corpus_from_json(read_json_file(dir / "corpus.json"));
    const auto a = find_product(corpus, ctx.opt.anchor);
    if (!a) continue;
    const auto b = find_product(corpus, ctx.opt.alt);
    if (!b) throw DataError("product '" + ctx.opt.alt + "' is not in category '" + category + "' with the anchor");
    const FeatureRanking ranking = ranking_from_json(read_json_file(dir / "ranking.json"));
    const CategorySchema schema = schema_from_json(read_json_file(dir / "schema.json"));
    const auto msg = price_delta_message(corpus.products[*a], corpus.products[*b], ranking, schema);
    if (ctx.opt.json) {
      auto j = message_to_json(msg);
      j["category_id"] = category;
      emit_json(ctx.out, j);
    } else {
      ctx.out << msg.text << '\n';
    }
    return kExitOk;
  }
  throw DataError("product '" + ctx.opt.anchor + "' not found in run '" + ctx.opt.run_dir + "'");
}

int cmd_synth(Context& ctx) {
  const auto specs = synthetic_catalog_from_json(read_json_file(ctx.opt.spec));
  std::vector<RawAttributeRow> rows;
  nlohmann::json labels = nlohmann::json::object();
  nlohmann::json truth = nlohmann::json::object();
  for (const auto& spec : specs) {
    const auto generated = generate_synthetic(spec);
    for (auto& row : flatten(generated.corpus)) rows.push_back(std::move(row));
    std::vector<std::string> drivers;
    for (const auto& d : generated.ground_truth) drivers.push_back(d.feature);
    labels[spec.category_id] = drivers;
    truth[spec.category_id] = ground_truth_to_json(generated.ground_truth);
  }
  const fs::path out = ctx.opt.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write '" + out.string() + "'");
    if (catalog_format_for_path(out) == CatalogFormat::json_lines) {
      for (const auto& r : rows) {
        file << nlohmann::json{{"product_id", r.product_id},
                               {"category_id", r.category_id},
                               {"price", r.price},
                               {"attribute_name", r.attribute_name},
                               {"attribute_value", r.attribute_value}}
                    .dump()
             << '\n';
      }
    } else {
      file << write_catalog_csv(rows);
    }
  }
  if (!ctx.opt.labels_out.empty()) write_json_file(ctx.opt.labels_out, labels);
  if (ctx.opt.json) {
    emit_json(ctx.out, {{"rows", rows.size()}, {"categories", specs.size()}, {"ground_truth", truth}});
  } else {
    ctx.out << "wrote " << rows.size() << " rows for " << specs.size() << " categories to " << out.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Price-driven feature importance ranking", args.empty() ? "featrank" : args.front()};
  app.require_subcommand(1);
  app.fallthrough();  // --json and --config are accepted after the subcommand too
  app.failure_message(CLI::FailureMessage::help);
  app.add_flag("--json", opt.json, "Machine-readable JSON on stdout");
  app.add_option("--config", opt.config_path, "Run config file (default: $FEATRANK_CONFIG)");

  auto* schema = app.add_subcommand("schema", "Infer and export per-category schemas");
  schema->add_option("--input", opt.input, "Catalog file (long CSV or JSON lines)");
  schema->add_option("--format", opt.format, "auto | long_csv | json_lines");
  schema->add_option("--out", opt.out, "Output directory");

  auto* train = app.add_subcommand("train", "Run the full pipeline");
  train->add_option("--input", opt.input, "Catalog file (long CSV or JSON lines)");
  train->add_option("--format", opt.format, "auto | long_csv | json_lines");
  train->add_option("--out", opt.out, "Output directory");
  train->add_option("--category", opt.category, "Only this category");
  train->add_option("--jobs", opt.jobs, "Categories trained in parallel")->check(CLI::PositiveNumber);

  auto* explain = app.add_subcommand("explain", "Export plot data for a trained category");
  explain->add_option("--run", opt.run_dir, "Run directory")->required();
  explain->add_option("--category", opt.category, "Category id")->required();
  explain->add_option("--product", opt.product, "Product id (force plot)");
  explain->add_option("--plot", opt.plot, "force | beeswarm | bar")
      ->check(CLI::IsMember({"force", "beeswarm", "bar"}));
  explain->add_option("--model", opt.model, "linear | leafwise | ordinal")
      ->check(CLI::IsMember({"linear", "leafwise", "ordinal"}));
  explain->add_option("--out", opt.out, "Write to this file instead of stdout");

  auto* rank = app.add_subcommand("rank", "Print a category ranking");
  rank->add_option("--run", opt.run_dir, "Run directory")->required();
  rank->add_option("--category", opt.category, "Category id")->required();
  rank->add_option("--top", opt.top, "Keep the top K entries")->check(CLI::PositiveNumber);
  rank->add_flag("--table", opt.table, "Aligned text table instead of JSON");

  auto* eval = app.add_subcommand("eval", "Score rankings against expert labels");
  eval->add_option("--run", opt.run_dir, "Run directory")->required();
  eval->add_option("--labels", opt.labels, "Expert labels JSON")->required();
  eval->add_option("--clicks", opt.clicks, "Click log JSON for the left-nav baseline");
  eval->add_option("--out", opt.out, "Report directory");
  eval->add_option("--relevance", opt.relevance, "binary | graded (overrides config)");
  eval->add_option("--depth", opt.depth, "NDCG truncation depth, 0 = full list (overrides config)")
      ->each([&](const std::string&) { opt.depth_set = true; });

  auto* message = app.add_subcommand("message", "Price-difference message between two products");
  message->add_option("--run", opt.run_dir, "Run directory")->required();
  message->add_option("--anchor", opt.anchor, "Anchor product id")->required();
  message->add_option("--alt", opt.alt, "Alternative product id")->required();
  message->add_option("--category", opt.category, "Category id (default: search the run)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic catalog");
  synth->add_option("--spec", opt.spec, "Synthetic spec JSON")->required();
  synth->add_option("--out", opt.out, "Catalog file to write")->required();
  synth->add_option("--labels-out", opt.labels_out, "Also write ground-truth labels JSON");

  std::vector<const char*> argv;
  if (args.empty()) argv.push_back("featrank");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Context ctx{opt, resolve_config(opt), out, err};
    if (schema->parsed()) return cmd_schema(ctx);
    if (train->parsed()) return cmd_train(ctx);
    if (explain->parsed()) return cmd_explain(ctx);
    if (rank->parsed()) return cmd_rank(ctx);
    if (eval->parsed()) return cmd_eval(ctx);
    if (message->parsed()) return cmd_message(ctx);
    if (synth->parsed()) return cmd_synth(ctx);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace featrank::cli
