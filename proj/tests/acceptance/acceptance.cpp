// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and limits are pinned below.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "featrank/cli.hpp"
#include "featrank/evaluation.hpp"
#include "featrank/gbdt.hpp"
#include "featrank/linear.hpp"
#include "featrank/pipeline.hpp"
#include "featrank/shapley.hpp"
#include "featrank/synthetic.hpp"
#include "featrank/tuning.hpp"
#include "helpers.hpp"

using namespace featrank;
using namespace featrank::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kLocalAccuracyTol = 1e-6;
constexpr double kLocalAccuracySeconds = 30.0;
constexpr double kOracleTol = 1e-8;
constexpr double kOracleSeconds = 60.0;
constexpr double kDummyTol = 1e-10;
constexpr double kSymmetryTol = 1e-8;
constexpr double kNormalEqRelTol = 1e-6;
constexpr double kExactFitTol = 1e-9;
constexpr double kMonotoneRelSlack = 1e-12;  // floating-point noise only
constexpr double kNdcgTol = 1e-4;
constexpr double kMetricTol = 1e-12;
constexpr double kRecoverySeconds = 300.0;
constexpr int kRecoveryMinHits = 19;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double sum(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return a.size() == b.size() ? m : INFINITY;
}

// Eight features: four priced numerics, two categoricals, two nuisance.
// Every 11th product lacks x2 and every 13th lacks c2.
CategoryCorpus eight_feature_corpus(std::uint64_t seed, std::size_t n) {
  SyntheticSpec s;
  s.category_id = "p8";
  s.n_products = n;
  s.numeric = {{"x1", 50.0}, {"x2", -20.0}, {"x3", 10.0}, {"x4", 5.0}};
  s.categorical = {{"c1", {{"A", 0.0}, {"B", 30.0}, {"C", -10.0}}}, {"c2", {{"P", 0.0}, {"Q", 15.0}}}};
  s.nuisance = 2;
  s.noise_sigma = 5.0;
  s.seed = seed;
  auto corpus = generate_synthetic(s).corpus;
  for (std::size_t i = 0; i < corpus.products.size(); ++i) {
    if (i % 11 == 0) corpus.products[i].attributes.erase("x2");
    if (i % 13 == 0) corpus.products[i].attributes.erase("c2");
  }
  return corpus;
}

// 1. base_value + sum(phi) reproduces the model's own prediction.
Outcome local_accuracy() {
  const auto t0 = Clock::now();
  const auto corpus = eight_feature_corpus(101, 400);
  const auto v = encode_both(corpus);
  const std::size_t n_inst = 200;
  std::vector<std::size_t> head(n_inst);
  std::iota(head.begin(), head.end(), std::size_t{0});
  const auto bg_idx = Rng(41).sample_without_replacement(v.onehot.rows(), 64);

  const Matrix oh = v.onehot.values, oh_nan = v.onehot.with_missing_as_nan(), nat = v.native.with_missing_as_nan();
  const auto lin = fit_linear(v.onehot, 1e-6);
  const auto leafwise = fit_gbdt(v.onehot, Hyperparams{}, GbdtVariant::leafwise_onehot);
  const auto ordinal = fit_gbdt(v.native, Hyperparams{}, GbdtVariant::ordinal_categorical, {29, 1.0});

  struct Family {
    const char* name;
    ShapExplanation expl;
    std::function<double(std::size_t)> predict;
  };
  std::vector<Family> families;
  families.push_back({"linear",
                      explain_linear(lin, oh.select_rows(head), oh.select_rows(bg_idx), v.onehot.dummy_map,
                                     v.native.feature_names),
                      [&](std::size_t i) { return lin.predict(oh.row(i)); }});
  families.push_back({"leafwise",
                      explain_tree(leafwise, oh_nan.select_rows(head), oh_nan.select_rows(bg_idx),
                                   v.onehot.dummy_map, v.native.feature_names),
                      [&](std::size_t i) { return leafwise.predict(oh_nan.row(i)); }});
  families.push_back({"ordinal",
                      explain_tree(ordinal, nat.select_rows(head), nat.select_rows(bg_idx), {},
                                   v.native.feature_names),
                      [&](std::size_t i) { return ordinal.predict(nat.row(i)); }});

  double worst = 0.0;
  std::size_t checked = 0;
  bool shape_ok = true;
  for (const auto& f : families) {
    shape_ok = shape_ok && f.expl.phi.rows() == n_inst && f.expl.phi.cols() == 8;
    for (std::size_t i = 0; i < f.expl.phi.rows(); ++i, ++checked) {
      worst = std::max(worst, std::abs(f.expl.base_value + sum(f.expl.phi.row(i)) - f.predict(i)));
    }
  }
  const double secs = seconds_since(t0);
  return {shape_ok && checked == 3 * n_inst && worst <= kLocalAccuracyTol && secs < kLocalAccuracySeconds,
          fmt("%zu instances, p=8, background 64, max error %.2e USD, %.1f s", checked, worst, secs)};
}

// 2. Closed-form and tree attributions equal brute-force enumeration.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t max_p = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const std::size_t p = 4 + seed % 9;  // 4..12
    max_p = std::max(max_p, p);
    const std::size_t bg_rows = seed % 2 == 0 ? 64 : 32;
    const int family = static_cast<int>(seed % 3);
    std::vector<double> got, want;
    if (family == 0) {
      const Matrix x = random_matrix(120, p, rng);
      std::vector<double> y(120);
      for (std::size_t i = 0; i < 120; ++i) y[i] = 5 * x(i, 0) - 3 * x(i, p - 1) + rng.normal(0, 1);
      const auto m = fit_linear(x, y, 1e-6);
      const Matrix bg = random_matrix(bg_rows, p, rng);
      std::vector<double> inst(p);
      for (auto& z : inst) z = rng.uniform(0, 10);
      got = shap_linear(m, bg, inst);
      want = shap_exact([&](std::span<const double> z) { return m.predict(z); }, bg, inst);
    } else if (family == 1) {
      Matrix x = random_matrix(200, p, rng);
      std::vector<double> y(200);
      for (std::size_t i = 0; i < 200; ++i) {
        y[i] = 4 * x(i, 0) + (x(i, 1) > 5 ? 12 : 0) + x(i, 2) * x(i, 0) * 0.3 + rng.normal(0, 1);
        if (i % 9 == 0) x(i, 1) = NAN;
      }
      Hyperparams hp;
      hp.n_trees = 50;
      hp.num_leaves = 12;
      const auto m = fit_gbdt(numeric_design(x, y), hp, GbdtVariant::leafwise_onehot);
      Matrix bg = random_matrix(bg_rows, p, rng);
      bg(0, 1) = NAN;
      std::vector<double> inst(p);
      for (auto& z : inst) z = rng.uniform(0, 10);
      if (seed % 4 == 1) inst[1] = NAN;
      got = shap_tree(m, bg, inst);
      want = shap_exact([&](std::span<const double> z) { return m.predict(z); }, bg, inst);
    } else {
      SyntheticSpec s;
      s.category_id = "oracle";
      s.n_products = 200;
      s.numeric = {{"x1", 30.0}};
      s.categorical = {{"c1", {{"A", 0.0}, {"B", 25.0}, {"C", 10.0}}}, {"c2", {{"P", 0.0}, {"Q", -8.0}}}};
      s.nuisance = p - 3;
      s.noise_sigma = 3.0;
      s.seed = seed;
      auto corpus = generate_synthetic(s).corpus;
      for (std::size_t i = 0; i < corpus.products.size(); i += 10) corpus.products[i].attributes.erase("c1");
      const auto v = encode_both(corpus);
      Hyperparams hp;
      hp.n_trees = 50;
      hp.depth = 5;
      const auto m = fit_gbdt(v.native, hp, GbdtVariant::ordinal_categorical, {seed, 1.0});
      const Matrix xs = v.native.with_missing_as_nan();
      const auto idx = rng.sample_without_replacement(xs.rows(), bg_rows);
      const Matrix bg = xs.select_rows(idx);
      const auto inst = xs.row(rng.index(xs.rows()));
      got = shap_tree(m, bg, inst);
      want = shap_exact([&](std::span<const double> z) { return m.predict(z); }, bg, inst);
    }
    worst = std::max(worst, max_abs_diff(got, want));
  }
  const double secs = seconds_since(t0);
  return {worst <= kOracleTol && secs < kOracleSeconds,
          fmt("20 cases, p up to %zu, max |diff| %.2e, %.1f s", max_p, worst, secs)};
}

// 3. Dummy: a feature the model never reads gets zero. Symmetry: duplicated
// columns under ridge get equal attributions.
Outcome axioms() {
  double dummy_worst = 0.0, sym_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(2000 + seed);
    Matrix x = random_matrix(150, 4, rng);
    std::vector<double> y(150);
    for (std::size_t i = 0; i < 150; ++i) {
      y[i] = 6 * x(i, 0) + (x(i, 1) > 4 ? 10 : 0) - x(i, 2) + rng.normal(0, 1);
      x(i, 3) = 2.0;  // constant during training
    }
    Hyperparams hp;
    hp.n_trees = 30;
    const auto variant = seed % 2 == 0 ? GbdtVariant::leafwise_onehot : GbdtVariant::ordinal_categorical;
    const auto m = fit_gbdt(numeric_design(x, y, seed % 2 == 0 ? MatrixView::onehot : MatrixView::native), hp, variant);
    const Matrix bg = random_matrix(32, 4, rng);
    std::vector<double> inst(4);
    for (auto& z : inst) z = rng.uniform(0, 10);
    dummy_worst = std::max(dummy_worst, std::abs(shap_tree(m, bg, inst)[3]));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(3000 + seed);
    Matrix x(100, 3);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
      x(i, 0) = x(i, 1) = rng.uniform(0, 10);
      x(i, 2) = rng.uniform(0, 10);
      y[i] = 8 * x(i, 0) - 2 * x(i, 2) + rng.normal(0, 2);
    }
    const auto m = fit_linear(x, y, 1e-6);
    const Matrix bg = x.select_rows(rng.sample_without_replacement(100, 32));
    for (std::size_t i = 0; i < 100; i += 7) {
      const auto phi = shap_linear(m, bg, x.row(i));
      sym_worst = std::max(sym_worst, std::abs(phi[0] - phi[1]));
    }
  }
  return {dummy_worst <= kDummyTol && sym_worst <= kSymmetryTol,
          fmt("10 dummy cases max |phi| %.2e, 10 symmetry cases max |phi_a - phi_b| %.2e", dummy_worst, sym_worst)};
}

// 4. Normal equations hold at lambda = 0 and exact data is recovered.
Outcome linear_correctness() {
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(4000 + seed);
    const Matrix x = random_matrix(200, 6, rng, -5, 5);
    std::vector<double> y(200);
    for (auto& v : y) v = rng.normal(100, 40);
    const auto m = fit_linear(x, y, 0.0);
    std::vector<double> r(200);
    for (std::size_t i = 0; i < 200; ++i) r[i] = y[i] - m.predict(x.row(i));
    double xtr = std::abs(sum(r)), ymax = 0.0;  // intercept column
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < 200; ++i) s += x(i, j) * r[i];
      xtr = std::max(xtr, std::abs(s));
    }
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    worst_ratio = std::max(worst_ratio, xtr / ymax);
  }
  Matrix x(20, 1);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = 2.0 * static_cast<double>(i) + 1.0;
  }
  const auto m = fit_linear(x, y, 0.0);
  const double err = std::max(std::abs(m.weights[0] - 2.0), std::abs(m.intercept - 1.0));
  return {worst_ratio <= kNormalEqRelTol && err <= kExactFitTol,
          fmt("max |X'r|/|y| %.2e over 10 fits, y=2x+1 error %.2e", worst_ratio, err)};
}

// 5. Training RMSE never rises over boosting iterations, on every grid point.
Outcome monotone_training() {
  const auto v = encode_both(generate_synthetic(recovery_spec(53, 500)).corpus);
  const RunConfig config;
  std::size_t points = 0, violations = 0;
  double worst_rise = 0.0;
  for (const auto variant : {GbdtVariant::leafwise_onehot, GbdtVariant::ordinal_categorical}) {
    const auto& dm = variant == GbdtVariant::leafwise_onehot ? v.onehot : v.native;
    for (const auto& hp : config_grid(config, variant)) {
      const auto m = fit_gbdt(dm, hp, variant, {config.seeds.permutation, config.prior_weight});
      ++points;
      for (std::size_t t = 1; t < m.train_rmse.size(); ++t) {
        const double rise = m.train_rmse[t] - m.train_rmse[t - 1];
        worst_rise = std::max(worst_rise, rise);
        if (rise > kMonotoneRelSlack * m.train_rmse[t - 1]) ++violations;
      }
      if (m.train_rmse.size() != static_cast<std::size_t>(hp.n_trees) + 1) ++violations;
    }
  }
  return {points == 32 && violations == 0,
          fmt("%zu grid points, 500 rows, %zu violations, largest step up %.2e", points, violations, worst_rise)};
}

// 6. The encoding of row i depends only on rows before it in the order.
Outcome ordered_stats_causality() {
  std::size_t mismatches = 0, compared = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(6000 + trial);
    const std::size_t n = 200, levels_n = 6;
    std::vector<std::size_t> levels(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      levels[i] = rng.index(levels_n);
      y[i] = rng.normal(80, 30);
    }
    const double prior = mean(y);
    const auto order = rng.permutation(n);
    const std::size_t cut = rng.index(n);
    auto shuffled = order;
    std::shuffle(shuffled.begin() + static_cast<std::ptrdiff_t>(cut) + 1, shuffled.end(), rng.engine());
    const auto a = ordered_target_statistics(levels, y, order, levels_n, prior, 1.0);
    const auto b = ordered_target_statistics(levels, y, shuffled, levels_n, prior, 1.0);
    for (std::size_t k = 0; k <= cut; ++k, ++compared) mismatches += a[order[k]] != b[order[k]];
  }
  return {mismatches == 0, fmt("10 trials, %zu prefix rows compared, %zu differ", compared, mismatches)};
}

// 7. The fused ranking finds both planted drivers.
Outcome driver_recovery() {
  const auto t0 = Clock::now();
  const RunConfig config;
  int hits = 0, sign_ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run_category(generate_synthetic(recovery_spec(seed, 500)).corpus, config);
    if (r.ranking.entries.size() < 2) continue;
    const std::set<std::string> top2 = {r.ranking.entries[0].feature, r.ranking.entries[1].feature};
    if (top2 != std::set<std::string>{"x1", "color"}) continue;
    ++hits;
    for (const auto& e : r.ranking.entries) {
      if (e.feature == "x1" && e.sign == Sign::positive) ++sign_ok;
    }
  }
  const double secs = seconds_since(t0);
  return {hits >= kRecoveryMinHits && sign_ok == hits && secs < kRecoverySeconds,
          fmt("top-2 = {x1, color} in %d/20 seeds, x1 positive in %d/%d, %.1f s", hits, sign_ok, hits, secs)};
}

// 8. Metrics on hand-derived cases.
Outcome metrics() {
  const ExpertLabels ab{"c", {"A", "B"}};
  const double worked = ndcg({"X", "A", "B", "Y"}, ab);
  const double perfect = ndcg({"B", "A"}, ab);
  const double disjoint = ndcg({"X", "Y"}, ab);
  const double p5 = precision_at_k({"A", "X", "B", "Y", "Z"}, {"c", {"A", "B", "C"}}, 5);
  const ExpertLabels seven{"c", {"A", "B", "C", "D", "E", "F", "G"}};
  const double p10 = precision_at_k({"A", "B", "C"}, seven, 10);
  const double r10 = recall_at_k({"A", "B", "C"}, seven, 10);
  const bool ok = std::abs(worked - 0.6934) <= kNdcgTol && std::abs(perfect - 1.0) <= kMetricTol &&
                  std::abs(disjoint) <= kMetricTol && std::abs(p5 - 0.4) <= kMetricTol &&
                  std::abs(p10 - 0.3) <= kMetricTol && std::abs(r10 - 3.0 / 7.0) <= kMetricTol;
  return {ok, fmt("ndcg %.4f / %.1f / %.1f, p@5 %.2f, p@10 %.2f, r@10 %.4f", worked, perfect, disjoint, p5, p10, r10)};
}

int cli_call(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "featrank");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "featrank %s failed (%d): %s\n", args[1].c_str(), code, e.str().c_str());
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "featrank_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

constexpr std::size_t kCatalogSize = 10;
constexpr std::size_t kColdStart = 4;

// 9. Ten synthetic categories, four with empty click logs, scored by `eval`.
Outcome cold_start_coverage() {
  const auto& dir = work_dir();
  nlohmann::json catalog = {{"categories", nlohmann::json::array()}};
  nlohmann::json clicks = nlohmann::json::object();
  for (std::size_t c = 0; c < kCatalogSize; ++c) {
    auto spec = recovery_spec(700 + c, 150, 5.0, 2);
    spec.category_id = fmt("cat%02zu", c);
    catalog["categories"].push_back(synthetic_spec_to_json(spec));
    // Engagement favours the nuisance feature first, then the drivers.
    clicks[spec.category_id] = c < kColdStart ? nlohmann::json::object()
                                              : nlohmann::json{{"nuisance_1", 40}, {"x1", 25}, {"color", 10}};
  }
  write_json_file(dir / "catalog_spec.json", catalog);
  write_json_file(dir / "clicks.json", clicks);

  bool ok = cli_call({"synth", "--spec", (dir / "catalog_spec.json").string(), "--out",
                      (dir / "catalog.csv").string(), "--labels-out", (dir / "labels.json").string()}) == 0;
  ok = ok && cli_call({"train", "--input", (dir / "catalog.csv").string(), "--out", (dir / "run_a").string()}) == 0;
  ok = ok && cli_call({"eval", "--run", (dir / "run_a").string(), "--labels", (dir / "labels.json").string(),
                       "--clicks", (dir / "clicks.json").string(), "--out", (dir / "eval").string()}) == 0;
  if (!ok) return {false, "CLI step failed"};
  const auto report = read_json_file(dir / "eval" / "eval_report.json");
  const double baseline = report["coverage"].value("left_nav", -1.0);
  const double pipeline = report["coverage"].value("shap_fusion", -1.0);
  const bool pass = report.value("universe_size", 0) == static_cast<int>(kCatalogSize) &&
                    std::abs(baseline - 0.6) <= kMetricTol && std::abs(pipeline - 1.0) <= kMetricTol;
  return {pass, fmt("%zu categories, %zu cold-start: baseline coverage %.2f, pipeline coverage %.2f", kCatalogSize,
                    kColdStart, baseline, pipeline)};
}

// 10. A second `train` over the same input and config gives identical bytes.
Outcome determinism() {
  const auto& dir = work_dir();
  if (!fs::exists(dir / "run_a")) return {false, "first run missing"};
  if (cli_call({"train", "--input", (dir / "catalog.csv").string(), "--out", (dir / "run_b").string(), "--jobs",
                "2"}) != 0) {
    return {false, "second train failed"};
  }
  std::size_t compared = 0, differing = 0;
  for (std::size_t c = 0; c < kCatalogSize; ++c) {
    const auto rel = fs::path(fmt("cat%02zu", c)) / "ranking.json";
    const auto a = slurp(dir / "run_a" / rel), b = slurp(dir / "run_b" / rel);
    ++compared;
    if (a.empty() || a != b) ++differing;
  }
  return {compared == kCatalogSize && differing == 0,
          fmt("%zu ranking.json files compared (second run with --jobs 2), %zu differ", compared, differing)};
}

}  // namespace

int main() {
  report(1, "Shapley local accuracy", local_accuracy());
  report(2, "oracle equivalence", oracle_equivalence());
  report(3, "Shapley axioms", axioms());
  report(4, "linear correctness", linear_correctness());
  report(5, "monotone GBDT training", monotone_training());
  report(6, "ordered-statistics causality", ordered_stats_causality());
  report(7, "synthetic driver recovery", driver_recovery());
  report(8, "metric correctness", metrics());
  report(9, "cold-start coverage contrast", cold_start_coverage());
  report(10, "determinism", determinism());
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
