#include "featrank/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace featrank {

namespace {

constexpr std::uint16_t kMissingBin = std::numeric_limits<std::uint16_t>::max();

struct ColumnBins {
  std::vector<double> thresholds;  // ascending; bin b holds x with thresholds[b-1] < x <= thresholds[b]
  std::vector<std::uint16_t> bin;  // per training row
};

ColumnBins make_bins(const Matrix& xs, std::size_t c, int n_bins) {
  ColumnBins out;
  std::vector<double> values;
  values.reserve(xs.rows());
  for (std::size_t r = 0; r < xs.rows(); ++r) {
    if (!std::isnan(xs(r, c))) values.push_back(xs(r, c));
  }
  std::sort(values.begin(), values.end());
  std::vector<double> distinct = values;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      out.thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    }
  } else {
    // Equal-frequency cut points between distinct neighbours.
    const std::size_t n = values.size();
    for (int i = 1; i < n_bins; ++i) {
      const std::size_t pos = static_cast<std::size_t>(i) * n / static_cast<std::size_t>(n_bins);
      if (pos == 0 || pos >= n || values[pos - 1] == values[pos]) continue;
      const double t = 0.5 * (values[pos - 1] + values[pos]);
      if (out.thresholds.empty() || t > out.thresholds.back()) out.thresholds.push_back(t);
    }
  }

  out.bin.resize(xs.rows());
  for (std::size_t r = 0; r < xs.rows(); ++r) {
    const double v = xs(r, c);
    if (std::isnan(v)) {
      out.bin[r] = kMissingBin;
    } else {
      out.bin[r] = static_cast<std::uint16_t>(std::lower_bound(out.thresholds.begin(), out.thresholds.end(), v) -
                                              out.thresholds.begin());
    }
  }
  return out;
}

double split_gain(double g_left, double n_left, double g_right, double n_right, double g_total, double n_total) {
  return g_left * g_left / n_left + g_right * g_right / n_right - g_total * g_total / n_total;
}

struct SplitCandidate {
  bool valid = false;
  double score = 0.0;  // selection score; equals gain except for categorical ordinal splits
  int column = -1;
  bool categorical = false;
  double threshold = 0.0;
  std::vector<int> level_set;
  bool missing_left = true;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& xs, const std::vector<ColumnKind>& kinds, const std::vector<std::size_t>& level_counts,
              const std::vector<ColumnBins>& bins, const std::vector<std::vector<double>>& row_stats,
              const std::vector<std::vector<double>>& level_stats, const Hyperparams& hp)
      : xs_(xs),
        kinds_(kinds),
        level_counts_(level_counts),
        bins_(bins),
        row_stats_(row_stats),
        level_stats_(level_stats),
        hp_(hp) {}

  /// Grows one tree on the residuals; fills `leaf_rows` with the training
  /// rows of every leaf (indexed by node id).
  Tree build(const std::vector<double>& residual, GbdtVariant variant,
             std::vector<std::vector<std::size_t>>& leaf_rows) const {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<std::vector<std::size_t>> rows_of(1);
    rows_of[0].resize(xs_.rows());
    std::iota(rows_of[0].begin(), rows_of[0].end(), std::size_t{0});

    if (variant == GbdtVariant::leafwise_onehot) {
      grow_leafwise(tree, rows_of, residual);
    } else {
      grow_depthwise(tree, rows_of, residual);
    }

    leaf_rows.assign(tree.nodes.size(), {});
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      TreeNode& node = tree.nodes[id];
      node.count = rows_of[id].size();
      if (!node.is_leaf()) continue;
      double sum = 0.0;
      for (std::size_t r : rows_of[id]) sum += residual[r];
      node.value = rows_of[id].empty() ? 0.0 : sum / static_cast<double>(rows_of[id].size());
      leaf_rows[id] = std::move(rows_of[id]);
    }
    return tree;
  }

 private:
  void grow_leafwise(Tree& tree, std::vector<std::vector<std::size_t>>& rows_of,
                     const std::vector<double>& residual) const {
    std::vector<std::pair<int, SplitCandidate>> open;
    open.emplace_back(0, best_split(rows_of[0], residual));
    int leaves = 1;
    while (leaves < hp_.num_leaves) {
      int pick = -1;
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (!open[i].second.valid) continue;
        if (pick < 0 || open[i].second.score > open[static_cast<std::size_t>(pick)].second.score) {
          pick = static_cast<int>(i);
        }
      }
      if (pick < 0) break;
      auto [node_id, cand] = std::move(open[static_cast<std::size_t>(pick)]);
      open.erase(open.begin() + pick);
      auto [left, right] = apply_split(tree, rows_of, node_id, cand, residual);
      open.emplace_back(left, best_split(rows_of[static_cast<std::size_t>(left)], residual));
      open.emplace_back(right, best_split(rows_of[static_cast<std::size_t>(right)], residual));
      ++leaves;
    }
  }

  void grow_depthwise(Tree& tree, std::vector<std::vector<std::size_t>>& rows_of,
                      const std::vector<double>& residual) const {
    std::vector<int> frontier = {0};
    for (int d = 0; d < hp_.depth && !frontier.empty(); ++d) {
      std::vector<int> next;
      for (int node_id : frontier) {
        SplitCandidate cand = best_split(rows_of[static_cast<std::size_t>(node_id)], residual);
        if (!cand.valid) continue;
        auto [left, right] = apply_split(tree, rows_of, node_id, cand, residual);
        next.push_back(left);
        next.push_back(right);
      }
      frontier = std::move(next);
    }
  }

  std::pair<int, int> apply_split(Tree& tree, std::vector<std::vector<std::size_t>>& rows_of, int node_id,
                                  const SplitCandidate& cand, const std::vector<double>& residual) const {
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.column = cand.column;
    node.categorical = cand.categorical;
    node.threshold = cand.threshold;
    node.level_set = cand.level_set;
    node.missing_left = cand.missing_left;

    std::vector<std::size_t> left_rows, right_rows;
    double g_left = 0.0, g_right = 0.0;
    for (std::size_t r : rows_of[static_cast<std::size_t>(node_id)]) {
      if (node.goes_left(xs_(r, static_cast<std::size_t>(cand.column)))) {
        left_rows.push_back(r);
        g_left += residual[r];
      } else {
        right_rows.push_back(r);
        g_right += residual[r];
      }
    }
    const double n_left = static_cast<double>(left_rows.size());
    const double n_right = static_cast<double>(right_rows.size());
    node.gain = std::max(0.0, split_gain(g_left, n_left, g_right, n_right, g_left + g_right, n_left + n_right));

    const int left = static_cast<int>(tree.nodes.size());
    const int right = left + 1;
    node.left = left;
    node.right = right;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    rows_of.push_back(std::move(left_rows));
    rows_of.push_back(std::move(right_rows));
    return {left, right};
  }

  SplitCandidate best_split(const std::vector<std::size_t>& rows, const std::vector<double>& residual) const {
    SplitCandidate best;
    const std::size_t min_leaf = static_cast<std::size_t>(hp_.min_samples_leaf);
    if (rows.size() < 2 * min_leaf) return best;

    double g_total = 0.0, sq_total = 0.0;
    for (std::size_t r : rows) {
      g_total += residual[r];
      sq_total += residual[r] * residual[r];
    }
    const double n_total = static_cast<double>(rows.size());
    const double min_gain = 1e-12 * std::max(1.0, sq_total);

    for (std::size_t c = 0; c < kinds_.size(); ++c) {
      if (kinds_[c] == ColumnKind::categorical) {
        categorical_split(rows, residual, c, g_total, n_total, min_gain, best);
      } else {
        numeric_split(rows, residual, c, g_total, n_total, min_gain, best);
      }
    }
    return best;
  }

  void numeric_split(const std::vector<std::size_t>& rows, const std::vector<double>& residual, std::size_t c,
                     double g_total, double n_total, double min_gain, SplitCandidate& best) const {
    const ColumnBins& cb = bins_[c];
    const std::size_t n_bins = cb.thresholds.size() + 1;
    if (n_bins < 2) return;
    std::vector<double> hist_g(n_bins, 0.0);
    std::vector<double> hist_n(n_bins, 0.0);
    double miss_g = 0.0, miss_n = 0.0;
    for (std::size_t r : rows) {
      const std::uint16_t b = cb.bin[r];
      if (b == kMissingBin) {
        miss_g += residual[r];
        miss_n += 1.0;
      } else {
        hist_g[b] += residual[r];
        hist_n[b] += 1.0;
      }
    }
    const double min_leaf = static_cast<double>(hp_.min_samples_leaf);
    double acc_g = 0.0, acc_n = 0.0;
    for (std::size_t b = 0; b + 1 < n_bins; ++b) {
      acc_g += hist_g[b];
      acc_n += hist_n[b];
      if (hist_n[b] == 0.0 && b > 0) continue;  // same partition as the previous threshold
      for (int side = 0; side < 2; ++side) {
        bool missing_left = side == 0;
        if (miss_n == 0.0) {
          if (side == 1) break;
          missing_left = acc_n >= n_total - acc_n;
        }
        const double g_left = acc_g + (missing_left ? miss_g : 0.0);
        const double n_left = acc_n + (missing_left ? miss_n : 0.0);
        const double n_right = n_total - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const double gain = split_gain(g_left, n_left, g_total - g_left, n_right, g_total, n_total);
        if (gain > min_gain && gain > best.score) {
          best.valid = true;
          best.score = gain;
          best.column = static_cast<int>(c);
          best.categorical = false;
          best.threshold = cb.thresholds[b];
          best.level_set.clear();
          best.missing_left = missing_left;
        }
      }
    }
  }

  // Candidate thresholds come from the ordered statistics of the node's rows
  // (each row encoded from its predecessors only); the stored split is the
  // equivalent level set under the full-data statistics, which is what
  // prediction evaluates.
  void categorical_split(const std::vector<std::size_t>& rows, const std::vector<double>& residual, std::size_t c,
                         double g_total, double n_total, double min_gain, SplitCandidate& best) const {
    const std::size_t n_levels = level_counts_[c];
    if (n_levels < 2) return;
    const auto& row_ts = row_stats_[c];
    const auto& lvl_ts = level_stats_[c];

    std::vector<std::size_t> order(rows);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return row_ts[a] != row_ts[b] ? row_ts[a] < row_ts[b] : a < b;
    });

    std::vector<double> node_level_count(n_levels, 0.0);
    for (std::size_t r : rows) node_level_count[static_cast<std::size_t>(xs_(r, c))] += 1.0;
    std::vector<std::size_t> levels_by_ts(n_levels);
    std::iota(levels_by_ts.begin(), levels_by_ts.end(), std::size_t{0});
    std::sort(levels_by_ts.begin(), levels_by_ts.end(), [&](std::size_t a, std::size_t b) {
      return lvl_ts[a] != lvl_ts[b] ? lvl_ts[a] < lvl_ts[b] : a < b;
    });

    const double min_leaf = static_cast<double>(hp_.min_samples_leaf);
    double acc_g = 0.0, acc_n = 0.0;
    std::size_t routed_levels = 0;
    double routed_n = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      acc_g += residual[order[k]];
      acc_n += 1.0;
      const double t = row_ts[order[k]];
      if (row_ts[order[k + 1]] == t) continue;
      while (routed_levels < n_levels && lvl_ts[levels_by_ts[routed_levels]] <= t) {
        routed_n += node_level_count[levels_by_ts[routed_levels]];
        ++routed_levels;
      }
      if (routed_levels == 0 || routed_levels == n_levels) continue;
      if (routed_n < min_leaf || n_total - routed_n < min_leaf) continue;
      const double gain = split_gain(acc_g, acc_n, g_total - acc_g, n_total - acc_n, g_total, n_total);
      if (gain > min_gain && gain > best.score) {
        best.valid = true;
        best.score = gain;
        best.column = static_cast<int>(c);
        best.categorical = true;
        best.threshold = t;
        best.level_set.assign(levels_by_ts.begin(), levels_by_ts.begin() + static_cast<std::ptrdiff_t>(routed_levels));
        std::vector<int> levels(best.level_set.begin(), best.level_set.end());
        std::sort(levels.begin(), levels.end());
        best.level_set = std::move(levels);
        best.missing_left = routed_n >= n_total - routed_n;
      }
    }
  }

  const Matrix& xs_;
  const std::vector<ColumnKind>& kinds_;
  const std::vector<std::size_t>& level_counts_;
  const std::vector<ColumnBins>& bins_;
  const std::vector<std::vector<double>>& row_stats_;
  const std::vector<std::vector<double>>& level_stats_;
  const Hyperparams& hp_;
};

void validate(const Hyperparams& hp) {
  if (!(hp.learning_rate > 0.0 && hp.learning_rate <= 1.0)) throw InvalidSpec("learning_rate must be in (0, 1]");
  if (hp.num_leaves < 2) throw InvalidSpec("num_leaves must be >= 2");
  if (hp.depth < 1) throw InvalidSpec("depth must be >= 1");
  if (hp.n_trees < 0) throw InvalidSpec("n_trees must be >= 0");
  if (hp.min_samples_leaf < 1) throw InvalidSpec("min_samples_leaf must be >= 1");
  if (hp.n_bins < 2 || hp.n_bins >= kMissingBin) throw InvalidSpec("n_bins must be in [2, 65534]");
}

}  // namespace

std::string to_string(GbdtVariant variant) {
  return variant == GbdtVariant::leafwise_onehot ? "leafwise" : "ordinal";
}

GbdtVariant gbdt_variant_from_string(const std::string& s) {
  if (s == "leafwise" || s == "leafwise_onehot") return GbdtVariant::leafwise_onehot;
  if (s == "ordinal" || s == "ordinal_categorical") return GbdtVariant::ordinal_categorical;
  throw InvalidSpec("unknown GBDT variant '" + s + "'");
}

nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
  return {{"learning_rate", hp.learning_rate}, {"num_leaves", hp.num_leaves}, {"depth", hp.depth},
          {"n_trees", hp.n_trees},             {"min_samples_leaf", hp.min_samples_leaf}, {"n_bins", hp.n_bins}};
}

Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams defaults) {
  Hyperparams hp = defaults;
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.num_leaves = j.value("num_leaves", hp.num_leaves);
  hp.depth = j.value("depth", hp.depth);
  hp.n_trees = j.value("n_trees", hp.n_trees);
  hp.min_samples_leaf = j.value("min_samples_leaf", hp.min_samples_leaf);
  hp.n_bins = j.value("n_bins", hp.n_bins);
  return hp;
}

bool TreeNode::goes_left(double x) const {
  if (std::isnan(x)) return missing_left;
  if (categorical) {
    const double rounded = std::nearbyint(x);
    if (rounded < 0.0 || rounded > static_cast<double>(std::numeric_limits<int>::max())) return missing_left;
    return std::binary_search(level_set.begin(), level_set.end(), static_cast<int>(rounded));
  }
  return x <= threshold;
}

double Tree::predict(std::span<const double> row) const {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& n = nodes[id];
    id = static_cast<std::size_t>(n.goes_left(row[static_cast<std::size_t>(n.column)]) ? n.left : n.right);
  }
  return nodes[id].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (nodes[id].is_leaf()) {
      best = std::max(best, d[id]);
      continue;
    }
    d[static_cast<std::size_t>(nodes[id].left)] = d[id] + 1;
    d[static_cast<std::size_t>(nodes[id].right)] = d[id] + 1;
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double GbdtModel::predict(std::span<const double> row) const {
  if (row.size() != column_names.size()) {
    throw EncodingMismatch("gbdt predict: expected " + std::to_string(column_names.size()) + " columns, got " +
                           std::to_string(row.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(row);
  return base_score + learning_rate * sum;
}

std::vector<double> GbdtModel::predict(const Matrix& rows) const {
  std::vector<double> out(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = predict(rows.row(r));
  return out;
}

std::vector<double> ordered_target_statistics(std::span<const std::size_t> levels, std::span<const double> y,
                                              std::span<const std::size_t> order, std::size_t n_levels, double prior,
                                              double a) {
  std::vector<double> sums(n_levels, 0.0);
  std::vector<double> counts(n_levels, 0.0);
  std::vector<double> encoded(levels.size(), prior);
  for (std::size_t r : order) {
    const std::size_t l = levels[r];
    encoded[r] = (sums[l] + prior * a) / (counts[l] + a);
    sums[l] += y[r];
    counts[l] += 1.0;
  }
  return encoded;
}

GbdtModel fit_gbdt(const DesignMatrix& x, const Hyperparams& hp, GbdtVariant variant, const GbdtOptions& options) {
  validate(hp);
  const MatrixView expected = variant == GbdtVariant::leafwise_onehot ? MatrixView::onehot : MatrixView::native;
  if (x.view != expected) {
    throw EncodingMismatch(to_string(variant) + " GBDT requires the " + to_string(expected) + " view");
  }
  const std::size_t n = x.rows();
  if (n < 2 * static_cast<std::size_t>(hp.min_samples_leaf) || n == 0) {
    throw InsufficientData("fit_gbdt: " + std::to_string(n) + " rows is fewer than 2 * min_samples_leaf");
  }

  GbdtModel model;
  model.variant = variant;
  model.hyperparams = hp;
  model.learning_rate = hp.learning_rate;
  model.column_names = x.column_names;
  model.column_kinds = x.column_kinds;
  model.level_counts = x.level_counts;
  model.permutation_seed = options.permutation_seed;
  model.prior_weight = options.prior_weight;

  const std::vector<double>& y = x.target;
  model.base_score = mean(y);
  model.prior = model.base_score;
  model.degenerate = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });

  const Matrix xs = x.with_missing_as_nan();
  const std::size_t p = x.cols();

  std::vector<ColumnBins> bins(p);
  std::vector<std::vector<double>> row_stats(p);
  std::vector<std::vector<double>> level_stats(p);
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < p; ++c) {
    if (x.column_kinds[c] != ColumnKind::categorical) {
      bins[c] = make_bins(xs, c, hp.n_bins);
      continue;
    }
    if (order.empty()) order = Rng(options.permutation_seed).permutation(n);
    const std::size_t n_levels = x.level_counts[c];
    std::vector<std::size_t> levels(n);
    std::vector<double> sums(n_levels, 0.0), counts(n_levels, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      levels[r] = static_cast<std::size_t>(x.values(r, c));
      sums[levels[r]] += y[r];
      counts[levels[r]] += 1.0;
    }
    row_stats[c] = ordered_target_statistics(levels, y, order, n_levels, model.prior, options.prior_weight);
    level_stats[c].resize(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) {
      level_stats[c][l] = (sums[l] + model.prior * options.prior_weight) / (counts[l] + options.prior_weight);
    }
    model.target_stats[x.column_names[c]] = level_stats[c];
  }

  TreeBuilder builder(xs, x.column_kinds, x.level_counts, bins, row_stats, level_stats, hp);
  std::vector<double> f(n, model.base_score);
  std::vector<double> residual(n);
  model.train_rmse.push_back(rmse(f, y));
  std::vector<std::vector<std::size_t>> leaf_rows;
  for (int t = 0; t < hp.n_trees; ++t) {
    for (std::size_t r = 0; r < n; ++r) residual[r] = y[r] - f[r];
    Tree tree = builder.build(residual, variant, leaf_rows);
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      if (!tree.nodes[id].is_leaf()) continue;
      const double step = hp.learning_rate * tree.nodes[id].value;
      for (std::size_t r : leaf_rows[id]) f[r] += step;
    }
    model.trees.push_back(std::move(tree));
    model.train_rmse.push_back(rmse(f, y));
  }
  return model;
}

std::map<std::string, double> gain_importance(const GbdtModel& model,
                                              const std::map<std::string, std::string>& dummy_map) {
  const std::size_t p = model.column_names.size();
  std::vector<double> total(p, 0.0), count(p, 0.0);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      total[static_cast<std::size_t>(node.column)] += node.gain;
      count[static_cast<std::size_t>(node.column)] += 1.0;
    }
  }
  std::map<std::string, double> out;
  for (std::size_t c = 0; c < p; ++c) {
    const double avg = count[c] > 0.0 ? total[c] / count[c] : 0.0;
    auto it = dummy_map.find(model.column_names[c]);
    out[it == dummy_map.end() ? model.column_names[c] : it->second] += avg;
  }
  return out;
}

namespace {

nlohmann::json node_to_json(const GbdtModel& model, const Tree& tree, std::size_t id) {
  const TreeNode& n = tree.nodes[id];
  if (n.is_leaf()) return {{"leaf", n.value}, {"count", n.count}};
  nlohmann::json j = {{"column", model.column_names[static_cast<std::size_t>(n.column)]},
                      {"gain", n.gain},
                      {"count", n.count},
                      {"default", n.missing_left ? "left" : "right"}};
  if (n.categorical) {
    j["level_set"] = n.level_set;
  } else {
    j["threshold"] = n.threshold;
  }
  j["left"] = node_to_json(model, tree, static_cast<std::size_t>(n.left));
  j["right"] = node_to_json(model, tree, static_cast<std::size_t>(n.right));
  return j;
}

int node_from_json(const nlohmann::json& j, const std::map<std::string, int>& column_index, Tree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes.back().value = j.at("leaf").get<double>();
    tree.nodes.back().count = j.value("count", std::size_t{0});
    return id;
  }
  TreeNode node;
  const auto column = j.at("column").get<std::string>();
  auto it = column_index.find(column);
  if (it == column_index.end()) throw EncodingMismatch("model JSON references unknown column '" + column + "'");
  node.column = it->second;
  node.gain = j.at("gain").get<double>();
  node.count = j.value("count", std::size_t{0});
  node.missing_left = j.at("default").get<std::string>() == "left";
  if (j.contains("level_set")) {
    node.categorical = true;
    node.level_set = j.at("level_set").get<std::vector<int>>();
  } else {
    node.threshold = j.at("threshold").get<double>();
  }
  node.left = node_from_json(j.at("left"), column_index, tree);
  node.right = node_from_json(j.at("right"), column_index, tree);
  tree.nodes[static_cast<std::size_t>(id)] = std::move(node);
  return id;
}

std::string column_kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::numerical:
      return "numerical";
    case ColumnKind::dummy:
      return "dummy";
    case ColumnKind::categorical:
      return "categorical";
  }
  return "numerical";
}

}  // namespace

nlohmann::json gbdt_to_json(const GbdtModel& model) {
  nlohmann::json columns = nlohmann::json::array();
  for (std::size_t c = 0; c < model.column_names.size(); ++c) {
    columns.push_back({{"name", model.column_names[c]},
                       {"kind", column_kind_name(model.column_kinds[c])},
                       {"levels", model.level_counts[c]}});
  }
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(model, t, 0));
  return {{"model", to_string(model.variant)},
          {"format_version", 1},
          {"base_score", model.base_score},
          {"learning_rate", model.learning_rate},
          {"hyperparams", hyperparams_to_json(model.hyperparams)},
          {"degenerate", model.degenerate},
          {"permutation_seed", model.permutation_seed},
          {"prior", model.prior},
          {"prior_weight", model.prior_weight},
          {"target_stats", model.target_stats},
          {"train_rmse", model.train_rmse},
          {"columns", std::move(columns)},
          {"trees", std::move(trees)}};
}

GbdtModel gbdt_from_json(const nlohmann::json& j) {
  GbdtModel model;
  model.variant = gbdt_variant_from_string(j.at("model").get<std::string>());
  model.base_score = j.at("base_score").get<double>();
  model.learning_rate = j.at("learning_rate").get<double>();
  model.hyperparams = hyperparams_from_json(j.at("hyperparams"));
  model.degenerate = j.value("degenerate", false);
  model.permutation_seed = j.value("permutation_seed", std::uint64_t{0});
  model.prior = j.value("prior", 0.0);
  model.prior_weight = j.value("prior_weight", 1.0);
  model.target_stats = j.value("target_stats", std::map<std::string, std::vector<double>>{});
  model.train_rmse = j.value("train_rmse", std::vector<double>{});
  std::map<std::string, int> index;
  for (const auto& c : j.at("columns")) {
    index[c.at("name").get<std::string>()] = static_cast<int>(model.column_names.size());
    model.column_names.push_back(c.at("name").get<std::string>());
    const auto kind = c.at("kind").get<std::string>();
    model.column_kinds.push_back(kind == "dummy"         ? ColumnKind::dummy
                                 : kind == "categorical" ? ColumnKind::categorical
                                                         : ColumnKind::numerical);
    model.level_counts.push_back(c.value("levels", std::size_t{0}));
  }
  for (const auto& t : j.at("trees")) {
    Tree tree;
    node_from_json(t, index, tree);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace featrank
