#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featrank/common.hpp"
#include "featrank/schema.hpp"
#include "json.hpp"

namespace featrank {

enum class GbdtVariant {
  leafwise_onehot,      // best-first growth on the one-hot view
  ordinal_categorical,  // level-wise growth on the native view, ordered target statistics
};

std::string to_string(GbdtVariant variant);
GbdtVariant gbdt_variant_from_string(const std::string& s);

struct Hyperparams {
  double learning_rate = 0.1;
  int num_leaves = 31;  // leafwise variant
  int depth = 6;        // ordinal variant
  int n_trees = 100;
  int min_samples_leaf = 5;
  int n_bins = 255;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

nlohmann::json hyperparams_to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams defaults = {});

/// Flat tree node. A node with left < 0 is a leaf.
struct TreeNode {
  int column = -1;
  bool categorical = false;
  double threshold = 0.0;      // numeric: x <= threshold goes left
  std::vector<int> level_set;  // categorical: sorted levels that go left
  double gain = 0.0;
  bool missing_left = true;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output before learning-rate scaling
  std::size_t count = 0;

  bool is_leaf() const noexcept { return left < 0; }
  /// NaN is missing and follows the default direction.
  bool goes_left(double x) const;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct GbdtModel {
  GbdtVariant variant = GbdtVariant::leafwise_onehot;
  Hyperparams hyperparams;
  double learning_rate = 0.1;
  double base_score = 0.0;
  std::vector<Tree> trees;

  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<std::size_t> level_counts;

  // Ordinal variant: per categorical column, full-data prior-smoothed target
  // mean of each level.
  std::map<std::string, std::vector<double>> target_stats;
  std::uint64_t permutation_seed = 0;
  double prior = 0.0;
  double prior_weight = 1.0;

  bool degenerate = false;          // zero-variance target
  std::vector<double> train_rmse;   // after 0, 1, ..., trees.size() trees

  double predict(std::span<const double> row) const;
  std::vector<double> predict(const Matrix& rows) const;
};

struct GbdtOptions {
  std::uint64_t permutation_seed = 0;
  double prior_weight = 1.0;
};

/// Squared-error gradient boosting. The leafwise variant expects a one-hot
/// DesignMatrix and the ordinal variant a native one.
GbdtModel fit_gbdt(const DesignMatrix& x, const Hyperparams& hp, GbdtVariant variant, const GbdtOptions& options = {});

/// Ordered target statistics over a fixed order: the row at position k of
/// `order` is encoded from rows at positions < k only,
/// (sum_y_same_level + prior * a) / (count_same_level + a).
std::vector<double> ordered_target_statistics(std::span<const std::size_t> levels, std::span<const double> y,
                                              std::span<const std::size_t> order, std::size_t n_levels, double prior,
                                              double a);

/// Mean split gain per column, with dummy columns summed into their parent.
/// Every column (or parent feature) appears, unused ones with 0.
std::map<std::string, double> gain_importance(const GbdtModel& model,
                                              const std::map<std::string, std::string>& dummy_map);

nlohmann::json gbdt_to_json(const GbdtModel& model);
GbdtModel gbdt_from_json(const nlohmann::json& j);

}  // namespace featrank
