#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "featrank/common.hpp"
#include "featrank/gbdt.hpp"
#include "featrank/linear.hpp"
#include "json.hpp"

namespace featrank {

using PredictFn = std::function<double(std::span<const double>)>;
using DummyMap = std::map<std::string, std::string>;

enum class ModelTag { linear, leafwise, ordinal };

std::string to_string(ModelTag tag);
ModelTag model_tag_from_string(const std::string& s);

/// Per-instance attributions against a fixed background set. phi has one row
/// per instance and one column per original feature (dummies aggregated).
/// Local accuracy: base_value + sum(phi.row(i)) == predictions[i].
struct ShapExplanation {
  ModelTag model_tag = ModelTag::linear;
  double base_value = 0.0;
  Matrix phi;
  std::vector<std::string> feature_names;
  std::size_t background_size = 0;
  std::vector<std::string> instance_ids;
  std::vector<double> predictions;

  // Optional, for plot export: per instance and feature, a numeric value
  // (NaN when missing) and the raw display string.
  Matrix feature_values;
  std::vector<std::vector<std::string>> display_values;
};

/// Brute-force interventional Shapley values: enumerates all 2^p coalitions,
/// v(S) = mean over background rows b of f(instance on S, b elsewhere).
std::vector<double> shap_exact(const PredictFn& predict, const Matrix& background, std::span<const double> instance,
                               std::size_t max_features = 15);

/// Closed form for a linear model: w_j * (x_j - mean_b(b_j)).
std::vector<double> shap_linear(const LinearModel& model, const Matrix& background, std::span<const double> instance);

/// Interventional tree attribution. Rows use NaN for missing cells.
/// Equal to shap_exact with the same background and predict function.
class TreeExplainer {
 public:
  TreeExplainer(const GbdtModel& model, const Matrix& background);

  std::vector<double> shap(std::span<const double> instance) const;
  double base_value() const noexcept { return base_value_; }

 private:
  const GbdtModel& model_;
  const Matrix& background_;
  double base_value_ = 0.0;
  std::vector<std::vector<double>> weights_;  // weights_[s][t] = s! t! / (s + t + 1)!
};

std::vector<double> shap_tree(const GbdtModel& model, const Matrix& background, std::span<const double> instance);

/// Mean prediction over the background rows.
double background_base_value(const PredictFn& predict, const Matrix& background);

/// Sums dummy-column attributions into their parent feature; other columns
/// pass through. Output follows feature_order.
std::vector<double> aggregate_dummies(std::span<const double> phi_columns, const std::vector<std::string>& column_names,
                                      const DummyMap& dummy_map, const std::vector<std::string>& feature_order);

ShapExplanation explain_linear(const LinearModel& model, const Matrix& instances, const Matrix& background,
                               const DummyMap& dummy_map, const std::vector<std::string>& feature_order);
ShapExplanation explain_tree(const GbdtModel& model, const Matrix& instances, const Matrix& background,
                             const DummyMap& dummy_map, const std::vector<std::string>& feature_order);

/// (1/n) sum_i |phi[i, j]| per feature.
std::map<std::string, double> mean_abs_shap(const ShapExplanation& expl);

nlohmann::json explanation_to_json(const ShapExplanation& expl);
ShapExplanation explanation_from_json(const nlohmann::json& j);

}  // namespace featrank
