#include "featrank/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace featrank {

std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::linear:
      return "linear";
    case ModelTag::leafwise:
      return "leafwise";
    case ModelTag::ordinal:
      return "ordinal";
  }
  return "linear";
}

ModelTag model_tag_from_string(const std::string& s) {
  if (s == "linear") return ModelTag::linear;
  if (s == "leafwise") return ModelTag::leafwise;
  if (s == "ordinal") return ModelTag::ordinal;
  throw InvalidSpec("unknown model tag '" + s + "'");
}

std::vector<double> shap_exact(const PredictFn& predict, const Matrix& background, std::span<const double> instance,
                               std::size_t max_features) {
  const std::size_t p = instance.size();
  if (p > max_features || p >= 63) {
    throw TooManyFeatures("shap_exact: " + std::to_string(p) + " features exceeds the cap of " +
                          std::to_string(max_features));
  }
  if (background.rows() == 0) throw InvalidSpec("shap_exact: empty background");
  if (background.cols() != p) throw EncodingMismatch("shap_exact: background width differs from instance");

  const std::size_t n_coalitions = std::size_t{1} << p;
  std::vector<double> value(n_coalitions, 0.0);
  std::vector<double> hybrid(p);
  for (std::size_t mask = 0; mask < n_coalitions; ++mask) {
    double total = 0.0;
    for (std::size_t b = 0; b < background.rows(); ++b) {
      auto bg = background.row(b);
      for (std::size_t j = 0; j < p; ++j) hybrid[j] = (mask >> j) & 1U ? instance[j] : bg[j];
      total += predict(hybrid);
    }
    value[mask] = total / static_cast<double>(background.rows());
  }

  // weight(s) = s! (p - s - 1)! / p!
  std::vector<double> weight(p, 0.0);
  if (p > 0) {
    weight[0] = 1.0 / static_cast<double>(p);
    for (std::size_t s = 1; s < p; ++s) {
      weight[s] = weight[s - 1] * static_cast<double>(s) / static_cast<double>(p - s);
    }
  }

  std::vector<double> phi(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t mask = 0; mask < n_coalitions; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      phi[j] += weight[size] * (value[mask | bit] - value[mask]);
    }
  }
  return phi;
}

std::vector<double> shap_linear(const LinearModel& model, const Matrix& background, std::span<const double> instance) {
  if (instance.size() != model.weights.size() || background.cols() != model.weights.size()) {
    throw EncodingMismatch("shap_linear: column count mismatch");
  }
  if (background.rows() == 0) throw InvalidSpec("shap_linear: empty background");
  std::vector<double> bg_mean(instance.size(), 0.0);
  for (std::size_t b = 0; b < background.rows(); ++b) {
    for (std::size_t j = 0; j < instance.size(); ++j) bg_mean[j] += background(b, j);
  }
  std::vector<double> phi(instance.size());
  for (std::size_t j = 0; j < instance.size(); ++j) {
    bg_mean[j] /= static_cast<double>(background.rows());
    phi[j] = model.weights[j] * (instance[j] - bg_mean[j]);
  }
  return phi;
}

namespace {

// One (foreground, background) pair through one tree. A feature where the
// two rows diverge becomes a player: taking the foreground branch puts it in
// S_X (must be in the coalition), the background branch in S_Z (must be out).
// A leaf reached with |S_X| = a and |S_Z| = b pays
//   +v (a-1)! b! / (a+b)!  to each player in S_X,
//   -v a! (b-1)! / (a+b)!  to each player in S_Z.
struct PairWalker {
  const Tree& tree;
  std::span<const double> x;
  std::span<const double> z;
  const std::vector<std::vector<double>>& weights;
  double scale;
  std::vector<double>& phi;
  std::vector<std::uint8_t>& state;  // 0 unseen, 1 in S_X, 2 in S_Z
  std::vector<int>& in_x;
  std::vector<int>& in_z;

  void walk(std::size_t id) {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) {
      const std::size_t a = in_x.size(), b = in_z.size();
      if (a + b == 0 || node.value == 0.0) return;
      const double v = node.value * scale;
      if (a > 0) {
        const double w = v * weights[a - 1][b];
        for (int j : in_x) phi[static_cast<std::size_t>(j)] += w;
      }
      if (b > 0) {
        const double w = v * weights[a][b - 1];
        for (int j : in_z) phi[static_cast<std::size_t>(j)] -= w;
      }
      return;
    }
    const auto col = static_cast<std::size_t>(node.column);
    const bool x_left = node.goes_left(x[col]);
    const bool z_left = node.goes_left(z[col]);
    const auto x_child = static_cast<std::size_t>(x_left ? node.left : node.right);
    const auto z_child = static_cast<std::size_t>(z_left ? node.left : node.right);
    if (x_left == z_left) {
      walk(x_child);
      return;
    }
    if (state[col] == 1) {
      walk(x_child);
      return;
    }
    if (state[col] == 2) {
      walk(z_child);
      return;
    }
    state[col] = 1;
    in_x.push_back(node.column);
    walk(x_child);
    in_x.pop_back();
    state[col] = 2;
    in_z.push_back(node.column);
    walk(z_child);
    in_z.pop_back();
    state[col] = 0;
  }
};

}  // namespace

TreeExplainer::TreeExplainer(const GbdtModel& model, const Matrix& background)
    : model_(model), background_(background) {
  if (background.rows() == 0) throw InvalidSpec("shap_tree: empty background");
  if (background.cols() != model.column_names.size()) throw EncodingMismatch("shap_tree: background width mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < background.rows(); ++b) total += model.predict(background.row(b));
  base_value_ = total / static_cast<double>(background.rows());

  std::size_t max_depth = 0;
  for (const auto& t : model.trees) max_depth = std::max(max_depth, t.depth());
  const std::size_t d = max_depth + 1;
  weights_.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t t = 0; t < d; ++t) {
    weights_[0][t] = 1.0 / static_cast<double>(t + 1);
    for (std::size_t s = 1; s + t < d; ++s) {
      weights_[s][t] = weights_[s - 1][t] * static_cast<double>(s) / static_cast<double>(s + t + 1);
    }
  }
}

std::vector<double> TreeExplainer::shap(std::span<const double> instance) const {
  const std::size_t p = model_.column_names.size();
  if (instance.size() != p) throw EncodingMismatch("shap_tree: instance width mismatch");
  std::vector<double> phi(p, 0.0);
  std::vector<std::uint8_t> state(p, 0);
  std::vector<int> in_x, in_z;
  const double scale = model_.learning_rate / static_cast<double>(background_.rows());
  for (const auto& tree : model_.trees) {
    if (tree.nodes.size() <= 1) continue;
    for (std::size_t b = 0; b < background_.rows(); ++b) {
      PairWalker walker{tree, instance, background_.row(b), weights_, scale, phi, state, in_x, in_z};
      walker.walk(0);
    }
  }
  return phi;
}

std::vector<double> shap_tree(const GbdtModel& model, const Matrix& background, std::span<const double> instance) {
  return TreeExplainer(model, background).shap(instance);
}

double background_base_value(const PredictFn& predict, const Matrix& background) {
  if (background.rows() == 0) throw InvalidSpec("empty background");
  double total = 0.0;
  for (std::size_t b = 0; b < background.rows(); ++b) total += predict(background.row(b));
  return total / static_cast<double>(background.rows());
}

std::vector<double> aggregate_dummies(std::span<const double> phi_columns, const std::vector<std::string>& column_names,
                                      const DummyMap& dummy_map, const std::vector<std::string>& feature_order) {
  if (phi_columns.size() != column_names.size()) throw EncodingMismatch("aggregate_dummies: width mismatch");
  std::map<std::string, std::size_t> position;
  for (std::size_t f = 0; f < feature_order.size(); ++f) position.emplace(feature_order[f], f);

  std::vector<double> out(feature_order.size(), 0.0);
  for (std::size_t c = 0; c < column_names.size(); ++c) {
    auto parent = dummy_map.find(column_names[c]);
    const std::string& feature = parent == dummy_map.end() ? column_names[c] : parent->second;
    auto it = position.find(feature);
    if (it == position.end()) throw UnmappedColumn("column '" + column_names[c] + "' maps to no known feature");
    out[it->second] += phi_columns[c];
  }
  return out;
}

namespace {

template <typename ColumnShap>
ShapExplanation explain_rows(ModelTag tag, double base_value, const Matrix& instances, std::size_t background_size,
                             const std::vector<std::string>& column_names, const DummyMap& dummy_map,
                             const std::vector<std::string>& feature_order, const PredictFn& predict,
                             ColumnShap&& column_shap) {
  ShapExplanation expl;
  expl.model_tag = tag;
  expl.base_value = base_value;
  expl.feature_names = feature_order;
  expl.background_size = background_size;
  expl.phi = Matrix(instances.rows(), feature_order.size());
  expl.predictions.resize(instances.rows());
  for (std::size_t i = 0; i < instances.rows(); ++i) {
    const auto cols = column_shap(instances.row(i));
    const auto agg = aggregate_dummies(cols, column_names, dummy_map, feature_order);
    std::copy(agg.begin(), agg.end(), expl.phi.row(i).begin());
    expl.predictions[i] = predict(instances.row(i));
  }
  return expl;
}

}  // namespace

ShapExplanation explain_linear(const LinearModel& model, const Matrix& instances, const Matrix& background,
                               const DummyMap& dummy_map, const std::vector<std::string>& feature_order) {
  const PredictFn predict = [&](std::span<const double> r) { return model.predict(r); };
  return explain_rows(ModelTag::linear, background_base_value(predict, background), instances, background.rows(),
                      model.column_names, dummy_map, feature_order, predict,
                      [&](std::span<const double> row) { return shap_linear(model, background, row); });
}

ShapExplanation explain_tree(const GbdtModel& model, const Matrix& instances, const Matrix& background,
                             const DummyMap& dummy_map, const std::vector<std::string>& feature_order) {
  const TreeExplainer explainer(model, background);
  const PredictFn predict = [&](std::span<const double> r) { return model.predict(r); };
  const ModelTag tag = model.variant == GbdtVariant::leafwise_onehot ? ModelTag::leafwise : ModelTag::ordinal;
  return explain_rows(tag, explainer.base_value(), instances, background.rows(), model.column_names, dummy_map,
                      feature_order, predict, [&](std::span<const double> row) { return explainer.shap(row); });
}

std::map<std::string, double> mean_abs_shap(const ShapExplanation& expl) {
  std::map<std::string, double> out;
  const std::size_t n = expl.phi.rows();
  for (std::size_t j = 0; j < expl.feature_names.size(); ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::abs(expl.phi(i, j));
    out[expl.feature_names[j]] = n > 0 ? total / static_cast<double>(n) : 0.0;
  }
  return out;
}

nlohmann::json explanation_to_json(const ShapExplanation& expl) {
  nlohmann::json instances = nlohmann::json::array();
  for (std::size_t i = 0; i < expl.phi.rows(); ++i) {
    auto row = expl.phi.row(i);
    nlohmann::json inst = {{"id", i < expl.instance_ids.size() ? expl.instance_ids[i] : std::to_string(i)},
                           {"prediction", expl.predictions.at(i)},
                           {"phi", std::vector<double>(row.begin(), row.end())}};
    if (!expl.feature_values.empty()) {
      nlohmann::json values = nlohmann::json::array();
      for (double v : expl.feature_values.row(i)) values.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
      inst["values"] = std::move(values);
    }
    if (i < expl.display_values.size()) inst["display"] = expl.display_values[i];
    instances.push_back(std::move(inst));
  }
  return {{"format_version", 1},
          {"model", to_string(expl.model_tag)},
          {"base_value", expl.base_value},
          {"background_size", expl.background_size},
          {"features", expl.feature_names},
          {"instances", std::move(instances)}};
}

ShapExplanation explanation_from_json(const nlohmann::json& j) {
  ShapExplanation expl;
  expl.model_tag = model_tag_from_string(j.at("model").get<std::string>());
  expl.base_value = j.at("base_value").get<double>();
  expl.background_size = j.at("background_size").get<std::size_t>();
  expl.feature_names = j.at("features").get<std::vector<std::string>>();
  const auto& instances = j.at("instances");
  const std::size_t p = expl.feature_names.size();
  expl.phi = Matrix(instances.size(), p);
  bool has_values = !instances.empty() && instances.front().contains("values");
  if (has_values) expl.feature_values = Matrix(instances.size(), p);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    expl.instance_ids.push_back(inst.at("id").get<std::string>());
    expl.predictions.push_back(inst.at("prediction").get<double>());
    const auto phi = inst.at("phi").get<std::vector<double>>();
    if (phi.size() != p) throw EncodingMismatch("explanation JSON: phi width mismatch");
    std::copy(phi.begin(), phi.end(), expl.phi.row(i).begin());
    if (has_values) {
      const auto& values = inst.at("values");
      for (std::size_t f = 0; f < p; ++f) {
        expl.feature_values(i, f) =
            values[f].is_null() ? std::numeric_limits<double>::quiet_NaN() : values[f].get<double>();
      }
    }
    if (inst.contains("display")) expl.display_values.push_back(inst["display"].get<std::vector<std::string>>());
  }
  return expl;
}

}  // namespace featrank
