#include "featrank/plots.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace featrank {

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "force" || s == "force_single") return PlotKind::force_single;
  if (s == "beeswarm" || s == "beeswarm_summary") return PlotKind::beeswarm_summary;
  if (s == "bar" || s == "bar_mean") return PlotKind::bar_mean;
  throw InvalidSpec("unknown plot kind '" + s + "'");
}

namespace {

std::vector<std::size_t> bar_order(const ShapExplanation& expl, const std::map<std::string, double>& scores) {
  std::vector<std::size_t> order(expl.feature_names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores.at(expl.feature_names[a]);
    const double sb = scores.at(expl.feature_names[b]);
    if (sa != sb) return sa > sb;
    return expl.feature_names[a] < expl.feature_names[b];
  });
  return order;
}

std::string display_of(const ShapExplanation& expl, std::size_t i, std::size_t f) {
  if (i < expl.display_values.size() && f < expl.display_values[i].size()) return expl.display_values[i][f];
  if (!expl.feature_values.empty() && !std::isnan(expl.feature_values(i, f))) {
    return format_double(expl.feature_values(i, f));
  }
  return "";
}

}  // namespace

nlohmann::json export_plot_data(const ShapExplanation& expl, PlotKind kind, std::size_t instance) {
  nlohmann::json doc = {{"schema_version", 1}, {"model", to_string(expl.model_tag)}};

  if (kind == PlotKind::force_single) {
    if (instance >= expl.phi.rows()) {
      throw IndexOutOfRange("instance " + std::to_string(instance) + " out of range (" +
                            std::to_string(expl.phi.rows()) + " instances)");
    }
    std::vector<std::size_t> order;
    for (std::size_t f = 0; f < expl.feature_names.size(); ++f) {
      if (expl.phi(instance, f) != 0.0) order.push_back(f);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double pa = std::abs(expl.phi(instance, a));
      const double pb = std::abs(expl.phi(instance, b));
      if (pa != pb) return pa > pb;
      return expl.feature_names[a] < expl.feature_names[b];
    });
    nlohmann::json contributions = nlohmann::json::array();
    for (std::size_t f : order) {
      contributions.push_back({{"name", expl.feature_names[f]},
                               {"phi", expl.phi(instance, f)},
                               {"display_value", display_of(expl, instance, f)}});
    }
    doc["kind"] = "force_single";
    doc["instance"] = instance;
    doc["instance_id"] = instance < expl.instance_ids.size() ? expl.instance_ids[instance] : std::to_string(instance);
    doc["base_value"] = expl.base_value;
    doc["output_value"] = expl.predictions.at(instance);
    doc["contributions"] = std::move(contributions);
    return doc;
  }

  const auto scores = mean_abs_shap(expl);
  const auto order = bar_order(expl, scores);

  if (kind == PlotKind::bar_mean) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t f : order) {
      entries.push_back({{"name", expl.feature_names[f]}, {"mean_abs_phi", scores.at(expl.feature_names[f])}});
    }
    doc["kind"] = "bar_mean";
    doc["entries"] = std::move(entries);
    return doc;
  }

  nlohmann::json features = nlohmann::json::array();
  for (std::size_t f : order) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    if (!expl.feature_values.empty()) {
      for (std::size_t i = 0; i < expl.phi.rows(); ++i) {
        const double v = expl.feature_values(i, f);
        if (std::isnan(v)) continue;
        lo = any ? std::min(lo, v) : v;
        hi = any ? std::max(hi, v) : v;
        any = true;
      }
    }
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < expl.phi.rows(); ++i) {
      nlohmann::json value = nullptr;
      if (any && !std::isnan(expl.feature_values(i, f))) {
        value = hi > lo ? (expl.feature_values(i, f) - lo) / (hi - lo) : 0.5;
      }
      points.push_back({{"instance", i}, {"phi", expl.phi(i, f)}, {"value", value}});
    }
    features.push_back({{"name", expl.feature_names[f]},
                        {"mean_abs_phi", scores.at(expl.feature_names[f])},
                        {"points", std::move(points)}});
  }
  doc["kind"] = "beeswarm_summary";
  doc["features"] = std::move(features);
  return doc;
}

}  // namespace featrank
