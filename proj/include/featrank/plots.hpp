#pragma once

#include <cstddef>

#include "featrank/shapley.hpp"
#include "json.hpp"

namespace featrank {

enum class PlotKind { force_single, beeswarm_summary, bar_mean };

PlotKind plot_kind_from_string(const std::string& s);

/// Plot-data documents for external renderers (schema_version 1).
///
/// force_single: {schema_version, kind, model, instance, instance_id,
///   base_value, output_value, contributions: [{name, phi, display_value}]}
///   sorted by |phi| descending (ties by name), exact zeros dropped.
/// beeswarm_summary: {schema_version, kind, model, features: [{name,
///   mean_abs_phi, points: [{instance, phi, value}]}]} with features in
///   bar order and `value` min-max normalized per feature (null if missing).
/// bar_mean: {schema_version, kind, model, entries: [{name, mean_abs_phi}]}
///   sorted descending, ties by name.
nlohmann::json export_plot_data(const ShapExplanation& expl, PlotKind kind, std::size_t instance = 0);

}  // namespace featrank
