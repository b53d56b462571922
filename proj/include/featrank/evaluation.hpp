#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "featrank/ranking.hpp"
#include "json.hpp"

namespace featrank {

struct ClickLog {
  std::string category_id;
  std::map<std::string, double> counts;  // feature → engagement count
};

struct ExpertLabels {
  std::string category_id;
  std::vector<std::string> relevant_ordered;  // most important first
};

/// Click-frequency baseline: features by count descending, ties by name,
/// zero counts dropped. An empty log gives an empty ranking (cold start).
FeatureRanking left_nav_ranking(const ClickLog& log);

enum class Relevance { binary, graded };

struct NdcgOptions {
  Relevance relevance = Relevance::binary;
  std::size_t depth = 0;  // 0 = whole predicted list
};

/// Binary relevance: rel = 1 for labeled features. Graded: the label at
/// position q of an L-long expert list has rel = L - q. DCG = sum rel_i /
/// log2(i + 1), IDCG from the ideal ordering of the labels.
double ndcg(const std::vector<std::string>& predicted, const ExpertLabels& labels, const NdcgOptions& options = {});

/// hits / k; missing prediction slots count as misses.
double precision_at_k(const std::vector<std::string>& predicted, const ExpertLabels& labels, std::size_t k);
double recall_at_k(const std::vector<std::string>& predicted, const ExpertLabels& labels, std::size_t k);

/// Fraction of `universe` with a non-empty ranking.
double coverage(const std::map<std::string, std::optional<FeatureRanking>>& rankings,
                const std::set<std::string>& universe);

struct MetricRow {
  double ndcg = 0.0;
  double p_at_5 = 0.0;
  double p_at_10 = 0.0;
  double r_at_5 = 0.0;
  double r_at_10 = 0.0;
};

using RankingSet = std::map<std::string, std::optional<FeatureRanking>>;  // category → ranking

struct EvalReport {
  std::vector<std::string> algorithms;  // column order
  std::map<std::string, std::map<std::string, MetricRow>> per_category;  // category → algorithm → metrics
  std::map<std::string, double> coverage;                                // algorithm → fraction
  std::size_t universe_size = 0;
};

/// Scores every algorithm on every labeled category; coverage is taken over
/// `universe`. A category without a ranking scores zero on every metric.
EvalReport evaluate(const std::map<std::string, ExpertLabels>& labels,
                    const std::vector<std::pair<std::string, RankingSet>>& algorithms,
                    const std::set<std::string>& universe, const NdcgOptions& options = {});

nlohmann::json report_to_json(const EvalReport& report);
/// Fixed-width text table, one block per algorithm.
std::string report_table(const EvalReport& report);

/// {category_id: [feature, ...]}
std::map<std::string, ExpertLabels> labels_from_json(const nlohmann::json& j);
nlohmann::json labels_to_json(const std::map<std::string, ExpertLabels>& labels);
/// {category_id: {feature: count}}
std::map<std::string, ClickLog> clicks_from_json(const nlohmann::json& j);

}  // namespace featrank
