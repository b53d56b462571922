#include "featrank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace featrank {

FeatureRanking left_nav_ranking(const ClickLog& log) {
  FeatureRanking ranking;
  ranking.category_id = log.category_id;
  ranking.provenance.algorithm = "left_nav";
  for (const auto& [feature, count] : log.counts) {
    if (!(count > 0.0) || !std::isfinite(count)) continue;
    RankingEntry e;
    e.feature = feature;
    e.fused_score = count;
    e.per_model_scores = {count, count, count};
    ranking.entries.push_back(std::move(e));
  }
  finalize_order(ranking);
  return ranking;
}

namespace {

// The first `limit` predicted slots. A repeated feature keeps its slot but
// maps to nullptr, so it scores as a miss.
std::vector<const std::string*> first_occurrences(const std::vector<std::string>& predicted, std::size_t limit) {
  std::vector<const std::string*> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < std::min(limit, predicted.size()); ++i) {
    out.push_back(seen.insert(predicted[i]).second ? &predicted[i] : nullptr);
  }
  return out;
}

std::size_t hits_in_top_k(const std::vector<std::string>& predicted, const ExpertLabels& labels, std::size_t k) {
  const std::set<std::string> relevant(labels.relevant_ordered.begin(), labels.relevant_ordered.end());
  std::size_t hits = 0;
  for (const auto* f : first_occurrences(predicted, k)) hits += f != nullptr && relevant.count(*f);
  return hits;
}

}  // namespace

double ndcg(const std::vector<std::string>& predicted, const ExpertLabels& labels, const NdcgOptions& options) {
  if (labels.relevant_ordered.empty()) throw EmptyLabels("no expert labels for '" + labels.category_id + "'");
  const std::size_t limit = options.depth == 0 ? predicted.size() : options.depth;
  const auto list = first_occurrences(predicted, limit);
  if (list.empty()) return 0.0;

  const std::size_t n_labels = labels.relevant_ordered.size();
  std::map<std::string, double> gain;
  for (std::size_t q = 0; q < n_labels; ++q) {
    gain.emplace(labels.relevant_ordered[q],
                 options.relevance == Relevance::binary ? 1.0 : static_cast<double>(n_labels - q));
  }

  double dcg = 0.0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == nullptr) continue;
    auto it = gain.find(*list[i]);
    if (it != gain.end()) dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
  }

  std::vector<double> ideal;
  for (const auto& [f, g] : gain) ideal.push_back(g);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const std::size_t ideal_len = options.depth == 0 ? ideal.size() : std::min(ideal.size(), options.depth);
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal_len; ++i) idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  return idcg > 0.0 ? std::min(1.0, dcg / idcg) : 0.0;
}

double precision_at_k(const std::vector<std::string>& predicted, const ExpertLabels& labels, std::size_t k) {
  if (k == 0) throw InvalidSpec("precision_at_k: k must be >= 1");
  return static_cast<double>(hits_in_top_k(predicted, labels, k)) / static_cast<double>(k);
}

double recall_at_k(const std::vector<std::string>& predicted, const ExpertLabels& labels, std::size_t k) {
  if (k == 0) throw InvalidSpec("recall_at_k: k must be >= 1");
  if (labels.relevant_ordered.empty()) throw EmptyLabels("no expert labels for '" + labels.category_id + "'");
  return static_cast<double>(hits_in_top_k(predicted, labels, k)) /
         static_cast<double>(labels.relevant_ordered.size());
}

double coverage(const std::map<std::string, std::optional<FeatureRanking>>& rankings,
                const std::set<std::string>& universe) {
  if (universe.empty()) throw InvalidSpec("coverage: empty category universe");
  std::size_t covered = 0;
  for (const auto& category : universe) {
    auto it = rankings.find(category);
    if (it != rankings.end() && it->second && !it->second->empty()) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(universe.size());
}

EvalReport evaluate(const std::map<std::string, ExpertLabels>& labels,
                    const std::vector<std::pair<std::string, RankingSet>>& algorithms,
                    const std::set<std::string>& universe, const NdcgOptions& options) {
  EvalReport report;
  report.universe_size = universe.size();
  for (const auto& [name, rankings] : algorithms) {
    report.algorithms.push_back(name);
    report.coverage[name] = universe.empty() ? 0.0 : coverage(rankings, universe);
    for (const auto& [category, label] : labels) {
      std::vector<std::string> predicted;
      auto it = rankings.find(category);
      if (it != rankings.end() && it->second) predicted = it->second->feature_order();
      MetricRow row;
      row.ndcg = ndcg(predicted, label, options);
      row.p_at_5 = precision_at_k(predicted, label, 5);
      row.p_at_10 = precision_at_k(predicted, label, 10);
      row.r_at_5 = recall_at_k(predicted, label, 5);
      row.r_at_10 = recall_at_k(predicted, label, 10);
      report.per_category[category][name] = row;
    }
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [category, by_alg] : report.per_category) {
    nlohmann::json entry = nlohmann::json::object();
    for (const auto& [alg, m] : by_alg) {
      entry[alg] = {{"ndcg", m.ndcg},
                    {"precision@5", m.p_at_5},
                    {"precision@10", m.p_at_10},
                    {"recall@5", m.r_at_5},
                    {"recall@10", m.r_at_10}};
    }
    categories[category] = std::move(entry);
  }
  return {{"report_version", 1},
          {"algorithms", report.algorithms},
          {"universe_size", report.universe_size},
          {"coverage", report.coverage},
          {"categories", std::move(categories)}};
}

std::string report_table(const EvalReport& report) {
  std::size_t width = 8;
  for (const auto& [category, _] : report.per_category) width = std::max(width, category.size());
  std::ostringstream out;
  char buf[512];
  for (const auto& alg : report.algorithms) {
    std::snprintf(buf, sizeof(buf), "%-*s  %s (coverage %.2f over %zu categories)\n", static_cast<int>(width),
                  "Category", alg.c_str(), report.coverage.at(alg), report.universe_size);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-*s  %6s  %12s  %13s  %9s  %10s\n", static_cast<int>(width), "", "NDCG",
                  "Precision@5", "Precision@10", "Recall@5", "Recall@10");
    out << buf;
    for (const auto& [category, by_alg] : report.per_category) {
      const MetricRow& m = by_alg.at(alg);
      std::snprintf(buf, sizeof(buf), "%-*s  %6.2f  %12.2f  %13.2f  %9.2f  %10.2f\n", static_cast<int>(width),
                    category.c_str(), m.ndcg, m.p_at_5, m.p_at_10, m.r_at_5, m.r_at_10);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::map<std::string, ExpertLabels> labels_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("labels file must be a JSON object {category_id: [feature, ...]}");
  std::map<std::string, ExpertLabels> out;
  for (const auto& [category, list] : j.items()) {
    ExpertLabels labels;
    labels.category_id = category;
    std::set<std::string> seen;
    for (const auto& f : list) {
      auto name = f.get<std::string>();
      if (!seen.insert(name).second) throw DataError("labels for '" + category + "' repeat feature '" + name + "'");
      labels.relevant_ordered.push_back(std::move(name));
    }
    if (labels.relevant_ordered.empty()) throw EmptyLabels("no expert labels for '" + category + "'");
    out.emplace(category, std::move(labels));
  }
  return out;
}

nlohmann::json labels_to_json(const std::map<std::string, ExpertLabels>& labels) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [category, l] : labels) out[category] = l.relevant_ordered;
  return out;
}

std::map<std::string, ClickLog> clicks_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("click log file must be a JSON object {category_id: {feature: count}}");
  std::map<std::string, ClickLog> out;
  for (const auto& [category, counts] : j.items()) {
    ClickLog log;
    log.category_id = category;
    if (!counts.is_null()) {
      for (const auto& [feature, count] : counts.items()) {
        const double c = count.get<double>();
        if (!(c >= 0.0) || !std::isfinite(c)) throw DataError("click count for '" + feature + "' must be >= 0");
        log.counts[feature] = c;
      }
    }
    out.emplace(category, std::move(log));
  }
  return out;
}

}  // namespace featrank
