#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "featrank/ingest.hpp"
#include "featrank/linear.hpp"
#include "featrank/schema.hpp"
#include "json.hpp"

namespace featrank {

struct RankingEntry {
  std::string feature;
  double fused_score = 0.0;                     // USD
  std::array<double, 3> per_model_scores{};     // linear, leafwise, ordinal
  Sign sign = Sign::zero;
  std::size_t rank = 0;                         // 1-based

  friend bool operator==(const RankingEntry&, const RankingEntry&) = default;
};

struct Provenance {
  std::string algorithm = "shap_fusion";
  std::map<std::string, std::string> model_versions;
  std::uint64_t seed = 0;
  std::string config_hash;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Signed per-category ranking: entries by fused score descending, ties by
/// feature name, ranks 1..n.
struct FeatureRanking {
  std::string category_id;
  std::vector<RankingEntry> entries;
  Provenance provenance;
  bool degenerate = false;
  std::string note;

  bool empty() const noexcept { return entries.empty(); }
  std::vector<std::string> feature_order() const;

  friend bool operator==(const FeatureRanking&, const FeatureRanking&) = default;
};

using ScoreMap = std::map<std::string, double>;

/// Unweighted mean of the three per-model mean-|phi| scores, signed by the
/// linear model. All three maps must share one key set.
FeatureRanking fuse_rankings(const std::string& category_id, const ScoreMap& linear, const ScoreMap& leafwise,
                             const ScoreMap& ordinal, const std::map<std::string, Sign>& signs);

/// Sorts entries by (score desc, name asc) and renumbers ranks.
void finalize_order(FeatureRanking& ranking);

std::vector<RankingEntry> top_k(const FeatureRanking& ranking, std::size_t k);

enum class PriceDirection { upgrade, save };

struct PriceMessage {
  std::string feature;
  std::string anchor_value;
  std::string alt_value;
  double price_delta = 0.0;  // alternative.price - anchor.price
  PriceDirection direction = PriceDirection::save;
  std::string text;
  bool one_sided_missing = false;
};

/// Picks the highest-ranked feature on which the two products differ and
/// renders the upgrade / save message for the alternative.
PriceMessage price_delta_message(const ProductRecord& anchor, const ProductRecord& alternative,
                                 const FeatureRanking& ranking, const CategorySchema& schema);

/// "$130" for whole dollars, "$129.99" otherwise.
std::string format_usd(double amount);

nlohmann::json ranking_to_json(const FeatureRanking& ranking, const std::string& generated_at);
FeatureRanking ranking_from_json(const nlohmann::json& j);
nlohmann::json entries_to_json(const std::vector<RankingEntry>& entries);
std::string ranking_table(const FeatureRanking& ranking, std::size_t k);
nlohmann::json message_to_json(const PriceMessage& message);

}  // namespace featrank
