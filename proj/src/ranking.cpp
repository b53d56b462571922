#include "featrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace featrank {

namespace {

constexpr std::array<const char*, 3> kModelKeys = {"linear", "leafwise", "ordinal"};

std::optional<std::string> attribute(const ProductRecord& p, const std::string& name) {
  auto it = p.attributes.find(name);
  if (it == p.attributes.end()) return std::nullopt;
  std::string v = trim(it->second);
  if (v.empty()) return std::nullopt;
  return v;
}

bool same_value(const std::string& a, const std::string& b, const FeatureSpec* spec) {
  if (spec && spec->is_numerical()) {
    auto na = parse_numeric(a);
    auto nb = parse_numeric(b);
    if (na && nb) return *na == *nb;
  }
  return a == b;
}

}  // namespace

std::vector<std::string> FeatureRanking::feature_order() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.feature);
  return out;
}

void finalize_order(FeatureRanking& ranking) {
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
    return a.feature < b.feature;
  });
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) ranking.entries[i].rank = i + 1;
}

FeatureRanking fuse_rankings(const std::string& category_id, const ScoreMap& linear, const ScoreMap& leafwise,
                             const ScoreMap& ordinal, const std::map<std::string, Sign>& signs) {
  const auto same_keys = [](const ScoreMap& a, const ScoreMap& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
             return x.first == y.first;
           });
  };
  if (!same_keys(linear, leafwise) || !same_keys(linear, ordinal)) {
    throw KeySetMismatch("fuse_rankings: per-model score maps cover different features");
  }

  FeatureRanking ranking;
  ranking.category_id = category_id;
  auto leaf_it = leafwise.begin();
  auto ord_it = ordinal.begin();
  for (const auto& [feature, lin_score] : linear) {
    auto sign_it = signs.find(feature);
    if (sign_it == signs.end()) throw KeySetMismatch("fuse_rankings: no sign for feature '" + feature + "'");
    RankingEntry e;
    e.feature = feature;
    e.per_model_scores = {lin_score, leaf_it->second, ord_it->second};
    e.fused_score = (lin_score + leaf_it->second + ord_it->second) / 3.0;
    e.sign = sign_it->second;
    ranking.entries.push_back(std::move(e));
    ++leaf_it;
    ++ord_it;
  }
  finalize_order(ranking);
  return ranking;
}

std::vector<RankingEntry> top_k(const FeatureRanking& ranking, std::size_t k) {
  if (k == 0) throw InvalidSpec("top_k: k must be >= 1");
  const std::size_t n = std::min(k, ranking.entries.size());
  return {ranking.entries.begin(), ranking.entries.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::string format_usd(double amount) {
  char buf[64];
  const double rounded = std::round(amount * 100.0) / 100.0;
  if (std::abs(rounded - std::round(rounded)) < 1e-9) {
    std::snprintf(buf, sizeof(buf), "$%.0f", rounded);
  } else {
    std::snprintf(buf, sizeof(buf), "$%.2f", rounded);
  }
  return buf;
}

PriceMessage price_delta_message(const ProductRecord& anchor, const ProductRecord& alternative,
                                 const FeatureRanking& ranking, const CategorySchema& schema) {
  for (const auto& entry : ranking.entries) {
    const FeatureSpec* spec = schema.find(entry.feature);
    if (spec && spec->is_excluded()) continue;
    const auto a = attribute(anchor, entry.feature);
    const auto b = attribute(alternative, entry.feature);
    if (!a && !b) continue;
    if (a && b && same_value(*a, *b, spec)) continue;

    PriceMessage msg;
    msg.feature = entry.feature;
    msg.anchor_value = a.value_or("");
    msg.alt_value = b.value_or("");
    msg.one_sided_missing = !a || !b;
    msg.price_delta = alternative.price - anchor.price;
    msg.direction = msg.price_delta > 0.0 ? PriceDirection::upgrade : PriceDirection::save;
    const std::string shown = b ? *b : std::string("unspecified");
    const std::string amount = format_usd(std::abs(msg.price_delta));
    if (msg.direction == PriceDirection::upgrade) {
      msg.text = "Upgrade to " + shown + " " + entry.feature + " for " + amount + " more";
    } else {
      msg.text = "Spend " + amount + " less for " + shown + " " + entry.feature;
    }
    return msg;
  }
  throw NoDifferingFeature("products '" + anchor.product_id + "' and '" + alternative.product_id +
                           "' do not differ on any ranked feature");
}

nlohmann::json entries_to_json(const std::vector<RankingEntry>& entries) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json per_model;
    for (std::size_t m = 0; m < kModelKeys.size(); ++m) per_model[kModelKeys[m]] = e.per_model_scores[m];
    out.push_back({{"rank", e.rank},
                   {"feature", e.feature},
                   {"fused_score", e.fused_score},
                   {"sign", to_string(e.sign)},
                   {"per_model_scores", std::move(per_model)}});
  }
  return out;
}

nlohmann::json ranking_to_json(const FeatureRanking& ranking, const std::string& generated_at) {
  return {{"category_id", ranking.category_id},
          {"generated_at", generated_at},
          {"config_hash", ranking.provenance.config_hash},
          {"degenerate", ranking.degenerate},
          {"note", ranking.note},
          {"provenance",
           {{"algorithm", ranking.provenance.algorithm},
            {"model_versions", ranking.provenance.model_versions},
            {"seed", ranking.provenance.seed},
            {"config_hash", ranking.provenance.config_hash}}},
          {"entries", entries_to_json(ranking.entries)}};
}

FeatureRanking ranking_from_json(const nlohmann::json& j) {
  FeatureRanking r;
  r.category_id = j.at("category_id").get<std::string>();
  r.degenerate = j.value("degenerate", false);
  r.note = j.value("note", "");
  r.provenance.config_hash = j.value("config_hash", "");
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    r.provenance.algorithm = p.value("algorithm", r.provenance.algorithm);
    r.provenance.model_versions = p.value("model_versions", std::map<std::string, std::string>{});
    r.provenance.seed = p.value("seed", std::uint64_t{0});
  }
  for (const auto& e : j.at("entries")) {
    RankingEntry entry;
    entry.rank = e.at("rank").get<std::size_t>();
    entry.feature = e.at("feature").get<std::string>();
    entry.fused_score = e.at("fused_score").get<double>();
    entry.sign = sign_from_string(e.at("sign").get<std::string>());
    const auto& per_model = e.at("per_model_scores");
    for (std::size_t m = 0; m < kModelKeys.size(); ++m) entry.per_model_scores[m] = per_model.value(kModelKeys[m], 0.0);
    r.entries.push_back(std::move(entry));
  }
  return r;
}

std::string ranking_table(const FeatureRanking& ranking, std::size_t k) {
  const auto entries = top_k(ranking, std::max<std::size_t>(k, 1));
  std::size_t width = 7;
  for (const auto& e : entries) width = std::max(width, e.feature.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-4s  %-*s  %10s  %-8s  %10s  %10s  %10s\n", "Rank", static_cast<int>(width),
                "Feature", "Fused", "Sign", "Linear", "Leafwise", "Ordinal");
  out << buf;
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%-4zu  %-*s  %10.4f  %-8s  %10.4f  %10.4f  %10.4f\n", e.rank,
                  static_cast<int>(width), e.feature.c_str(), e.fused_score, to_string(e.sign).c_str(),
                  e.per_model_scores[0], e.per_model_scores[1], e.per_model_scores[2]);
    out << buf;
  }
  return out.str();
}

nlohmann::json message_to_json(const PriceMessage& m) {
  return {{"feature", m.feature},
          {"anchor_value", m.anchor_value},
          {"alt_value", m.alt_value},
          {"price_delta", m.price_delta},
          {"direction", m.direction == PriceDirection::upgrade ? "upgrade" : "save"},
          {"text", m.text},
          {"one_sided_missing", m.one_sided_missing}};
}

}  // namespace featrank
