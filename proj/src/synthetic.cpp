#include "featrank/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace featrank {

namespace {

void validate(const SyntheticSpec& spec) {
  if (spec.category_id.empty()) throw InvalidSpec("synthetic spec: empty category_id");
  if (spec.n_products == 0) throw InvalidSpec("synthetic spec: n_products must be >= 1");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw InvalidSpec("synthetic spec: noise_sigma must be >= 0");
  }
  if (spec.decimals < 0 || spec.decimals > 9) throw InvalidSpec("synthetic spec: decimals must be in [0, 9]");

  std::set<std::string> names;
  bool any_driver = false;
  for (const auto& f : spec.numeric) {
    if (f.name.empty() || !names.insert(f.name).second) throw InvalidSpec("synthetic spec: bad or repeated feature name '" + f.name + "'");
    if (!(f.low < f.high)) throw InvalidSpec("synthetic spec: '" + f.name + "' needs low < high");
    if (!std::isfinite(f.coef)) throw InvalidSpec("synthetic spec: '" + f.name + "' has a non-finite coefficient");
    any_driver = any_driver || f.coef != 0.0;
  }
  for (const auto& c : spec.categorical) {
    if (c.name.empty() || !names.insert(c.name).second) throw InvalidSpec("synthetic spec: bad or repeated feature name '" + c.name + "'");
    if (c.offsets.size() < 2) throw InvalidSpec("synthetic spec: '" + c.name + "' needs at least two levels");
    std::set<std::string> levels;
    for (const auto& [level, offset] : c.offsets) {
      if (level.empty() || !levels.insert(level).second) throw InvalidSpec("synthetic spec: '" + c.name + "' has a bad or repeated level");
      if (offset != c.offsets.front().second) any_driver = true;
    }
  }
  if (!any_driver) throw InvalidSpec("synthetic spec: needs at least one nonzero coefficient or offset spread");
  for (std::size_t k = 1; k <= spec.nuisance; ++k) {
    if (!names.insert("nuisance_" + std::to_string(k)).second) throw InvalidSpec("synthetic spec: nuisance name collision");
  }
}

std::string render(double value, int decimals, const std::string& unit) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string out = buf;
  if (!unit.empty()) out += " " + unit;
  return out;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

}  // namespace

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  std::vector<SyntheticNumeric> numeric = spec.numeric;
  for (std::size_t k = 1; k <= spec.nuisance; ++k) {
    numeric.push_back({"nuisance_" + std::to_string(k), 0.0, 0.0, 10.0, "in"});
  }

  SyntheticResult result;
  result.corpus.category_id = spec.category_id;
  const int width = std::max<int>(4, static_cast<int>(std::to_string(spec.n_products).size()));
  for (std::size_t i = 0; i < spec.n_products; ++i) {
    ProductRecord p;
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%0*zu", spec.category_id.c_str(), width, i + 1);
    p.product_id = id;
    double price = spec.intercept;
    for (const auto& f : numeric) {
      const double x = round_to(rng.uniform(f.low, f.high), spec.decimals);
      p.attributes[f.name] = render(x, spec.decimals, f.unit);
      price += f.coef * x;
    }
    for (const auto& c : spec.categorical) {
      const auto& [level, offset] = c.offsets[rng.index(c.offsets.size())];
      p.attributes[c.name] = level;
      price += offset;
    }
    price += rng.normal(0.0, spec.noise_sigma);
    p.price = std::max(price, 0.01);
    result.corpus.products.push_back(std::move(p));
  }
  for (const auto& f : numeric) result.corpus.attribute_universe.insert(f.name);
  for (const auto& c : spec.categorical) result.corpus.attribute_universe.insert(c.name);

  for (const auto& f : spec.numeric) {
    if (f.coef == 0.0) continue;
    result.ground_truth.push_back({f.name, std::abs(f.coef) * (f.high - f.low) / std::sqrt(12.0),
                                   f.coef > 0.0 ? Sign::positive : Sign::negative});
  }
  for (const auto& c : spec.categorical) {
    double m = 0.0;
    for (const auto& [_, offset] : c.offsets) m += offset;
    m /= static_cast<double>(c.offsets.size());
    double var = 0.0;
    for (const auto& [_, offset] : c.offsets) var += (offset - m) * (offset - m);
    const double sd = std::sqrt(var / static_cast<double>(c.offsets.size()));
    if (sd > 0.0) result.ground_truth.push_back({c.name, sd, Sign::zero});
  }
  std::sort(result.ground_truth.begin(), result.ground_truth.end(), [](const TrueDriver& a, const TrueDriver& b) {
    if (a.strength != b.strength) return a.strength > b.strength;
    return a.feature < b.feature;
  });
  return result;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidSpec("synthetic spec must be a JSON object");
  SyntheticSpec spec;
  try {
    spec.category_id = j.value("category_id", spec.category_id);
    spec.n_products = j.value("n_products", spec.n_products);
    spec.intercept = j.value("intercept", spec.intercept);
    spec.nuisance = j.value("nuisance", spec.nuisance);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.seed = j.value("seed", spec.seed);
    spec.decimals = j.value("decimals", spec.decimals);
    for (const auto& f : j.value("numeric", nlohmann::json::array())) {
      SyntheticNumeric n;
      n.name = f.at("name").get<std::string>();
      n.coef = f.value("coef", 0.0);
      n.low = f.value("low", n.low);
      n.high = f.value("high", n.high);
      n.unit = f.value("unit", n.unit);
      spec.numeric.push_back(std::move(n));
    }
    for (const auto& c : j.value("categorical", nlohmann::json::array())) {
      SyntheticCategorical cat;
      cat.name = c.at("name").get<std::string>();
      const auto& offsets = c.at("offsets");
      if (offsets.is_object()) {
        for (const auto& [level, offset] : offsets.items()) cat.offsets.emplace_back(level, offset.get<double>());
      } else {
        for (const auto& pair : offsets) cat.offsets.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
      }
      spec.categorical.push_back(std::move(cat));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("synthetic spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::json numeric = nlohmann::json::array();
  for (const auto& f : spec.numeric) {
    numeric.push_back({{"name", f.name}, {"coef", f.coef}, {"low", f.low}, {"high", f.high}, {"unit", f.unit}});
  }
  nlohmann::json categorical = nlohmann::json::array();
  for (const auto& c : spec.categorical) {
    nlohmann::json offsets = nlohmann::json::array();
    for (const auto& [level, offset] : c.offsets) offsets.push_back({level, offset});
    categorical.push_back({{"name", c.name}, {"offsets", std::move(offsets)}});
  }
  return {{"category_id", spec.category_id}, {"n_products", spec.n_products}, {"intercept", spec.intercept},
          {"numeric", std::move(numeric)},   {"categorical", std::move(categorical)},
          {"nuisance", spec.nuisance},       {"noise_sigma", spec.noise_sigma},
          {"seed", spec.seed},               {"decimals", spec.decimals}};
}

std::vector<SyntheticSpec> synthetic_catalog_from_json(const nlohmann::json& j) {
  std::vector<SyntheticSpec> specs;
  if (j.is_object() && j.contains("categories")) {
    std::set<std::string> ids;
    for (const auto& c : j.at("categories")) {
      specs.push_back(synthetic_spec_from_json(c));
      if (!ids.insert(specs.back().category_id).second) {
        throw InvalidSpec("synthetic catalog: repeated category_id '" + specs.back().category_id + "'");
      }
    }
    if (specs.empty()) throw InvalidSpec("synthetic catalog: no categories");
  } else {
    specs.push_back(synthetic_spec_from_json(j));
  }
  return specs;
}

nlohmann::json ground_truth_to_json(const std::vector<TrueDriver>& truth) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : truth) out.push_back({{"feature", d.feature}, {"strength", d.strength}, {"sign", to_string(d.sign)}});
  return out;
}

}  // namespace featrank
