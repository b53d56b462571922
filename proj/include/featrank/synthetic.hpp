#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "featrank/ingest.hpp"
#include "featrank/linear.hpp"
#include "json.hpp"

namespace featrank {

struct SyntheticNumeric {
  std::string name;
  double coef = 0.0;  // USD per unit
  double low = 0.0;   // x ~ U[low, high)
  double high = 10.0;
  std::string unit = "lb";
};

struct SyntheticCategorical {
  std::string name;
  std::vector<std::pair<std::string, double>> offsets;  // level → USD offset, drawn uniformly
};

struct SyntheticSpec {
  std::string category_id = "synthetic";
  std::size_t n_products = 500;
  double intercept = 100.0;
  std::vector<SyntheticNumeric> numeric;
  std::vector<SyntheticCategorical> categorical;
  std::size_t nuisance = 0;  // numeric features with zero coefficient
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int decimals = 2;  // rendering precision of numeric attribute values
};

struct TrueDriver {
  std::string feature;
  double strength = 0.0;  // expected |contribution| spread, USD
  Sign sign = Sign::zero;
};

struct SyntheticResult {
  CategoryCorpus corpus;
  std::vector<TrueDriver> ground_truth;  // strongest first, ties by name
};

/// price = intercept + sum coef * x + sum offset(level) + Normal(0, sigma),
/// clipped to stay positive. Prices use the rendered (rounded) values, so
/// a noiseless spec is exactly linear in what the parser reads back.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);

/// A catalog spec is either one SyntheticSpec object or
/// {"categories": [SyntheticSpec, ...]}.
std::vector<SyntheticSpec> synthetic_catalog_from_json(const nlohmann::json& j);

nlohmann::json ground_truth_to_json(const std::vector<TrueDriver>& truth);

}  // namespace featrank
