#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "featrank/common.hpp"
#include "featrank/ingest.hpp"
#include "json.hpp"

namespace featrank {

struct SchemaRules {
  double numeric_ratio = 0.8;
  std::size_t categorical_max_levels = 10;
  std::size_t max_categorical_len = 30;
  double max_missing_ratio = 0.5;
};

struct Numerical {
  std::optional<std::string> observed_unit;
  friend bool operator==(const Numerical&, const Numerical&) = default;
};

struct Categorical {
  std::vector<std::string> levels;  // distinct, lexicographic
  friend bool operator==(const Categorical&, const Categorical&) = default;
};

enum class ExclusionReason { textual, constant, too_sparse };

struct Excluded {
  ExclusionReason reason = ExclusionReason::textual;
  friend bool operator==(const Excluded&, const Excluded&) = default;
};

using FeatureKind = std::variant<Numerical, Categorical, Excluded>;

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
  // Products without a usable value: attribute absent, or (for numerical
  // features) present but unparseable.
  std::size_t missing_count = 0;

  bool is_numerical() const { return std::holds_alternative<Numerical>(kind); }
  bool is_categorical() const { return std::holds_alternative<Categorical>(kind); }
  bool is_excluded() const { return std::holds_alternative<Excluded>(kind); }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct CategorySchema {
  std::string category_id;
  std::vector<FeatureSpec> specs;  // lexicographic by name

  std::vector<const FeatureSpec*> included_features() const;
  const FeatureSpec* find(std::string_view name) const;

  friend bool operator==(const CategorySchema&, const CategorySchema&) = default;
};

/// Reserved level for products that lack a categorical attribute.
inline constexpr std::string_view kMissingLevel = "⟨missing⟩";

struct NumericValue {
  double value = 0.0;
  std::optional<std::string> unit;
};

/// Extracts a number optionally followed by a unit token ("51.8 lb" or
/// "1,200 sq. ft."). Never returns NaN or infinity.
std::optional<NumericValue> parse_numeric_with_unit(std::string_view value);
std::optional<double> parse_numeric(std::string_view value);

CategorySchema infer_schema(const CategoryCorpus& corpus, const SchemaRules& rules = {});

enum class MatrixView { onehot, native };

enum class ColumnKind { numerical, dummy, categorical };

/// Numeric encoding of a corpus. One-hot view: one column per numerical
/// feature plus one 0/1 column per categorical level. Native view: one column
/// per included feature, categorical cells holding level indices.
struct DesignMatrix {
  MatrixView view = MatrixView::onehot;
  std::vector<std::string> column_names;
  Matrix values;
  std::vector<std::uint8_t> missing_mask;  // row-major, same shape as values
  std::vector<double> target;
  std::map<std::string, std::string> dummy_map;  // dummy column → parent feature

  // Per-column metadata.
  std::vector<ColumnKind> column_kinds;
  std::vector<std::size_t> column_feature;  // index into feature_names
  std::vector<std::size_t> level_counts;    // categorical columns only, else 0
  std::vector<double> fill_values;          // imputed median for numerical columns

  // Included features in schema order; categorical levels include the
  // reserved missing level when it was needed.
  std::vector<std::string> feature_names;
  std::vector<std::vector<std::string>> feature_levels;
  std::vector<std::string> product_ids;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
  bool missing(std::size_t r, std::size_t c) const { return missing_mask[r * cols() + c] != 0; }

  /// Values with missing cells replaced by NaN; this is the representation
  /// tree models consume (NaN follows the split's default direction).
  Matrix with_missing_as_nan() const;

  DesignMatrix select_rows(std::span<const std::size_t> indices) const;
};

DesignMatrix encode(const CategoryCorpus& corpus, const CategorySchema& schema, MatrixView view);

std::string to_string(MatrixView view);
std::string to_string(ExclusionReason reason);

nlohmann::json schema_to_json(const CategorySchema& schema);
CategorySchema schema_from_json(const nlohmann::json& j);

}  // namespace featrank
