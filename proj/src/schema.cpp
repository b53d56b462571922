#include "featrank/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

namespace featrank {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Length of a number at the start of s, grouping commas allowed only in
// strict thousands form ("1,200,000").
std::size_t scan_number(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  const std::size_t int_start = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  std::size_t int_digits = i - int_start;
  if (int_digits > 0 && int_digits <= 3) {
    std::size_t j = i;
    while (j + 3 < s.size() && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) && is_digit(s[j + 3]) &&
           (j + 4 == s.size() || !is_digit(s[j + 4]))) {
      j += 4;
    }
    i = j;
  }
  bool frac_digits = false;
  if (i < s.size() && s[i] == '.') {
    std::size_t j = i + 1;
    while (j < s.size() && is_digit(s[j])) ++j;
    frac_digits = j > i + 1;
    if (int_digits > 0 || frac_digits) i = j;
  }
  if (int_digits == 0 && !frac_digits) return 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    const std::size_t exp_start = j;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j > exp_start && (j == s.size() || !is_alpha(s[j]))) i = j;
  }
  return i;
}

bool is_unit_char(unsigned char c) {
  return is_alpha(static_cast<char>(c)) || c == '.' || c == '%' || c == '"' || c == '\'' || c == '/' || c == ' ' ||
         c == '-' || c == '\t' || c >= 0x80;
}

// A unit token: no digits, starts with a letter-like character, at most three
// whitespace-separated words ("lb", "sq. ft.", "in.", "%", "°F").
std::optional<std::string> parse_unit(std::string_view rest) {
  std::string unit = trim(rest);
  if (!unit.empty() && unit.front() == '-') unit = trim(std::string_view(unit).substr(1));
  if (unit.empty()) return std::nullopt;
  const auto first = static_cast<unsigned char>(unit.front());
  if (!(is_alpha(static_cast<char>(first)) || first == '%' || first == '"' || first == '\'' || first >= 0x80)) {
    throw std::invalid_argument("not a unit");
  }
  std::size_t words = 1;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const auto c = static_cast<unsigned char>(unit[i]);
    if (!is_unit_char(c)) throw std::invalid_argument("not a unit");
    if ((c == ' ' || c == '\t') && i + 1 < unit.size() && unit[i + 1] != ' ' && unit[i + 1] != '\t') ++words;
  }
  if (words > 3) throw std::invalid_argument("not a unit");
  return unit;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::optional<std::string> value_of(const ProductRecord& p, const std::string& name) {
  auto it = p.attributes.find(name);
  if (it == p.attributes.end()) return std::nullopt;
  std::string v = trim(it->second);
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<NumericValue> parse_numeric_with_unit(std::string_view value) {
  const std::string text = trim(value);
  const std::size_t len = scan_number(text);
  if (len == 0) return std::nullopt;

  std::optional<std::string> unit;
  try {
    unit = parse_unit(std::string_view(text).substr(len));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }

  std::string digits;
  digits.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (text[i] != ',' && text[i] != '+') digits.push_back(text[i]);
  }
  double number = 0.0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(number)) return std::nullopt;
  return NumericValue{number, std::move(unit)};
}

std::optional<double> parse_numeric(std::string_view value) {
  auto parsed = parse_numeric_with_unit(value);
  if (!parsed) return std::nullopt;
  return parsed->value;
}

std::vector<const FeatureSpec*> CategorySchema::included_features() const {
  std::vector<const FeatureSpec*> out;
  for (const auto& s : specs) {
    if (!s.is_excluded()) out.push_back(&s);
  }
  return out;
}

const FeatureSpec* CategorySchema::find(std::string_view name) const {
  for (const auto& s : specs) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

CategorySchema infer_schema(const CategoryCorpus& corpus, const SchemaRules& rules) {
  if (corpus.products.empty()) throw EmptyCorpus("category '" + corpus.category_id + "' has no products");
  const double n = static_cast<double>(corpus.products.size());

  CategorySchema schema;
  schema.category_id = corpus.category_id;
  for (const auto& name : corpus.attribute_universe) {
    FeatureSpec spec;
    spec.name = name;

    std::set<std::string> distinct;
    std::set<double> distinct_numbers;
    std::map<std::string, std::size_t> unit_counts;
    std::size_t present = 0, parsed = 0, max_len = 0;
    for (const auto& p : corpus.products) {
      auto v = value_of(p, name);
      if (!v) continue;
      ++present;
      max_len = std::max(max_len, utf8_length(*v));
      if (auto num = parse_numeric_with_unit(*v)) {
        ++parsed;
        distinct_numbers.insert(num->value);
        if (num->unit) ++unit_counts[*num->unit];
      }
      distinct.insert(std::move(*v));
    }
    const std::size_t missing = corpus.products.size() - present;

    if (static_cast<double>(missing) > rules.max_missing_ratio * n) {
      spec.kind = Excluded{ExclusionReason::too_sparse};
      spec.missing_count = missing;
    } else if (present > 0 && static_cast<double>(parsed) >= rules.numeric_ratio * static_cast<double>(present)) {
      spec.missing_count = corpus.products.size() - parsed;
      if (distinct_numbers.size() <= 1) {
        spec.kind = Excluded{ExclusionReason::constant};
      } else {
        Numerical num;
        std::size_t best = 0;
        for (const auto& [unit, count] : unit_counts) {
          if (count > best) {  // map order breaks ties lexicographically
            best = count;
            num.observed_unit = unit;
          }
        }
        spec.kind = std::move(num);
      }
    } else {
      spec.missing_count = missing;
      if (distinct.size() <= 1) {
        spec.kind = Excluded{ExclusionReason::constant};
      } else if (distinct.size() <= rules.categorical_max_levels && max_len <= rules.max_categorical_len) {
        spec.kind = Categorical{{distinct.begin(), distinct.end()}};
      } else {
        spec.kind = Excluded{ExclusionReason::textual};
      }
    }
    schema.specs.push_back(std::move(spec));
  }
  return schema;
}

Matrix DesignMatrix::with_missing_as_nan() const {
  Matrix out = values;
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      if (missing(r, c)) out(r, c) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> indices) const {
  DesignMatrix out = *this;
  out.values = values.select_rows(indices);
  out.missing_mask.assign(indices.size() * cols(), 0);
  out.target.resize(indices.size());
  out.product_ids.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(missing_mask.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols()), cols(),
                out.missing_mask.begin() + static_cast<std::ptrdiff_t>(i * cols()));
    out.target[i] = target[indices[i]];
    out.product_ids[i] = product_ids[indices[i]];
  }
  return out;
}

DesignMatrix encode(const CategoryCorpus& corpus, const CategorySchema& schema, MatrixView view) {
  for (const auto& name : corpus.attribute_universe) {
    if (!schema.find(name)) {
      throw SchemaMismatch("attribute '" + name + "' of category '" + corpus.category_id + "' is not in the schema");
    }
  }

  const std::size_t n = corpus.products.size();
  DesignMatrix dm;
  dm.view = view;
  dm.target.reserve(n);
  for (const auto& p : corpus.products) {
    dm.target.push_back(p.price);
    dm.product_ids.push_back(p.product_id);
  }

  // Column-major staging, transposed into the row-major matrix at the end.
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<std::uint8_t>> masks;

  for (const FeatureSpec* spec : schema.included_features()) {
    const std::size_t feature_index = dm.feature_names.size();
    dm.feature_names.push_back(spec->name);

    if (spec->is_numerical()) {
      std::vector<double> col(n, 0.0);
      std::vector<std::uint8_t> mask(n, 0);
      std::vector<double> observed;
      for (std::size_t i = 0; i < n; ++i) {
        auto raw = value_of(corpus.products[i], spec->name);
        auto num = raw ? parse_numeric(*raw) : std::nullopt;
        if (num) {
          col[i] = *num;
          observed.push_back(*num);
        } else {
          mask[i] = 1;
        }
      }
      const double fill = median_of(observed);
      for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) col[i] = fill;
      }
      dm.feature_levels.emplace_back();
      dm.column_names.push_back(spec->name);
      dm.column_kinds.push_back(ColumnKind::numerical);
      dm.column_feature.push_back(feature_index);
      dm.level_counts.push_back(0);
      dm.fill_values.push_back(fill);
      columns.push_back(std::move(col));
      masks.push_back(std::move(mask));
      continue;
    }

    const auto& levels = std::get<Categorical>(spec->kind).levels;
    std::vector<std::size_t> level_of(n, levels.size());
    bool any_missing = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto raw = value_of(corpus.products[i], spec->name);
      if (!raw) {
        any_missing = true;
        continue;
      }
      auto it = std::lower_bound(levels.begin(), levels.end(), *raw);
      if (it == levels.end() || *it != *raw) {
        throw SchemaMismatch("value '" + *raw + "' of '" + spec->name + "' is not a known level");
      }
      level_of[i] = static_cast<std::size_t>(it - levels.begin());
    }
    std::vector<std::string> all_levels = levels;
    if (any_missing) all_levels.emplace_back(kMissingLevel);

    if (view == MatrixView::native) {
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = static_cast<double>(level_of[i]);
      dm.column_names.push_back(spec->name);
      dm.column_kinds.push_back(ColumnKind::categorical);
      dm.column_feature.push_back(feature_index);
      dm.level_counts.push_back(all_levels.size());
      dm.fill_values.push_back(0.0);
      columns.push_back(std::move(col));
      masks.emplace_back(n, 0);
    } else {
      for (std::size_t l = 0; l < all_levels.size(); ++l) {
        std::vector<double> col(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) col[i] = level_of[i] == l ? 1.0 : 0.0;
        std::string column = spec->name + "=" + all_levels[l];
        dm.dummy_map.emplace(column, spec->name);
        dm.column_names.push_back(std::move(column));
        dm.column_kinds.push_back(ColumnKind::dummy);
        dm.column_feature.push_back(feature_index);
        dm.level_counts.push_back(0);
        dm.fill_values.push_back(0.0);
        columns.push_back(std::move(col));
        masks.emplace_back(n, 0);
      }
    }
    dm.feature_levels.push_back(std::move(all_levels));
  }

  const std::size_t p = columns.size();
  dm.values = Matrix(n, p);
  dm.missing_mask.assign(n * p, 0);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      dm.values(r, c) = columns[c][r];
      dm.missing_mask[r * p + c] = masks[c][r];
    }
  }
  return dm;
}

std::string to_string(MatrixView view) { return view == MatrixView::onehot ? "onehot" : "native"; }

std::string to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::textual:
      return "textual";
    case ExclusionReason::constant:
      return "constant";
    case ExclusionReason::too_sparse:
      return "too_sparse";
  }
  return "textual";
}

nlohmann::json schema_to_json(const CategorySchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& s : schema.specs) {
    nlohmann::json f = {{"name", s.name}, {"missing_count", s.missing_count}};
    if (const auto* num = std::get_if<Numerical>(&s.kind)) {
      f["kind"] = "numerical";
      f["unit"] = num->observed_unit ? nlohmann::json(*num->observed_unit) : nlohmann::json(nullptr);
    } else if (const auto* cat = std::get_if<Categorical>(&s.kind)) {
      f["kind"] = "categorical";
      f["levels"] = cat->levels;
    } else {
      f["kind"] = "excluded";
      f["reason"] = to_string(std::get<Excluded>(s.kind).reason);
    }
    features.push_back(std::move(f));
  }
  return {{"schema_version", 1}, {"category_id", schema.category_id}, {"features", std::move(features)}};
}

CategorySchema schema_from_json(const nlohmann::json& j) {
  CategorySchema schema;
  schema.category_id = j.at("category_id").get<std::string>();
  for (const auto& f : j.at("features")) {
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    spec.missing_count = f.value("missing_count", std::size_t{0});
    const auto kind = f.at("kind").get<std::string>();
    if (kind == "numerical") {
      Numerical num;
      if (f.contains("unit") && f["unit"].is_string()) num.observed_unit = f["unit"].get<std::string>();
      spec.kind = std::move(num);
    } else if (kind == "categorical") {
      spec.kind = Categorical{f.at("levels").get<std::vector<std::string>>()};
    } else if (kind == "excluded") {
      const auto reason = f.at("reason").get<std::string>();
      Excluded ex;
      if (reason == "constant") ex.reason = ExclusionReason::constant;
      else if (reason == "too_sparse") ex.reason = ExclusionReason::too_sparse;
      else ex.reason = ExclusionReason::textual;
      spec.kind = ex;
    } else {
      throw DataError("schema: unknown feature kind '" + kind + "'");
    }
    schema.specs.push_back(std::move(spec));
  }
  return schema;
}

}  // namespace featrank
