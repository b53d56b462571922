#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "featrank/common.hpp"
#include "json.hpp"

namespace featrank {

/// One (product, attribute) observation from a long-format catalog extract.
struct RawAttributeRow {
  std::string product_id;
  std::string category_id;
  double price = 0.0;
  std::string attribute_name;
  std::string attribute_value;

  friend bool operator==(const RawAttributeRow&, const RawAttributeRow&) = default;
};

struct ProductRecord {
  std::string product_id;
  double price = 0.0;
  std::map<std::string, std::string> attributes;

  friend bool operator==(const ProductRecord&, const ProductRecord&) = default;
};

/// Products of one leaf category, ordered by product_id.
struct CategoryCorpus {
  std::string category_id;
  std::vector<ProductRecord> products;
  std::set<std::string> attribute_universe;

  friend bool operator==(const CategoryCorpus&, const CategoryCorpus&) = default;
};

enum class CatalogFormat { long_csv, json_lines };
enum class DuplicatePolicy { keep_first, error };

CatalogFormat catalog_format_from_string(std::string_view name);
/// Guesses the format from the file extension (.jsonl / .ndjson → json_lines).
CatalogFormat catalog_format_for_path(const std::filesystem::path& path);

std::vector<RawAttributeRow> parse_catalog(const std::filesystem::path& path, CatalogFormat format);
std::vector<RawAttributeRow> parse_catalog_text(std::string_view text, CatalogFormat format);

struct SkipEntry {
  std::string category_id;
  std::string reason;
  std::size_t count = 0;
};

struct AssembleResult {
  std::map<std::string, CategoryCorpus> corpora;
  std::vector<SkipEntry> skipped;
  std::vector<std::string> warnings;
  std::size_t duplicate_count = 0;
};

/// Groups rows into per-category corpora. Categories with fewer than
/// min_products products are excluded and listed in `skipped`.
AssembleResult assemble_corpora(const std::vector<RawAttributeRow>& rows, std::size_t min_products,
                                DuplicatePolicy policy);

/// Inverse of assembly: one row per (product, attribute), product order then
/// attribute-name order.
std::vector<RawAttributeRow> flatten(const CategoryCorpus& corpus);

nlohmann::json skip_report_json(const std::vector<SkipEntry>& skipped);

std::string write_catalog_csv(const std::vector<RawAttributeRow>& rows);

nlohmann::json corpus_to_json(const CategoryCorpus& corpus);
CategoryCorpus corpus_from_json(const nlohmann::json& j);

}  // namespace featrank
