#include "featrank/ingest.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "featrank/common.hpp"

namespace featrank {

namespace {

constexpr std::array<const char*, 5> kColumns = {"product_id", "category_id", "price", "attribute_name",
                                                 "attribute_value"};

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Each record carries the physical line it started on.
std::vector<CsvRecord> read_csv_records(std::string_view text) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (record_has_content) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) throw MalformedRow(line, "unexpected quote inside field");
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) throw MalformedRow(current.line, "unterminated quoted field");
  end_record();
  return records;
}

double parse_price(std::string_view raw, std::size_t line) {
  const std::string text = trim(raw);
  if (text.empty()) throw MalformedRow(line, "missing price");
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw MalformedRow(line, "unparseable price '" + text + "'");
  }
  if (value <= 0.0) throw NonPositivePrice(line, text);
  return value;
}

RawAttributeRow make_row(std::string product_id, std::string category_id, double price, std::string name,
                         std::string value, std::size_t line) {
  if (trim(product_id).empty()) throw MalformedRow(line, "empty product_id");
  if (trim(category_id).empty()) throw MalformedRow(line, "empty category_id");
  if (trim(name).empty()) throw MalformedRow(line, "empty attribute_name");
  return RawAttributeRow{std::move(product_id), std::move(category_id), price, std::move(name), std::move(value)};
}

std::vector<RawAttributeRow> parse_csv(std::string_view text) {
  auto records = read_csv_records(text);
  std::vector<RawAttributeRow> rows;
  if (records.empty()) return rows;

  const auto& header = records.front().fields;
  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return trim(h) == kColumns[c]; });
    if (it == header.end()) throw MissingColumn(kColumns[c]);
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw MalformedRow(rec.line, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(rec.fields.size()));
    }
    const double price = parse_price(rec.fields[index[2]], rec.line);
    rows.push_back(make_row(std::move(rec.fields[index[0]]), std::move(rec.fields[index[1]]), price,
                            std::move(rec.fields[index[3]]), std::move(rec.fields[index[4]]), rec.line));
  }
  return rows;
}

std::string json_string_field(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRow(line, std::string("missing key '") + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw MalformedRow(line, std::string("key '") + key + "' must be a string");
}

std::vector<RawAttributeRow> parse_json_lines(std::string_view text) {
  std::vector<RawAttributeRow> rows;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line;
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    if (trim(raw).empty()) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedRow(line, e.what());
    }
    if (!obj.is_object()) throw MalformedRow(line, "expected a JSON object");

    auto price_it = obj.find("price");
    if (price_it == obj.end() || price_it->is_null()) throw MalformedRow(line, "missing price");
    double price = 0.0;
    if (price_it->is_number()) {
      price = price_it->get<double>();
      if (!std::isfinite(price)) throw MalformedRow(line, "non-finite price");
      if (price <= 0.0) throw NonPositivePrice(line, price_it->dump());
    } else if (price_it->is_string()) {
      price = parse_price(price_it->get<std::string>(), line);
    } else {
      throw MalformedRow(line, "price must be a number");
    }
    rows.push_back(make_row(json_string_field(obj, "product_id", line), json_string_field(obj, "category_id", line),
                            price, json_string_field(obj, "attribute_name", line),
                            json_string_field(obj, "attribute_value", line), line));
  }
  return rows;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CatalogFormat catalog_format_from_string(std::string_view name) {
  if (name == "long_csv" || name == "csv") return CatalogFormat::long_csv;
  if (name == "json_lines" || name == "jsonl") return CatalogFormat::json_lines;
  throw DataError("unknown catalog format '" + std::string(name) + "'");
}

CatalogFormat catalog_format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return CatalogFormat::json_lines;
  return CatalogFormat::long_csv;
}

std::vector<RawAttributeRow> parse_catalog_text(std::string_view text, CatalogFormat format) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return format == CatalogFormat::long_csv ? parse_csv(text) : parse_json_lines(text);
}

std::vector<RawAttributeRow> parse_catalog(const std::filesystem::path& path, CatalogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open catalog file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog_text(buf.str(), format);
}

AssembleResult assemble_corpora(const std::vector<RawAttributeRow>& rows, std::size_t min_products,
                                DuplicatePolicy policy) {
  // category → product_id → record
  std::map<std::string, std::map<std::string, ProductRecord>> grouped;
  AssembleResult result;

  for (const auto& row : rows) {
    auto& products = grouped[row.category_id];
    auto [it, inserted] = products.try_emplace(row.product_id);
    ProductRecord& rec = it->second;
    if (inserted) {
      rec.product_id = row.product_id;
      rec.price = row.price;
    } else if (rec.price != row.price) {
      throw ConflictingPrice("product '" + row.product_id + "' in category '" + row.category_id +
                             "' has conflicting prices " + format_double(rec.price) + " and " +
                             format_double(row.price));
    }
    auto [attr, fresh] = rec.attributes.try_emplace(row.attribute_name, row.attribute_value);
    if (!fresh) {
      if (policy == DuplicatePolicy::error) {
        throw DuplicateAttribute("duplicate attribute '" + row.attribute_name + "' for product '" + row.product_id +
                                 "'");
      }
      ++result.duplicate_count;
      result.warnings.push_back("duplicate attribute '" + row.attribute_name + "' for product '" + row.product_id +
                                "'; keeping first value");
    }
  }

  for (auto& [category_id, products] : grouped) {
    if (products.size() < min_products) {
      result.skipped.push_back({category_id, "too_few_products", products.size()});
      continue;
    }
    CategoryCorpus corpus;
    corpus.category_id = category_id;
    corpus.products.reserve(products.size());
    for (auto& [pid, rec] : products) {
      for (const auto& [name, value] : rec.attributes) corpus.attribute_universe.insert(name);
      corpus.products.push_back(std::move(rec));
    }
    result.corpora.emplace(category_id, std::move(corpus));
  }
  return result;
}

std::vector<RawAttributeRow> flatten(const CategoryCorpus& corpus) {
  std::vector<RawAttributeRow> rows;
  for (const auto& p : corpus.products) {
    for (const auto& [name, value] : p.attributes) {
      rows.push_back({p.product_id, corpus.category_id, p.price, name, value});
    }
  }
  return rows;
}

nlohmann::json skip_report_json(const std::vector<SkipEntry>& skipped) {
  auto out = nlohmann::json::array();
  for (const auto& s : skipped) {
    out.push_back({{"category_id", s.category_id}, {"reason", s.reason}, {"count", s.count}});
  }
  return out;
}

std::string write_catalog_csv(const std::vector<RawAttributeRow>& rows) {
  std::string out = "product_id,category_id,price,attribute_name,attribute_value\n";
  for (const auto& r : rows) {
    out += csv_escape(r.product_id) + ',' + csv_escape(r.category_id) + ',' + format_double(r.price) + ',' +
           csv_escape(r.attribute_name) + ',' + csv_escape(r.attribute_value) + '\n';
  }
  return out;
}

nlohmann::json corpus_to_json(const CategoryCorpus& corpus) {
  nlohmann::json products = nlohmann::json::array();
  for (const auto& p : corpus.products) {
    products.push_back({{"product_id", p.product_id}, {"price", p.price}, {"attributes", p.attributes}});
  }
  return {{"category_id", corpus.category_id}, {"products", std::move(products)}};
}

CategoryCorpus corpus_from_json(const nlohmann::json& j) {
  CategoryCorpus corpus;
  corpus.category_id = j.at("category_id").get<std::string>();
  for (const auto& p : j.at("products")) {
    ProductRecord rec;
    rec.product_id = p.at("product_id").get<std::string>();
    rec.price = p.at("price").get<double>();
    rec.attributes = p.at("attributes").get<std::map<std::string, std::string>>();
    for (const auto& [name, value] : rec.attributes) corpus.attribute_universe.insert(name);
    corpus.products.push_back(std::move(rec));
  }
  return corpus;
}

}  // namespace featrank
