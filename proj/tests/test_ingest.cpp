#include <gtest/gtest.h>

#include <algorithm>

#include "featrank/ingest.hpp"

using namespace featrank;

namespace {

const char* kHeader = "product_id,category_id,price,attribute_name,attribute_value\n";

std::vector<RawAttributeRow> csv(const std::string& body) {
  return parse_catalog_text(std::string(kHeader) + body, CatalogFormat::long_csv);
}

std::vector<RawAttributeRow> products(const std::string& category, int n, int first = 0) {
  std::vector<RawAttributeRow> rows;
  for (int i = first; i < first + n; ++i) {
    rows.push_back({"P" + std::to_string(i), category, 10.0 + i, "Brand", "B" + std::to_string(i % 3)});
    rows.push_back({"P" + std::to_string(i), category, 10.0 + i, "Weight", std::to_string(i) + " lb"});
  }
  return rows;
}

}  // namespace

TEST(ParseCatalog, SampleExtractRow) {
  const auto rows = csv("P1,dehumidifiers,199.0,Product Weight (lb.),51.8 lb\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (RawAttributeRow{"P1", "dehumidifiers", 199.0, "Product Weight (lb.)", "51.8 lb"}));
}

TEST(ParseCatalog, EmptyInputGivesNoRows) {
  EXPECT_TRUE(parse_catalog_text("", CatalogFormat::long_csv).empty());
  EXPECT_TRUE(parse_catalog_text(kHeader, CatalogFormat::long_csv).empty());
  EXPECT_TRUE(parse_catalog_text("", CatalogFormat::json_lines).empty());
}

TEST(ParseCatalog, NegativePriceRejected) {
  EXPECT_THROW(csv("P1,c,-5,Brand,X\n"), NonPositivePrice);
  EXPECT_THROW(csv("P1,c,0,Brand,X\n"), NonPositivePrice);
}

TEST(ParseCatalog, MissingPriceIsMalformed) {
  try {
    csv("P1,c,10,Brand,X\nP2,c,,Brand,Y\n");
    FAIL() << "expected MalformedRow";
  } catch (const MalformedRow& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseCatalog, MissingColumn) {
  EXPECT_THROW(parse_catalog_text("product_id,category_id,price,attribute_name\nP1,c,1,x\n", CatalogFormat::long_csv),
               MissingColumn);
}

TEST(ParseCatalog, QuotedFieldsAndColumnOrder) {
  const auto rows = parse_catalog_text(
      "attribute_value,price,product_id,attribute_name,category_id\n\"1,200 sq. ft.\",\"5\",P9,\"Area, \"\"max\"\"\",c\n",
      CatalogFormat::long_csv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].attribute_value, "1,200 sq. ft.");
  EXPECT_EQ(rows[0].attribute_name, "Area, \"max\"");
  EXPECT_EQ(rows[0].price, 5.0);
}

TEST(ParseCatalog, RowsKeepFileOrder) {
  const auto rows = csv("P2,c,1,B,x\nP1,c,2,A,y\nP3,c,3,C,z\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].product_id, "P2");
  EXPECT_EQ(rows[2].product_id, "P3");
}

TEST(ParseCatalog, JsonLines) {
  const auto rows = parse_catalog_text(
      "{\"product_id\":\"P1\",\"category_id\":\"c\",\"price\":199,\"attribute_name\":\"Use\",\"attribute_value\":\"Residential\"}\n"
      "\n"
      "{\"product_id\":\"P2\",\"category_id\":\"c\",\"price\":\"12.5\",\"attribute_name\":\"Use\",\"attribute_value\":\"Both\"}\n",
      CatalogFormat::json_lines);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].price, 12.5);
  EXPECT_THROW(parse_catalog_text("{\"product_id\":\"P1\"}\n", CatalogFormat::json_lines), MalformedRow);
  EXPECT_THROW(parse_catalog_text("not json\n", CatalogFormat::json_lines), MalformedRow);
}

TEST(ParseCatalog, FormatFromPath) {
  EXPECT_EQ(catalog_format_for_path("a/b.jsonl"), CatalogFormat::json_lines);
  EXPECT_EQ(catalog_format_for_path("a/b.csv"), CatalogFormat::long_csv);
  EXPECT_THROW(catalog_format_from_string("xml"), DataError);
}

TEST(Assemble, GroupsRowsIntoOneProduct) {
  std::vector<RawAttributeRow> rows = {
      {"P1", "c", 5, "A", "1"}, {"P1", "c", 5, "B", "2"}, {"P1", "c", 5, "C", "3"}};
  const auto r = assemble_corpora(rows, 1, DuplicatePolicy::error);
  ASSERT_EQ(r.corpora.size(), 1u);
  const auto& corpus = r.corpora.at("c");
  ASSERT_EQ(corpus.products.size(), 1u);
  EXPECT_EQ(corpus.products[0].attributes.size(), 3u);
  EXPECT_EQ(corpus.attribute_universe, (std::set<std::string>{"A", "B", "C"}));
}

TEST(Assemble, SmallCategorySkipped) {
  auto rows = products("big", 30);
  auto small = products("small", 5, 100);
  rows.insert(rows.end(), small.begin(), small.end());
  const auto r = assemble_corpora(rows, 30, DuplicatePolicy::keep_first);
  EXPECT_EQ(r.corpora.count("big"), 1u);
  EXPECT_EQ(r.corpora.count("small"), 0u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].category_id, "small");
  EXPECT_EQ(r.skipped[0].count, 5u);
  EXPECT_EQ(skip_report_json(r.skipped)[0]["reason"], "too_few_products");
}

TEST(Assemble, DuplicateKeepFirst) {
  std::vector<RawAttributeRow> rows = {{"P1", "c", 5, "Brand", "Acme"}, {"P1", "c", 5, "Brand", "Other"}};
  const auto r = assemble_corpora(rows, 1, DuplicatePolicy::keep_first);
  EXPECT_EQ(r.corpora.at("c").products[0].attributes.at("Brand"), "Acme");
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.duplicate_count, 1u);
  EXPECT_THROW(assemble_corpora(rows, 1, DuplicatePolicy::error), DuplicateAttribute);
}

TEST(Assemble, ConflictingPriceIsAnError) {
  std::vector<RawAttributeRow> rows = {{"P1", "c", 5, "A", "1"}, {"P1", "c", 6, "B", "2"}};
  EXPECT_THROW(assemble_corpora(rows, 1, DuplicatePolicy::keep_first), ConflictingPrice);
}

TEST(Assemble, FlattenRoundTripsAsMultiset) {
  auto rows = products("c", 12);
  auto r = assemble_corpora(rows, 1, DuplicatePolicy::error);
  auto flat = flatten(r.corpora.at("c"));
  const auto key = [](const RawAttributeRow& a, const RawAttributeRow& b) {
    return std::tie(a.product_id, a.attribute_name) < std::tie(b.product_id, b.attribute_name);
  };
  std::sort(rows.begin(), rows.end(), key);
  std::sort(flat.begin(), flat.end(), key);
  EXPECT_EQ(rows, flat);
}

TEST(Assemble, IndependentOfRowOrderUnderErrorPolicy) {
  auto rows = products("c", 20);
  const auto a = assemble_corpora(rows, 1, DuplicatePolicy::error);
  std::reverse(rows.begin(), rows.end());
  const auto b = assemble_corpora(rows, 1, DuplicatePolicy::error);
  EXPECT_EQ(a.corpora, b.corpora);
}

TEST(Assemble, CsvWriterRoundTrips) {
  std::vector<RawAttributeRow> rows = {{"P1", "c", 19.99, "Area, max", "1,200 \"sq\" ft"}, {"P2", "c", 5, "A", "x"}};
  EXPECT_EQ(parse_catalog_text(write_catalog_csv(rows), CatalogFormat::long_csv), rows);
}

TEST(Assemble, CorpusJsonRoundTrip) {
  const auto r = assemble_corpora(products("c", 4), 1, DuplicatePolicy::error);
  const auto& corpus = r.corpora.at("c");
  EXPECT_EQ(corpus_from_json(corpus_to_json(corpus)), corpus);
}
