#include <doctest.h>

#include <string>
#include <vector>

#include "euc/ingest.hpp"
#include "test_support.hpp"

using euc::InputFormat;
using euc::NonContentConfig;
using euc::RawElement;
using euc::RawPage;
using euc::SchemaError;
using euc_test::fixture_path;
using euc_test::scratch_dir;
using euc_test::write_file;

namespace {

RawElement raw(std::string id, std::string label, euc::Bbox b,
               std::optional<int> order = std::nullopt,
               std::string text = {}) {
  RawElement e;
  e.id = std::move(id);
  e.label = std::move(label);
  e.bbox = b;
  e.order = order;
  e.text = std::move(text);
  return e;
}

RawPage pixel_page(std::vector<RawElement> elements) {
  RawPage p;
  p.page_id = "p1";
  p.width_px = 1000;
  p.height_px = 1000;
  p.elements = std::move(elements);
  return p;
}

}  // namespace

TEST_CASE("canonical loader reads a single page object") {
  const auto pages = euc::load_canonical(fixture_path("parser_a_track.json"));
  REQUIRE(pages.size() == 1);
  const RawPage& p = pages[0];
  CHECK(p.page_id == "1");
  CHECK(p.width_px == 1000.0);
  CHECK(p.height_px == 1000.0);
  CHECK_FALSE(p.already_normalized);
  REQUIRE(p.elements.size() == 8);
  CHECK(p.elements[1].id == "pa_sec");
  CHECK(p.elements[1].label == "section_header");
  CHECK(p.elements[1].bbox == euc::Bbox{50, 70, 950, 160});
  REQUIRE(p.elements[1].embedding.has_value());
  CHECK(p.elements[1].embedding->size() == 4);
  CHECK((*p.elements[1].embedding)[0] == 1.0);
}

TEST_CASE("canonical loader accepts an array of pages and normalized boxes") {
  const auto dir = scratch_dir("canonical");
  const std::string path = write_file(dir / "two.json", R"([
    {"page_id": "a", "width_px": 100, "height_px": 100,
     "elements": [{"label": "text", "bbox": [10, 20, 90, 80], "text": "x"}]},
    {"page_id": "b", "already_normalized": true,
     "elements": [{"id": "e", "label": "text",
                   "bbox": [0.1, 0.2, 0.3, 0.4], "order": 5, "text": "y"}]}
  ])");
  const auto pages = euc::load_canonical(path);
  REQUIRE(pages.size() == 2);
  CHECK_FALSE(pages[0].already_normalized);
  CHECK(pages[1].already_normalized);
  CHECK(pages[1].elements[0].bbox == euc::Bbox{0.1, 0.2, 0.3, 0.4});
  CHECK(pages[1].elements[0].order == 5);
  CHECK_FALSE(pages[0].elements[0].order.has_value());
}

TEST_CASE("canonical loader rejects malformed input") {
  const auto dir = scratch_dir("canonical_bad");
  CHECK_THROWS_AS(euc::load_canonical((dir / "missing.json").string()),
                  SchemaError);
  const std::string bad_json = write_file(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(euc::load_canonical(bad_json), SchemaError);
  const std::string bad_bbox = write_file(dir / "bbox.json", R"(
    {"page_id": "a", "width_px": 100, "height_px": 100,
     "elements": [{"label": "text", "bbox": [1, 2, 3], "text": "x"}]})");
  CHECK_THROWS_AS(euc::load_canonical(bad_bbox), SchemaError);
  const std::string no_page = write_file(dir / "nopage.json", R"(
    {"width_px": 100, "height_px": 100, "elements": []})");
  CHECK_THROWS_AS(euc::load_canonical(no_page), SchemaError);
}

TEST_CASE("ground-truth loader converts polygons to envelopes") {
  const auto pages = euc::load_gt(fixture_path("gt_track.json"));
  REQUIRE(pages.size() == 1);
  const RawPage& p = pages[0];
  CHECK(p.page_id == "1");
  REQUIRE(p.elements.size() == 8);
  CHECK(p.elements[0].label == "abandoned");
  CHECK(p.elements[0].bbox == euc::Bbox{50, 20, 950, 50});  // poly envelope
  CHECK(p.elements[7].bbox == euc::Bbox{50, 950, 950, 980});  // bbox form
  CHECK(p.elements[3].label == "table");
  CHECK(p.elements[3].order == 3);
}

TEST_CASE("mineru loader joins span content with spaces") {
  const auto pages = euc::load_mineru(fixture_path("mineru_track.json"));
  REQUIRE(pages.size() == 1);
  const RawPage& p = pages[0];
  CHECK(p.page_id == "1");
  REQUIRE(p.elements.size() == 8);
  CHECK(p.elements[6].text ==
        "Effluent concentrations remained well below the regulatory limits "
        "throughout the campaign.");
  // The blocks carry no explicit order; it is assigned downstream.
  for (const RawElement& e : p.elements) CHECK_FALSE(e.order.has_value());
  const auto elements = euc::normalize_page(p, NonContentConfig{});
  for (size_t i = 0; i < elements.size(); ++i)
    CHECK(elements[i].order == static_cast<int>(i));
  CHECK(elements[0].element_id == "1#0");  // derived id
}

TEST_CASE("docling loader flips bottom-left coordinates and merges groups") {
  const auto pages = euc::load_docling(fixture_path("docling_track.json"));
  REQUIRE(pages.size() == 1);
  const RawPage& p = pages[0];
  CHECK(p.page_id == "1");
  REQUIRE(p.elements.size() == 10);  // 7 texts + 3 table rows
  const RawElement* row1 = nullptr;
  for (const RawElement& e : p.elements)
    if (e.order == 3) row1 = &e;
  REQUIRE(row1 != nullptr);
  CHECK(row1->label == "table");
  // BOTTOMLEFT t=730/b=670 on a 1000px page -> top-left y [270, 330].
  CHECK(row1->bbox.y1 == doctest::Approx(270.0).epsilon(1e-12));
  CHECK(row1->bbox.y2 == doctest::Approx(330.0).epsilon(1e-12));
}

TEST_CASE("load_input dispatches on format") {
  CHECK(euc::load_input(fixture_path("gt_track.json"), InputFormat::gt)
            .size() == 1);
  CHECK(euc::load_input(fixture_path("parser_a_track.json"),
                        InputFormat::canonical)
            .size() == 1);
  CHECK_THROWS_AS(
      euc::load_input(fixture_path("gt_track.json"), InputFormat::docling),
      SchemaError);
}

TEST_CASE("input format names round-trip") {
  CHECK(euc::input_format_from_string("canonical") == InputFormat::canonical);
  CHECK(euc::input_format_from_string("gt") == InputFormat::gt);
  CHECK(euc::input_format_from_string("mineru") == InputFormat::mineru);
  CHECK(euc::input_format_from_string("docling") == InputFormat::docling);
  CHECK_THROWS_AS(euc::input_format_from_string("pdfminer"), SchemaError);
  CHECK(euc::to_string(InputFormat::mineru) == "mineru");
}

TEST_CASE("normalize_page scales pixels and marks furniture") {
  RawPage p = pixel_page({
      raw("h", "page_header", {50, 20, 950, 50}, 0, "head"),
      raw("t", "table", {100, 200, 900, 700}, 1, "body"),
  });
  const auto elements = euc::normalize_page(p, NonContentConfig{});
  REQUIRE(elements.size() == 2);  // nothing is dropped
  CHECK(elements[0].excluded);
  CHECK_FALSE(elements[1].excluded);
  CHECK(elements[1].bbox == euc::Bbox{0.1, 0.2, 0.9, 0.7});
  CHECK(elements[1].page_id == "p1");
  CHECK_FALSE(elements[1].canon_role.has_value());  // roles come later
}

TEST_CASE("normalize_page clamps overshooting boxes") {
  RawPage p = pixel_page({raw("t", "table", {900, 900, 1100, 1050}, 0, "x")});
  const auto elements = euc::normalize_page(p, NonContentConfig{});
  CHECK(elements[0].bbox == euc::Bbox{0.9, 0.9, 1.0, 1.0});
}

TEST_CASE("normalize_page derives missing ids and orders") {
  RawPage p = pixel_page({
      raw("", "text", {0, 0, 100, 100}, std::nullopt, "a"),
      raw("", "text", {0, 200, 100, 300}, std::nullopt, "b"),
  });
  const auto elements = euc::normalize_page(p, NonContentConfig{});
  CHECK(elements[0].order == 0);
  CHECK(elements[1].order == 1);
  CHECK(elements[0].element_id == "p1#0");
  CHECK(elements[1].element_id == "p1#1");
}

TEST_CASE("normalize_page rejects inverted boxes and duplicates") {
  RawPage inverted =
      pixel_page({raw("t", "text", {500, 100, 400, 200}, 0, "x")});
  CHECK_THROWS_AS(euc::normalize_page(inverted, NonContentConfig{}),
                  SchemaError);

  RawPage dup_order = pixel_page({
      raw("a", "text", {0, 0, 100, 100}, 1, "x"),
      raw("b", "text", {0, 200, 100, 300}, 1, "y"),
  });
  CHECK_THROWS_AS(euc::normalize_page(dup_order, NonContentConfig{}),
                  SchemaError);

  RawPage dup_id = pixel_page({
      raw("a", "text", {0, 0, 100, 100}, 0, "x"),
      raw("a", "text", {0, 200, 100, 300}, 1, "y"),
  });
  CHECK_THROWS_AS(euc::normalize_page(dup_id, NonContentConfig{}),
                  SchemaError);
}

TEST_CASE("normalize_pages enforces one embedding dimension per run") {
  RawPage a = pixel_page({raw("a", "text", {0, 0, 100, 100}, 0, "x")});
  a.page_id = "pa";
  a.elements[0].embedding = euc_test::vec({1, 0, 0});
  RawPage b = pixel_page({raw("b", "text", {0, 0, 100, 100}, 0, "y")});
  b.page_id = "pb";
  b.elements[0].embedding = euc_test::vec({1, 0});
  CHECK_THROWS_AS(euc::normalize_pages({a, b}, NonContentConfig{}),
                  SchemaError);
  b.elements[0].embedding = euc_test::vec({0, 1, 0});
  CHECK(euc::normalize_pages({a, b}, NonContentConfig{}).size() == 2);
}

TEST_CASE("non-content config matches its label set") {
  const NonContentConfig nc;
  CHECK(nc.contains("page_footer"));
  CHECK(nc.contains("abandoned"));
  CHECK_FALSE(nc.contains("table"));
}
