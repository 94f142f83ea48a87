#include "euc/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>

namespace euc {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& what) {
  throw SchemaError(ctx + ": " + what);
}

Json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    fail(path, std::string("invalid JSON: ") + e.what());
  }
  return j;
}

double req_number(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) fail(ctx, std::string("missing field '") + key + "'");
  const Json& v = j[key];
  if (!v.is_number()) fail(ctx, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string req_string(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) fail(ctx, std::string("missing field '") + key + "'");
  const Json& v = j[key];
  if (!v.is_string()) fail(ctx, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string opt_string(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (!j[key].is_string()) fail(key, "expected a string");
  return j[key].get<std::string>();
}

Bbox bbox_from_array(const Json& arr, const std::string& ctx) {
  if (!arr.is_array() || arr.size() != 4)
    fail(ctx, "bbox must be an array of 4 numbers");
  double v[4];
  for (size_t i = 0; i < 4; ++i) {
    if (!arr[i].is_number()) fail(ctx, "bbox must contain only numbers");
    v[i] = arr[i].get<double>();
    if (!std::isfinite(v[i])) fail(ctx, "bbox values must be finite");
  }
  return {v[0], v[1], v[2], v[3]};
}

Bbox bbox_from_poly(const Json& arr, const std::string& ctx) {
  if (!arr.is_array() || arr.size() != 8)
    fail(ctx, "poly must be an array of 8 numbers");
  double xs[4], ys[4];
  for (size_t i = 0; i < 4; ++i) {
    if (!arr[2 * i].is_number() || !arr[2 * i + 1].is_number())
      fail(ctx, "poly must contain only numbers");
    xs[i] = arr[2 * i].get<double>();
    ys[i] = arr[2 * i + 1].get<double>();
  }
  return {*std::min_element(xs, xs + 4), *std::min_element(ys, ys + 4),
          *std::max_element(xs, xs + 4), *std::max_element(ys, ys + 4)};
}

std::optional<Eigen::VectorXd> opt_embedding(const Json& j,
                                             const std::string& ctx) {
  if (!j.contains("embedding") || j["embedding"].is_null()) return std::nullopt;
  const Json& arr = j["embedding"];
  if (!arr.is_array() || arr.empty())
    fail(ctx, "embedding must be a non-empty array of numbers");
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(ctx, "embedding must contain only numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

std::optional<int> opt_order(const Json& j, const std::string& ctx) {
  if (!j.contains("order") || j["order"].is_null()) return std::nullopt;
  if (!j["order"].is_number_integer()) fail(ctx, "order must be an integer");
  const int order = j["order"].get<int>();
  if (order < 0) fail(ctx, "order must be >= 0");
  return order;
}

RawPage canonical_page(const Json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "page must be an object");
  RawPage page;
  page.page_id = req_string(j, "page_id", ctx);
  const std::string pctx = ctx + ", page '" + page.page_id + "'";
  if (j.contains("already_normalized")) {
    if (!j["already_normalized"].is_boolean())
      fail(pctx, "already_normalized must be a boolean");
    page.already_normalized = j["already_normalized"].get<bool>();
  }
  if (page.already_normalized) {
    // Coordinates are already unit-scaled; pixel dimensions are advisory.
    page.width_px = j.contains("width_px") ? req_number(j, "width_px", pctx) : 1.0;
    page.height_px =
        j.contains("height_px") ? req_number(j, "height_px", pctx) : 1.0;
  } else {
    page.width_px = req_number(j, "width_px", pctx);
    page.height_px = req_number(j, "height_px", pctx);
  }
  if (!j.contains("elements") || !j["elements"].is_array())
    fail(pctx, "missing 'elements' array");
  size_t idx = 0;
  for (const Json& ej : j["elements"]) {
    const std::string ectx = pctx + ", elements[" + std::to_string(idx) + "]";
    if (!ej.is_object()) fail(ectx, "element must be an object");
    RawElement e;
    e.id = opt_string(ej, "id");
    e.label = req_string(ej, "label", ectx);
    e.subtype = opt_string(ej, "subtype");
    if (!ej.contains("bbox")) fail(ectx, "missing field 'bbox'");
    e.bbox = bbox_from_array(ej["bbox"], ectx);
    e.order = opt_order(ej, ectx);
    e.text = opt_string(ej, "text");
    e.embedding = opt_embedding(ej, ectx);
    page.elements.push_back(std::move(e));
    ++idx;
  }
  return page;
}

// Accepts one page object or an array of pages.
std::vector<RawPage> pages_from(const Json& j, const std::string& path,
                                RawPage (*one)(const Json&,
                                               const std::string&)) {
  std::vector<RawPage> pages;
  if (j.is_array()) {
    for (const Json& pj : j) pages.push_back(one(pj, path));
  } else {
    pages.push_back(one(j, path));
  }
  return pages;
}

RawPage gt_page(const Json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "page must be an object");
  if (!j.contains("page_info") || !j["page_info"].is_object())
    fail(ctx, "missing 'page_info' object");
  const Json& info = j["page_info"];
  RawPage page;
  if (info.contains("page_no") && info["page_no"].is_number_integer())
    page.page_id = std::to_string(info["page_no"].get<long long>());
  else
    page.page_id = req_string(info, "page_no", ctx + ", page_info");
  const std::string pctx = ctx + ", page '" + page.page_id + "'";
  page.width_px = req_number(info, "width", pctx);
  page.height_px = req_number(info, "height", pctx);
  if (!j.contains("layout_dets") || !j["layout_dets"].is_array())
    fail(pctx, "missing 'layout_dets' array");
  size_t idx = 0;
  for (const Json& dj : j["layout_dets"]) {
    const std::string ectx =
        pctx + ", layout_dets[" + std::to_string(idx) + "]";
    if (!dj.is_object()) fail(ectx, "detection must be an object");
    RawElement e;
    e.label = req_string(dj, "category_type", ectx);
    e.subtype = opt_string(dj, "subtype");
    if (dj.contains("poly"))
      e.bbox = bbox_from_poly(dj["poly"], ectx);
    else if (dj.contains("bbox"))
      e.bbox = bbox_from_array(dj["bbox"], ectx);
    else
      fail(ectx, "missing 'poly' or 'bbox'");
    e.order = opt_order(dj, ectx);
    e.text = opt_string(dj, "text");
    e.embedding = opt_embedding(dj, ectx);
    page.elements.push_back(std::move(e));
    ++idx;
  }
  return page;
}

std::string mineru_block_text(const Json& bj) {
  if (bj.contains("text") && bj["text"].is_string())
    return bj["text"].get<std::string>();
  std::string out;
  if (bj.contains("lines") && bj["lines"].is_array()) {
    for (const Json& line : bj["lines"]) {
      if (!line.is_object() || !line.contains("spans") ||
          !line["spans"].is_array())
        continue;
      for (const Json& span : line["spans"]) {
        if (span.is_object() && span.contains("content") &&
            span["content"].is_string()) {
          if (!out.empty()) out.push_back(' ');
          out += span["content"].get<std::string>();
        }
      }
    }
  }
  return out;
}

std::vector<RawPage> mineru_pages(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("pdf_info") || !j["pdf_info"].is_array())
    fail(path, "missing 'pdf_info' array");
  std::vector<RawPage> pages;
  for (const Json& pj : j["pdf_info"]) {
    if (!pj.is_object()) fail(path, "pdf_info entries must be objects");
    RawPage page;
    if (!pj.contains("page_idx") || !pj["page_idx"].is_number_integer())
      fail(path, "pdf_info entry missing integer 'page_idx'");
    page.page_id = std::to_string(pj["page_idx"].get<long long>());
    const std::string pctx = path + ", page '" + page.page_id + "'";
    if (!pj.contains("page_size") || !pj["page_size"].is_array() ||
        pj["page_size"].size() != 2)
      fail(pctx, "'page_size' must be [width, height]");
    page.width_px = pj["page_size"][0].get<double>();
    page.height_px = pj["page_size"][1].get<double>();
    const char* block_key =
        pj.contains("para_blocks") ? "para_blocks" : "preproc_blocks";
    if (!pj.contains(block_key) || !pj[block_key].is_array())
      fail(pctx, "missing 'para_blocks' or 'preproc_blocks' array");
    size_t idx = 0;
    for (const Json& bj : pj[block_key]) {
      const std::string ectx = pctx + ", blocks[" + std::to_string(idx) + "]";
      if (!bj.is_object()) fail(ectx, "block must be an object");
      RawElement e;
      e.label = req_string(bj, "type", ectx);
      e.subtype = opt_string(bj, "subtype");
      if (!bj.contains("bbox")) fail(ectx, "missing field 'bbox'");
      e.bbox = bbox_from_array(bj["bbox"], ectx);
      e.order = opt_order(bj, ectx);
      e.text = mineru_block_text(bj);
      e.embedding = opt_embedding(bj, ectx);
      page.elements.push_back(std::move(e));
      ++idx;
    }
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<RawPage> docling_pages(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("pages") || !j["pages"].is_array())
    fail(path, "missing 'pages' array");
  std::vector<RawPage> pages;
  std::vector<long long> page_nos;
  for (const Json& pj : j["pages"]) {
    if (!pj.is_object() || !pj.contains("page_no") ||
        !pj["page_no"].is_number_integer())
      fail(path, "pages entries need an integer 'page_no'");
    RawPage page;
    const long long no = pj["page_no"].get<long long>();
    page.page_id = std::to_string(no);
    if (!pj.contains("size") || !pj["size"].is_object())
      fail(path + ", page '" + page.page_id + "'", "missing 'size' object");
    page.width_px = req_number(pj["size"], "width", path);
    page.height_px = req_number(pj["size"], "height", path);
    page_nos.push_back(no);
    pages.push_back(std::move(page));
  }
  const auto page_for = [&](long long no) -> RawPage& {
    for (size_t i = 0; i < page_nos.size(); ++i)
      if (page_nos[i] == no) return pages[i];
    fail(path, "item references unknown page_no " + std::to_string(no));
  };
  for (const char* section : {"texts", "tables", "pictures"}) {
    if (!j.contains(section)) continue;
    if (!j[section].is_array())
      fail(path, std::string("'") + section + "' must be an array");
    size_t idx = 0;
    for (const Json& ij : j[section]) {
      const std::string ectx =
          path + ", " + section + "[" + std::to_string(idx) + "]";
      if (!ij.is_object()) fail(ectx, "item must be an object");
      RawElement e;
      e.label = req_string(ij, "label", ectx);
      e.subtype = opt_string(ij, "subtype");
      e.text = opt_string(ij, "text");
      if (!ij.contains("prov") || !ij["prov"].is_array() || ij["prov"].empty())
        fail(ectx, "missing non-empty 'prov' array");
      const Json& prov = ij["prov"][0];
      if (!prov.is_object() || !prov.contains("page_no") ||
          !prov["page_no"].is_number_integer())
        fail(ectx, "prov[0] needs an integer 'page_no'");
      if (!prov.contains("bbox") || !prov["bbox"].is_object())
        fail(ectx, "prov[0] needs a 'bbox' object");
      const Json& bj = prov["bbox"];
      const double l = req_number(bj, "l", ectx);
      const double t = req_number(bj, "t", ectx);
      const double r = req_number(bj, "r", ectx);
      const double b = req_number(bj, "b", ectx);
      RawPage& page = page_for(prov["page_no"].get<long long>());
      if (opt_string(bj, "coord_origin") == "BOTTOMLEFT") {
        // t/b measured up from the page bottom; flip into top-left space.
        e.bbox = {l, page.height_px - t, r, page.height_px - b};
      } else {
        e.bbox = {l, t, r, b};
      }
      e.order = opt_order(ij, ectx);
      e.embedding = opt_embedding(ij, ectx);
      page.elements.push_back(std::move(e));
      ++idx;
    }
  }
  return pages;
}

}  // namespace

bool NonContentConfig::contains(const std::string& raw_label) const {
  return labels.count(to_lower(raw_label)) > 0;
}

InputFormat input_format_from_string(const std::string& name) {
  if (name == "canonical") return InputFormat::canonical;
  if (name == "gt") return InputFormat::gt;
  if (name == "mineru") return InputFormat::mineru;
  if (name == "docling") return InputFormat::docling;
  throw SchemaError("unknown input format '" + name +
                    "' (expected canonical, gt, mineru or docling)");
}

std::string_view to_string(InputFormat format) {
  switch (format) {
    case InputFormat::canonical: return "canonical";
    case InputFormat::gt: return "gt";
    case InputFormat::mineru: return "mineru";
    case InputFormat::docling: return "docling";
  }
  return "canonical";
}

std::vector<RawPage> load_canonical(const std::string& path) {
  return pages_from(parse_file(path), path, canonical_page);
}

std::vector<RawPage> load_gt(const std::string& path) {
  return pages_from(parse_file(path), path, gt_page);
}

std::vector<RawPage> load_mineru(const std::string& path) {
  return mineru_pages(parse_file(path), path);
}

std::vector<RawPage> load_docling(const std::string& path) {
  return docling_pages(parse_file(path), path);
}

std::vector<RawPage> load_input(const std::string& path, InputFormat format) {
  switch (format) {
    case InputFormat::canonical: return load_canonical(path);
    case InputFormat::gt: return load_gt(path);
    case InputFormat::mineru: return load_mineru(path);
    case InputFormat::docling: return load_docling(path);
  }
  throw SchemaError("unhandled input format");
}

std::vector<LayoutElement> normalize_page(
    const RawPage& page, const NonContentConfig& non_content) {
  const std::string ctx = "page '" + page.page_id + "'";
  if (page.page_id.empty()) throw SchemaError("page_id must be non-empty");
  if (!(page.width_px > 0.0) || !(page.height_px > 0.0))
    throw SchemaError(ctx + ": page dimensions must be positive");

  std::vector<LayoutElement> out;
  std::set<int> seen_orders;
  std::set<std::string> seen_ids;
  int next_order = 0;
  for (size_t i = 0; i < page.elements.size(); ++i) {
    const RawElement& raw = page.elements[i];
    const std::string ectx = ctx + ", element " + std::to_string(i);
    LayoutElement e;
    e.page_id = page.page_id;
    e.raw_label = raw.label;
    e.subtype = raw.subtype;
    e.text = raw.text;
    e.embedding = raw.embedding;

    Bbox b = raw.bbox;
    if (!page.already_normalized) {
      b.x1 /= page.width_px;
      b.x2 /= page.width_px;
      b.y1 /= page.height_px;
      b.y2 /= page.height_px;
    }
    if (b.x2 < b.x1 || b.y2 < b.y1)
      throw SchemaError(ectx + ": inverted bbox after normalization");
    b.x1 = std::clamp(b.x1, 0.0, 1.0);
    b.y1 = std::clamp(b.y1, 0.0, 1.0);
    b.x2 = std::clamp(b.x2, 0.0, 1.0);
    b.y2 = std::clamp(b.y2, 0.0, 1.0);
    e.bbox = b;

    e.order = raw.order.value_or(next_order);
    if (!seen_orders.insert(e.order).second)
      throw SchemaError(ectx + ": duplicate order " + std::to_string(e.order));
    next_order = std::max(next_order, e.order + 1);

    e.element_id = raw.id.empty()
                       ? page.page_id + "#" + std::to_string(e.order)
                       : raw.id;
    if (!seen_ids.insert(e.element_id).second)
      throw SchemaError(ectx + ": duplicate element id '" + e.element_id +
                        "'");

    e.excluded = non_content.contains(e.raw_label);
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(),
            [](const LayoutElement& a, const LayoutElement& b) {
              return a.order < b.order;
            });
  return out;
}

std::vector<std::vector<LayoutElement>> normalize_pages(
    const std::vector<RawPage>& pages, const NonContentConfig& non_content) {
  std::vector<std::vector<LayoutElement>> out;
  Eigen::Index run_dim = -1;
  std::string first_id;
  for (const RawPage& page : pages) {
    out.push_back(normalize_page(page, non_content));
    for (const LayoutElement& e : out.back()) {
      if (!e.embedding) continue;
      if (run_dim < 0) {
        run_dim = e.embedding->size();
        first_id = e.element_id;
      } else if (e.embedding->size() != run_dim) {
        throw SchemaError(
            "element " + e.element_id + ": embedding dimension " +
            std::to_string(e.embedding->size()) + " != run dimension " +
            std::to_string(run_dim) + " set by element " + first_id);
      }
    }
  }
  return out;
}

}  // namespace euc
