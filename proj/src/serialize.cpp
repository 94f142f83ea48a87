#include "euc/serialize.hpp"

#include <fstream>

#include "euc/ingest.hpp"

namespace euc {

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& what) {
  throw SchemaError(ctx + ": " + what);
}

std::string req_string(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_string())
    fail(ctx, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

Json bbox_to_json(const Bbox& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

Bbox bbox_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 4)
    fail(ctx, "bbox must be an array of 4 numbers");
  for (const auto& v : j)
    if (!v.is_number()) fail(ctx, "bbox must contain only numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

Json elements_to_json(const std::vector<NormalizedPage>& pages) {
  Json out = Json::array();
  for (const NormalizedPage& page : pages) {
    Json pj;
    pj["page_id"] = page.page_id;
    pj["width_px"] = page.width_px;
    pj["height_px"] = page.height_px;
    pj["already_normalized"] = true;
    Json elems = Json::array();
    for (const LayoutElement& e : page.elements) {
      Json ej;
      ej["id"] = e.element_id;
      ej["label"] = e.raw_label;
      if (!e.subtype.empty()) ej["subtype"] = e.subtype;
      ej["bbox"] = bbox_to_json(e.bbox);
      ej["order"] = e.order;
      ej["text"] = e.text;
      if (e.embedding) {
        Json emb = Json::array();
        for (Eigen::Index i = 0; i < e.embedding->size(); ++i)
          emb.push_back((*e.embedding)[i]);
        ej["embedding"] = std::move(emb);
      }
      if (e.canon_role) ej["canon_role"] = std::string(to_string(*e.canon_role));
      ej["excluded"] = e.excluded;
      elems.push_back(std::move(ej));
    }
    pj["elements"] = std::move(elems);
    out.push_back(std::move(pj));
  }
  return out;
}

std::vector<NormalizedPage> elements_from_json(const Json& j,
                                               const std::string& ctx) {
  if (!j.is_array()) fail(ctx, "expected an array of pages");
  std::vector<NormalizedPage> pages;
  for (const Json& pj : j) {
    NormalizedPage page;
    page.page_id = req_string(pj, "page_id", ctx);
    const std::string pctx = ctx + ", page '" + page.page_id + "'";
    if (!pj.contains("width_px") || !pj["width_px"].is_number())
      fail(pctx, "missing numeric 'width_px'");
    if (!pj.contains("height_px") || !pj["height_px"].is_number())
      fail(pctx, "missing numeric 'height_px'");
    page.width_px = pj["width_px"].get<double>();
    page.height_px = pj["height_px"].get<double>();
    if (!pj.contains("elements") || !pj["elements"].is_array())
      fail(pctx, "missing 'elements' array");
    for (const Json& ej : pj["elements"]) {
      const std::string ectx = pctx + ", element";
      LayoutElement e;
      e.page_id = page.page_id;
      e.element_id = req_string(ej, "id", ectx);
      e.raw_label = req_string(ej, "label", ectx);
      if (ej.contains("subtype") && ej["subtype"].is_string())
        e.subtype = ej["subtype"].get<std::string>();
      if (!ej.contains("bbox")) fail(ectx + " '" + e.element_id + "'", "missing bbox");
      e.bbox = bbox_from_json(ej["bbox"], ectx + " '" + e.element_id + "'");
      if (!ej.contains("order") || !ej["order"].is_number_integer())
        fail(ectx + " '" + e.element_id + "'", "missing integer 'order'");
      e.order = ej["order"].get<int>();
      if (ej.contains("text") && ej["text"].is_string())
        e.text = ej["text"].get<std::string>();
      if (ej.contains("embedding") && ej["embedding"].is_array()) {
        const Json& arr = ej["embedding"];
        Eigen::VectorXd v(arr.size());
        for (size_t i = 0; i < arr.size(); ++i) {
          if (!arr[i].is_number())
            fail(ectx + " '" + e.element_id + "'", "embedding must be numeric");
          v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
        }
        e.embedding = std::move(v);
      }
      if (ej.contains("canon_role") && !ej["canon_role"].is_null()) {
        const std::string role_name = ej["canon_role"].get<std::string>();
        auto role = role_from_string(role_name);
        if (!role)
          fail(ectx + " '" + e.element_id + "'",
               "unknown canon_role '" + role_name + "'");
        e.canon_role = role;
      }
      if (ej.contains("excluded") && ej["excluded"].is_boolean())
        e.excluded = ej["excluded"].get<bool>();
      page.elements.push_back(std::move(e));
    }
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<NormalizedPage> read_elements_file(const std::string& path) {
  return elements_from_json(read_json_file(path), path);
}

Json eus_to_json(const std::vector<EuPage>& pages) {
  Json out = Json::array();
  for (const EuPage& page : pages) {
    Json pj;
    pj["page_id"] = page.page_id;
    Json eus = Json::array();
    for (const EvidenceUnit& eu : page.eus) {
      Json ej;
      ej["eu_id"] = eu.eu_id;
      ej["kind"] = std::string(to_string(eu.kind));
      ej["members"] = eu.members;
      ej["footprint"] = bbox_to_json(eu.footprint);
      eus.push_back(std::move(ej));
    }
    pj["eus"] = std::move(eus);
    Json trace = Json::array();
    for (const TraceEntry& t : page.trace) {
      Json tj;
      tj["phase"] = t.phase;
      tj["rule_id"] = t.rule_id;
      tj["subject"] = t.subject;
      if (!t.object.empty()) tj["object"] = t.object;
      if (t.metric) tj["metric"] = *t.metric;
      if (t.threshold) tj["threshold"] = *t.threshold;
      tj["outcome"] = t.outcome;
      trace.push_back(std::move(tj));
    }
    pj["trace"] = std::move(trace);
    out.push_back(std::move(pj));
  }
  return out;
}

std::vector<EuPage> eus_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array()) fail(ctx, "expected an array of EU pages");
  std::vector<EuPage> pages;
  for (const Json& pj : j) {
    EuPage page;
    page.page_id = req_string(pj, "page_id", ctx);
    const std::string pctx = ctx + ", page '" + page.page_id + "'";
    if (!pj.contains("eus") || !pj["eus"].is_array())
      fail(pctx, "missing 'eus' array");
    for (const Json& ej : pj["eus"]) {
      EvidenceUnit eu;
      eu.page_id = page.page_id;
      eu.eu_id = req_string(ej, "eu_id", pctx);
      const std::string ectx = pctx + ", eu '" + eu.eu_id + "'";
      const std::string kind_name = req_string(ej, "kind", ectx);
      auto kind = eu_kind_from_string(kind_name);
      if (!kind) fail(ectx, "unknown kind '" + kind_name + "'");
      eu.kind = *kind;
      if (!ej.contains("members") || !ej["members"].is_array())
        fail(ectx, "missing 'members' array");
      for (const Json& m : ej["members"]) {
        if (!m.is_string()) fail(ectx, "members must be element id strings");
        eu.members.push_back(m.get<std::string>());
      }
      if (!ej.contains("footprint")) fail(ectx, "missing 'footprint'");
      eu.footprint = bbox_from_json(ej["footprint"], ectx);
      page.eus.push_back(std::move(eu));
    }
    if (pj.contains("trace")) {
      if (!pj["trace"].is_array()) fail(pctx, "'trace' must be an array");
      for (const Json& tj : pj["trace"]) {
        TraceEntry t;
        t.phase = req_string(tj, "phase", pctx);
        t.rule_id = req_string(tj, "rule_id", pctx);
        t.subject = req_string(tj, "subject", pctx);
        if (tj.contains("object") && tj["object"].is_string())
          t.object = tj["object"].get<std::string>();
        if (tj.contains("metric") && tj["metric"].is_number())
          t.metric = tj["metric"].get<double>();
        if (tj.contains("threshold") && tj["threshold"].is_number())
          t.threshold = tj["threshold"].get<double>();
        t.outcome = req_string(tj, "outcome", pctx);
        page.trace.push_back(std::move(t));
      }
    }
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<EuPage> read_eus_file(const std::string& path) {
  return eus_from_json(read_json_file(path), path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path + ": cannot open for writing");
  out << content;
  if (!out) throw SchemaError(path + ": write failed");
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw SchemaError(path + ": invalid JSON: " + std::string(e.what()));
  }
  return j;
}

}  // namespace euc
