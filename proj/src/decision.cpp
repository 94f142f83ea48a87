#include "euc/decision.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <set>
#include <stdexcept>

#include "euc/eu_ops.hpp"
#include "euc/ingest.hpp"

namespace euc {

namespace {

constexpr const char* kLayerName = "EU_Decision_Layer";
constexpr const char* kLayerVersion = "2.0";

const std::set<std::string> kPhases = {"D1_CONSTRUCTION", "D2_RESTORATION",
                                       "D3_VALIDATION"};
const std::set<std::string> kGranularities = {"PAGE", "CANDIDATE", "EU_PAIR",
                                              "EU"};

std::string params_json(const std::map<std::string, double>& params) {
  return nlohmann::json(params).dump();
}

std::string shortest_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

bool DecisionChain::active(std::string_view rule_id) const {
  const DecisionRule* rule = find(rule_id);
  return rule ? rule->active : true;
}

const DecisionRule* DecisionChain::find(std::string_view rule_id) const {
  for (const DecisionRule& r : rules)
    if (r.rule_id == rule_id) return &r;
  return nullptr;
}

DecisionChain default_rule_chain(const ConstructionParams& params) {
  DecisionChain chain;
  chain.rules = {
      {"D1_010",
       "D1_CONSTRUCTION",
       "PAGE",
       {{"max_gravity_reach", params.max_gravity_reach},
        {"x_weight", params.x_weight}},
       true,
       "D1_021"},
      {"D1_021",
       "D1_CONSTRUCTION",
       "CANDIDATE",
       {{"stat_panel_gap", params.stat_panel_gap}},
       true,
       "D1_031"},
      {"D1_031", "D1_CONSTRUCTION", "CANDIDATE", {}, true, "D1_051"},
      {"D1_051", "D1_CONSTRUCTION", "EU_PAIR", {}, true, "D1_040"},
      {"D1_040",
       "D1_CONSTRUCTION",
       "CANDIDATE",
       {{"tau", params.tau}},
       true,
       "D2_010"},
      {"D2_010",
       "D2_RESTORATION",
       "EU",
       {{"max_gravity_reach", params.max_gravity_reach}},
       true,
       "D2_020"},
      {"D2_020",
       "D2_RESTORATION",
       "EU",
       {{"i2_overlap", params.i2_overlap}},
       true,
       "D3_010"},
      {"D3_010", "D3_VALIDATION", "EU", {}, true, std::nullopt},
  };
  return chain;
}

void validate_chain(const DecisionChain& chain) {
  std::set<std::string> ids;
  for (const DecisionRule& r : chain.rules) {
    if (r.rule_id.empty())
      throw std::invalid_argument("rule with empty rule_id");
    if (!ids.insert(r.rule_id).second)
      throw std::invalid_argument("duplicate rule_id '" + r.rule_id + "'");
    if (!kPhases.count(r.phase))
      throw std::invalid_argument("rule " + r.rule_id + ": unknown phase '" +
                                  r.phase + "'");
    if (!kGranularities.count(r.granularity))
      throw std::invalid_argument("rule " + r.rule_id +
                                  ": unknown granularity '" + r.granularity +
                                  "'");
    if (r.next && r.next->empty())
      throw std::invalid_argument("rule " + r.rule_id + ": empty next id");
  }
  for (const DecisionRule& r : chain.rules)
    if (r.next && !ids.count(*r.next))
      throw std::invalid_argument("rule " + r.rule_id +
                                  ": next references unknown rule '" +
                                  *r.next + "'");
  if (chain.rules.empty()) return;

  // Acyclic: walking NEXT from any rule terminates.
  for (const DecisionRule& start : chain.rules) {
    std::set<std::string> seen;
    const DecisionRule* cur = &start;
    while (cur) {
      if (!seen.insert(cur->rule_id).second)
        throw std::invalid_argument("NEXT chain contains a cycle through '" +
                                    cur->rule_id + "'");
      cur = cur->next ? chain.find(*cur->next) : nullptr;
    }
  }

  // Total over active rules: from the head (a rule nothing points to) the
  // NEXT walk must visit every active rule.
  std::set<std::string> pointed;
  for (const DecisionRule& r : chain.rules)
    if (r.next) pointed.insert(*r.next);
  const DecisionRule* head = nullptr;
  for (const DecisionRule& r : chain.rules) {
    if (!pointed.count(r.rule_id)) {
      if (head)
        throw std::invalid_argument("NEXT chain has multiple heads ('" +
                                    head->rule_id + "', '" + r.rule_id + "')");
      head = &r;
    }
  }
  if (!head) throw std::invalid_argument("NEXT chain has no head");
  std::set<std::string> visited;
  for (const DecisionRule* cur = head; cur;
       cur = cur->next ? chain.find(*cur->next) : nullptr)
    visited.insert(cur->rule_id);
  for (const DecisionRule& r : chain.rules)
    if (r.active && !visited.count(r.rule_id))
      throw std::invalid_argument("active rule '" + r.rule_id +
                                  "' is not reachable on the NEXT chain");
}

std::string export_cypher(const DecisionChain& chain) {
  std::string out;
  out += std::string("CREATE (:DecisionLayer {name:'") + kLayerName +
         "', version:'" + kLayerVersion + "'});\n";
  for (const DecisionRule& r : chain.rules) {
    out += "CREATE (:DecisionRule {rule_id:'" + r.rule_id + "', phase:'" +
           r.phase + "', granularity:'" + r.granularity +
           "', active:" + (r.active ? "true" : "false") + ", params:'" +
           params_json(r.params) + "'});\n";
  }
  for (const DecisionRule& r : chain.rules) {
    out += std::string("MATCH (l:DecisionLayer {name:'") + kLayerName +
           "'}), (r:DecisionRule {rule_id:'" + r.rule_id +
           "'}) CREATE (l)-[:HAS_RULE]->(r);\n";
  }
  for (const DecisionRule& r : chain.rules) {
    if (!r.next) continue;
    out += "MATCH (a:DecisionRule {rule_id:'" + r.rule_id +
           "'}), (b:DecisionRule {rule_id:'" + *r.next +
           "'}) CREATE (a)-[:NEXT]->(b);\n";
  }
  return out;
}

DecisionChain import_cypher(const std::string& text) {
  static const std::regex layer_re(
      R"(CREATE \(:DecisionLayer \{name:'([^']*)', version:'([^']*)'\}\);)");
  static const std::regex rule_re(
      R"(CREATE \(:DecisionRule \{rule_id:'([^']*)', phase:'([^']*)', granularity:'([^']*)', active:(true|false), params:'([^']*)'\}\);)");
  static const std::regex has_rule_re(
      R"(MATCH \(l:DecisionLayer \{name:'([^']*)'\}\), \(r:DecisionRule \{rule_id:'([^']*)'\}\) CREATE \(l\)-\[:HAS_RULE\]->\(r\);)");
  static const std::regex next_re(
      R"(MATCH \(a:DecisionRule \{rule_id:'([^']*)'\}\), \(b:DecisionRule \{rule_id:'([^']*)'\}\) CREATE \(a\)-\[:NEXT\]->\(b\);)");

  DecisionChain chain;
  bool saw_layer = false;
  std::smatch m;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (std::regex_match(line, m, layer_re)) {
      if (m[1] != kLayerName || m[2] != kLayerVersion)
        throw std::invalid_argument("unexpected decision layer '" +
                                    m[1].str() + "' v'" + m[2].str() + "'");
      saw_layer = true;
    } else if (std::regex_match(line, m, rule_re)) {
      DecisionRule r;
      r.rule_id = m[1];
      r.phase = m[2];
      r.granularity = m[3];
      r.active = m[4] == "true";
      nlohmann::json pj;
      try {
        pj = nlohmann::json::parse(m[5].str());
      } catch (const std::exception& e) {
        throw std::invalid_argument("rule " + r.rule_id +
                                    ": bad params JSON: " + e.what());
      }
      for (const auto& [k, v] : pj.items()) {
        if (!v.is_number())
          throw std::invalid_argument("rule " + r.rule_id + ": param '" + k +
                                      "' is not numeric");
        r.params[k] = v.get<double>();
      }
      chain.rules.push_back(std::move(r));
    } else if (std::regex_match(line, m, has_rule_re)) {
      if (!chain.find(m[2].str()))
        throw std::invalid_argument("HAS_RULE references unknown rule '" +
                                    m[2].str() + "'");
    } else if (std::regex_match(line, m, next_re)) {
      bool found = false;
      for (DecisionRule& r : chain.rules) {
        if (r.rule_id == m[1].str()) {
          r.next = m[2].str();
          found = true;
          break;
        }
      }
      if (!found)
        throw std::invalid_argument("NEXT references unknown rule '" +
                                    m[1].str() + "'");
    } else {
      throw std::invalid_argument("unrecognized cypher line: " + line);
    }
  }
  if (!saw_layer)
    throw std::invalid_argument("cypher text has no DecisionLayer node");
  return chain;
}

DecisionChain load_rules_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open rules file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw SchemaError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_array()) throw SchemaError(path + ": rules must be an array");
  static const std::set<std::string> known_keys = {
      "rule_id", "phase", "granularity", "params", "active", "next"};
  DecisionChain chain;
  for (const auto& rj : j) {
    if (!rj.is_object()) throw SchemaError(path + ": rule must be an object");
    for (const auto& [k, v] : rj.items())
      if (!known_keys.count(k))
        throw SchemaError(path + ": unknown rule key '" + k + "'");
    DecisionRule r;
    if (!rj.contains("rule_id") || !rj["rule_id"].is_string())
      throw SchemaError(path + ": rule missing string 'rule_id'");
    r.rule_id = rj["rule_id"].get<std::string>();
    if (!rj.contains("phase") || !rj["phase"].is_string())
      throw SchemaError(path + ": rule " + r.rule_id + " missing 'phase'");
    r.phase = rj["phase"].get<std::string>();
    if (!rj.contains("granularity") || !rj["granularity"].is_string())
      throw SchemaError(path + ": rule " + r.rule_id +
                        " missing 'granularity'");
    r.granularity = rj["granularity"].get<std::string>();
    if (rj.contains("active")) {
      if (!rj["active"].is_boolean())
        throw SchemaError(path + ": rule " + r.rule_id +
                          ": 'active' must be boolean");
      r.active = rj["active"].get<bool>();
    }
    if (rj.contains("params")) {
      if (!rj["params"].is_object())
        throw SchemaError(path + ": rule " + r.rule_id +
                          ": 'params' must be an object");
      for (const auto& [k, v] : rj["params"].items()) {
        if (!v.is_number())
          throw SchemaError(path + ": rule " + r.rule_id + ": param '" + k +
                            "' must be numeric");
        r.params[k] = v.get<double>();
      }
    }
    if (rj.contains("next") && !rj["next"].is_null()) {
      if (!rj["next"].is_string())
        throw SchemaError(path + ": rule " + r.rule_id +
                          ": 'next' must be a string");
      r.next = rj["next"].get<std::string>();
    }
    chain.rules.push_back(std::move(r));
  }
  try {
    validate_chain(chain);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return chain;
}

std::vector<std::string> extract_numeric_values(const std::string& text) {
  static const std::regex num_re(
      R"([+-]?\d{1,3}(?:,\d{3})+(?:\.\d+)?|[+-]?\d+(?:\.\d+)?)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), num_re);
       it != std::sregex_iterator(); ++it) {
    std::string token = it->str();
    token.erase(std::remove(token.begin(), token.end(), ','), token.end());
    out.push_back(shortest_double(std::stod(token)));
  }
  return out;
}

I1Verdict validate_i1(std::vector<EvidenceUnit>& eus, size_t index,
                      std::vector<LayoutElement>& elements,
                      const ConstructionParams& params) {
  ElementIndex idx = make_element_index(elements);
  EvidenceUnit& eu = eus[index];
  I1Verdict verdict;
  verdict.eu_id = eu.eu_id;

  const auto core = visual_core(eu, idx);
  if (!core) return verdict;  // not a visual EU, nothing to anchor

  for (const std::string& id : eu.members)
    if (is_anchor_role(element_at(idx, id).role())) return verdict;

  // Anchors available for repair: in no EU at all, or alone in a
  // non-visual EU (a C-3 singleton the anchor fell into).
  std::map<std::string, size_t> member_of;  // element -> eu index
  for (size_t i = 0; i < eus.size(); ++i)
    for (const std::string& id : eus[i].members) member_of[id] = i;

  const LayoutElement* best = nullptr;
  double best_dist = 0.0;
  std::optional<size_t> donor;
  for (LayoutElement& e : elements) {
    if (e.excluded || !is_anchor_role(e.role())) continue;
    std::optional<size_t> holder;
    if (auto it = member_of.find(e.element_id); it != member_of.end()) {
      if (it->second == index) continue;
      holder = it->second;
      const EvidenceUnit& h = eus[*holder];
      if (h.members.size() != 1 || is_visual_eu(h, idx)) continue;
    }
    const double d = spatial_distance(e.bbox, *core, params.x_weight);
    if (d >= params.max_gravity_reach) continue;
    if (!best || d < best_dist ||
        (d == best_dist && e.order < best->order)) {
      best = &e;
      best_dist = d;
      donor = holder;
    }
  }

  if (best) {
    eu.members.push_back(best->element_id);
    eu.footprint = eu_footprint(eu, idx);
    verdict.outcome = I1Outcome::repaired;
    verdict.attached_element = best->element_id;
    if (donor) eus.erase(eus.begin() + static_cast<long>(*donor));
    return verdict;
  }

  eu.kind = EuKind::text_cluster;
  for (const std::string& id : eu.members) {
    LayoutElement& e = *idx.at(id);
    if (is_visual(e.role())) e.canon_role = CanonRole::plain_text;
  }
  verdict.outcome = I1Outcome::demoted;
  return verdict;
}

I2Verdict validate_i2(std::vector<EvidenceUnit>& eus, size_t index,
                      std::vector<LayoutElement>& elements,
                      const ConstructionParams& params) {
  ElementIndex idx = make_element_index(elements);
  EvidenceUnit& eu = eus[index];
  I2Verdict verdict;
  verdict.eu_id = eu.eu_id;
  if (eu.kind != EuKind::stat_panel) return verdict;

  std::set<std::string> table_vals, chart_vals;
  for (const std::string& id : eu.members) {
    const LayoutElement& e = element_at(idx, id);
    if (e.role() == CanonRole::table)
      for (const std::string& v : extract_numeric_values(e.text))
        table_vals.insert(v);
    else if (e.role() == CanonRole::chart)
      for (const std::string& v : extract_numeric_values(e.text))
        chart_vals.insert(v);
  }
  if (chart_vals.empty()) return verdict;  // no denominator, not applicable

  size_t common = 0;
  for (const std::string& v : chart_vals) common += table_vals.count(v);
  const double ratio =
      static_cast<double>(common) / static_cast<double>(chart_vals.size());
  verdict.ratio = ratio;
  if (ratio >= params.i2_overlap) {
    verdict.outcome = I2Outcome::passed;
    return verdict;
  }

  // Split: tables on one side, charts on the other; everything else goes
  // to the spatially nearer visual core, ties to the table side.
  std::optional<Bbox> table_core, chart_core;
  for (const std::string& id : eu.members) {
    const LayoutElement& e = element_at(idx, id);
    if (e.role() == CanonRole::table)
      table_core = table_core ? bbox_union(*table_core, e.bbox) : e.bbox;
    else if (e.role() == CanonRole::chart)
      chart_core = chart_core ? bbox_union(*chart_core, e.bbox) : e.bbox;
  }
  EvidenceUnit table_side, chart_side;
  for (const std::string& id : eu.members) {
    const LayoutElement& e = element_at(idx, id);
    if (e.role() == CanonRole::table) {
      table_side.members.push_back(id);
    } else if (e.role() == CanonRole::chart) {
      chart_side.members.push_back(id);
    } else {
      const double dt =
          table_core ? spatial_distance(e.bbox, *table_core, params.x_weight)
                     : std::numeric_limits<double>::infinity();
      const double dc =
          chart_core ? spatial_distance(e.bbox, *chart_core, params.x_weight)
                     : std::numeric_limits<double>::infinity();
      (dt <= dc ? table_side : chart_side).members.push_back(id);
    }
  }
  table_side.eu_id = eu.eu_id;
  table_side.page_id = eu.page_id;
  table_side.kind = EuKind::table_panel;
  table_side.footprint = eu_footprint(table_side, idx);
  chart_side.eu_id = eu.eu_id + "_split";
  chart_side.page_id = eu.page_id;
  chart_side.kind = EuKind::chart_panel;
  chart_side.footprint = eu_footprint(chart_side, idx);

  verdict.outcome = I2Outcome::split;
  verdict.split_eu_id = chart_side.eu_id;
  eus[index] = std::move(table_side);
  eus.push_back(std::move(chart_side));
  return verdict;
}

ValidationReport run_validation(std::vector<EvidenceUnit>& eus,
                                std::vector<LayoutElement>& elements,
                                const ConstructionParams& params,
                                const DecisionChain& chain) {
  ValidationReport report;
  ElementIndex idx = make_element_index(elements);

  if (chain.active("D2_010")) {
    std::vector<std::string> ids;
    for (const EvidenceUnit& eu : eus) ids.push_back(eu.eu_id);
    for (const std::string& id : ids) {
      auto it = std::find_if(eus.begin(), eus.end(),
                             [&](const EvidenceUnit& e) { return e.eu_id == id; });
      if (it == eus.end()) continue;
      const size_t i = static_cast<size_t>(it - eus.begin());
      if (!is_visual_eu(eus[i], idx)) continue;
      I1Verdict v = validate_i1(eus, i, elements, params);
      if (v.outcome != I1Outcome::passed) ++report.violations;
      report.i1.push_back(std::move(v));
    }
  }

  if (chain.active("D2_020")) {
    std::vector<std::string> ids;
    for (const EvidenceUnit& eu : eus)
      if (eu.kind == EuKind::stat_panel) ids.push_back(eu.eu_id);
    for (const std::string& id : ids) {
      auto it = std::find_if(eus.begin(), eus.end(),
                             [&](const EvidenceUnit& e) { return e.eu_id == id; });
      if (it == eus.end()) continue;
      I2Verdict v = validate_i2(eus, static_cast<size_t>(it - eus.begin()),
                                elements, params);
      if (v.outcome == I2Outcome::split) ++report.violations;
      report.i2.push_back(std::move(v));
    }
  }

  if (chain.active("D3_010")) {
    std::map<std::string, int> seen;
    for (const EvidenceUnit& eu : eus) {
      const Bbox fp = eu.footprint;
      for (const std::string& id : eu.members) {
        ++seen[id];
        if (!bbox_contains(fp, element_at(idx, id).bbox))
          report.containment_ok = false;
      }
    }
    for (const LayoutElement& e : elements) {
      const int n = e.excluded ? 0 : 1;
      auto it = seen.find(e.element_id);
      const int got = it == seen.end() ? 0 : it->second;
      if (got != n) report.partition_ok = false;
      if (it != seen.end()) seen.erase(it);
    }
    if (!seen.empty()) report.partition_ok = false;  // members not in input
  }
  return report;
}

}  // namespace euc
