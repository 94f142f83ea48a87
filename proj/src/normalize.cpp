#include "euc/normalize.hpp"

#include <fstream>
#include <json.hpp>
#include <regex>

#include "euc/ingest.hpp"

namespace euc {

namespace {

// '(' then optional space, "unit"/"Unit", optional space, ':'.
const std::regex kUnitPattern(R"(\(\s*[Uu]nit\s*:)");
const std::regex kTopicPattern(R"(\[.+\])");

constexpr size_t kUnitPrefixWindow = 40;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

TypeMap TypeMap::defaults() {
  TypeMap tm;
  const auto seed = [&](const std::string& parser,
                        std::initializer_list<std::pair<const char*, CanonRole>>
                            entries) {
    for (const auto& [label, role] : entries) tm.add(parser, label, role);
  };
  seed("gt", {{"SectionHeader", CanonRole::section_header},
              {"Title", CanonRole::section_header},
              {"Paragraph", CanonRole::support_paragraph},
              {"text_block", CanonRole::support_paragraph},
              {"Table", CanonRole::table},
              {"Chart", CanonRole::chart},
              {"Picture", CanonRole::picture},
              {"figure", CanonRole::picture}});
  seed("mineru", {{"title", CanonRole::section_header},
                  {"text", CanonRole::support_paragraph},
                  {"table", CanonRole::table},
                  {"figure", CanonRole::picture},
                  {"image", CanonRole::picture},
                  {"chart", CanonRole::chart}});
  seed("docling", {{"title", CanonRole::section_header},
                   {"heading", CanonRole::section_header},
                   {"h1", CanonRole::section_header},
                   {"h2", CanonRole::section_header},
                   {"section_header", CanonRole::section_header},
                   {"text", CanonRole::support_paragraph},
                   {"paragraph", CanonRole::support_paragraph},
                   {"body", CanonRole::support_paragraph},
                   {"table", CanonRole::table},
                   {"TableBlock", CanonRole::table},
                   {"figure", CanonRole::picture},
                   {"picture", CanonRole::picture},
                   {"image", CanonRole::picture},
                   {"chart", CanonRole::chart}});
  seed("paddleocr", {{"title", CanonRole::section_header},
                     {"text", CanonRole::support_paragraph},
                     {"table", CanonRole::table},
                     {"figure", CanonRole::picture},
                     {"image", CanonRole::picture},
                     {"chart", CanonRole::chart}});
  return tm;
}

void TypeMap::add(const std::string& parser, const std::string& raw_label,
                  CanonRole role) {
  by_parser_[parser][to_lower(raw_label)] = role;
}

void TypeMap::merge_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open type map file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw SchemaError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object())
    throw SchemaError(path + ": type map must be an object of parsers");
  for (const auto& [parser, labels] : j.items()) {
    if (!labels.is_object())
      throw SchemaError(path + ": parser '" + parser +
                        "' must map labels to role names");
    for (const auto& [label, role_name] : labels.items()) {
      if (!role_name.is_string())
        throw SchemaError(path + ": role for label '" + label +
                          "' must be a string");
      auto role = role_from_string(role_name.get<std::string>());
      if (!role)
        throw SchemaError(path + ": unknown role '" +
                          role_name.get<std::string>() + "' for label '" +
                          label + "'");
      add(parser, label, *role);
    }
  }
}

std::optional<CanonRole> TypeMap::lookup(const std::string& parser,
                                         const std::string& raw_label) const {
  auto pit = by_parser_.find(parser);
  if (pit == by_parser_.end()) return std::nullopt;
  auto lit = pit->second.find(to_lower(raw_label));
  if (lit == pit->second.end()) return std::nullopt;
  return lit->second;
}

RoleAnchors RoleAnchors::build(const Embeddings& embeddings,
                               const ConstructionParams& params) {
  RoleAnchors anchors;
  for (const auto& [role, threshold] : params.fallback_sim) {
    std::vector<Eigen::VectorXd> vecs;
    for (std::string_view alias : role_info(role).aliases)
      vecs.push_back(embeddings.for_text(std::string(alias)));
    anchors.vectors[role] = std::move(vecs);
  }
  return anchors;
}

std::optional<CanonRole> match_pattern(const std::string& text) {
  const std::string prefix = text.substr(0, kUnitPrefixWindow);
  if (std::regex_search(prefix, kUnitPattern)) return CanonRole::unit_label;
  const std::string trimmed = trim(text);
  if (!trimmed.empty() && std::regex_match(trimmed, kTopicPattern))
    return CanonRole::topic_title;
  return std::nullopt;
}

std::optional<CanonRole> fallback_role(const std::string& raw_label,
                                       const RoleAnchors& anchors,
                                       const Embeddings& embeddings,
                                       const ConstructionParams& params) {
  if (raw_label.empty()) return std::nullopt;
  const Eigen::VectorXd label_vec = embeddings.for_text(raw_label);
  std::optional<CanonRole> best;
  double best_sim = 0.0;
  for (CanonRole role : kAllRoles) {  // fixed enumeration order breaks ties
    auto it = anchors.vectors.find(role);
    if (it == anchors.vectors.end()) continue;
    double sim = 0.0;
    for (const Eigen::VectorXd& anchor : it->second)
      sim = std::max(sim, cosine_sim(label_vec, anchor));
    if (!best || sim > best_sim) {
      best = role;
      best_sim = sim;
    }
  }
  if (!best) return std::nullopt;
  auto threshold = params.fallback_sim.find(*best);
  if (threshold == params.fallback_sim.end() || best_sim < threshold->second)
    return std::nullopt;
  return best;
}

void normalize_roles(std::vector<LayoutElement>& elements,
                     const std::string& parser, const TypeMap& typemap,
                     const RoleAnchors& anchors, const Embeddings& embeddings,
                     const ConstructionParams& params) {
  for (LayoutElement& e : elements) {
    if (e.excluded) continue;
    std::optional<CanonRole> role = match_pattern(e.text);
    if (!role) {
      role = typemap.lookup(parser, e.raw_label);
      if (!role) role = fallback_role(e.raw_label, anchors, embeddings, params);
      if (role == CanonRole::picture && to_lower(e.subtype) == "chart")
        role = CanonRole::chart;
    }
    e.canon_role = role.value_or(CanonRole::plain_text);
  }
}

}  // namespace euc
