#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "euc/embedding.hpp"
#include "euc/model.hpp"

namespace euc {

// Parser-specific raw-label vocabulary. Labels are matched
// case-insensitively; an unknown parser name maps nothing.
class TypeMap {
 public:
  static TypeMap defaults();

  // Merges {"parser": {"label": "role", ...}, ...} over the current table.
  void merge_json_file(const std::string& path);
  void add(const std::string& parser, const std::string& raw_label,
           CanonRole role);
  std::optional<CanonRole> lookup(const std::string& parser,
                                  const std::string& raw_label) const;

 private:
  std::map<std::string, std::map<std::string, CanonRole>> by_parser_;
};

// Reference vectors for the embedding fallback, one per alias of each
// fallback-eligible role; similarity against a role is the max over its
// alias vectors, so a label equal to any alias scores exactly 1.
struct RoleAnchors {
  std::map<CanonRole, std::vector<Eigen::VectorXd>> vectors;

  static RoleAnchors build(const Embeddings& embeddings,
                           const ConstructionParams& params);
};

// Priority 1: text patterns. "(Unit: ...)" within the first 40 chars makes
// a unit_label; a whole trimmed text of the shape "[...]" makes a
// topic_title. Patterns outrank any label-based mapping.
std::optional<CanonRole> match_pattern(const std::string& text);

// Priority 3: nearest role anchor by embedding similarity, accepted only
// when the best role's similarity meets that role's threshold.
std::optional<CanonRole> fallback_role(const std::string& raw_label,
                                       const RoleAnchors& anchors,
                                       const Embeddings& embeddings,
                                       const ConstructionParams& params);

// Full cascade over non-excluded elements: pattern, then type map, then
// fallback, then plain_text. A picture resolved from a label with an
// adapter subtype of "chart" becomes a chart.
void normalize_roles(std::vector<LayoutElement>& elements,
                     const std::string& parser, const TypeMap& typemap,
                     const RoleAnchors& anchors, const Embeddings& embeddings,
                     const ConstructionParams& params);

}  // namespace euc
