#include "euc/roles.hpp"

#include <cctype>
#include <stdexcept>

namespace euc {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<RoleInfo>& role_table() {
  static const std::vector<RoleInfo> table = {
      {CanonRole::section_header,
       "section_header",
       0.80,
       {"section_header", "sectionheader", "sectiontitle", "title", "heading",
        "header", "h1", "h2"}},
      {CanonRole::support_paragraph,
       "support_paragraph",
       0.80,
       {"support_paragraph", "paragraph", "text", "body"}},
      {CanonRole::table, "table", 0.85, {"table", "tableblock"}},
      {CanonRole::chart, "chart", 0.80, {"chart"}},
      {CanonRole::picture, "picture", 0.85, {"picture", "figure", "image"}},
      {CanonRole::unit_label, "unit_label", 0.0, {"unit_label"}},
      {CanonRole::topic_title, "topic_title", 0.0, {"topic_title"}},
      {CanonRole::plain_text, "plain_text", 0.0, {"plain_text"}},
  };
  return table;
}

const RoleInfo& role_info(CanonRole role) {
  for (const RoleInfo& info : role_table())
    if (info.role == role) return info;
  throw std::logic_error("unknown role");
}

std::string_view to_string(CanonRole role) { return role_info(role).name; }

std::optional<CanonRole> role_from_string(std::string_view name) {
  for (const RoleInfo& info : role_table())
    if (info.name == name) return info.role;
  return std::nullopt;
}

bool is_caption_label(std::string_view raw_label) {
  const std::string lower = to_lower(raw_label);
  if (lower == "caption") return true;
  static constexpr std::string_view suffix = "_caption";
  return lower.size() > suffix.size() &&
         lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) ==
             0;
}

}  // namespace euc
