#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace euc {

// Closed canonical role set. Every element resolves to exactly one of
// these; labels outside the vocabulary sink to plain_text.
enum class CanonRole {
  section_header,
  support_paragraph,
  table,
  chart,
  picture,
  unit_label,
  topic_title,
  plain_text,
};

inline constexpr std::array<CanonRole, 8> kAllRoles = {
    CanonRole::section_header, CanonRole::support_paragraph,
    CanonRole::table,          CanonRole::chart,
    CanonRole::picture,        CanonRole::unit_label,
    CanonRole::topic_title,    CanonRole::plain_text,
};

struct RoleInfo {
  CanonRole role;
  std::string_view name;
  // Minimum embedding similarity for the label fallback; <= 0 means the
  // role is never produced by the fallback.
  double fallback_threshold;
  std::vector<std::string_view> aliases;
};

const std::vector<RoleInfo>& role_table();
const RoleInfo& role_info(CanonRole role);

std::string_view to_string(CanonRole role);
std::optional<CanonRole> role_from_string(std::string_view name);

inline bool is_visual(CanonRole r) {
  return r == CanonRole::table || r == CanonRole::chart ||
         r == CanonRole::picture;
}

// Structural roles attach to visual seeds by proximity; the same set
// anchors a visual EU for the anchoring invariant.
inline bool is_structural(CanonRole r) {
  return r == CanonRole::section_header || r == CanonRole::unit_label ||
         r == CanonRole::topic_title;
}

inline bool is_anchor_role(CanonRole r) { return is_structural(r); }

// Caption-ish raw labels ("caption", "table_caption", ...) count as
// structural in Phase A even though the closed role set has no caption
// role; the element's canonical role still resolves via the cascade.
bool is_caption_label(std::string_view raw_label);

std::string to_lower(std::string_view s);

}  // namespace euc
