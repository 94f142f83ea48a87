#pragma once

#include <map>
#include <string>
#include <vector>

#include "euc/model.hpp"

namespace euc {

using ElementIndex = std::map<std::string, LayoutElement*>;

ElementIndex make_element_index(std::vector<LayoutElement>& elements);

const LayoutElement& element_at(const ElementIndex& index,
                                const std::string& element_id);

// Envelope of every member bbox. Throws on an empty member list.
Bbox eu_footprint(const EvidenceUnit& eu, const ElementIndex& index);

// Envelope of the visual members only; nullopt when the EU has none.
std::optional<Bbox> visual_core(const EvidenceUnit& eu,
                                const ElementIndex& index);

bool is_visual_eu(const EvidenceUnit& eu, const ElementIndex& index);

}  // namespace euc
