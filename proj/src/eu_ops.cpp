#include "euc/eu_ops.hpp"

#include <stdexcept>

namespace euc {

ElementIndex make_element_index(std::vector<LayoutElement>& elements) {
  ElementIndex index;
  for (LayoutElement& e : elements) index[e.element_id] = &e;
  return index;
}

const LayoutElement& element_at(const ElementIndex& index,
                                const std::string& element_id) {
  auto it = index.find(element_id);
  if (it == index.end())
    throw std::invalid_argument("unknown element id '" + element_id + "'");
  return *it->second;
}

Bbox eu_footprint(const EvidenceUnit& eu, const ElementIndex& index) {
  if (eu.members.empty())
    throw std::invalid_argument("EU '" + eu.eu_id + "' has no members");
  Bbox fp = element_at(index, eu.members.front()).bbox;
  for (size_t i = 1; i < eu.members.size(); ++i)
    fp = bbox_union(fp, element_at(index, eu.members[i]).bbox);
  return fp;
}

std::optional<Bbox> visual_core(const EvidenceUnit& eu,
                                const ElementIndex& index) {
  std::optional<Bbox> core;
  for (const std::string& id : eu.members) {
    const LayoutElement& e = element_at(index, id);
    if (!is_visual(e.role())) continue;
    core = core ? bbox_union(*core, e.bbox) : e.bbox;
  }
  return core;
}

bool is_visual_eu(const EvidenceUnit& eu, const ElementIndex& index) {
  for (const std::string& id : eu.members)
    if (is_visual(element_at(index, id).role())) return true;
  return false;
}

}  // namespace euc
