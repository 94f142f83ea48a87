#include "euc/model.hpp"

#include <array>
#include <stdexcept>

namespace euc {

namespace {

constexpr std::array<std::pair<EuKind, std::string_view>, 6> kKindNames = {{
    {EuKind::table_panel, "table_panel"},
    {EuKind::chart_panel, "chart_panel"},
    {EuKind::stat_panel, "stat_panel"},
    {EuKind::visual_panel, "visual_panel"},
    {EuKind::section_text, "section_text"},
    {EuKind::text_cluster, "text_cluster"},
}};

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string("construction param ") + name +
                                " must be in (0, 1]");
}

}  // namespace

std::string_view to_string(EuKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  throw std::logic_error("unknown eu kind");
}

std::optional<EuKind> eu_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

void ConstructionParams::validate() const {
  check_unit(max_gravity_reach, "max_gravity_reach");
  check_unit(x_weight, "x_weight");
  check_unit(stat_panel_gap, "stat_panel_gap");
  check_unit(tau, "tau");
  check_unit(label_reattach_dist, "label_reattach_dist");
  check_unit(c3_vgap, "c3_vgap");
  check_unit(c3_xalign, "c3_xalign");
  check_unit(i2_overlap, "i2_overlap");
  if (c3_order_gap < 1)
    throw std::invalid_argument("construction param c3_order_gap must be >= 1");
  for (const auto& [role, sim] : fallback_sim) check_unit(sim, "fallback_sim");
}

void ConstructionParams::set(const std::string& name, double value) {
  if (name == "max_gravity_reach") max_gravity_reach = value;
  else if (name == "x_weight") x_weight = value;
  else if (name == "stat_panel_gap") stat_panel_gap = value;
  else if (name == "tau") tau = value;
  else if (name == "label_reattach_dist") label_reattach_dist = value;
  else if (name == "c3_vgap") c3_vgap = value;
  else if (name == "c3_xalign") c3_xalign = value;
  else if (name == "c3_order_gap") c3_order_gap = static_cast<int>(value);
  else if (name == "i2_overlap") i2_overlap = value;
  else if (name.rfind("fallback_sim.", 0) == 0) {
    const std::string role_name = name.substr(std::string("fallback_sim.").size());
    auto role = role_from_string(role_name);
    if (!role)
      throw std::invalid_argument("unknown role in param '" + name + "'");
    fallback_sim[*role] = value;
  } else {
    throw std::invalid_argument("unknown construction param '" + name + "'");
  }
}

void ConstructionParams::set(const std::string& name,
                             const std::string& value) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw std::invalid_argument("bad numeric value '" + value + "' for " +
                                name);
  set(name, v);
}

}  // namespace euc
