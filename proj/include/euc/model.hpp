#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "euc/geometry.hpp"
#include "euc/roles.hpp"

namespace euc {

// One layout region after normalization: coordinates in [0,1], a raw
// parser label, and (after role normalization) a canonical role.
struct LayoutElement {
  std::string element_id;
  std::string page_id;
  std::string raw_label;
  std::string subtype;  // optional adapter hint, e.g. "chart" on a figure
  std::optional<CanonRole> canon_role;
  Bbox bbox;
  int order = 0;
  std::string text;
  std::optional<Eigen::VectorXd> embedding;
  bool excluded = false;  // page furniture, dropped from construction

  CanonRole role() const {
    return canon_role.value_or(CanonRole::plain_text);
  }
};

enum class EuKind {
  table_panel,
  chart_panel,
  stat_panel,
  visual_panel,
  section_text,
  text_cluster,
};

std::string_view to_string(EuKind kind);
std::optional<EuKind> eu_kind_from_string(std::string_view name);

// A group of elements treated as one retrieval unit. The footprint is the
// min/max envelope of all member bboxes.
struct EvidenceUnit {
  std::string eu_id;
  std::string page_id;
  EuKind kind = EuKind::text_cluster;
  std::vector<std::string> members;  // element ids in attach order
  Bbox footprint;
};

struct TraceEntry {
  std::string phase;    // "A", "B", "C", "I1", "I2"
  std::string rule_id;  // e.g. "D1_010", "C-3"
  std::string subject;  // element or EU id the decision is about
  std::string object;   // counterpart id, empty when not applicable
  std::optional<double> metric;
  std::optional<double> threshold;
  std::string outcome;  // "attach", "merge", "reject", ...
};

// Tunables of EU construction. Every real value must lie in (0, 1].
struct ConstructionParams {
  double max_gravity_reach = 0.30;  // structural attachment radius
  double x_weight = 0.3;            // horizontal damping in spatial distance
  double stat_panel_gap = 0.22;     // table+chart merge radius
  double tau = 0.40;                // semantic allocation threshold
  double label_reattach_dist = 0.25;  // orphan label rescue radius
  double c3_vgap = 0.07;              // residual clustering: vertical gap
  double c3_xalign = 0.18;            // residual clustering: left-x alignment
  int c3_order_gap = 3;               // residual clustering: max order gap
  double i2_overlap = 0.60;           // stat_panel value-overlap floor
  // Per-role minimum similarity for the embedding fallback.
  std::map<CanonRole, double> fallback_sim = {
      {CanonRole::section_header, 0.80},
      {CanonRole::support_paragraph, 0.80},
      {CanonRole::table, 0.85},
      {CanonRole::chart, 0.80},
      {CanonRole::picture, 0.85},
  };

  // Throws std::invalid_argument on an out-of-range value.
  void validate() const;

  // Applies "name=value" overrides ("tau=0.5", "fallback_sim.table=0.9").
  void set(const std::string& name, double value);
  void set(const std::string& name, const std::string& value);
};

}  // namespace euc
