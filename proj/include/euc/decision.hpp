#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "euc/model.hpp"

namespace euc {

// One rule of the construction/validation layer. The NEXT chain is encoded
// in the `next` pointers; vector order of a chain follows them.
struct DecisionRule {
  std::string rule_id;
  std::string phase;        // D1_CONSTRUCTION, D2_RESTORATION, D3_VALIDATION
  std::string granularity;  // PAGE, CANDIDATE, EU_PAIR, EU
  std::map<std::string, double> params;
  bool active = true;
  std::optional<std::string> next;

  bool operator==(const DecisionRule&) const = default;
};

struct DecisionChain {
  std::vector<DecisionRule> rules;

  // Active flag of a rule; rules absent from the chain behave as active so
  // a partial custom chain only changes what it mentions.
  bool active(std::string_view rule_id) const;
  const DecisionRule* find(std::string_view rule_id) const;

  bool operator==(const DecisionChain&) const = default;
};

// The default 8-rule chain with parameters drawn from ConstructionParams.
// Chain order is pipeline execution order: the merge guard precedes
// semantic allocation, so NEXT(D1_040) is D2_010.
DecisionChain default_rule_chain(const ConstructionParams& params = {});

// Throws std::invalid_argument unless rule ids are unique, every `next`
// resolves, the chain is acyclic, and it is total over active rules.
void validate_chain(const DecisionChain& chain);

// Cypher text, one statement per line: the layer node, one CREATE per
// rule, HAS_RULE edges, then NEXT edges.
std::string export_cypher(const DecisionChain& chain);
// Parses text produced by export_cypher (round-trips exactly).
DecisionChain import_cypher(const std::string& text);

DecisionChain load_rules_json(const std::string& path);

// --- Post-construction validators (D2/D3) ---

enum class I1Outcome { passed, repaired, demoted };
struct I1Verdict {
  I1Outcome outcome = I1Outcome::passed;
  std::string eu_id;
  std::string attached_element;  // set when repaired
};

enum class I2Outcome { passed, split, not_applicable };
struct I2Verdict {
  I2Outcome outcome = I2Outcome::not_applicable;
  std::string eu_id;
  std::optional<double> ratio;
  std::string split_eu_id;  // set when split
};

// I1, anchoring: a visual EU must contain a section_header, unit_label or
// topic_title. Repair pulls the nearest available anchor (an anchor-role
// element in no EU, or alone in a non-visual EU) within max_gravity_reach
// of the visual core; otherwise the EU is demoted to text_cluster and its
// visual members are re-recorded as plain_text.
I1Verdict validate_i1(std::vector<EvidenceUnit>& eus, size_t index,
                      std::vector<LayoutElement>& elements,
                      const ConstructionParams& params);

// I2, type consistency: a stat_panel needs numeric value overlap
// |table ∩ chart| / |chart| >= i2_overlap; below the floor it splits into
// a table_panel and a chart_panel, non-visual members going to the
// spatially nearer core (ties to the table side). EUs without both value
// sets are not applicable.
I2Verdict validate_i2(std::vector<EvidenceUnit>& eus, size_t index,
                      std::vector<LayoutElement>& elements,
                      const ConstructionParams& params);

// Numbers extracted for I2: signed decimals, thousands separators
// stripped, then canonically formatted so 10, 10.0 and "1,0" x "10" agree.
std::vector<std::string> extract_numeric_values(const std::string& text);

struct ValidationReport {
  std::vector<I1Verdict> i1;
  std::vector<I2Verdict> i2;
  int violations = 0;  // repaired + demoted + split counts
  bool partition_ok = true;
  bool containment_ok = true;
};

// Runs I1 over visual EUs, I2 over stat_panels, then the final sweep
// (D3_010): member partition against non-excluded elements and footprint
// containment. Consults the chain's active flags for D2_010/D2_020.
ValidationReport run_validation(std::vector<EvidenceUnit>& eus,
                                std::vector<LayoutElement>& elements,
                                const ConstructionParams& params,
                                const DecisionChain& chain);

}  // namespace euc
