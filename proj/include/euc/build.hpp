#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "euc/decision.hpp"
#include "euc/embedding.hpp"
#include "euc/model.hpp"

namespace euc {

// Paragraph-to-EU similarity: scores(i, j) is the max cosine between
// paragraph i and any member of EU j.
struct SimilarityMatrix {
  std::vector<std::string> paragraph_ids;      // row order
  std::vector<std::string> eu_head_ids;        // col order: first member id
  Eigen::MatrixXd scores;
};

SimilarityMatrix build_similarity(
    const std::vector<const LayoutElement*>& paragraphs,
    const std::vector<std::vector<const LayoutElement*>>& eu_members,
    const Embeddings& embeddings);

struct BuildResult {
  std::vector<EvidenceUnit> eus;
  std::vector<TraceEntry> trace;
};

// Three-phase EU construction over one page of role-normalized elements
// (sorted or not; reading order is taken from `order`). Phase A seeds one
// EU per visual element, attaches structural elements (and caption-labeled
// ones) to the nearest seed within max_gravity_reach, then merges
// same-type zero-gap fragments and table+chart pairs within
// stat_panel_gap. Phase B allocates unassigned paragraphs by embedding
// similarity at tau. Phase C consolidates the rest: header-led
// section_text runs, orphan label rescue, greedy text_cluster runs.
//
// Every non-excluded element ends up in exactly one EU. The chain's
// active flags switch individual rules off (absent rules count active).
// C-2 demotions rewrite canon_role on the input elements.
BuildResult build_eus(std::vector<LayoutElement>& elements,
                      const ConstructionParams& params,
                      const Embeddings& embeddings,
                      const DecisionChain& chain);

BuildResult build_eus(std::vector<LayoutElement>& elements,
                      const ConstructionParams& params,
                      const Embeddings& embeddings);

}  // namespace euc
