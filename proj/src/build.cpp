#include "euc/build.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace euc {

namespace {

struct WorkingEu {
  EuKind kind = EuKind::text_cluster;
  std::vector<LayoutElement*> members;  // attach order
  std::vector<LayoutElement*> visuals;
  bool dead = false;
};

Bbox core_bbox(const WorkingEu& eu) {
  Bbox core = eu.visuals.front()->bbox;
  for (size_t i = 1; i < eu.visuals.size(); ++i)
    core = bbox_union(core, eu.visuals[i]->bbox);
  return core;
}

Bbox full_bbox(const WorkingEu& eu) {
  Bbox fp = eu.members.front()->bbox;
  for (size_t i = 1; i < eu.members.size(); ++i)
    fp = bbox_union(fp, eu.members[i]->bbox);
  return fp;
}

bool pure_type(const WorkingEu& eu, CanonRole* role_out) {
  if (eu.visuals.empty()) return false;
  const CanonRole role = eu.visuals.front()->role();
  for (const LayoutElement* v : eu.visuals)
    if (v->role() != role) return false;
  *role_out = role;
  return true;
}

class Builder {
 public:
  Builder(std::vector<LayoutElement>& elements,
          const ConstructionParams& params, const Embeddings& embeddings,
          const DecisionChain& chain)
      : params_(params), embeddings_(embeddings), chain_(chain) {
    for (LayoutElement& e : elements) {
      if (e.excluded) continue;
      if (!e.canon_role)
        throw std::invalid_argument("element " + e.element_id +
                                    " has no canonical role; run role "
                                    "normalization before construction");
      ordered_.push_back(&e);
    }
    std::stable_sort(ordered_.begin(), ordered_.end(),
                     [](const LayoutElement* a, const LayoutElement* b) {
                       return a->order < b->order;
                     });
  }

  BuildResult run() {
    phase_a_seed();
    if (chain_.active("D1_010")) phase_a_attach();
    phase_a_merge();
    if (chain_.active("D1_040")) phase_b();
    phase_c1();
    phase_c2();
    phase_c3();
    return finalize();
  }

 private:
  void log(std::string phase, std::string rule, const std::string& subject,
           const std::string& object, std::optional<double> metric,
           std::optional<double> threshold, std::string outcome) {
    trace_.push_back({std::move(phase), std::move(rule), subject, object,
                      metric, threshold, std::move(outcome)});
  }

  bool assigned(const LayoutElement* e) const { return assigned_.count(e); }

  void attach(WorkingEu& eu, LayoutElement* e) {
    eu.members.push_back(e);
    assigned_.insert(e);
  }

  WorkingEu& new_eu(EuKind kind, LayoutElement* head) {
    eus_.push_back(WorkingEu{kind, {head}, {}, false});
    assigned_.insert(head);
    return eus_.back();
  }

  // Reading-order gate: a different, non-excluded section_header strictly
  // between the two orders blocks attachment and merging.
  bool header_between(int lo_order, int hi_order,
                      const LayoutElement* self) const {
    for (const LayoutElement* e : ordered_) {
      if (e == self || e->role() != CanonRole::section_header) continue;
      if (e->order > lo_order && e->order < hi_order) return true;
    }
    return false;
  }

  void phase_a_seed() {
    for (LayoutElement* e : ordered_) {
      if (!is_visual(e->role())) continue;
      EuKind kind = EuKind::visual_panel;
      if (e->role() == CanonRole::table) kind = EuKind::table_panel;
      else if (e->role() == CanonRole::chart) kind = EuKind::chart_panel;
      WorkingEu& eu = new_eu(kind, e);
      eu.visuals.push_back(e);
      log("A", "D1_010", e->element_id, "", std::nullopt, std::nullopt,
          "seed");
    }
  }

  void phase_a_attach() {
    const bool gate = chain_.active("D1_031");
    for (LayoutElement* e : ordered_) {
      if (assigned(e) || is_visual(e->role())) continue;
      if (!is_structural(e->role()) && !is_caption_label(e->raw_label))
        continue;
      WorkingEu* best = nullptr;
      double best_d = 0.0;
      bool any_seed = false;
      for (WorkingEu& eu : eus_) {
        if (eu.dead || eu.visuals.empty()) continue;
        any_seed = true;
        const double d =
            spatial_distance(e->bbox, core_bbox(eu), params_.x_weight);
        if (gate && d < params_.max_gravity_reach) {
          const LayoutElement* seed = eu.visuals.front();
          const int lo = std::min(e->order, seed->order);
          const int hi = std::max(e->order, seed->order);
          if (header_between(lo, hi, e)) {
            log("A", "D1_031", e->element_id, seed->element_id, d,
                params_.max_gravity_reach, "gated");
            continue;
          }
        }
        if (!best || d < best_d) {
          best = &eu;
          best_d = d;
        }
      }
      if (best && best_d < params_.max_gravity_reach) {
        attach(*best, e);
        log("A", "D1_010", e->element_id, best->visuals.front()->element_id,
            best_d, params_.max_gravity_reach, "attach");
      } else if (any_seed && best) {
        log("A", "D1_010", e->element_id, best->visuals.front()->element_id,
            best_d, params_.max_gravity_reach, "too_far");
      } else {
        log("A", "D1_010", e->element_id, "", std::nullopt,
            params_.max_gravity_reach, "no_seed");
      }
    }
  }

  void phase_a_merge() {
    const bool cross_allowed = chain_.active("D1_021");
    const bool guard = chain_.active("D1_051");
    const bool gate = chain_.active("D1_031");
    bool merged = true;
    std::set<std::pair<const WorkingEu*, const WorkingEu*>> rejected;
    while (merged) {
      merged = false;
      std::vector<WorkingEu*> visual_eus;
      for (WorkingEu& eu : eus_)
        if (!eu.dead && !eu.visuals.empty()) visual_eus.push_back(&eu);
      std::stable_sort(visual_eus.begin(), visual_eus.end(),
                       [](const WorkingEu* a, const WorkingEu* b) {
                         return core_bbox(*a).y1 < core_bbox(*b).y1;
                       });
      for (size_t i = 0; i + 1 < visual_eus.size() && !merged; ++i) {
        WorkingEu* a = visual_eus[i];
        WorkingEu* b = visual_eus[i + 1];
        const Bbox ca = core_bbox(*a);
        const Bbox cb = core_bbox(*b);
        const double gap = v_gap(ca, cb);
        if (gap >= params_.stat_panel_gap) continue;

        const std::string a_id = a->visuals.front()->element_id;
        const std::string b_id = b->visuals.front()->element_id;
        if (gate) {
          int a_max = a->visuals.front()->order;
          int b_min = b->visuals.front()->order;
          for (const LayoutElement* v : a->visuals)
            a_max = std::max(a_max, v->order);
          for (const LayoutElement* v : b->visuals)
            b_min = std::min(b_min, v->order);
          const int lo = std::min(a_max, b_min);
          const int hi = std::max(a_max, b_min);
          if (header_between(lo, hi, nullptr)) {
            if (rejected.insert({a, b}).second)
              log("A", "D1_031", a_id, b_id, gap, params_.stat_panel_gap,
                  "gated_merge");
            continue;
          }
        }

        CanonRole ra, rb;
        const bool pa = pure_type(*a, &ra);
        const bool pb = pure_type(*b, &rb);
        bool do_merge = false;
        EuKind merged_kind = a->kind;
        std::string outcome;
        if (pa && pb && ra == rb) {
          // Fragments of one visual (a row-split table) touch; distinct
          // same-type visuals at positive gap never merge.
          if (gap <= 0.0) {
            do_merge = true;
            merged_kind = a->kind;
            outcome = "merge_fragments";
          } else if (guard) {
            if (rejected.insert({a, b}).second)
              log("A", "D1_051", a_id, b_id, gap, params_.stat_panel_gap,
                  "reject_same_type");
            continue;
          } else {
            do_merge = true;
            outcome = "merge_unguarded";
          }
        } else if (pa && pb &&
                   ((ra == CanonRole::table && rb == CanonRole::chart) ||
                    (ra == CanonRole::chart && rb == CanonRole::table))) {
          if (!cross_allowed) continue;
          do_merge = true;
          merged_kind = EuKind::stat_panel;
          outcome = "merge_stat_panel";
        } else {
          if (guard) {
            if (rejected.insert({a, b}).second)
              log("A", "D1_051", a_id, b_id, gap, params_.stat_panel_gap,
                  "reject_type_conflict");
            continue;
          }
          do_merge = true;
          bool has_table = false, has_chart = false;
          for (const LayoutElement* v : a->visuals) {
            has_table |= v->role() == CanonRole::table;
            has_chart |= v->role() == CanonRole::chart;
          }
          for (const LayoutElement* v : b->visuals) {
            has_table |= v->role() == CanonRole::table;
            has_chart |= v->role() == CanonRole::chart;
          }
          merged_kind =
              has_table && has_chart ? EuKind::stat_panel : a->kind;
          outcome = "merge_unguarded";
        }
        if (!do_merge) continue;

        // Survivor is the earlier-created EU so ids stay stable.
        WorkingEu* survivor = a;
        WorkingEu* absorbed = b;
        for (const WorkingEu& eu : eus_) {
          if (&eu == a) break;
          if (&eu == b) {
            survivor = b;
            absorbed = a;
            break;
          }
        }
        for (LayoutElement* m : absorbed->members)
          survivor->members.push_back(m);
        for (LayoutElement* v : absorbed->visuals)
          survivor->visuals.push_back(v);
        absorbed->dead = true;
        survivor->kind = merged_kind;
        log("A", "D1_021", a_id, b_id, gap,
            outcome == "merge_stat_panel" ? params_.stat_panel_gap : 0.0,
            outcome);
        merged = true;
      }
    }
  }

  void phase_b() {
    std::vector<LayoutElement*> paragraphs;
    for (LayoutElement* e : ordered_)
      if (!assigned(e) && e->role() == CanonRole::support_paragraph)
        paragraphs.push_back(e);
    std::vector<WorkingEu*> cols;
    for (WorkingEu& eu : eus_)
      if (!eu.dead) cols.push_back(&eu);
    if (paragraphs.empty() || cols.empty()) return;

    // Member vectors are frozen before any assignment: allocation is
    // simultaneous against the Phase A state.
    std::vector<std::vector<Eigen::VectorXd>> member_vecs(cols.size());
    for (size_t j = 0; j < cols.size(); ++j)
      for (const LayoutElement* m : cols[j]->members)
        member_vecs[j].push_back(embeddings_.for_element(*m));

    for (LayoutElement* p : paragraphs) {
      const Eigen::VectorXd pv = embeddings_.for_element(*p);
      if (pv.norm() == 0.0) {
        log("B", "D1_040", p->element_id, "", std::nullopt, params_.tau,
            "skipped_no_embedding");
        continue;
      }
      int best_j = -1;
      double best_sim = 0.0;
      for (size_t j = 0; j < cols.size(); ++j) {
        double sim = 0.0;
        for (const Eigen::VectorXd& mv : member_vecs[j])
          sim = std::max(sim, cosine_sim(pv, mv));
        if (best_j < 0 || sim > best_sim) {  // ties keep the earlier EU
          best_j = static_cast<int>(j);
          best_sim = sim;
        }
      }
      const std::string head = cols[best_j]->members.front()->element_id;
      if (best_sim >= params_.tau) {
        attach(*cols[best_j], p);
        log("B", "D1_040", p->element_id, head, best_sim, params_.tau,
            "assign");
      } else {
        log("B", "D1_040", p->element_id, head, best_sim, params_.tau,
            "below_threshold");
      }
    }
  }

  void phase_c1() {
    for (size_t i = 0; i < ordered_.size(); ++i) {
      LayoutElement* e = ordered_[i];
      if (assigned(e) || e->role() != CanonRole::section_header) continue;
      WorkingEu& eu = new_eu(EuKind::section_text, e);
      log("C", "C-1", e->element_id, "", std::nullopt, std::nullopt,
          "start_section");
      for (size_t k = i + 1; k < ordered_.size(); ++k) {
        LayoutElement* f = ordered_[k];
        if (f->role() == CanonRole::section_header) break;
        if (!assigned(f) && f->role() == CanonRole::support_paragraph) {
          attach(eu, f);
          log("C", "C-1", f->element_id, e->element_id, std::nullopt,
              std::nullopt, "collect");
        }
      }
    }
  }

  void phase_c2() {
    for (LayoutElement* e : ordered_) {
      if (assigned(e)) continue;
      if (e->role() != CanonRole::unit_label &&
          e->role() != CanonRole::topic_title)
        continue;
      WorkingEu* best = nullptr;
      double best_d = 0.0;
      for (WorkingEu& eu : eus_) {
        if (eu.dead || eu.visuals.empty()) continue;
        const double d =
            spatial_distance(e->bbox, core_bbox(eu), params_.x_weight);
        if (!best || d < best_d) {
          best = &eu;
          best_d = d;
        }
      }
      if (best && best_d < params_.label_reattach_dist) {
        attach(*best, e);
        log("C", "C-2", e->element_id, best->visuals.front()->element_id,
            best_d, params_.label_reattach_dist, "reattach");
      } else {
        e->canon_role = CanonRole::plain_text;
        log("C", "C-2", e->element_id,
            best ? best->visuals.front()->element_id : "",
            best ? std::optional<double>(best_d) : std::nullopt,
            params_.label_reattach_dist, "demote");
      }
    }
  }

  void phase_c3() {
    WorkingEu* cluster = nullptr;
    LayoutElement* prev = nullptr;
    for (LayoutElement* e : ordered_) {
      if (assigned(e)) continue;
      const CanonRole r = e->role();
      if (r != CanonRole::support_paragraph && r != CanonRole::plain_text)
        continue;
      if (cluster) {
        const double gap = v_gap(prev->bbox, e->bbox);
        const double xdiff = std::abs(prev->bbox.x1 - e->bbox.x1);
        const int order_gap = e->order - prev->order;
        if (gap < params_.c3_vgap && xdiff < params_.c3_xalign &&
            order_gap <= params_.c3_order_gap) {
          attach(*cluster, e);
          log("C", "C-3", e->element_id, prev->element_id, gap,
              params_.c3_vgap, "join");
          prev = e;
          continue;
        }
        // Log the first failing bound for the split.
        if (gap >= params_.c3_vgap)
          log("C", "C-3", e->element_id, prev->element_id, gap,
              params_.c3_vgap, "split_vgap");
        else if (xdiff >= params_.c3_xalign)
          log("C", "C-3", e->element_id, prev->element_id, xdiff,
              params_.c3_xalign, "split_xalign");
        else
          log("C", "C-3", e->element_id, prev->element_id,
              static_cast<double>(order_gap),
              static_cast<double>(params_.c3_order_gap), "split_order");
      }
      cluster = &new_eu(EuKind::text_cluster, e);
      prev = e;
    }
  }

  BuildResult finalize() {
    BuildResult result;
    result.trace = std::move(trace_);
    int seq = 0;
    for (const WorkingEu& eu : eus_) {
      if (eu.dead) continue;
      EvidenceUnit out;
      out.page_id = eu.members.front()->page_id;
      out.eu_id = out.page_id + "/eu" + std::to_string(++seq);
      out.kind = eu.kind;
      for (const LayoutElement* m : eu.members)
        out.members.push_back(m->element_id);
      out.footprint = full_bbox(eu);
      result.eus.push_back(std::move(out));
    }
    for (const LayoutElement* e : ordered_)
      if (!assigned(e))
        throw std::logic_error("element " + e->element_id +
                               " left unassigned after construction");
    return result;
  }

  const ConstructionParams& params_;
  const Embeddings& embeddings_;
  const DecisionChain& chain_;
  std::vector<LayoutElement*> ordered_;
  std::deque<WorkingEu> eus_;
  std::set<const LayoutElement*> assigned_;
  std::vector<TraceEntry> trace_;
};

}  // namespace

SimilarityMatrix build_similarity(
    const std::vector<const LayoutElement*>& paragraphs,
    const std::vector<std::vector<const LayoutElement*>>& eu_members,
    const Embeddings& embeddings) {
  SimilarityMatrix m;
  m.scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(paragraphs.size()),
                                   static_cast<Eigen::Index>(eu_members.size()));
  for (const LayoutElement* p : paragraphs)
    m.paragraph_ids.push_back(p->element_id);
  for (const auto& members : eu_members)
    m.eu_head_ids.push_back(members.empty() ? "" : members.front()->element_id);
  for (size_t i = 0; i < paragraphs.size(); ++i) {
    const Eigen::VectorXd pv = embeddings.for_element(*paragraphs[i]);
    for (size_t j = 0; j < eu_members.size(); ++j) {
      double sim = 0.0;
      for (const LayoutElement* member : eu_members[j])
        sim = std::max(sim, cosine_sim(pv, embeddings.for_element(*member)));
      m.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          sim;
    }
  }
  return m;
}

BuildResult build_eus(std::vector<LayoutElement>& elements,
                      const ConstructionParams& params,
                      const Embeddings& embeddings,
                      const DecisionChain& chain) {
  params.validate();
  if (elements.empty()) return {};
  Builder builder(elements, params, embeddings, chain);
  return builder.run();
}

BuildResult build_eus(std::vector<LayoutElement>& elements,
                      const ConstructionParams& params,
                      const Embeddings& embeddings) {
  const DecisionChain chain = default_rule_chain(params);
  return build_eus(elements, params, embeddings, chain);
}

}  // namespace euc
