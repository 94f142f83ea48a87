#include "euc/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "euc/eu_ops.hpp"
#include "euc/ingest.hpp"
#include "euc/roles.hpp"

namespace euc {

namespace {

bool is_footnote_label(const std::string& raw) {
  const std::string lower = to_lower(raw);
  return lower == "footnote" || lower.ends_with("_footnote");
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Plain prose elements usable as "nearby text" evidence.
bool is_text_block(const LayoutElement& e) {
  if (is_caption_label(e.raw_label) || is_footnote_label(e.raw_label))
    return false;
  const CanonRole role = e.role();
  return role == CanonRole::support_paragraph || role == CanonRole::plain_text;
}

bool is_visual_role(CanonRole role) {
  return role == CanonRole::table || role == CanonRole::chart ||
         role == CanonRole::picture;
}

// Visual roles a caption may describe, inferred from its label prefix.
std::vector<CanonRole> caption_targets(const std::string& raw) {
  const std::string lower = to_lower(raw);
  if (lower.starts_with("table")) return {CanonRole::table};
  if (lower.starts_with("figure") || lower.starts_with("picture") ||
      lower.starts_with("image"))
    return {CanonRole::picture, CanonRole::chart};
  if (lower.starts_with("chart")) return {CanonRole::chart};
  return {CanonRole::table, CanonRole::chart, CanonRole::picture};
}

std::string join_nonempty(const std::vector<const LayoutElement*>& members) {
  std::string out;
  for (const LayoutElement* m : members) {
    if (m->text.empty()) continue;
    if (!out.empty()) out += '\n';
    out += m->text;
  }
  return out;
}

}  // namespace

std::vector<QAPair> generate_qa(const std::vector<NormalizedPage>& pages,
                                int order_distance) {
  if (order_distance < 1)
    throw std::invalid_argument("generate_qa: order_distance must be >= 1");
  std::vector<QAPair> qas;
  for (const NormalizedPage& page : pages) {
    std::vector<const LayoutElement*> elems;
    for (const LayoutElement& e : page.elements)
      if (!e.excluded) elems.push_back(&e);
    std::sort(elems.begin(), elems.end(),
              [](const LayoutElement* a, const LayoutElement* b) {
                return a->order < b->order;
              });
    int seq = 0;
    for (const LayoutElement* e : elems) {
      if (is_caption_label(e->raw_label)) {
        if (is_blank(e->text)) continue;
        const std::vector<CanonRole> targets = caption_targets(e->raw_label);
        const LayoutElement* visual = nullptr;
        for (const LayoutElement* v : elems) {
          if (v == e || !is_visual_role(v->role())) continue;
          if (std::find(targets.begin(), targets.end(), v->role()) ==
              targets.end())
            continue;
          if (!visual ||
              std::abs(v->order - e->order) <
                  std::abs(visual->order - e->order) ||
              (std::abs(v->order - e->order) ==
                   std::abs(visual->order - e->order) &&
               v->order < visual->order))
            visual = v;
        }
        if (!visual) continue;
        std::vector<const LayoutElement*> members = {e, visual};
        for (const LayoutElement* n : elems) {
          if (n == e || n == visual) continue;
          if (std::abs(n->order - e->order) > order_distance) continue;
          if (is_footnote_label(n->raw_label) ||
              (is_text_block(*n) && !n->text.empty()))
            members.push_back(n);
        }
        std::sort(members.begin(), members.end(),
                  [](const LayoutElement* a, const LayoutElement* b) {
                    return a->order < b->order;
                  });
        QAPair qa;
        qa.page_id = page.page_id;
        qa.qa_id = page.page_id + "/qa" + std::to_string(++seq);
        qa.source_type =
            visual->role() == CanonRole::table ? "table" : "figure";
        qa.question = e->text;
        qa.evidence = join_nonempty(members);
        qa.protocol_scope = order_distance;
        qas.push_back(std::move(qa));
      } else if (e->role() == CanonRole::section_header) {
        if (is_blank(e->text)) continue;
        std::vector<const LayoutElement*> members = {e};
        for (const LayoutElement* n : elems) {
          if (n->order <= e->order || n->order > e->order + order_distance)
            continue;
          if (is_text_block(*n) && !n->text.empty()) members.push_back(n);
        }
        std::sort(members.begin(), members.end(),
                  [](const LayoutElement* a, const LayoutElement* b) {
                    return a->order < b->order;
                  });
        QAPair qa;
        qa.page_id = page.page_id;
        qa.qa_id = page.page_id + "/qa" + std::to_string(++seq);
        qa.source_type = "text";
        qa.question = e->text;
        qa.evidence = join_nonempty(members);
        qa.protocol_scope = order_distance;
        qas.push_back(std::move(qa));
      }
    }
  }
  return qas;
}

Json qas_to_json(const std::vector<QAPair>& qas) {
  Json out = Json::array();
  for (const QAPair& qa : qas) {
    Json j;
    j["qa_id"] = qa.qa_id;
    j["page_id"] = qa.page_id;
    j["source_type"] = qa.source_type;
    j["question"] = qa.question;
    j["evidence"] = qa.evidence;
    j["protocol_scope"] = qa.protocol_scope;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<QAPair> qas_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw SchemaError(ctx + ": expected an array of QA pairs");
  std::vector<QAPair> qas;
  for (const Json& qj : j) {
    QAPair qa;
    for (const char* key : {"qa_id", "page_id", "source_type", "question",
                            "evidence"})
      if (!qj.contains(key) || !qj[key].is_string())
        throw SchemaError(ctx + ": QA pair missing string field '" +
                          std::string(key) + "'");
    qa.qa_id = qj["qa_id"].get<std::string>();
    qa.page_id = qj["page_id"].get<std::string>();
    qa.source_type = qj["source_type"].get<std::string>();
    qa.question = qj["question"].get<std::string>();
    qa.evidence = qj["evidence"].get<std::string>();
    if (qa.question.empty())
      throw SchemaError(ctx + ": QA '" + qa.qa_id + "' has an empty question");
    if (qa.evidence.empty())
      throw SchemaError(ctx + ": QA '" + qa.qa_id + "' has empty evidence");
    if (qj.contains("protocol_scope") &&
        qj["protocol_scope"].is_number_integer())
      qa.protocol_scope = qj["protocol_scope"].get<int>();
    qas.push_back(std::move(qa));
  }
  return qas;
}

std::vector<Chunk> chunks_from_elements(const std::vector<NormalizedPage>& pages,
                                        const Embeddings& embeddings) {
  std::vector<Chunk> chunks;
  for (const NormalizedPage& page : pages) {
    for (const LayoutElement& e : page.elements) {
      if (e.excluded) continue;
      Chunk c;
      c.chunk_id = e.element_id;
      c.page_id = page.page_id;
      c.text = e.text;
      c.embedding = embeddings.for_element(e);
      c.char_count = c.text.size();
      chunks.push_back(std::move(c));
    }
  }
  return chunks;
}

std::vector<Chunk> chunks_from_eus(const std::vector<EuPage>& eu_pages,
                                   std::vector<NormalizedPage>& element_pages,
                                   const Embeddings& embeddings) {
  ElementIndex index;
  for (NormalizedPage& page : element_pages)
    for (LayoutElement& e : page.elements) index[e.element_id] = &e;

  std::vector<Chunk> chunks;
  for (const EuPage& page : eu_pages) {
    for (const EvidenceUnit& eu : page.eus) {
      std::vector<const LayoutElement*> members;
      for (const std::string& mid : eu.members)
        members.push_back(&element_at(index, mid));
      std::sort(members.begin(), members.end(),
                [](const LayoutElement* a, const LayoutElement* b) {
                  return a->order < b->order;
                });
      std::string joined;
      for (size_t i = 0; i < members.size(); ++i) {
        if (i) joined += '\n';
        joined += members[i]->text;
      }
      Chunk c;
      c.chunk_id = eu.eu_id;
      c.page_id = page.page_id;
      c.text = joined;
      c.embedding = embeddings.for_members(members, joined);
      c.char_count = c.text.size();
      chunks.push_back(std::move(c));
    }
  }
  return chunks;
}

size_t lcs_length(const std::string& a, const std::string& b, size_t cap) {
  const size_t n = std::min(a.size(), cap);
  const size_t m = std::min(b.size(), cap);
  if (n == 0 || m == 0) return 0;
  std::vector<size_t> prev(m + 1, 0), curr(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1])
        curr[j] = prev[j - 1] + 1;
      else
        curr[j] = std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

double lcs_ratio(const std::string& retrieved, const std::string& evidence,
                 size_t cap) {
  const size_t elen = std::min(evidence.size(), cap);
  if (elen == 0) return 0.0;
  return static_cast<double>(lcs_length(retrieved, evidence, cap)) /
         static_cast<double>(elen);
}

EvalReport evaluate(const std::vector<QAPair>& qas,
                    const std::vector<Chunk>& chunks,
                    const Embeddings& embeddings, std::vector<int> ks) {
  if (chunks.empty())
    throw std::invalid_argument("evaluate: chunk set is empty");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty() || ks.front() < 1)
    throw std::invalid_argument("evaluate: ks must be positive integers");
  const int max_k = ks.back();

  EvalReport report;
  report.ks = ks;
  report.n_qas = qas.size();
  report.n_chunks = chunks.size();

  double lcs_sum = 0.0;
  std::vector<size_t> hit_counts(ks.size(), 0);
  double rank_sum = 0.0;
  double chars_sum = 0.0;
  size_t hits = 0;

  std::vector<size_t> order(chunks.size());
  for (const QAPair& qa : qas) {
    const Eigen::VectorXd qvec = embeddings.for_text(qa.question);
    std::vector<double> score(chunks.size());
    for (size_t i = 0; i < chunks.size(); ++i)
      score[i] = cosine_sim(qvec, chunks[i].embedding);
    std::iota(order.begin(), order.end(), size_t{0});
    const size_t depth =
        std::min(chunks.size(), static_cast<size_t>(max_k));
    auto better = [&](size_t x, size_t y) {
      if (score[x] != score[y]) return score[x] > score[y];
      return chunks[x].chunk_id < chunks[y].chunk_id;
    };
    std::partial_sort(order.begin(), order.begin() + depth, order.end(),
                      better);

    QueryRecord rec;
    rec.qa_id = qa.qa_id;
    rec.source_type = qa.source_type;
    for (size_t r = 0; r < depth; ++r) {
      const Chunk& c = chunks[order[r]];
      const double ratio = lcs_ratio(c.text, qa.evidence, report.lcs_cap);
      if (r == 0) rec.rank1_lcs = ratio;
      if (!rec.first_hit_rank && ratio > report.hit_threshold) {
        rec.first_hit_rank = static_cast<int>(r + 1);
        rec.first_hit_chars = c.char_count;
      }
    }
    rec.hit_at.resize(ks.size(), false);
    for (size_t i = 0; i < ks.size(); ++i)
      rec.hit_at[i] = rec.first_hit_rank && *rec.first_hit_rank <= ks[i];

    lcs_sum += rec.rank1_lcs;
    for (size_t i = 0; i < ks.size(); ++i)
      if (rec.hit_at[i]) ++hit_counts[i];
    if (rec.first_hit_rank) {
      ++hits;
      rank_sum += *rec.first_hit_rank;
      chars_sum += static_cast<double>(*rec.first_hit_chars);
    }
    report.queries.push_back(std::move(rec));
  }

  if (!qas.empty()) {
    report.avg_lcs = lcs_sum / static_cast<double>(qas.size());
    report.recall_at.resize(ks.size());
    for (size_t i = 0; i < ks.size(); ++i)
      report.recall_at[i] =
          static_cast<double>(hit_counts[i]) / static_cast<double>(qas.size());
    for (size_t i = 1; i < report.recall_at.size(); ++i)
      if (report.recall_at[i] < report.recall_at[i - 1])
        throw std::logic_error("evaluate: recall@K decreased with K");
    if (hits > 0) {
      report.min_k = rank_sum / static_cast<double>(hits);
      report.avg_chars = chars_sum / static_cast<double>(hits);
    }
  } else {
    report.recall_at.resize(ks.size(), 0.0);
  }
  return report;
}

Json eval_to_json(const EvalReport& report) {
  Json out;
  out["protocol"] = report.protocol;
  out["track"] = report.track;
  out["chunking"] = report.chunking;
  out["ks"] = report.ks;
  out["lcs_cap"] = report.lcs_cap;
  out["hit_threshold"] = report.hit_threshold;
  out["n_qas"] = report.n_qas;
  out["n_chunks"] = report.n_chunks;
  out["empty"] = report.n_qas == 0;
  out["avg_lcs"] = report.avg_lcs;
  Json recall;
  for (size_t i = 0; i < report.ks.size(); ++i)
    recall["recall@" + std::to_string(report.ks[i])] = report.recall_at[i];
  out["recall"] = std::move(recall);
  out["min_k"] = report.min_k ? Json(*report.min_k) : Json(nullptr);
  out["avg_chars"] = report.avg_chars ? Json(*report.avg_chars) : Json(nullptr);
  Json queries = Json::array();
  for (const QueryRecord& rec : report.queries) {
    Json qj;
    qj["qa_id"] = rec.qa_id;
    qj["source_type"] = rec.source_type;
    qj["rank1_lcs"] = rec.rank1_lcs;
    qj["first_hit_rank"] =
        rec.first_hit_rank ? Json(*rec.first_hit_rank) : Json(nullptr);
    qj["first_hit_chars"] =
        rec.first_hit_chars ? Json(*rec.first_hit_chars) : Json(nullptr);
    Json hits = Json::object();
    for (size_t i = 0; i < report.ks.size(); ++i)
      hits["hit@" + std::to_string(report.ks[i])] = (bool)rec.hit_at[i];
    qj["hits"] = std::move(hits);
    queries.push_back(std::move(qj));
  }
  out["queries"] = std::move(queries);
  return out;
}

std::string eval_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "qa_id,source_type,rank1_lcs,first_hit_rank,first_hit_chars";
  for (int k : report.ks) out << ",hit@" << k;
  out << '\n';
  for (const QueryRecord& rec : report.queries) {
    out << rec.qa_id << ',' << rec.source_type << ',' << rec.rank1_lcs << ',';
    if (rec.first_hit_rank) out << *rec.first_hit_rank;
    out << ',';
    if (rec.first_hit_chars) out << *rec.first_hit_chars;
    for (size_t i = 0; i < report.ks.size(); ++i)
      out << ',' << (rec.hit_at[i] ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

}  // namespace euc
