#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "euc/embedding.hpp"
#include "euc/model.hpp"
#include "euc/serialize.hpp"

namespace euc {

struct QAPair {
  std::string qa_id;
  std::string page_id;
  std::string source_type;  // "table", "figure", or "text"
  std::string question;
  std::string evidence;
  int protocol_scope = 0;  // reading-order distance used at generation
};

struct Chunk {
  std::string chunk_id;
  std::string page_id;
  std::string text;
  Eigen::VectorXd embedding;
  size_t char_count = 0;
};

// Deterministic QA generation from role-tagged pages. Captions ask about
// their nearest visual element (evidence: caption + visual + footnotes +
// nearby text within `order_distance`); section headers ask about their
// following text blocks. Elements with empty question text are skipped.
std::vector<QAPair> generate_qa(const std::vector<NormalizedPage>& pages,
                                int order_distance);

Json qas_to_json(const std::vector<QAPair>& qas);
std::vector<QAPair> qas_from_json(const Json& j, const std::string& ctx);

// Baseline chunking: one chunk per non-excluded element.
std::vector<Chunk> chunks_from_elements(const std::vector<NormalizedPage>& pages,
                                        const Embeddings& embeddings);

// EU chunking: one chunk per EU; text is the member texts joined with
// newlines in reading order.
std::vector<Chunk> chunks_from_eus(const std::vector<EuPage>& eu_pages,
                                   std::vector<NormalizedPage>& element_pages,
                                   const Embeddings& embeddings);

inline constexpr size_t kLcsCap = 20000;

// Character-level longest common subsequence length over inputs truncated
// to `cap` characters each.
size_t lcs_length(const std::string& a, const std::string& b,
                  size_t cap = kLcsCap);

// LCS length divided by the (truncated) evidence length.
double lcs_ratio(const std::string& retrieved, const std::string& evidence,
                 size_t cap = kLcsCap);

struct QueryRecord {
  std::string qa_id;
  std::string source_type;
  double rank1_lcs = 0.0;
  std::optional<int> first_hit_rank;    // within top max(ks)
  std::optional<size_t> first_hit_chars;
  std::vector<bool> hit_at;             // parallel to ks
};

struct EvalReport {
  std::string protocol;
  std::string track;
  std::string chunking;  // "element" or "eu"
  std::vector<int> ks;
  size_t lcs_cap = kLcsCap;
  double hit_threshold = 0.3;
  size_t n_qas = 0;
  size_t n_chunks = 0;
  std::vector<QueryRecord> queries;
  double avg_lcs = 0.0;                  // mean rank-1 LCS ratio over all QAs
  std::vector<double> recall_at;         // parallel to ks
  std::optional<double> min_k;           // mean first-hit rank over hit QAs
  std::optional<double> avg_chars;       // mean first-hit chunk size
};

// Ranks chunks per question by cosine similarity (ties by chunk_id) and
// scores hits with lcs_ratio > 0.3. Throws on an empty chunk set; an empty
// QA set yields a report with zero queries.
EvalReport evaluate(const std::vector<QAPair>& qas,
                    const std::vector<Chunk>& chunks,
                    const Embeddings& embeddings,
                    std::vector<int> ks = {1, 2, 3, 5});

Json eval_to_json(const EvalReport& report);
std::string eval_to_csv(const EvalReport& report);

}  // namespace euc
