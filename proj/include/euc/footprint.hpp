#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "euc/model.hpp"
#include "euc/serialize.hpp"

namespace euc {

// One parser's (or the ground truth's) EUs over a shared page set.
struct TrackResult {
  std::string name;
  std::map<std::string, std::vector<EvidenceUnit>> pages;
};

TrackResult load_track(const std::string& name, const std::string& path);

struct MatchedPair {
  std::string eu_a;
  std::string eu_b;
  double iou = 0.0;
};

// Greedy maximum-IoU matching of two EU sets from the same page: repeatedly
// pair the highest-IoU unmatched pair with IoU > 0. Ties are broken on the
// id pair sorted low/high, so swapping the arguments mirrors the pairs
// instead of changing them. Leftover EUs land in the unmatched lists.
struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::string> unmatched_a;
  std::vector<std::string> unmatched_b;
};

MatchResult match_eus(const std::vector<EvidenceUnit>& a,
                      const std::vector<EvidenceUnit>& b);

struct PageComparison {
  std::string page_id;
  MatchResult match;
};

// Convergence statistics for one ordered track pair.
struct PairStats {
  std::string track_a;
  std::string track_b;
  std::vector<PageComparison> pages;
  std::vector<std::string> uncomparable;  // page ids present in only one track
  int matched = 0;
  int unmatched_a = 0;
  int unmatched_b = 0;
  std::optional<double> mean_iou;
  std::optional<double> min_iou;
  int exact = 0;  // matched pairs with IoU == 1 (within 1e-12)
  // Histogram over matched-pair IoUs: [0,0.5), [0.5,0.8), [0.8,0.95), [0.95,1].
  std::array<int, 4> buckets{};
};

struct ConvergenceReport {
  std::vector<PairStats> pairs;
};

// Compares every unordered track pair in listed order. Requires >= 2 tracks.
ConvergenceReport convergence_report(const std::vector<TrackResult>& tracks);

Json convergence_to_json(const ConvergenceReport& report);
std::string convergence_to_csv(const ConvergenceReport& report);

}  // namespace euc
