#include "euc/footprint.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "euc/geometry.hpp"
#include "euc/ingest.hpp"

namespace euc {

TrackResult load_track(const std::string& name, const std::string& path) {
  TrackResult track;
  track.name = name;
  for (EuPage& page : read_eus_file(path)) {
    auto [it, inserted] = track.pages.emplace(page.page_id, std::move(page.eus));
    if (!inserted)
      throw SchemaError(path + ": duplicate page_id '" + it->first + "'");
  }
  return track;
}

MatchResult match_eus(const std::vector<EvidenceUnit>& a,
                      const std::vector<EvidenceUnit>& b) {
  struct Candidate {
    double iou;
    std::string lo, hi;  // id pair sorted low/high, for symmetric tie-break
    size_t ia, ib;
  };
  std::vector<Candidate> cands;
  cands.reserve(a.size() * b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      const double iou = bbox_iou(a[i].footprint, b[j].footprint);
      if (iou > 0.0) {
        Candidate c;
        c.iou = iou;
        c.lo = std::min(a[i].eu_id, b[j].eu_id);
        c.hi = std::max(a[i].eu_id, b[j].eu_id);
        c.ia = i;
        c.ib = j;
        cands.push_back(std::move(c));
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.iou != y.iou) return x.iou > y.iou;
    if (x.lo != y.lo) return x.lo < y.lo;
    return x.hi < y.hi;
  });

  MatchResult result;
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  for (const Candidate& c : cands) {
    if (used_a[c.ia] || used_b[c.ib]) continue;
    used_a[c.ia] = true;
    used_b[c.ib] = true;
    result.pairs.push_back({a[c.ia].eu_id, b[c.ib].eu_id, c.iou});
  }
  for (size_t i = 0; i < a.size(); ++i)
    if (!used_a[i]) result.unmatched_a.push_back(a[i].eu_id);
  for (size_t j = 0; j < b.size(); ++j)
    if (!used_b[j]) result.unmatched_b.push_back(b[j].eu_id);
  return result;
}

namespace {

PairStats compare_tracks(const TrackResult& ta, const TrackResult& tb) {
  PairStats stats;
  stats.track_a = ta.name;
  stats.track_b = tb.name;

  std::set<std::string> all_pages;
  for (const auto& [pid, _] : ta.pages) all_pages.insert(pid);
  for (const auto& [pid, _] : tb.pages) all_pages.insert(pid);

  double iou_sum = 0.0;
  for (const std::string& pid : all_pages) {
    auto ia = ta.pages.find(pid);
    auto ib = tb.pages.find(pid);
    if (ia == ta.pages.end() || ib == tb.pages.end()) {
      stats.uncomparable.push_back(pid);
      continue;
    }
    PageComparison pc;
    pc.page_id = pid;
    pc.match = match_eus(ia->second, ib->second);
    stats.unmatched_a += static_cast<int>(pc.match.unmatched_a.size());
    stats.unmatched_b += static_cast<int>(pc.match.unmatched_b.size());
    for (const MatchedPair& pair : pc.match.pairs) {
      ++stats.matched;
      iou_sum += pair.iou;
      stats.min_iou = stats.min_iou ? std::min(*stats.min_iou, pair.iou)
                                    : pair.iou;
      if (pair.iou >= 1.0 - 1e-12) ++stats.exact;
      if (pair.iou < 0.5)
        ++stats.buckets[0];
      else if (pair.iou < 0.8)
        ++stats.buckets[1];
      else if (pair.iou < 0.95)
        ++stats.buckets[2];
      else
        ++stats.buckets[3];
    }
    stats.pages.push_back(std::move(pc));
  }
  if (stats.matched > 0) stats.mean_iou = iou_sum / stats.matched;
  return stats;
}

}  // namespace

ConvergenceReport convergence_report(const std::vector<TrackResult>& tracks) {
  if (tracks.size() < 2)
    throw std::invalid_argument(
        "convergence_report: needs at least two tracks, got " +
        std::to_string(tracks.size()));
  ConvergenceReport report;
  for (size_t i = 0; i < tracks.size(); ++i)
    for (size_t j = i + 1; j < tracks.size(); ++j)
      report.pairs.push_back(compare_tracks(tracks[i], tracks[j]));
  return report;
}

Json convergence_to_json(const ConvergenceReport& report) {
  static const char* kBucketNames[4] = {"lt_0.50", "0.50_0.80", "0.80_0.95",
                                        "0.95_1.00"};
  Json out;
  Json pairs = Json::array();
  for (const PairStats& ps : report.pairs) {
    Json pj;
    pj["track_a"] = ps.track_a;
    pj["track_b"] = ps.track_b;
    pj["pages_compared"] = ps.pages.size();
    pj["matched"] = ps.matched;
    pj["unmatched_a"] = ps.unmatched_a;
    pj["unmatched_b"] = ps.unmatched_b;
    pj["mean_iou"] = ps.mean_iou ? Json(*ps.mean_iou) : Json(nullptr);
    pj["min_iou"] = ps.min_iou ? Json(*ps.min_iou) : Json(nullptr);
    pj["exact"] = ps.exact;
    Json buckets;
    for (int k = 0; k < 4; ++k) buckets[kBucketNames[k]] = ps.buckets[k];
    pj["histogram"] = std::move(buckets);
    pj["uncomparable"] = ps.uncomparable;
    Json pages = Json::array();
    for (const PageComparison& pc : ps.pages) {
      Json cj;
      cj["page_id"] = pc.page_id;
      Json matched = Json::array();
      for (const MatchedPair& mp : pc.match.pairs) {
        Json mj;
        mj["eu_a"] = mp.eu_a;
        mj["eu_b"] = mp.eu_b;
        mj["iou"] = mp.iou;
        matched.push_back(std::move(mj));
      }
      cj["pairs"] = std::move(matched);
      cj["unmatched_a"] = pc.match.unmatched_a;
      cj["unmatched_b"] = pc.match.unmatched_b;
      pages.push_back(std::move(cj));
    }
    pj["pages"] = std::move(pages);
    pairs.push_back(std::move(pj));
  }
  out["pairs"] = std::move(pairs);
  return out;
}

std::string convergence_to_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "track_a,track_b,pages_compared,matched,unmatched_a,unmatched_b,"
         "mean_iou,min_iou,exact,bucket_lt_0.50,bucket_0.50_0.80,"
         "bucket_0.80_0.95,bucket_0.95_1.00,uncomparable_pages\n";
  out.precision(17);
  for (const PairStats& ps : report.pairs) {
    out << ps.track_a << ',' << ps.track_b << ',' << ps.pages.size() << ','
        << ps.matched << ',' << ps.unmatched_a << ',' << ps.unmatched_b << ',';
    if (ps.mean_iou) out << *ps.mean_iou;
    out << ',';
    if (ps.min_iou) out << *ps.min_iou;
    out << ',' << ps.exact;
    for (int k = 0; k < 4; ++k) out << ',' << ps.buckets[k];
    out << ',';
    for (size_t i = 0; i < ps.uncomparable.size(); ++i) {
      if (i) out << ';';
      out << ps.uncomparable[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace euc
