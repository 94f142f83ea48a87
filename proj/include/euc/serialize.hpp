#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "euc/build.hpp"
#include "euc/decision.hpp"
#include "euc/model.hpp"

namespace euc {

using Json = nlohmann::ordered_json;

// One page of normalized, role-tagged elements as stored on disk. The
// format is the canonical page schema plus canon_role/excluded per
// element, with bboxes already in [0,1], so the file re-ingests cleanly.
struct NormalizedPage {
  std::string page_id;
  double width_px = 0.0;
  double height_px = 0.0;
  std::vector<LayoutElement> elements;
};

struct EuPage {
  std::string page_id;
  std::vector<EvidenceUnit> eus;
  std::vector<TraceEntry> trace;
};

Json bbox_to_json(const Bbox& b);
Bbox bbox_from_json(const Json& j, const std::string& ctx);

Json elements_to_json(const std::vector<NormalizedPage>& pages);
std::vector<NormalizedPage> elements_from_json(const Json& j,
                                               const std::string& ctx);
std::vector<NormalizedPage> read_elements_file(const std::string& path);

Json eus_to_json(const std::vector<EuPage>& pages);
std::vector<EuPage> eus_from_json(const Json& j, const std::string& ctx);
std::vector<EuPage> read_eus_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace euc
