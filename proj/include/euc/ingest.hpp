#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "euc/model.hpp"

namespace euc {

// Input that fails schema or coordinate validation. The message always
// names the offending file/page/field; the CLI maps this to exit code 2.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RawElement {
  std::string id;  // empty -> derived as <page_id>#<order>
  std::string label;
  std::string subtype;
  Bbox bbox;  // pixel coordinates unless the page is already normalized
  std::optional<int> order;
  std::string text;
  std::optional<Eigen::VectorXd> embedding;
};

struct RawPage {
  std::string page_id;
  double width_px = 0.0;
  double height_px = 0.0;
  bool already_normalized = false;
  std::vector<RawElement> elements;
};

// Raw labels marked as page furniture and excluded from construction.
struct NonContentConfig {
  std::set<std::string> labels = {"page_header", "page_footer", "page_number",
                                  "abandoned"};
  bool contains(const std::string& raw_label) const;
};

enum class InputFormat { canonical, gt, mineru, docling };
InputFormat input_format_from_string(const std::string& name);
std::string_view to_string(InputFormat format);

// Loaders accept either a single page object or an array of pages (vendor
// formats follow their own nesting). Errors carry the file path.
std::vector<RawPage> load_canonical(const std::string& path);
std::vector<RawPage> load_gt(const std::string& path);
std::vector<RawPage> load_mineru(const std::string& path);
std::vector<RawPage> load_docling(const std::string& path);
std::vector<RawPage> load_input(const std::string& path, InputFormat format);

// Scales pixel bboxes into [0,1], clamps, assigns ids/orders, and marks
// non-content elements excluded. Inverted bboxes and duplicate orders or
// ids are errors. No element is dropped.
std::vector<LayoutElement> normalize_page(const RawPage& page,
                                          const NonContentConfig& non_content);

// normalize_page over every page plus run-level embedding checks: the
// first embedding seen fixes the dimension, any mismatch is an error.
std::vector<std::vector<LayoutElement>> normalize_pages(
    const std::vector<RawPage>& pages, const NonContentConfig& non_content);

}  // namespace euc
