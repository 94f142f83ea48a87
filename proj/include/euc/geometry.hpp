#pragma once

#include <algorithm>
#include <cmath>

namespace euc {

// Axis-aligned box in normalized page coordinates: x grows rightward,
// y grows downward, all four values in [0, 1].
struct Bbox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }

  bool operator==(const Bbox&) const = default;
};

inline bool bbox_valid(const Bbox& b) {
  return b.x1 >= 0.0 && b.x1 <= b.x2 && b.x2 <= 1.0 && b.y1 >= 0.0 &&
         b.y1 <= b.y2 && b.y2 <= 1.0;
}

inline bool bbox_contains(const Bbox& outer, const Bbox& inner) {
  return outer.x1 <= inner.x1 && outer.y1 <= inner.y1 &&
         outer.x2 >= inner.x2 && outer.y2 >= inner.y2;
}

inline Bbox bbox_union(const Bbox& a, const Bbox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

// Intersection over union. When both boxes have zero area the ratio is
// undefined; identical boxes count as coincident (1.0), anything else 0.0.
inline double bbox_iou(const Bbox& a, const Bbox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = std::max(0.0, iw) * std::max(0.0, ih);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

// Vertical gap between two boxes, 0 when their y-ranges overlap or touch.
inline double v_gap(const Bbox& a, const Bbox& b) {
  return std::max(0.0, std::max(a.y1, b.y1) - std::min(a.y2, b.y2));
}

inline double x_center_diff(const Bbox& a, const Bbox& b) {
  return std::abs(a.center_x() - b.center_x());
}

// Layout distance used for structural attachment: vertical gap plus a
// damped horizontal offset between box centers.
inline double spatial_distance(const Bbox& a, const Bbox& b,
                               double x_weight = 0.3) {
  return v_gap(a, b) + x_weight * x_center_diff(a, b);
}

}  // namespace euc
