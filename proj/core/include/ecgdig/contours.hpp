#pragma once

#include <vector>

#include "ecgdig/geometry.hpp"
#include "ecgdig/raster.hpp"

namespace ecgdig {

// A traced border in a binary image. Outer borders walk the outside of an
// 8-connected foreground component; hole borders walk the foreground pixels
// around an enclosed 4-connected background region.
struct Contour {
  std::vector<Point> points;  // traced pixel chain, first point = discovery pixel
  bool is_hole = false;
  int parent = -1;            // index of the enclosing contour, -1 for roots
  long long area = 0;         // enclosed pixel count (see find_contours)
  Rect bbox;                  // tight axis-aligned bounds of the traced points
};

// Border following with full outer/hole hierarchy. Areas are integer-exact
// pixel counts: an outer contour's area is everything inside its border
// (component pixels plus any enclosed holes and nested content); a hole
// contour's area is everything strictly inside the hole.
std::vector<Contour> find_contours(const BinaryImage& img);

// Contour with the largest enclosed pixel count; ties go to the contour
// discovered first in scan order. Throws on an empty list.
const Contour& max_area_contour(const std::vector<Contour>& contours);

// Erases every 8-connected foreground component whose enclosed pixel count
// (component plus nested content) is below min_pixels.
BinaryImage filter_small(const BinaryImage& img, int min_pixels);

}  // namespace ecgdig
