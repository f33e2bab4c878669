#pragma once

namespace ecgdig {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  bool operator==(const Rect&) const = default;

  bool contains(const Point& p) const {
    return p.x >= x && p.x < x + width && p.y >= y && p.y < y + height;
  }
};

}  // namespace ecgdig
