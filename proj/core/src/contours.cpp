#include "ecgdig/contours.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ecgdig {

namespace {

// Neighbour ring in clockwise order (y grows downward): E, SE, S, SW, W, NW, N, NE.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int from_x, int from_y, int to_x, int to_y) {
  const int dx = to_x - from_x;
  const int dy = to_y - from_y;
  for (int d = 0; d < 8; ++d)
    if (kDx[d] == dx && kDy[d] == dy) return d;
  throw std::logic_error("non-adjacent border step");
}

// Connected-component breakdown of a mask: 8-connected foreground regions,
// 4-connected background regions, hole ownership, and integer-exact enclosed
// pixel counts for both kinds of region.
struct ComponentAnalysis {
  std::vector<int> fg_label;  // per pixel; -1 on background
  std::vector<int> bg_label;  // per pixel; -1 on foreground
  std::vector<long long> fg_size, bg_size;
  std::vector<char> bg_outside;    // background region touches the image edge
  std::vector<int> hole_owner;     // bg region -> enclosing fg region (-1 if outside)
  std::vector<int> fg_surround;    // fg region -> surrounding bg region (-1 = exterior)
  std::vector<long long> fg_enclosed, bg_enclosed;
};

ComponentAnalysis analyze_components(const BinaryImage& img) {
  const int w = img.width;
  const int h = img.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  ComponentAnalysis a;
  a.fg_label.assign(n, -1);
  a.bg_label.assign(n, -1);

  std::vector<std::size_t> stack;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  // Foreground components, 8-connectivity. Raster-order seeds make the first
  // pixel of each region its topmost-leftmost pixel.
  std::vector<std::size_t> fg_first;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = idx(x, y);
      if (!img.pixels[p] || a.fg_label[p] != -1) continue;
      const int label = static_cast<int>(a.fg_size.size());
      a.fg_size.push_back(0);
      fg_first.push_back(p);
      a.fg_label[p] = label;
      stack.assign(1, p);
      while (!stack.empty()) {
        const std::size_t q = stack.back();
        stack.pop_back();
        ++a.fg_size[label];
        const int qx = static_cast<int>(q % w);
        const int qy = static_cast<int>(q / w);
        for (int d = 0; d < 8; ++d) {
          const int nx = qx + kDx[d];
          const int ny = qy + kDy[d];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t r = idx(nx, ny);
          if (img.pixels[r] && a.fg_label[r] == -1) {
            a.fg_label[r] = label;
            stack.push_back(r);
          }
        }
      }
    }
  }

  // Background components, 4-connectivity.
  std::vector<std::size_t> bg_first;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = idx(x, y);
      if (img.pixels[p] || a.bg_label[p] != -1) continue;
      const int label = static_cast<int>(a.bg_size.size());
      a.bg_size.push_back(0);
      a.bg_outside.push_back(0);
      bg_first.push_back(p);
      a.bg_label[p] = label;
      stack.assign(1, p);
      while (!stack.empty()) {
        const std::size_t q = stack.back();
        stack.pop_back();
        ++a.bg_size[label];
        const int qx = static_cast<int>(q % w);
        const int qy = static_cast<int>(q / w);
        if (qx == 0 || qy == 0 || qx == w - 1 || qy == h - 1) a.bg_outside[label] = 1;
        for (int d = 0; d < 8; d += 2) {  // E, S, W, N
          const int nx = qx + kDx[d];
          const int ny = qy + kDy[d];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t r = idx(nx, ny);
          if (!img.pixels[r] && a.bg_label[r] == -1) {
            a.bg_label[r] = label;
            stack.push_back(r);
          }
        }
      }
    }
  }

  // A region's topmost-leftmost pixel has a pixel of the opposite kind
  // directly above it (otherwise that pixel would belong to the same region),
  // and that pixel lies in the enclosing region.
  const int n_fg = static_cast<int>(a.fg_size.size());
  const int n_bg = static_cast<int>(a.bg_size.size());
  a.hole_owner.assign(n_bg, -1);
  a.fg_surround.assign(n_fg, -1);
  for (int b = 0; b < n_bg; ++b) {
    if (a.bg_outside[b]) continue;
    const std::size_t p = bg_first[b];
    a.hole_owner[b] = a.fg_label[p - w];
  }
  for (int c = 0; c < n_fg; ++c) {
    const std::size_t p = fg_first[c];
    if (p < static_cast<std::size_t>(w)) continue;  // touches the top edge
    const int b = a.bg_label[p - w];
    a.fg_surround[c] = a.bg_outside[b] ? -1 : b;
  }

  // Enclosed counts, children before parents. A region is strictly deeper than
  // the region that surrounds it, so accumulating in decreasing depth order
  // sees every child before its parent.
  std::vector<int> fg_depth(n_fg, -1), bg_depth(n_bg, -1);
  for (int c = 0; c < n_fg; ++c) {
    if (fg_depth[c] != -1) continue;
    // Walk the surround chain down to a known depth, then unwind.
    std::vector<std::pair<char, int>> chain;  // ('f', fg idx) or ('b', bg idx)
    char kind = 'f';
    int cur = c;
    int base = 0;
    while (true) {
      if (kind == 'f') {
        if (fg_depth[cur] != -1) {
          base = fg_depth[cur];
          break;
        }
        chain.emplace_back('f', cur);
        const int s = a.fg_surround[cur];
        if (s == -1) {
          base = -1;  // chain root sits at depth 0
          break;
        }
        kind = 'b';
        cur = s;
      } else {
        if (bg_depth[cur] != -1) {
          base = bg_depth[cur];
          break;
        }
        chain.emplace_back('b', cur);
        kind = 'f';
        cur = a.hole_owner[cur];
      }
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      ++base;
      (it->first == 'f' ? fg_depth[it->second] : bg_depth[it->second]) = base;
    }
  }

  a.fg_enclosed = a.fg_size;
  a.bg_enclosed.assign(n_bg, 0);
  for (int b = 0; b < n_bg; ++b)
    if (!a.bg_outside[b]) a.bg_enclosed[b] = a.bg_size[b];

  std::vector<std::pair<int, std::pair<char, int>>> order;
  order.reserve(static_cast<std::size_t>(n_fg) + n_bg);
  for (int c = 0; c < n_fg; ++c) order.push_back({fg_depth[c], {'f', c}});
  for (int b = 0; b < n_bg; ++b)
    if (!a.bg_outside[b]) order.push_back({bg_depth[b], {'b', b}});
  std::sort(order.begin(), order.end(),
            [](const auto& l, const auto& r) { return l.first > r.first; });
  for (const auto& [depth, node] : order) {
    (void)depth;
    if (node.first == 'f') {
      const int s = a.fg_surround[node.second];
      if (s != -1) a.bg_enclosed[s] += a.fg_enclosed[node.second];
    } else {
      a.fg_enclosed[a.hole_owner[node.second]] += a.bg_enclosed[node.second];
    }
  }
  return a;
}

}  // namespace

std::vector<Contour> find_contours(const BinaryImage& img) {
  if (img.empty()) throw std::invalid_argument("zero-dimension image");
  const int w = img.width;
  const int h = img.height;
  const ComponentAnalysis comp = analyze_components(img);

  // Border-following pass. The marker matrix starts as the mask itself;
  // traced pixels receive the border number (negated when the followed
  // background lies directly to their east).
  std::vector<int> f(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = img.pixels[i] ? 1 : 0;
  auto fat = [&](int x, int y) -> int {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return f[static_cast<std::size_t>(y) * w + x];
  };
  auto fset = [&](int x, int y, int v) { f[static_cast<std::size_t>(y) * w + x] = v; };

  std::vector<Contour> contours;
  std::vector<int> border_parent(2, 0);   // by border number; 0 and 1 unused/frame
  std::vector<char> border_hole(2, 1);    // frame counts as a hole border
  int nbd = 1;

  for (int y = 0; y < h; ++y) {
    int lnbd = 1;
    for (int x = 0; x < w; ++x) {
      const int fv = fat(x, y);
      if (fv == 0) continue;

      bool start_outer = fv == 1 && fat(x - 1, y) == 0;
      bool start_hole = !start_outer && fv >= 1 && fat(x + 1, y) == 0;
      if (start_outer || start_hole) {
        ++nbd;
        const bool is_hole = start_hole;
        if (start_hole && fv > 1) lnbd = fv;

        // Parent from the most recently met border on this row.
        int parent_nbd;
        const bool lnbd_hole = border_hole[lnbd];
        if (is_hole)
          parent_nbd = lnbd_hole ? border_parent[lnbd] : lnbd;
        else
          parent_nbd = lnbd_hole ? lnbd : border_parent[lnbd];
        border_parent.push_back(parent_nbd);
        border_hole.push_back(is_hole ? 1 : 0);

        Contour c;
        c.is_hole = is_hole;
        c.parent = parent_nbd >= 2 ? parent_nbd - 2 : -1;
        if (is_hole) {
          // The pixel to the east is part of the enclosed hole.
          c.area = comp.bg_enclosed[comp.bg_label[static_cast<std::size_t>(y) * w + x + 1]];
        } else {
          c.area = comp.fg_enclosed[comp.fg_label[static_cast<std::size_t>(y) * w + x]];
        }

        // Follow the border (clockwise scan to find the previous neighbour,
        // then repeated counterclockwise scans to walk the chain).
        const int sx = x, sy = y;
        int d0 = is_hole ? 0 : 4;  // E for hole starts, W for outer starts
        int found = -1;
        for (int k = 0; k < 8; ++k) {
          const int d = (d0 + k) % 8;
          if (fat(sx + kDx[d], sy + kDy[d]) != 0) {
            found = d;
            break;
          }
        }
        if (found == -1) {
          fset(sx, sy, -nbd);
          c.points.push_back({sx, sy});
        } else {
          int x1 = sx + kDx[found], y1 = sy + kDy[found];
          int x2 = x1, y2 = y1;
          int x3 = sx, y3 = sy;
          while (true) {
            c.points.push_back({x3, y3});
            const int from = direction_of(x3, y3, x2, y2);
            int x4 = 0, y4 = 0;
            bool east_zero_examined = false;
            for (int k = 1; k <= 8; ++k) {
              const int d = (from - k + 16) % 8;  // counterclockwise walk
              const int cx = x3 + kDx[d];
              const int cy = y3 + kDy[d];
              if (fat(cx, cy) != 0) {
                x4 = cx;
                y4 = cy;
                break;
              }
              if (d == 0) east_zero_examined = true;
            }
            if (east_zero_examined)
              fset(x3, y3, -nbd);
            else if (fat(x3, y3) == 1)
              fset(x3, y3, nbd);
            if (x4 == sx && y4 == sy && x3 == x1 && y3 == y1) break;
            x2 = x3;
            y2 = y3;
            x3 = x4;
            y3 = y4;
          }
          // The loop appends the start twice when it closes on itself.
          if (c.points.size() > 1 && c.points.back() == c.points.front())
            c.points.pop_back();
        }

        int min_x = std::numeric_limits<int>::max(), min_y = min_x;
        int max_x = std::numeric_limits<int>::min(), max_y = max_x;
        for (const Point& p : c.points) {
          min_x = std::min(min_x, p.x);
          min_y = std::min(min_y, p.y);
          max_x = std::max(max_x, p.x);
          max_y = std::max(max_y, p.y);
        }
        c.bbox = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
        contours.push_back(std::move(c));
      }

      const int fnow = fat(x, y);
      if (fnow != 1) lnbd = std::abs(fnow);
    }
  }
  return contours;
}

const Contour& max_area_contour(const std::vector<Contour>& contours) {
  if (contours.empty()) throw std::invalid_argument("no contours to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < contours.size(); ++i)
    if (contours[i].area > contours[best].area) best = i;
  return contours[best];
}

BinaryImage filter_small(const BinaryImage& img, int min_pixels) {
  if (img.empty()) throw std::invalid_argument("zero-dimension image");
  if (min_pixels < 0) throw std::invalid_argument("min_pixels must be non-negative");
  const ComponentAnalysis comp = analyze_components(img);
  BinaryImage out = img;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    if (!out.pixels[i]) continue;
    if (comp.fg_enclosed[comp.fg_label[i]] < min_pixels) out.pixels[i] = 0;
  }
  return out;
}

}  // namespace ecgdig
