#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ecgdig/plot.hpp"
#include "ecgdig/study.hpp"

using namespace ecgdig;

namespace {

std::size_t count_substrings(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    count += 1;
  }
  return count;
}

// Vertices in a polyline's points attribute: one comma per x,y pair.
std::size_t first_polyline_vertices(const std::string& svg) {
  const std::size_t open = svg.find("points=\"");
  REQUIRE(open != std::string::npos);
  const std::size_t close = svg.find('"', open + 8);
  const std::string points = svg.substr(open + 8, close - open - 8);
  return static_cast<std::size_t>(std::count(points.begin(), points.end(), ','));
}

}  // namespace

TEST_CASE("a two-point series is one polyline with two vertices") {
  const std::string svg = svg_series({0.0, 1.0}, {0.5, -0.5}, {}, "trace");
  CHECK(count_substrings(svg, "<polyline") == 1);
  CHECK(first_polyline_vertices(svg) == 2);
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(svg.find("viewBox=\"0 0 900 300\"") != std::string::npos);

  // Same input, same bytes.
  CHECK(svg == svg_series({0.0, 1.0}, {0.5, -0.5}, {}, "trace"));
}

TEST_CASE("bridged runs get a dashed overlay joined to sound neighbours") {
  const std::string svg =
      svg_series({0.0, 1.0, 2.0, 3.0}, {0.0, 0.5, 0.5, 0.0}, {0, 1, 1, 0}, "trace");
  CHECK(count_substrings(svg, "<polyline") == 2);
  CHECK(count_substrings(svg, "stroke-dasharray") == 1);
  const std::size_t overlay = svg.find("stroke-dasharray");
  const std::size_t open = svg.find("points=\"", overlay);
  const std::size_t close = svg.find('"', open + 8);
  const std::string points = svg.substr(open + 8, close - open - 8);
  CHECK(std::count(points.begin(), points.end(), ',') == 4);  // both neighbours included
}

TEST_CASE("degenerate series still plot") {
  CHECK(count_substrings(svg_series({0.0, 1.0}, {2.0, 2.0}, {}, "flat"), "<polyline") == 1);
  CHECK(count_substrings(svg_series({5.0}, {1.0}, {}, "dot"), "<polyline") == 1);
  CHECK_THROWS_AS(svg_series({}, {}, {}, "empty"), std::invalid_argument);
  CHECK_THROWS_AS(svg_series({0.0}, {1.0, 2.0}, {}, "ragged"), std::invalid_argument);
  CHECK_THROWS_AS(svg_series({0.0, 1.0}, {1.0, 2.0}, {1}, "bad mask"), std::invalid_argument);
}

TEST_CASE("titles are escaped for XML") {
  const std::string svg = svg_series({0.0, 1.0}, {0.0, 1.0}, {}, "a<b&c>\"d\"");
  CHECK(svg.find("a&lt;b&amp;c&gt;&quot;d&quot;") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("a perfect classifier's ROC path walks the left and top edges") {
  const RocCurve curve = roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  const std::string svg = svg_roc(curve, "roc");
  // margin 40 on a 480 square: (0,0) -> (40,440), (0,1) -> (40,40), (1,1) -> (440,40)
  CHECK(svg.find("M 40.00 440.00") != std::string::npos);
  CHECK(svg.find("L 40.00 40.00") != std::string::npos);
  CHECK(svg.find("L 440.00 40.00") != std::string::npos);
  CHECK(svg.find("AUC 1<") != std::string::npos);
  CHECK(svg.find("viewBox=\"0 0 480 480\"") != std::string::npos);
  CHECK(svg == svg_roc(curve, "roc"));
}

TEST_CASE("the ROC label carries the measured area") {
  const RocCurve curve = roc_auc({0.8, 0.6, 0.4, 0.2}, {1, 0, 1, 0});
  CHECK(svg_roc(curve, "roc").find("AUC 0.75<") != std::string::npos);
  CHECK_THROWS_AS(svg_roc(RocCurve{}, "roc"), std::invalid_argument);
}

TEST_CASE("profiles plot one vertex per row") {
  const std::string svg = svg_profile({3.0, 7.0, 2.0}, "rows");
  CHECK(count_substrings(svg, "<polyline") == 1);
  CHECK(first_polyline_vertices(svg) == 3);
  CHECK_THROWS_AS(svg_profile({}, "rows"), std::invalid_argument);
}
