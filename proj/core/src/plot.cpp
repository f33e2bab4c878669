#include "ecgdig/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ecgdig/csvio.hpp"

namespace ecgdig {

namespace {

std::string fmt2(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

AxisRange padded_range(const std::vector<double>& values, double pad_fraction) {
  AxisRange range;
  range.lo = *std::min_element(values.begin(), values.end());
  range.hi = *std::max_element(values.begin(), values.end());
  double pad = (range.hi - range.lo) * pad_fraction;
  if (pad <= 0.0) pad = 1.0;  // a flat series still gets a visible band
  range.lo -= pad;
  range.hi += pad;
  return range;
}

double map_linear(double v, const AxisRange& from, double to_lo, double to_hi) {
  return to_lo + (v - from.lo) / (from.hi - from.lo) * (to_hi - to_lo);
}

std::string svg_open(int width, int height, const std::string& title) {
  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + std::to_string(width) + " " +
      std::to_string(height) + "\" font-family=\"monospace\" font-size=\"12\">\n";
  out += "<rect width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" fill=\"#ffffff\"/>\n";
  out += "<rect x=\"" + std::to_string(kPlotMargin) + "\" y=\"" + std::to_string(kPlotMargin) +
         "\" width=\"" + std::to_string(width - 2 * kPlotMargin) + "\" height=\"" +
         std::to_string(height - 2 * kPlotMargin) + "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
  out += "<text x=\"" + std::to_string(width / 2) + "\" y=\"24\" text-anchor=\"middle\">" +
         xml_escape(title) + "</text>\n";
  return out;
}

void append_corner_labels(std::string& out, int width, int height, const AxisRange& x,
                          const AxisRange& y) {
  const std::string bottom = std::to_string(height - kPlotMargin + 16);
  out += "<text x=\"" + std::to_string(kPlotMargin) + "\" y=\"" + bottom + "\">" +
         format_number(x.lo) + "</text>\n";
  out += "<text x=\"" + std::to_string(width - kPlotMargin) + "\" y=\"" + bottom +
         "\" text-anchor=\"end\">" + format_number(x.hi) + "</text>\n";
  out += "<text x=\"" + std::to_string(kPlotMargin - 4) + "\" y=\"" +
         std::to_string(height - kPlotMargin) + "\" text-anchor=\"end\">" + format_number(y.lo) +
         "</text>\n";
  out += "<text x=\"" + std::to_string(kPlotMargin - 4) + "\" y=\"" +
         std::to_string(kPlotMargin + 4) + "\" text-anchor=\"end\">" + format_number(y.hi) +
         "</text>\n";
}

}  // namespace

std::string svg_series(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<std::uint8_t>& gaps, const std::string& title) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("series plot needs matching, non-empty x and y");
  }
  if (!gaps.empty() && gaps.size() != y.size()) {
    throw std::invalid_argument("gap mask length does not match the series");
  }
  const int width = kSeriesPlotWidth;
  const int height = kSeriesPlotHeight;
  const AxisRange xr = padded_range(x, 0.0);
  const AxisRange yr = padded_range(y, 0.05);
  const double x0 = kPlotMargin, x1 = width - kPlotMargin;
  const double y0 = height - kPlotMargin, y1 = kPlotMargin;  // screen y grows downward

  std::string out = svg_open(width, height, title);
  append_corner_labels(out, width, height, xr, yr);

  out += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\" points=\"";
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k != 0) out += ' ';
    out += fmt2(map_linear(x[k], xr, x0, x1)) + "," + fmt2(map_linear(y[k], yr, y0, y1));
  }
  out += "\"/>\n";

  // Dashed retrace of each bridged run, extended to the sound neighbours so
  // the overlay connects to the curve.
  for (std::size_t k = 0; k < gaps.size();) {
    if (!gaps[k]) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < gaps.size() && gaps[end]) ++end;
    const std::size_t from = k > 0 ? k - 1 : k;
    const std::size_t to = end < gaps.size() ? end : end - 1;
    out +=
        "<polyline fill=\"none\" stroke=\"#c03a2b\" stroke-width=\"1\" "
        "stroke-dasharray=\"4 3\" points=\"";
    for (std::size_t s = from; s <= to; ++s) {
      if (s != from) out += ' ';
      out += fmt2(map_linear(x[s], xr, x0, x1)) + "," + fmt2(map_linear(y[s], yr, y0, y1));
    }
    out += "\"/>\n";
    k = end;
  }

  out += "</svg>\n";
  return out;
}

std::string svg_roc(const RocCurve& curve, const std::string& title) {
  if (curve.points.empty()) throw std::invalid_argument("ROC curve has no points");
  const int size = kRocPlotSize;
  const AxisRange unit{0.0, 1.0};
  const double lo = kPlotMargin, hi = size - kPlotMargin;

  std::string out = svg_open(size, size, title);
  append_corner_labels(out, size, size, unit, unit);
  out += "<line x1=\"" + fmt2(lo) + "\" y1=\"" + fmt2(hi) + "\" x2=\"" + fmt2(hi) + "\" y2=\"" +
         fmt2(lo) + "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";

  out += "<path fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" d=\"";
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    out += k == 0 ? "M " : " L ";
    out += fmt2(map_linear(curve.points[k].fpr, unit, lo, hi)) + " " +
           fmt2(map_linear(curve.points[k].tpr, unit, hi, lo));
  }
  out += "\"/>\n";

  out += "<text x=\"" + fmt2(hi - 8) + "\" y=\"" + fmt2(hi - 8) +
         "\" text-anchor=\"end\">AUC " + format_number(curve.auc) + "</text>\n";
  out += "</svg>\n";
  return out;
}

std::string svg_profile(const std::vector<double>& counts, const std::string& title) {
  if (counts.empty()) throw std::invalid_argument("profile plot needs at least one row");
  std::vector<double> rows(counts.size());
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = static_cast<double>(k);
  return svg_series(rows, counts, {}, title);
}

}  // namespace ecgdig
