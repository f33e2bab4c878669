#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgdig/study.hpp"

namespace ecgdig {

// Figure geometry is frozen so identical inputs always produce identical
// files and tests can predict screen coordinates: series figures use a
// 900x300 viewport, ROC figures 480x480, with a 40-unit margin all around.
inline constexpr int kSeriesPlotWidth = 900;
inline constexpr int kSeriesPlotHeight = 300;
inline constexpr int kRocPlotSize = 480;
inline constexpr int kPlotMargin = 40;

// Polyline plot of y against x; every sample becomes one vertex of a single
// <polyline>.  Samples flagged in `gaps` (optional; empty means none) are
// retraced by dashed overlay segments so bridged stretches stay visible.
std::string svg_series(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<std::uint8_t>& gaps, const std::string& title);

// ROC path over the unit square with the chance diagonal and the area in
// the corner label.
std::string svg_roc(const RocCurve& curve, const std::string& title);

// Row-occupancy profile: count per row index drawn as a series plot.
std::string svg_profile(const std::vector<double>& counts, const std::string& title);

}  // namespace ecgdig
