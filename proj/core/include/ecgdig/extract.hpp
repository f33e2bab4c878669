#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ecgdig/geometry.hpp"
#include "ecgdig/raster.hpp"

namespace ecgdig {

// Per-row foreground pixel counts of a binary sheet; the valleys between
// signal baselines are where strips get separated.
struct RowProfile {
  std::vector<int> counts;  // one entry per image row, each in [0, width]
};

// One lead's ink reduced to a per-column vertical position.
struct LeadTrace {
  std::string lead;
  std::vector<double> columns;     // mean foreground row per column, fractional
  std::vector<std::uint8_t> gaps;  // 1 where the source column had no foreground
  Rect crop;                       // where the strip sat in sheet coordinates
};

// Calibrated signal in physical units.
struct TimeSeries {
  std::string lead;
  double dt = 0.0;             // seconds per sample
  std::vector<double> values;  // millivolts, upward deflection positive
  std::vector<std::uint8_t> gaps;
};

// Named lookup rectangle for fixed-layout sheets.
struct LeadRect {
  std::string lead;
  Rect rect;
};

// Count foreground pixels per row.
RowProfile row_profile(const BinaryImage& img);

// Local maxima of the profile, accepted greedily from tallest to shortest
// while keeping every pair at least min_distance rows apart; returned in
// ascending row order.  An all-zero profile yields no peaks.
std::vector<int> find_strip_peaks(const RowProfile& profile, int min_distance);

// Separation rows between strips.  Each gap between consecutive peaks is cut
// at the median row among those attaining the interval's minimum count.  If
// the region below the last peak still holds more than trailing_threshold
// foreground pixels, a further signal is assumed there and one more cut is
// added by the same rule.  Fewer than two peaks (and no trailing signal)
// yields no cuts: the whole image is a single strip.
std::vector<int> cut_points(const RowProfile& profile, const std::vector<int>& peaks,
                            long long trailing_threshold = 200);

// Split a sheet into horizontal strips at the given cut rows.  Cuts must be
// strictly increasing and inside (0, height); the strips tile the image.
std::vector<BinaryImage> cut_strips(const BinaryImage& img, const std::vector<int>& cuts);

// Crop each lookup rectangle out of a fixed-layout sheet.  A rectangle that
// leaves the image bounds raises an error naming the offending lead.
std::vector<std::pair<std::string, BinaryImage>> crop_type1_leads(
    const BinaryImage& img, const std::vector<LeadRect>& table);

// Collapse a strip to one vertical position per column (mean foreground row).
// Columns without foreground are linearly bridged from their nearest occupied
// neighbours (replicated at the ends) and flagged in the gap mask.  A strip
// with no foreground at all is an error.
LeadTrace trace_columns(const BinaryImage& strip, std::string lead = {}, Rect crop = {});

// Map pixel coordinates to seconds and millivolts.  One big grid square is
// 5 mm, so mm_per_px = 5 / px_per_big_square; dt = mm_per_px / speed; voltage
// is measured from the strip baseline (median of non-gap columns), upward
// deflection positive.
TimeSeries calibrate(const LeadTrace& trace, double px_per_big_square,
                     double speed_mm_per_s = 25.0, double gain_mm_per_mv = 10.0);

}  // namespace ecgdig
