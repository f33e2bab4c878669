#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ecgdig/edgeline.hpp"
#include "ecgdig/extract.hpp"
#include "ecgdig/geometry.hpp"
#include "ecgdig/layout.hpp"
#include "ecgdig/provenance.hpp"
#include "ecgdig/raster.hpp"

namespace ecgdig {

// Knobs shared by every sheet type.  The line-transform defaults are tuned
// for full-scale scans, where strokes and frame bars are several pixels wide
// and quiet baseline runs span a few hundred columns.
struct DigitizeOptions {
  // Tilted lines spread their votes across neighbouring distance cells (about
  // one cell per 115 px of length at the 1-degree angle step), so the vote
  // threshold stays low and the run length/gap rules do the real filtering.
  HoughConfig deskew{1.0, 1, 18, 60.0, 12.0, 0.25};
  // Permissive edge thresholds so the faint printed grid also contributes
  // lines on sheets whose frame alone gives too few.
  double sigma_fraction = 0.55;
  int upsample_factor = 8;
  std::uint64_t seed = 1;
  bool deskew_enabled = true;
  // Downsized-coordinate crop that replaces frame detection (Types 2/3); the
  // escape hatch for sheets whose frame the detector cannot find.
  std::optional<Rect> manual_crop;
};

struct DigitizeResult {
  std::vector<LeadTrace> traces;   // pixel-domain traces, pre-upsampling
  std::vector<TimeSeries> series;  // calibrated and upsampled, same order
  ProcessingLog log;
  double rotation_deg = 0.0;       // estimated skew that was removed
  bool rotated = false;
  Rect crop_rect;                  // downsized work area fed to segmentation
};

// Full digitization of one grayscale sheet: deskew at full scale, downsize,
// crop to the frame interior (Types 2/3), binarize, drop small components,
// split into per-lead strips, trace, calibrate, and spectrally upsample.
// Throws on unusable input; callers isolate failures per sheet.
DigitizeResult digitize_sheet(const GrayImage& sheet, const TypeProfile& profile,
                              const DigitizeOptions& options = {});

}  // namespace ecgdig
