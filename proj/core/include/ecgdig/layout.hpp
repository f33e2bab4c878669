#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ecgdig/extract.hpp"
#include "ecgdig/raster.hpp"

namespace ecgdig {

// The three supported sheet layouts: Type 1 is a fixed 3x4 lead grid on a
// colored grid, Types 2 and 3 are framed sheets of stacked strips at two
// different print resolutions.
enum class SheetType { kType1, kType2, kType3 };

// Inset applied to the detected frame bounding box, in downsized pixels.
struct FrameShifts {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;
};

// Everything type-specific the pipeline needs.  The defaults candidly reflect
// calibration against the synthetic corpus; every field can be overridden per
// sheet through the manifest.
struct TypeProfile {
  SheetType type = SheetType::kType1;
  int downsample_factor = 4;        // 4 or 8
  int binarize_threshold = 128;     // t for the threshold stage
  bool inverted = true;             // ink is darker than the background
  FrameShifts frame_shifts;         // Types 2/3 only
  std::size_t min_contour_pixels = 50;
  double px_per_big_square = 20.0;  // at the downsized, traced scale
  int min_peak_distance = 60;       // row-profile peak spacing, 3 big squares
  std::vector<std::string> strip_leads;  // Types 2/3: lead name per strip, top down
  std::vector<LeadRect> lead_table; // Type 1 fixed crops, downsized scale

  static TypeProfile defaults(SheetType type);
};

// Map a declared sheet type ("type1", "Type2", "3", ...) to the enum; the
// declaration is mandatory, nothing is auto-detected.
SheetType parse_sheet_type(const std::string& declared);
SheetType classify_sheet(const std::optional<std::string>& declared);
std::string to_string(SheetType type);

// Locate the frame drawn around Types 2/3 content and crop the original image
// to its inside.  A smoothed, sharpened, thresholded and closed working copy
// is searched for its largest contour; the crop is that contour's bounding
// box inset by the profile's shifts, applied to the untouched original.
// When crop_rect is given it receives the chosen rectangle in input
// coordinates.
GrayImage extract_inner_frame(const GrayImage& img, const TypeProfile& profile,
                              Rect* crop_rect = nullptr);

// Threshold with the profile's t and polarity.  On Type 1 this is also what
// removes the printed color grid, which lands above t in grayscale.
BinaryImage binarize_sheet(const GrayImage& img, const TypeProfile& profile);

// Drop connected components below the profile's minimum pixel count: label
// glyphs, grid residue, specks.  Thin signal fragments may go with them.
BinaryImage clean_sheet(const BinaryImage& img, const TypeProfile& profile);

}  // namespace ecgdig
