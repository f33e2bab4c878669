#include "ecgdig/layout.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "ecgdig/contours.hpp"

namespace ecgdig {

namespace {

// Standard 3x4 lead arrangement, one row per line here.
std::vector<LeadRect> type1_lead_table() {
  const char* names[3][4] = {{"I", "aVR", "V1", "V4"},
                             {"II", "aVL", "V2", "V5"},
                             {"III", "aVF", "V3", "V6"}};
  const int xs[4] = {30, 295, 560, 825};
  const int ys[3] = {40, 210, 380};
  const int w = 250;
  const int h = 140;
  std::vector<LeadRect> table;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 4; ++col) table.push_back({names[row][col], {xs[col], ys[row], w, h}});
  return table;
}

}  // namespace

TypeProfile TypeProfile::defaults(SheetType type) {
  TypeProfile p;
  p.type = type;
  switch (type) {
    case SheetType::kType1:
      p.downsample_factor = 4;
      p.binarize_threshold = 128;
      p.inverted = true;
      p.frame_shifts = {};  // no frame on Type 1
      p.min_contour_pixels = 50;
      p.px_per_big_square = 20.0;
      p.min_peak_distance = 60;  // unused: Type 1 crops via the lead table
      p.lead_table = type1_lead_table();
      break;
    case SheetType::kType2:
      p.downsample_factor = 4;
      p.binarize_threshold = 100;
      p.inverted = true;
      p.frame_shifts = {10, 10, 10, 10};
      p.min_contour_pixels = 30;
      p.px_per_big_square = 20.0;
      p.min_peak_distance = 60;
      p.strip_leads = {"II", "V1", "V2"};
      break;
    case SheetType::kType3:
      p.downsample_factor = 8;
      // The stronger 8x downsampling dilutes a thin stroke's cells further,
      // so the cut-off sits higher than on the other framed layout.
      p.binarize_threshold = 128;
      p.inverted = true;
      p.frame_shifts = {15, 15, 15, 15};
      p.min_contour_pixels = 30;
      p.px_per_big_square = 10.0;
      p.min_peak_distance = 30;
      p.strip_leads = {"V1", "V2"};
      break;
  }
  return p;
}

SheetType parse_sheet_type(const std::string& declared) {
  std::string s;
  for (char c : declared) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "1" || s == "type1") return SheetType::kType1;
  if (s == "2" || s == "type2") return SheetType::kType2;
  if (s == "3" || s == "type3") return SheetType::kType3;
  throw std::invalid_argument("unknown sheet type \"" + declared + "\"");
}

SheetType classify_sheet(const std::optional<std::string>& declared) {
  if (!declared.has_value() || declared->empty())
    throw std::invalid_argument("sheet type required");
  return parse_sheet_type(*declared);
}

std::string to_string(SheetType type) {
  switch (type) {
    case SheetType::kType1: return "type1";
    case SheetType::kType2: return "type2";
    case SheetType::kType3: return "type3";
  }
  throw std::logic_error("unhandled sheet type");
}

GrayImage extract_inner_frame(const GrayImage& img, const TypeProfile& profile,
                              Rect* crop_rect) {
  if (profile.type == SheetType::kType1)
    throw std::invalid_argument("frame extraction applies to framed sheet types only");
  if (img.empty()) throw std::invalid_argument("zero-dimension image");

  // All detection work happens on a processed copy; the crop itself comes out
  // of the untouched original.
  const GrayImage smoothed = median_filter(img, 5);
  const GrayImage sharpened = convolve(smoothed, Kernel::sharpen3x3());
  BinaryImage mask = threshold(sharpened, profile.binarize_threshold, profile.inverted);
  mask = morphological_close(mask, 3);

  const std::vector<Contour> contours = find_contours(mask);
  if (contours.empty())
    throw std::runtime_error("frame not found; supply manual crop coordinates");
  const Contour& frame = max_area_contour(contours);

  const FrameShifts& s = profile.frame_shifts;
  const int x0 = frame.bbox.x + s.left;
  const int y0 = frame.bbox.y + s.top;
  const int x1 = frame.bbox.x + frame.bbox.width - s.right;
  const int y1 = frame.bbox.y + frame.bbox.height - s.bottom;
  if (x0 >= x1 || y0 >= y1)
    throw std::runtime_error("frame shifts leave no interior; supply manual crop coordinates");
  if (crop_rect != nullptr) *crop_rect = {x0, y0, x1 - x0, y1 - y0};

  GrayImage out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  return out;
}

BinaryImage binarize_sheet(const GrayImage& img, const TypeProfile& profile) {
  return threshold(img, profile.binarize_threshold, profile.inverted);
}

BinaryImage clean_sheet(const BinaryImage& img, const TypeProfile& profile) {
  return filter_small(img, static_cast<int>(profile.min_contour_pixels));
}

}  // namespace ecgdig
