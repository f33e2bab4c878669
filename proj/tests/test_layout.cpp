#include <optional>
#include <stdexcept>

#include "doctest.h"
#include "ecgdig/layout.hpp"

using namespace ecgdig;

namespace {

// Downsized-scale framed sheet: light background, dark frame ring whose wall
// is thick enough to survive the median pre-filter, a little signal inside.
GrayImage framed_sheet(int w, int h, Rect frame, int wall = 3) {
  GrayImage img = GrayImage::filled(w, h, 230);
  for (int y = frame.y; y < frame.y + frame.height; ++y)
    for (int x = frame.x; x < frame.x + frame.width; ++x) {
      const bool interior = x >= frame.x + wall && x < frame.x + frame.width - wall &&
                            y >= frame.y + wall && y < frame.y + frame.height - wall;
      if (!interior) img.at(x, y) = 30;
    }
  for (int x = frame.x + 20; x < frame.x + frame.width - 20; ++x)
    img.at(x, frame.y + frame.height / 2) = 40;
  return img;
}

}  // namespace

TEST_CASE("per-type defaults are internally consistent") {
  for (SheetType type : {SheetType::kType1, SheetType::kType2, SheetType::kType3}) {
    TypeProfile p = TypeProfile::defaults(type);
    CHECK(p.type == type);
    CHECK((p.downsample_factor == 4 || p.downsample_factor == 8));
    CHECK(p.frame_shifts.top >= 0);
    CHECK(p.frame_shifts.bottom >= 0);
    CHECK(p.frame_shifts.left >= 0);
    CHECK(p.frame_shifts.right >= 0);
    CHECK(p.px_per_big_square > 0.0);
    CHECK(p.binarize_threshold >= 0);
    CHECK(p.binarize_threshold <= 255);
  }
  CHECK(TypeProfile::defaults(SheetType::kType1).lead_table.size() == 12);
  CHECK(TypeProfile::defaults(SheetType::kType2).lead_table.empty());
  CHECK(TypeProfile::defaults(SheetType::kType3).downsample_factor == 8);
}

TEST_CASE("declared sheet types parse and undeclared ones are refused") {
  CHECK(classify_sheet(std::optional<std::string>("type1")) == SheetType::kType1);
  CHECK(classify_sheet(std::optional<std::string>("Type2")) == SheetType::kType2);
  CHECK(classify_sheet(std::optional<std::string>("3")) == SheetType::kType3);
  CHECK_THROWS_WITH_AS(classify_sheet(std::nullopt), "sheet type required",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(classify_sheet(std::optional<std::string>("")),
                       "sheet type required", std::invalid_argument);
  CHECK_THROWS_AS(parse_sheet_type("type9"), std::invalid_argument);
  CHECK(to_string(SheetType::kType3) == "type3");
}

TEST_CASE("frame extraction crops to the frame box") {
  const Rect frame{20, 15, 141, 106};  // ring spans columns 20..160, rows 15..120
  const int wall = 3;
  GrayImage sheet = framed_sheet(200, 150, frame, wall);
  GrayImage original = sheet;

  TypeProfile profile = TypeProfile::defaults(SheetType::kType2);
  profile.frame_shifts = {};
  GrayImage crop = extract_inner_frame(sheet, profile);

  // With no shift the crop is the frame's bounding box; the per-type shifts
  // exist to step past the wall into the interior.
  CHECK(crop.width == frame.width);
  CHECK(crop.height == frame.height);
  CHECK(std::abs(crop.width - (frame.width - 2 * wall)) <= 2 * wall);
  CHECK(crop.width < sheet.width);
  CHECK(crop.height < sheet.height);
  CHECK(sheet.pixels == original.pixels);  // source untouched

  // The signal line must have survived into the crop.
  bool has_ink = false;
  for (auto p : crop.pixels)
    if (p <= 40) has_ink = true;
  CHECK(has_ink);
}

TEST_CASE("frame shifts inset the crop") {
  const Rect frame{20, 15, 141, 106};
  GrayImage sheet = framed_sheet(200, 150, frame);
  TypeProfile none = TypeProfile::defaults(SheetType::kType2);
  none.frame_shifts = {};
  TypeProfile inset = none;
  inset.frame_shifts = {5, 5, 5, 5};

  GrayImage base = extract_inner_frame(sheet, none);
  GrayImage shifted = extract_inner_frame(sheet, inset);
  CHECK(shifted.width == base.width - 10);
  CHECK(shifted.height == base.height - 10);
}

TEST_CASE("frame extraction refuses frameless input") {
  GrayImage blank = GrayImage::filled(100, 80, 230);
  TypeProfile profile = TypeProfile::defaults(SheetType::kType2);
  CHECK_THROWS_WITH_AS(extract_inner_frame(blank, profile),
                       "frame not found; supply manual crop coordinates",
                       std::runtime_error);

  TypeProfile t1 = TypeProfile::defaults(SheetType::kType1);
  CHECK_THROWS_AS(extract_inner_frame(blank, t1), std::invalid_argument);
}

TEST_CASE("oversized shifts are reported rather than wrapped") {
  const Rect frame{20, 15, 60, 50};
  GrayImage sheet = framed_sheet(120, 100, frame, 3);
  TypeProfile profile = TypeProfile::defaults(SheetType::kType2);
  profile.frame_shifts = {40, 40, 40, 40};
  CHECK_THROWS_AS(extract_inner_frame(sheet, profile), std::runtime_error);
}

TEST_CASE("binarization separates ink from a light grid") {
  GrayImage img = GrayImage::filled(10, 3, 255);
  for (int x = 0; x < 10; ++x) img.at(x, 1) = 200;  // colored grid line
  img.at(4, 2) = 30;                                // ink
  BinaryImage b = binarize_sheet(img, TypeProfile::defaults(SheetType::kType1));
  CHECK(b.foreground_count() == 1);
  CHECK(b.at(4, 2) == 1);

  GrayImage white = GrayImage::filled(6, 6, 255);
  CHECK(binarize_sheet(white, TypeProfile::defaults(SheetType::kType2)).foreground_count() == 0);
  GrayImage dark = GrayImage::filled(6, 6, 0);
  CHECK(binarize_sheet(dark, TypeProfile::defaults(SheetType::kType2)).foreground_count() == 36);
}

TEST_CASE("cleanup removes glyph-sized blobs and keeps the signal") {
  BinaryImage img = BinaryImage::filled(120, 40, 0);
  for (int x = 0; x < 120; ++x) img.at(x, 20) = 1;  // 120-px signal line
  for (int y = 5; y < 10; ++y)
    for (int x = 5; x < 10; ++x) img.at(x, y) = 1;  // 25-px glyph blob

  TypeProfile profile = TypeProfile::defaults(SheetType::kType2);  // min 30
  BinaryImage cleaned = clean_sheet(img, profile);
  CHECK(cleaned.foreground_count() == 120);
  CHECK(cleaned.at(7, 7) == 0);
  CHECK(cleaned.at(60, 20) == 1);

  BinaryImage again = clean_sheet(cleaned, profile);
  CHECK(again.pixels == cleaned.pixels);  // signal-only sheet is a fixed point

  BinaryImage empty = BinaryImage::filled(8, 8, 0);
  CHECK(clean_sheet(empty, profile).foreground_count() == 0);
}
