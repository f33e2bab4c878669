#include "ecgdig/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

#include "ecgdig/resample.hpp"

namespace ecgdig {

namespace {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

GrayImage crop_gray(const GrayImage& img, const Rect& r) {
  if (r.x < 0 || r.y < 0 || r.width <= 0 || r.height <= 0 ||
      r.x + r.width > img.width || r.y + r.height > img.height) {
    throw std::invalid_argument("manual crop rectangle out of bounds");
  }
  GrayImage out;
  out.width = r.width;
  out.height = r.height;
  out.pixels.resize(static_cast<std::size_t>(r.width) * r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) out.at(x, y) = img.at(r.x + x, r.y + y);
  return out;
}

}  // namespace

DigitizeResult digitize_sheet(const GrayImage& sheet, const TypeProfile& profile,
                              const DigitizeOptions& options) {
  if (sheet.empty()) throw std::invalid_argument("zero-dimension image");
  DigitizeResult result;
  log_stage(result.log, "input",
            {{"width", std::to_string(sheet.width)},
             {"height", std::to_string(sheet.height)},
             {"type", to_string(profile.type)}});

  // The skew estimate runs on the downsized sheet: frame, grid, and baseline
  // lines stay long there while short signal flanks fall under the minimum
  // run length and stop polluting the angle statistics. The correction itself
  // is applied at full scale so the later downsampling antialiases it.
  GrayImage working = downsample_area(sheet, profile.downsample_factor);
  if (options.deskew_enabled) {
    // Averaging softens edge gradients below what the median-derived edge
    // thresholds accept, so the detector sees a contrast-restored copy.
    const RotationEstimate estimate = estimate_rotation(
        convolve(working, Kernel::sharpen3x3()), options.deskew, options.sigma_fraction,
        options.seed);
    result.rotation_deg = estimate.degrees;
    if (estimate.lines_found && std::abs(estimate.degrees) > 0.05) {
      working = downsample_area(rotate(sheet, -estimate.degrees), profile.downsample_factor);
      result.rotated = true;
    }
    log_stage(result.log, "deskew",
              {{"estimated_deg", format_double(estimate.degrees)},
               {"lines_found", estimate.lines_found ? "true" : "false"},
               {"applied", result.rotated ? "true" : "false"}});
  }
  log_stage(result.log, "downsample",
            {{"factor", std::to_string(profile.downsample_factor)},
             {"width", std::to_string(working.width)},
             {"height", std::to_string(working.height)}});

  Rect crop = {0, 0, working.width, working.height};
  if (profile.type != SheetType::kType1) {
    if (options.manual_crop.has_value()) {
      crop = *options.manual_crop;
      working = crop_gray(working, crop);
      log_stage(result.log, "frame_crop",
                {{"mode", "manual"},
                 {"x", std::to_string(crop.x)},
                 {"y", std::to_string(crop.y)},
                 {"width", std::to_string(crop.width)},
                 {"height", std::to_string(crop.height)}});
    } else {
      working = extract_inner_frame(working, profile, &crop);
      log_stage(result.log, "frame_crop",
                {{"mode", "detected"},
                 {"x", std::to_string(crop.x)},
                 {"y", std::to_string(crop.y)},
                 {"width", std::to_string(crop.width)},
                 {"height", std::to_string(crop.height)}});
    }
  }
  result.crop_rect = crop;

  BinaryImage binary = binarize_sheet(working, profile);
  log_stage(result.log, "binarize",
            {{"threshold", std::to_string(profile.binarize_threshold)},
             {"inverted", profile.inverted ? "true" : "false"}});
  binary = clean_sheet(binary, profile);
  log_stage(result.log, "clean",
            {{"min_pixels", std::to_string(profile.min_contour_pixels)}});

  // Segmentation: fixed lookup rectangles on Type 1, row-profile cuts on the
  // framed types.
  if (profile.type == SheetType::kType1) {
    const auto crops = crop_type1_leads(binary, profile.lead_table);
    log_stage(result.log, "segment",
              {{"mode", "lookup_table"}, {"leads", std::to_string(crops.size())}});
    for (std::size_t i = 0; i < crops.size(); ++i) {
      result.traces.push_back(
          trace_columns(crops[i].second, crops[i].first, profile.lead_table[i].rect));
    }
  } else {
    const RowProfile rows = row_profile(binary);
    const std::vector<int> peaks = find_strip_peaks(rows, profile.min_peak_distance);
    if (peaks.empty()) throw std::runtime_error("no signal strips found");
    // An extra strip only counts when its pixel mass exceeds a few full rows;
    // the stroke pen itself always leaves ink below the last baseline.
    const long long trailing = 3LL * binary.width;
    const std::vector<int> cuts = cut_points(rows, peaks, trailing);
    const std::vector<BinaryImage> strips = cut_strips(binary, cuts);
    log_stage(result.log, "segment",
              {{"mode", "row_profile"},
               {"peaks", std::to_string(peaks.size())},
               {"strips", std::to_string(strips.size())},
               {"min_peak_distance", std::to_string(profile.min_peak_distance)},
               {"trailing_threshold", std::to_string(trailing)}});
    if (strips.size() != profile.strip_leads.size()) {
      throw std::runtime_error("expected " + std::to_string(profile.strip_leads.size()) +
                               " strips, found " + std::to_string(strips.size()));
    }
    int start_row = 0;
    for (std::size_t i = 0; i < strips.size(); ++i) {
      const Rect strip_rect = {crop.x, crop.y + start_row, strips[i].width,
                               strips[i].height};
      result.traces.push_back(trace_columns(strips[i], profile.strip_leads[i], strip_rect));
      start_row += strips[i].height;
    }
  }

  for (const LeadTrace& trace : result.traces) {
    TimeSeries series = calibrate(trace, profile.px_per_big_square);
    if (options.upsample_factor > 1) {
      series.values = upsample_zeropad(series.values, options.upsample_factor);
      series.dt /= options.upsample_factor;
      std::vector<std::uint8_t> gaps;
      gaps.reserve(series.values.size());
      for (std::uint8_t g : series.gaps)
        for (int r = 0; r < options.upsample_factor; ++r) gaps.push_back(g);
      series.gaps = std::move(gaps);
    }
    result.series.push_back(std::move(series));
  }
  log_stage(result.log, "calibrate",
            {{"px_per_big_square", format_double(profile.px_per_big_square)},
             {"speed_mm_s", "25"},
             {"gain_mm_mv", "10"}});
  log_stage(result.log, "upsample",
            {{"factor", std::to_string(options.upsample_factor)}});
  return result;
}

}  // namespace ecgdig
