#include "ecgdig/extract.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ecgdig {

namespace {

// Median row among the rows attaining the minimum count inside [first, last].
// For an even number of minima the lower median is taken, keeping the cut on
// an actual minimum row.
int median_minimum_row(const RowProfile& profile, int first, int last) {
  int min_count = profile.counts[first];
  for (int r = first; r <= last; ++r) min_count = std::min(min_count, profile.counts[r]);
  std::vector<int> rows;
  for (int r = first; r <= last; ++r)
    if (profile.counts[r] == min_count) rows.push_back(r);
  return rows[(rows.size() - 1) / 2];
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

RowProfile row_profile(const BinaryImage& img) {
  RowProfile profile;
  profile.counts.assign(img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    int count = 0;
    for (int x = 0; x < img.width; ++x) count += img.at(x, y) ? 1 : 0;
    profile.counts[y] = count;
  }
  return profile;
}

std::vector<int> find_strip_peaks(const RowProfile& profile, int min_distance) {
  if (min_distance < 1) throw std::invalid_argument("minimum peak distance must be at least 1");
  const int n = static_cast<int>(profile.counts.size());
  std::vector<int> candidates;
  for (int r = 0; r < n; ++r) {
    const int c = profile.counts[r];
    if (c <= 0) continue;
    if (r > 0 && profile.counts[r - 1] > c) continue;
    if (r + 1 < n && profile.counts[r + 1] > c) continue;
    candidates.push_back(r);
  }
  // Tallest first; ties resolved toward the upper row so the result is
  // independent of traversal order.
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return profile.counts[a] > profile.counts[b];
  });
  std::vector<int> accepted;
  for (int r : candidates) {
    bool ok = true;
    for (int a : accepted)
      if (std::abs(a - r) < min_distance) {
        ok = false;
        break;
      }
    if (ok) accepted.push_back(r);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

std::vector<int> cut_points(const RowProfile& profile, const std::vector<int>& peaks,
                            long long trailing_threshold) {
  const int n = static_cast<int>(profile.counts.size());
  for (int p : peaks)
    if (p < 0 || p >= n) throw std::invalid_argument("peak row outside profile");
  if (!std::is_sorted(peaks.begin(), peaks.end()))
    throw std::invalid_argument("peaks must be in ascending row order");

  std::vector<int> cuts;
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    const int first = peaks[i] + 1;
    const int last = peaks[i + 1] - 1;
    if (first > last) continue;  // adjacent peaks leave no room for a cut
    cuts.push_back(median_minimum_row(profile, first, last));
  }

  // A heavy tail below the last peak means a further signal went undetected
  // there; separate it with one more cut.
  if (!peaks.empty() && peaks.back() + 1 < n) {
    long long tail = 0;
    for (int r = peaks.back() + 1; r < n; ++r) tail += profile.counts[r];
    if (tail > trailing_threshold)
      cuts.push_back(median_minimum_row(profile, peaks.back() + 1, n - 1));
  }
  return cuts;
}

std::vector<BinaryImage> cut_strips(const BinaryImage& img, const std::vector<int>& cuts) {
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] <= 0 || cuts[i] >= img.height)
      throw std::invalid_argument("cut row outside image");
    if (i > 0 && cuts[i] <= cuts[i - 1])
      throw std::invalid_argument("cut rows must be strictly increasing");
  }
  std::vector<BinaryImage> strips;
  int top = 0;
  auto take = [&](int begin, int end) {
    BinaryImage strip;
    strip.width = img.width;
    strip.height = end - begin;
    strip.pixels.assign(img.pixels.begin() + static_cast<std::ptrdiff_t>(begin) * img.width,
                        img.pixels.begin() + static_cast<std::ptrdiff_t>(end) * img.width);
    strips.push_back(std::move(strip));
  };
  for (int cut : cuts) {
    take(top, cut);
    top = cut;
  }
  take(top, img.height);
  return strips;
}

std::vector<std::pair<std::string, BinaryImage>> crop_type1_leads(
    const BinaryImage& img, const std::vector<LeadRect>& table) {
  std::vector<std::pair<std::string, BinaryImage>> crops;
  crops.reserve(table.size());
  for (const LeadRect& entry : table) {
    const Rect& r = entry.rect;
    if (r.width <= 0 || r.height <= 0 || r.x < 0 || r.y < 0 || r.x + r.width > img.width ||
        r.y + r.height > img.height)
      throw std::invalid_argument("lead " + entry.lead + ": crop rectangle out of bounds");
    BinaryImage crop = BinaryImage::filled(r.width, r.height, 0);
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x) crop.at(x, y) = img.at(r.x + x, r.y + y);
    crops.emplace_back(entry.lead, std::move(crop));
  }
  return crops;
}

LeadTrace trace_columns(const BinaryImage& strip, std::string lead, Rect crop) {
  LeadTrace trace;
  trace.lead = std::move(lead);
  trace.crop = crop.width > 0 ? crop : Rect{0, 0, strip.width, strip.height};
  trace.columns.assign(strip.width, 0.0);
  trace.gaps.assign(strip.width, 0);

  for (int x = 0; x < strip.width; ++x) {
    long long sum = 0;
    int count = 0;
    for (int y = 0; y < strip.height; ++y)
      if (strip.at(x, y)) {
        sum += y;
        ++count;
      }
    if (count > 0) {
      trace.columns[x] = static_cast<double>(sum) / count;
    } else {
      trace.gaps[x] = 1;
    }
  }

  // Bridge the gaps: linear between the nearest occupied columns, replicated
  // beyond the first and last occupied ones.
  std::vector<int> occupied;
  for (int x = 0; x < strip.width; ++x)
    if (!trace.gaps[x]) occupied.push_back(x);
  if (occupied.empty()) throw std::runtime_error("empty strip");
  for (int x = 0; x < occupied.front(); ++x) trace.columns[x] = trace.columns[occupied.front()];
  for (int x = occupied.back() + 1; x < strip.width; ++x)
    trace.columns[x] = trace.columns[occupied.back()];
  for (std::size_t i = 0; i + 1 < occupied.size(); ++i) {
    const int a = occupied[i];
    const int b = occupied[i + 1];
    for (int x = a + 1; x < b; ++x) {
      const double t = static_cast<double>(x - a) / (b - a);
      trace.columns[x] = (1.0 - t) * trace.columns[a] + t * trace.columns[b];
    }
  }
  return trace;
}

TimeSeries calibrate(const LeadTrace& trace, double px_per_big_square,
                     double speed_mm_per_s, double gain_mm_per_mv) {
  if (!(px_per_big_square > 0.0) || !(speed_mm_per_s > 0.0) || !(gain_mm_per_mv > 0.0))
    throw std::invalid_argument("calibration constants must be positive");

  std::vector<double> anchored;
  for (std::size_t i = 0; i < trace.columns.size(); ++i)
    if (i >= trace.gaps.size() || !trace.gaps[i]) anchored.push_back(trace.columns[i]);
  if (anchored.empty()) throw std::invalid_argument("trace has no usable columns");
  const double baseline = median_of(std::move(anchored));

  const double mm_per_px = 5.0 / px_per_big_square;  // one big square is 5 mm
  TimeSeries series;
  series.lead = trace.lead;
  series.dt = mm_per_px / speed_mm_per_s;
  series.gaps = trace.gaps;
  series.values.resize(trace.columns.size());
  for (std::size_t i = 0; i < trace.columns.size(); ++i)
    series.values[i] = (baseline - trace.columns[i]) * mm_per_px / gain_mm_per_mv;
  return series;
}

}  // namespace ecgdig
