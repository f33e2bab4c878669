#include "ecgdig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "ecgdig/edgeline.hpp"

namespace ecgdig {

namespace {

constexpr std::uint8_t kType1Background = 235;
constexpr std::uint8_t kFramedBackground = 230;
constexpr std::uint8_t kInk = 30;
constexpr std::uint8_t kGridGray = 200;
constexpr int kSheetMargin = 40;  // full-scale border outside the frame

// Beat timing relative to the QRS center, seconds.
constexpr double kPOffset = -0.16;
constexpr double kUndershootOffset = 0.05;
constexpr double kUndershootSigma = 0.015;
constexpr double kStOffset = 0.11;
constexpr double kStSigma = 0.05;
constexpr double kTOffset = 0.30;

double gauss(double x, double sigma) { return std::exp(-0.5 * (x / sigma) * (x / sigma)); }

// 5x7 bitmap font covering the lead-name alphabet.
const char* const* glyph_rows(char c) {
  static const char* kI[7] = {"11111", "00100", "00100", "00100", "00100", "00100", "11111"};
  static const char* kV[7] = {"10001", "10001", "10001", "10001", "10001", "01010", "00100"};
  static const char* ka[7] = {"00000", "00000", "01110", "00001", "01111", "10001", "01111"};
  static const char* kR[7] = {"11110", "10001", "10001", "11110", "10100", "10010", "10001"};
  static const char* kL[7] = {"10000", "10000", "10000", "10000", "10000", "10000", "11111"};
  static const char* kF[7] = {"11111", "10000", "10000", "11110", "10000", "10000", "10000"};
  static const char* k1[7] = {"00100", "01100", "00100", "00100", "00100", "00100", "01110"};
  static const char* k2[7] = {"01110", "10001", "00001", "00010", "00100", "01000", "11111"};
  static const char* k3[7] = {"11111", "00010", "00100", "00010", "00001", "10001", "01110"};
  static const char* k4[7] = {"00010", "00110", "01010", "10010", "11111", "00010", "00010"};
  static const char* k5[7] = {"11111", "10000", "11110", "00001", "00001", "10001", "01110"};
  static const char* k6[7] = {"00110", "01000", "10000", "11110", "10001", "10001", "01110"};
  switch (c) {
    case 'I': return kI;
    case 'V': return kV;
    case 'a': return ka;
    case 'R': return kR;
    case 'L': return kL;
    case 'F': return kF;
    case '1': return k1;
    case '2': return k2;
    case '3': return k3;
    case '4': return k4;
    case '5': return k5;
    case '6': return k6;
    default: throw std::invalid_argument(std::string("no glyph for character '") + c + "'");
  }
}

struct LeadLayout {
  const SynthLead* lead = nullptr;
  Rect strip;        // full-scale strip box holding the stroke
  int baseline = 0;  // full-scale zero-voltage row
  int glyph_x = 0;   // full-scale label anchor
  int glyph_y = 0;
};

struct SheetPlan {
  int width = 0;
  int height = 0;
  int factor = 4;
  std::uint8_t background = kFramedBackground;
  std::vector<LeadLayout> leads;
  Rect frame_outer;       // zero size for Type 1
  int wall = 0;           // frame bar thickness
  Rect interior;          // area inside the frame bars
  bool solid_grid = false;    // Type 1: printed gray grid over the whole sheet
  bool dashed_grid = false;   // Type 2: fragmented ink-intensity grid
  double seconds_per_px = 0.0;
  double px_per_mv = 0.0;
};

void validate_wave(const std::string& name, const WaveParams& w) {
  const double amounts[] = {w.p_mv, w.qrs_mv, w.t_mv, w.st_mv, w.undershoot_fraction};
  for (double a : amounts) {
    if (!std::isfinite(a)) throw std::invalid_argument("lead " + name + ": non-finite amplitude");
  }
  if (!(w.p_sigma_s > 0.0) || !(w.qrs_sigma_s > 0.0) || !(w.t_sigma_s > 0.0)) {
    throw std::invalid_argument("lead " + name + ": bump widths must be positive");
  }
  if (!(w.heart_rate_bpm > 0.0) || !std::isfinite(w.heart_rate_bpm)) {
    throw std::invalid_argument("lead " + name + ": heart rate must be positive");
  }
  if (!(w.first_beat_s >= 0.0) || !std::isfinite(w.first_beat_s)) {
    throw std::invalid_argument("lead " + name + ": first beat time must be non-negative");
  }
}

SheetPlan plan_sheet(const SynthSpec& spec) {
  const TypeProfile profile = TypeProfile::defaults(spec.type);
  SheetPlan plan;
  plan.factor = profile.downsample_factor;
  const int pitch = spec.grid_pitch_px;
  if (pitch <= 0 || pitch % (10 * plan.factor) != 0) {
    throw std::invalid_argument("grid pitch must be a positive multiple of 10x the downsample factor");
  }
  if (spec.leads.empty()) throw std::invalid_argument("at least one lead is required");
  for (const SynthLead& lead : spec.leads) validate_wave(lead.name, lead.wave);
  if (std::abs(spec.rotation_deg) > 30.0) {
    throw std::invalid_argument("rotation must lie within [-30, 30] degrees");
  }
  if (!(spec.noise_level >= 0.0) || !std::isfinite(spec.noise_level)) {
    throw std::invalid_argument("noise level must be non-negative");
  }

  plan.seconds_per_px = 0.2 / pitch;     // big square = 5 mm = 0.2 s
  plan.px_per_mv = 2.0 * pitch;          // 1 mV = 10 mm = 2 big squares
  const int baseline_offset = 21 * pitch / 5;  // 4.2 big squares into a strip
  const int strip_h = 7 * pitch;
  const int glyph_scale = plan.factor;   // one font cell = one downsized pixel

  if (spec.type == SheetType::kType1) {
    plan.background = kType1Background;
    plan.solid_grid = true;
    // Full-scale geometry comes straight from the downsized lead table.
    int max_x = 0, max_y = 0;
    for (const LeadRect& entry : profile.lead_table) {
      const SynthLead* lead = nullptr;
      for (const SynthLead& candidate : spec.leads) {
        if (candidate.name == entry.lead) { lead = &candidate; break; }
      }
      if (lead == nullptr) {
        throw std::invalid_argument("type 1 layout needs lead " + entry.lead);
      }
      LeadLayout item;
      item.lead = lead;
      item.strip = {entry.rect.x * plan.factor, entry.rect.y * plan.factor,
                    entry.rect.width * plan.factor, entry.rect.height * plan.factor};
      item.baseline = item.strip.y + baseline_offset;
      item.glyph_x = item.strip.x + 4 * glyph_scale;
      item.glyph_y = item.strip.y + 4 * glyph_scale;
      plan.leads.push_back(item);
      max_x = std::max(max_x, entry.rect.x + entry.rect.width);
      max_y = std::max(max_y, entry.rect.y + entry.rect.height);
    }
    plan.width = (max_x + 30) * plan.factor;
    plan.height = (max_y + 40) * plan.factor;
    plan.interior = {0, 0, plan.width, plan.height};
    return plan;
  }

  // Types 2/3: stacked strips inside a frame.  The stroke span is placed so
  // that the shift-inset crop of the frame's outer box lands exactly on it.
  plan.dashed_grid = (spec.type == SheetType::kType2);
  plan.wall = 3 * plan.factor;
  const double dt = plan.factor * plan.seconds_per_px;
  const int n_cols = static_cast<int>(std::lround(spec.seconds / dt));
  if (n_cols < 2 * pitch / plan.factor) {
    throw std::invalid_argument("strip duration is too short for the grid pitch");
  }
  const int stroke_x = kSheetMargin + profile.frame_shifts.left * plan.factor;
  const int stroke_w = n_cols * plan.factor;
  const int right_outer = stroke_x + stroke_w + profile.frame_shifts.right * plan.factor;
  const int top_interior = kSheetMargin + plan.wall;
  const int n_strips = static_cast<int>(spec.leads.size());
  const int bottom_interior = top_interior + n_strips * strip_h;
  plan.width = right_outer + kSheetMargin;
  plan.height = bottom_interior + plan.wall + kSheetMargin;
  plan.frame_outer = {kSheetMargin, kSheetMargin, right_outer - kSheetMargin,
                      bottom_interior + plan.wall - kSheetMargin};
  plan.interior = {kSheetMargin + plan.wall, top_interior,
                   right_outer - plan.wall - (kSheetMargin + plan.wall),
                   bottom_interior - top_interior};
  for (int i = 0; i < n_strips; ++i) {
    LeadLayout item;
    item.lead = &spec.leads[static_cast<std::size_t>(i)];
    item.strip = {stroke_x, top_interior + i * strip_h, stroke_w, strip_h};
    item.baseline = item.strip.y + baseline_offset;
    item.glyph_x = plan.interior.x + (spec.type == SheetType::kType2 ? 148 : 176);
    // Labels sit above the QRS band on Type 2; the tighter Type 3 crop leaves
    // room only below the undershoot band.
    item.glyph_y = spec.type == SheetType::kType2 ? item.strip.y + 40
                                                  : item.baseline + 84 + glyph_scale * 2;
    plan.leads.push_back(item);
  }
  return plan;
}

struct Painter {
  GrayImage& sheet;
  BinaryImage& ink;
  BinaryImage& glyph;
  BinaryImage& grid;

  void paint(int x, int y, std::uint8_t value, BinaryImage& mask) {
    if (x < 0 || y < 0 || x >= sheet.width || y >= sheet.height) return;
    sheet.at(x, y) = value;
    ink.at(x, y) = 0;
    glyph.at(x, y) = 0;
    grid.at(x, y) = 0;
    mask.at(x, y) = 1;
  }

  void fill(const Rect& r, std::uint8_t value, BinaryImage& mask) {
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) paint(x, y, value, mask);
    }
  }

  bool background(int x, int y) const {
    return ink.at(x, y) == 0 && glyph.at(x, y) == 0 && grid.at(x, y) == 0;
  }
};

void draw_label(Painter& p, const std::string& text, int x, int y, int scale) {
  int cursor = x;
  for (char c : text) {
    const char* const* rows = glyph_rows(c);
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (rows[row][col] != '1') continue;
        p.fill({cursor + col * scale, y + row * scale, scale, scale}, kInk, p.glyph);
      }
    }
    cursor += 6 * scale;
  }
}

void draw_solid_grid(Painter& p, int pitch, int thickness) {
  for (int x = 0; x < p.sheet.width; x += pitch) {
    p.fill({x, 0, thickness, p.sheet.height}, kGridGray, p.grid);
  }
  for (int y = 0; y < p.sheet.height; y += pitch) {
    p.fill({0, y, p.sheet.width, thickness}, kGridGray, p.grid);
  }
}

// Type 2 grid: the print shares the ink intensity, so it is drawn as short
// dashes whose binarized remnants form small components the cleanup stage
// can drop.  Dash geometry is a whole number of downsized cells.
void draw_dashed_grid(Painter& p, const SheetPlan& plan, int pitch, int stroke_x,
                      int baseline0) {
  const int f = plan.factor;
  const int dash = 2 * f, period = 8 * f, thick = f;
  const Rect in = plan.interior;
  for (int x = stroke_x; x + thick <= in.x + in.width; x += pitch) {
    for (int y = in.y; y + dash <= in.y + in.height; y += period) {
      p.fill({x, y, thick, dash}, kInk, p.grid);
    }
  }
  int y0 = baseline0;
  while (y0 - pitch >= in.y) y0 -= pitch;
  for (int y = y0; y + thick <= in.y + in.height; y += pitch) {
    for (int x = in.x; x + dash <= in.x + in.width; x += period) {
      p.fill({x, y, dash, thick}, kInk, p.grid);
    }
  }
}

void draw_frame(Painter& p, const SheetPlan& plan) {
  const Rect o = plan.frame_outer;
  const int w = plan.wall;
  p.fill({o.x, o.y, o.width, w}, kInk, p.ink);
  p.fill({o.x, o.y + o.height - w, o.width, w}, kInk, p.ink);
  p.fill({o.x, o.y, w, o.height}, kInk, p.ink);
  p.fill({o.x + o.width - w, o.y, w, o.height}, kInk, p.ink);
}

void draw_stroke(Painter& p, const LeadLayout& item, const SheetPlan& plan) {
  const WaveParams& wave = item.lead->wave;
  // Physical pen: 9 px across at 16 px/mm is a 0.56 mm tip, independent of
  // which device later downsamples the sheet.
  const int pen_half = 4;
  const double spp = plan.seconds_per_px;
  const int n = item.strip.width;

  // Centerline band per column: the vertical span the wave sweeps within the
  // column's time window. Higher voltage means a smaller row index.
  std::vector<int> band_top(n), band_bottom(n);
  for (int i = 0; i < n; ++i) {
    const double t0 = i * spp;
    double lo = 0.0, hi = 0.0;
    for (int s = 0; s <= 8; ++s) {
      const double v = wave_value(wave, t0 + spp * s / 8.0);
      if (s == 0) { lo = v; hi = v; }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    band_top[i] = static_cast<int>(std::lround(item.baseline - hi * plan.px_per_mv));
    band_bottom[i] = static_cast<int>(std::lround(item.baseline - lo * plan.px_per_mv));
  }

  // Square pen stamped along the centerline. The horizontal reach matters on
  // steep flanks, where a vertical-only pen would leave the stroke a single
  // pixel wide and the downsized trace would fade out.
  for (int i = 0; i < n; ++i) {
    int t = band_top[i];
    int b = band_bottom[i];
    for (int d = -pen_half; d <= pen_half; ++d) {
      const int j = i + d;
      if (j < 0 || j >= n) continue;
      t = std::min(t, band_top[j]);
      b = std::max(b, band_bottom[j]);
    }
    const int y0 = std::max(t - pen_half, item.strip.y);
    const int y1 = std::min(b + pen_half + 1, item.strip.y + item.strip.height);
    const int x = item.strip.x + i;
    for (int y = y0; y < y1; ++y) p.paint(x, y, kInk, p.ink);
  }
}

void scatter_flecks(Painter& p, const SheetPlan& plan, double level, std::uint64_t seed) {
  const int f = plan.factor;
  const int cells_x = p.sheet.width / f;
  const int cells_y = p.sheet.height / f;
  const long long count =
      std::llround(level * static_cast<double>(cells_x) * cells_y / 1000.0);
  std::mt19937_64 rng(seed);
  for (long long i = 0; i < count; ++i) {
    const int cx = static_cast<int>(rng() % static_cast<std::uint64_t>(cells_x));
    const int cy = static_cast<int>(rng() % static_cast<std::uint64_t>(cells_y));
    if (!p.background(cx * f, cy * f)) continue;
    p.fill({cx * f, cy * f, f, f}, kInk, p.ink);
  }
}

}  // namespace

double wave_value(const WaveParams& wave, double t_s) {
  const double period = 60.0 / wave.heart_rate_bpm;
  const double t_amp = wave.st_elevation ? -std::abs(wave.t_mv) : wave.t_mv;
  double v = 0.0;
  // Only beats whose bumps can reach t_s matter; the train extends from
  // kPOffset before each QRS center to past the T wave after it.
  const long long first = static_cast<long long>(
      std::floor((t_s - wave.first_beat_s - kTOffset - 6.0 * wave.t_sigma_s) / period));
  const long long last = static_cast<long long>(
      std::ceil((t_s - wave.first_beat_s - kPOffset + 6.0 * wave.p_sigma_s) / period));
  for (long long j = std::max(first, 0LL); j <= last; ++j) {
    const double tb = wave.first_beat_s + static_cast<double>(j) * period;
    const double d = t_s - tb;
    v += wave.p_mv * gauss(d - kPOffset, wave.p_sigma_s);
    v += wave.qrs_mv * gauss(d, wave.qrs_sigma_s);
    v -= wave.undershoot_fraction * wave.qrs_mv * gauss(d - kUndershootOffset, kUndershootSigma);
    if (wave.st_elevation) v += wave.st_mv * gauss(d - kStOffset, kStSigma);
    v += t_amp * gauss(d - kTOffset, wave.t_sigma_s);
  }
  return v;
}

SynthSpec SynthSpec::defaults(SheetType type) {
  struct Entry {
    const char* name;
    double qrs, p, t;
  };
  static const Entry kTwelve[] = {
      {"I", 0.7, 0.10, 0.25},   {"II", 1.1, 0.15, 0.30},  {"III", 0.5, 0.10, 0.15},
      {"aVR", -0.8, -0.10, -0.20}, {"aVL", 0.4, 0.08, 0.12}, {"aVF", 0.8, 0.12, 0.20},
      {"V1", 0.6, 0.08, 0.20},  {"V2", 0.9, 0.10, 0.35},  {"V3", 1.1, 0.10, 0.40},
      {"V4", 1.2, 0.12, 0.35},  {"V5", 1.0, 0.12, 0.30},  {"V6", 0.8, 0.10, 0.25},
  };
  SynthSpec spec;
  spec.type = type;
  auto push = [&spec](const Entry& e) {
    SynthLead lead;
    lead.name = e.name;
    lead.wave.qrs_mv = e.qrs;
    lead.wave.p_mv = e.p;
    lead.wave.t_mv = e.t;
    spec.leads.push_back(lead);
  };
  switch (type) {
    case SheetType::kType1:
      for (const Entry& e : kTwelve) push(e);
      break;
    case SheetType::kType2:
      for (const Entry& e : kTwelve) {
        const std::string name = e.name;
        if (name == "II" || name == "V1" || name == "V2") push(e);
      }
      break;
    case SheetType::kType3:
      for (const Entry& e : kTwelve) {
        const std::string name = e.name;
        if (name == "V1" || name == "V2") push(e);
      }
      break;
  }
  return spec;
}

SynthResult render_sheet(const SynthSpec& spec, std::uint64_t seed) {
  const SheetPlan plan = plan_sheet(spec);
  SynthResult out;
  out.sheet = GrayImage::filled(plan.width, plan.height, plan.background);
  out.ink_mask = BinaryImage::filled(plan.width, plan.height, 0);
  out.glyph_mask = BinaryImage::filled(plan.width, plan.height, 0);
  out.grid_mask = BinaryImage::filled(plan.width, plan.height, 0);
  out.frame_outer = plan.frame_outer;
  out.seconds_per_px = plan.seconds_per_px;
  out.px_per_mv = plan.px_per_mv;

  Painter painter{out.sheet, out.ink_mask, out.glyph_mask, out.grid_mask};
  if (plan.solid_grid) draw_solid_grid(painter, spec.grid_pitch_px, plan.factor);
  if (plan.dashed_grid) {
    draw_dashed_grid(painter, plan, spec.grid_pitch_px, plan.leads.front().strip.x,
                     plan.leads.front().baseline);
  }
  if (spec.glyphs) {
    for (const LeadLayout& item : plan.leads) {
      draw_label(painter, item.lead->name, item.glyph_x, item.glyph_y, plan.factor);
    }
  }
  if (plan.wall > 0) draw_frame(painter, plan);
  for (const LeadLayout& item : plan.leads) draw_stroke(painter, item, plan);
  if (spec.noise_level > 0.0) scatter_flecks(painter, plan, spec.noise_level, seed);

  const double dt = plan.factor * plan.seconds_per_px;
  for (const LeadLayout& item : plan.leads) {
    TimeSeries series;
    series.lead = item.lead->name;
    series.dt = dt;
    const int n = item.strip.width / plan.factor;
    series.values.reserve(static_cast<std::size_t>(n));
    series.gaps.assign(static_cast<std::size_t>(n), false);
    for (int k = 0; k < n; ++k) {
      series.values.push_back(wave_value(item.lead->wave, (k + 0.5) * dt));
    }
    out.truth.push_back(std::move(series));
    out.stroke_rects.push_back(item.strip);
    out.baseline_rows.push_back(item.baseline);
  }

  if (spec.rotation_deg != 0.0) {
    // A skewed capture still shows the whole sheet: grow the canvas first so
    // the corners survive the rotation, then rotate only the photograph. The
    // masks and geometry fields keep describing the padded, unrotated sheet.
    const double rad = std::abs(spec.rotation_deg) * std::numbers::pi / 180.0;
    auto pad_amount = [&](double half_extent) {
      const int raw = static_cast<int>(std::ceil(half_extent * std::sin(rad))) + 8;
      return (raw + 7) / 8 * 8;  // keep downsampling-friendly dimensions
    };
    const int pad_x = pad_amount(out.sheet.height / 2.0);
    const int pad_y = pad_amount(out.sheet.width / 2.0);
    auto pad_gray = [&](const GrayImage& img, std::uint8_t fill) {
      GrayImage grown = GrayImage::filled(img.width + 2 * pad_x, img.height + 2 * pad_y, fill);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) grown.at(pad_x + x, pad_y + y) = img.at(x, y);
      return grown;
    };
    auto pad_mask = [&](const BinaryImage& img) {
      BinaryImage grown = BinaryImage::filled(img.width + 2 * pad_x, img.height + 2 * pad_y, 0);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) grown.at(pad_x + x, pad_y + y) = img.at(x, y);
      return grown;
    };
    out.sheet = pad_gray(out.sheet, plan.background);
    out.ink_mask = pad_mask(out.ink_mask);
    out.glyph_mask = pad_mask(out.glyph_mask);
    out.grid_mask = pad_mask(out.grid_mask);
    out.frame_outer.x += pad_x;
    out.frame_outer.y += pad_y;
    for (Rect& r : out.stroke_rects) {
      r.x += pad_x;
      r.y += pad_y;
    }
    for (int& row : out.baseline_rows) row += pad_y;
    out.sheet = rotate(out.sheet, spec.rotation_deg);
  }
  return out;
}

}  // namespace ecgdig
