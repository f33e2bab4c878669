#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgdig/extract.hpp"
#include "ecgdig/geometry.hpp"
#include "ecgdig/layout.hpp"
#include "ecgdig/raster.hpp"

namespace ecgdig {

// Analytic beat model: a flat baseline carrying one Gaussian bump train per
// beat (P wave, tall narrow QRS with an undershoot after it, T wave).  With
// st_elevation set, a coved bump is added after the QRS and the T wave is
// inverted.  All amplitudes are millivolts, all widths are seconds.
struct WaveParams {
  double p_mv = 0.15;
  double qrs_mv = 1.1;
  double t_mv = 0.3;
  double p_sigma_s = 0.025;
  double qrs_sigma_s = 0.02;
  double t_sigma_s = 0.06;
  double undershoot_fraction = 0.3;  // dip after the QRS, relative to qrs_mv
  double st_mv = 0.35;               // coved bump height when st_elevation
  double heart_rate_bpm = 60.0;
  double first_beat_s = 1.0;         // quiet lead-in keeps the baseline honest
  bool st_elevation = false;
};

struct SynthLead {
  std::string name;
  WaveParams wave;
};

// Everything needed to render one sheet.  The grid pitch is the full-scale
// side of one big square; 25 mm/s paper speed and 10 mm/mV gain then fix the
// time and voltage scales (one big square = 5 mm = 0.2 s = 0.5 mV).
struct SynthSpec {
  SheetType type = SheetType::kType2;
  int grid_pitch_px = 80;    // full-scale pixels per big square
  double seconds = 10.0;     // strip duration for Types 2/3 (Type 1 is fixed
                             // by its lead table: 2.5 s per lead)
  std::vector<SynthLead> leads;  // Types 2/3: one strip per entry, top down;
                                 // Type 1: must cover the 12 table leads
  double rotation_deg = 0.0;
  double noise_level = 0.0;  // density of ink flecks scattered on background
  bool glyphs = true;        // render lead-name labels

  static SynthSpec defaults(SheetType type);
};

// Rendered sheet plus the ground truth needed to judge a digitization run.
// The pixel-class masks are pre-rotation: when rotation_deg is nonzero the
// sheet is rotated as a final step but the masks and geometry keep describing
// the unrotated artwork.
struct SynthResult {
  GrayImage sheet;
  BinaryImage ink_mask;    // strokes, frame bars, flecks
  BinaryImage glyph_mask;  // label pixels
  BinaryImage grid_mask;   // printed grid pixels
  std::vector<TimeSeries> truth;    // per lead, sampled at traced-column
                                    // centers: values[k] = wave((k+0.5)*dt)
  std::vector<Rect> stroke_rects;   // full-scale strip box per lead
  std::vector<int> baseline_rows;   // full-scale zero-voltage row per lead
  Rect frame_outer;                 // full-scale frame outer box (Types 2/3)
  double seconds_per_px = 0.0;      // full-scale seconds per column
  double px_per_mv = 0.0;           // full-scale rows per millivolt
};

// Waveform voltage in millivolts at time t_s (seconds from strip start).
double wave_value(const WaveParams& wave, double t_s);

// Renders a sheet.  The seed only drives background fleck placement; the
// same spec and seed always produce identical output.
SynthResult render_sheet(const SynthSpec& spec, std::uint64_t seed);

}  // namespace ecgdig
