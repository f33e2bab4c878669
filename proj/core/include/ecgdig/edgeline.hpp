#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ecgdig/raster.hpp"

namespace ecgdig {

using EdgeMap = BinaryImage;

struct LineSegment {
  int x1 = 0, y1 = 0;
  int x2 = 0, y2 = 0;
  int votes = 0;
};

// Randomized line-transform parameters. Votes are cast by a seeded random
// subset of edge points; segments are then traced against the full edge set.
struct HoughConfig {
  double rho_resolution = 1.0;   // accumulator bin width in pixels
  int theta_step_deg = 1;        // sweep runs over (0, 180] degrees
  int vote_threshold = 30;       // minimum votes for a candidate cell
  double min_length = 30.0;      // minimum segment length in pixels
  double max_gap = 4.0;          // largest bridgeable break along a line
  double sample_fraction = 0.2;  // share of edge points that vote
};

struct RotationEstimate {
  double degrees = 0.0;    // skew of near-horizontal/vertical structure, (-45, 45]
  bool lines_found = false;
};

// Hysteresis thresholds derived from the intensity median m:
// low = trunc((1 - f) * m), high = trunc((1 + f) * m), clamped to [0, 255].
std::pair<int, int> canny_auto_thresholds(double median_intensity, double sigma_fraction);

// Edge detection with automatic thresholds: Gaussian smoothing (sigma 1.4,
// 5x5), Sobel gradients, 4-bin non-maximum suppression, then hysteresis with
// the median-derived thresholds and 8-connected weak-edge linking.
EdgeMap canny_auto(const GrayImage& img, double sigma_fraction = 0.33);

// Line detection on rho = x cos(theta) + y sin(theta). A seeded sample of
// edge points votes into the (rho, theta) accumulator; locally maximal cells
// above the vote threshold are walked along the full edge set, splitting at
// gaps wider than max_gap and keeping runs of at least min_length.
std::vector<LineSegment> hough_probabilistic(const EdgeMap& edges,
                                             const HoughConfig& config,
                                             std::uint64_t seed);

// Median direction of detected line segments, normalized into (-45, 45] so
// that both grid directions agree. Returns 0 with lines_found = false when no
// segment is detected.
RotationEstimate estimate_rotation(const GrayImage& img, const HoughConfig& config,
                                   double sigma_fraction = 0.33,
                                   std::uint64_t seed = 1);

// Rotates image content by `degrees` about the image center (positive angles
// tilt horizontal structure downward to the right), bilinear sampling, white
// fill outside the source. Rotating by the estimate's negation deskews.
GrayImage rotate(const GrayImage& img, double degrees);

}  // namespace ecgdig
