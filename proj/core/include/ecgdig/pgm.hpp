#pragma once

#include <string>

#include "ecgdig/raster.hpp"

namespace ecgdig {

// Binary netpbm readers/writers (P5 grayscale, P6 RGB), maxval 255.
// Comments and arbitrary whitespace in the header are accepted on read.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);

RgbImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const RgbImage& img);

}  // namespace ecgdig
