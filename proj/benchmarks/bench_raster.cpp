#include <random>

#include <benchmark/benchmark.h>

#include "ecgdig/raster.hpp"

namespace {

ecgdig::GrayImage make_image(int w, int h) {
  std::mt19937_64 rng(1234);
  ecgdig::GrayImage img = ecgdig::GrayImage::filled(w, h, 0);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
  return img;
}

void BM_DownsampleArea(benchmark::State& state) {
  auto img = make_image(2048, 1536);
  for (auto _ : state)
    benchmark::DoNotOptimize(ecgdig::downsample_area(img, 4));
}
BENCHMARK(BM_DownsampleArea)->Unit(benchmark::kMillisecond);

void BM_MedianFilter5(benchmark::State& state) {
  auto img = make_image(512, 512);
  for (auto _ : state)
    benchmark::DoNotOptimize(ecgdig::median_filter(img, 5));
}
BENCHMARK(BM_MedianFilter5)->Unit(benchmark::kMillisecond);

void BM_Convolve3(benchmark::State& state) {
  auto img = make_image(1024, 768);
  auto k = ecgdig::Kernel::sharpen3x3();
  for (auto _ : state)
    benchmark::DoNotOptimize(ecgdig::convolve(img, k));
}
BENCHMARK(BM_Convolve3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
