#include "ecgdig/pgm.hpp"

#include <fstream>
#include <stdexcept>

namespace ecgdig {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error(path + ": " + why);
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
      tok.push_back(static_cast<char>(in.get()));
    return tok;
  }
  return tok;
}

int parse_dim(std::istream& in, const std::string& path, const char* what) {
  std::string tok = next_token(in);
  if (tok.empty()) fail(path, std::string("truncated header (missing ") + what + ")");
  try {
    int v = std::stoi(tok);
    if (v <= 0) fail(path, std::string("non-positive ") + what);
    return v;
  } catch (const std::logic_error&) {
    fail(path, std::string("malformed ") + what);
  }
}

void read_payload(std::istream& in, const std::string& path, std::uint8_t* dst,
                  std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    fail(path, "truncated pixel payload");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in = open_input(path);
  if (next_token(in) != "P5") fail(path, "not a binary PGM (expected P5 magic)");
  GrayImage img;
  img.width = parse_dim(in, path, "width");
  img.height = parse_dim(in, path, "height");
  int maxval = parse_dim(in, path, "maxval");
  if (maxval != 255) fail(path, "unsupported maxval (only 255)");
  in.get();  // single whitespace byte after maxval
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  read_payload(in, path, img.pixels.data(), img.pixels.size());
  return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
  if (img.empty()) fail(path, "refusing to write zero-dimension image");
  std::ofstream out = open_output(path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) fail(path, "write failed");
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream in = open_input(path);
  if (next_token(in) != "P6") fail(path, "not a binary PPM (expected P6 magic)");
  RgbImage img;
  img.width = parse_dim(in, path, "width");
  img.height = parse_dim(in, path, "height");
  int maxval = parse_dim(in, path, "maxval");
  if (maxval != 255) fail(path, "unsupported maxval (only 255)");
  in.get();
  img.pixels.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  read_payload(in, path, img.pixels.data(), img.pixels.size());
  return img;
}

void write_ppm(const std::string& path, const RgbImage& img) {
  if (img.empty()) fail(path, "refusing to write zero-dimension image");
  std::ofstream out = open_output(path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) fail(path, "write failed");
}

}  // namespace ecgdig
