#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ewt/io.hpp"
#include "oracles.hpp"

using namespace ewt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ewt_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

RealImage ramp(int w, int h) {
  RealImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = static_cast<double>(x + w * y) / (w * h - 1);
  return img;
}

double max_diff(const RealImage& a, const RealImage& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
  return m;
}

}  // namespace

TEST_CASE("ewt1 rasters round trip bit for bit") {
  auto img = oracle::random_image(7, 5, 2);
  write_ewt1(scratch("r.ewt"), img);
  auto back = read_ewt1_real(scratch("r.ewt"));
  CHECK(back.same_shape(img));
  CHECK(back.data == img.data);
  CHECK(read_image(scratch("r.ewt")).data == img.data);

  ComplexField c(3, 4);
  for (std::size_t k = 0; k < c.size(); ++k) c.data[k] = Complex(k * 0.1, -1.0 / (k + 1));
  write_ewt1(scratch("c.ewt"), c);
  CHECK(read_ewt1_complex(scratch("c.ewt")).data == c.data);
  CHECK_THROWS_AS(read_ewt1_real(scratch("c.ewt")), ValidationError);
  CHECK(fs::file_size(scratch("c.ewt")) == 16 + 12 * 16);
}

TEST_CASE("pgm and png round trips") {
  auto img = ramp(16, 9);
  write_pgm(scratch("a.pgm"), img, 16);
  CHECK(max_diff(read_image(scratch("a.pgm")), img) <= 0.5 / 65535.0 + 1e-15);
  write_pgm(scratch("b.pgm"), img, 8);
  CHECK(max_diff(read_pgm(scratch("b.pgm")), img) <= 0.5 / 255.0 + 1e-15);
  write_png(scratch("a.png"), img);
  CHECK(max_diff(read_image(scratch("a.png")), img) <= 0.5 / 255.0 + 1e-15);
  write_pfm(scratch("a.pfm"), img);
  CHECK(max_diff(read_image(scratch("a.pfm")), img) <= 1e-7);

  std::ofstream(scratch("ascii.pgm")) << "P2\n# comment\n3 1\n4\n0 2 4\n";
  auto a = read_image(scratch("ascii.pgm"));
  CHECK(a.data == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("bad inputs are validation errors") {
  std::ofstream(scratch("junk.bin")) << "hello";
  CHECK_THROWS_AS(read_image(scratch("junk.bin")), ValidationError);
  std::ofstream(scratch("rgb.ppm")) << "P6\n1 1\n255\nabc";
  CHECK_THROWS_AS(read_image(scratch("rgb.ppm")), ValidationError);
  std::ofstream(scratch("short.pgm")) << "P5\n4 4\n255\nab";
  CHECK_THROWS_AS(read_image(scratch("short.pgm")), ValidationError);
  CHECK_THROWS_AS(read_image(scratch("missing.pgm")), ValidationError);

  RgbImage rgb(2, 2);
  rgb.at(1, 1)[0] = 255;
  write_png(scratch("rgb.png"), rgb);
  CHECK_THROWS_AS(read_image(scratch("rgb.png")), ValidationError);

  std::ofstream(scratch("bad.json")) << "{oops";
  CHECK_THROWS_AS(read_json(scratch("bad.json")), ValidationError);
  write_json(scratch("ok.json"), {{"a", 1}});
  CHECK(read_json(scratch("ok.json"))["a"] == 1);
}
