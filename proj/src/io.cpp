#include "ewt/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace ewt {

namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void check_size(int w, int h, const fs::path& path) {
  if (w <= 0 || h <= 0 || static_cast<long long>(w) * h > (1LL << 28))
    throw ValidationError(path.string() + ": bad image size " + std::to_string(w) + "x" + std::to_string(h));
}

// Whitespace/comment-aware token reader for PNM-style headers.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& s) : s_(s) {}

  std::string token() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw ValidationError("truncated header");
    return s_.substr(start, pos_ - start);
  }
  long integer() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end) throw ValidationError("bad header field '" + t + "'");
    return v;
  }
  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end) throw ValidationError("bad header field '" + t + "'");
    return v;
  }
  // Skips the single whitespace byte that ends a binary header.
  std::size_t data_start() {
    if (pos_ >= s_.size()) throw ValidationError("missing raster data");
    return pos_ + 1;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ofstream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + k])) << (8 * k);
  return v;
}

double get_f64(const std::string& s, std::size_t at) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + k])) << (8 * k);
  return std::bit_cast<double>(v);
}

struct Ewt1 {
  int width, height, channels;
  std::vector<double> values;
};

Ewt1 read_ewt1(const fs::path& path) {
  const std::string s = read_all(path);
  if (s.size() < 16 || s.compare(0, 4, "EWT1") != 0) throw ValidationError(path.string() + ": not an EWT1 raster");
  Ewt1 r{static_cast<int>(get_u32(s, 4)), static_cast<int>(get_u32(s, 8)), static_cast<int>(get_u32(s, 12)), {}};
  check_size(r.width, r.height, path);
  if (r.channels != 1 && r.channels != 2) throw ValidationError(path.string() + ": unsupported channel count");
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height * r.channels;
  if (s.size() != 16 + 8 * n) throw ValidationError(path.string() + ": size does not match header");
  r.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) r.values[k] = get_f64(s, 16 + 8 * k);
  return r;
}

std::pair<double, double> range_of(const RealImage& img) {
  const auto [lo, hi] = std::minmax_element(img.data.begin(), img.data.end());
  return {*lo, *hi};
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* file = nullptr;
  ~PngReadGuard() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (file) std::fclose(file);
  }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* file = nullptr;
  ~PngWriteGuard() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (file) std::fclose(file);
  }
};

void png_write_rows(const fs::path& path, int w, int h, int color_type, int bit_depth,
                    const std::vector<std::uint8_t>& bytes, std::size_t row_bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  PngWriteGuard g;
  g.file = std::fopen(path.c_str(), "wb");
  if (!g.file) throw ValidationError("cannot write " + path.string());
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw NumericalError("libpng initialisation failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw NumericalError("libpng initialisation failed");
  if (setjmp(png_jmpbuf(g.png))) throw ValidationError("failed writing " + path.string());
  png_init_io(g.png, g.file);
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  for (int y = 0; y < h; ++y)
    png_write_row(g.png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * row_bytes));
  png_write_end(g.png, nullptr);
}

}  // namespace

RealImage read_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() >= 4 && std::memcmp(magic, "EWT1", 4) == 0) return read_ewt1_real(path);
  if (in.gcount() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(magic), 0, 8) == 0) return read_png(path);
  if (in.gcount() >= 2 && magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return read_pgm(path);
  if (in.gcount() >= 2 && magic[0] == 'P' && magic[1] == 'f') return read_pfm(path);
  if (in.gcount() >= 2 && magic[0] == 'P' && (magic[1] == '3' || magic[1] == '6' || magic[1] == 'F'))
    throw ValidationError(path.string() + ": colour images are not supported; convert to grayscale");
  throw ValidationError(path.string() + ": unrecognised image format");
}

RealImage read_pgm(const fs::path& path) {
  const std::string s = read_all(path);
  HeaderReader hr(s);
  const std::string magic = hr.token();
  if (magic != "P5" && magic != "P2") throw ValidationError(path.string() + ": not a PGM file");
  const long w = hr.integer(), h = hr.integer(), maxval = hr.integer();
  check_size(static_cast<int>(w), static_cast<int>(h), path);
  if (maxval < 1 || maxval > 65535) throw ValidationError(path.string() + ": bad PGM maxval");
  RealImage img(static_cast<int>(w), static_cast<int>(h));
  if (magic == "P2") {
    for (auto& v : img.data) {
      const long x = hr.integer();
      if (x < 0 || x > maxval) throw ValidationError(path.string() + ": sample out of range");
      v = static_cast<double>(x) / static_cast<double>(maxval);
    }
    return img;
  }
  const std::size_t start = hr.data_start();
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  if (s.size() < start + img.size() * bytes) throw ValidationError(path.string() + ": truncated PGM raster");
  for (std::size_t k = 0; k < img.size(); ++k) {
    const auto* p = reinterpret_cast<const unsigned char*>(s.data() + start + k * bytes);
    const unsigned x = bytes == 2 ? (static_cast<unsigned>(p[0]) << 8) | p[1] : p[0];
    img.data[k] = static_cast<double>(x) / static_cast<double>(maxval);
  }
  return img;
}

RealImage read_png(const fs::path& path) {
  PngReadGuard g;
  g.file = std::fopen(path.c_str(), "rb");
  if (!g.file) throw ValidationError("cannot open " + path.string());
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw NumericalError("libpng initialisation failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw NumericalError("libpng initialisation failed");
  if (setjmp(png_jmpbuf(g.png))) throw ValidationError(path.string() + ": corrupt PNG");
  png_init_io(g.png, g.file);
  png_read_info(g.png, g.info);
  const int w = static_cast<int>(png_get_image_width(g.png, g.info));
  const int h = static_cast<int>(png_get_image_height(g.png, g.info));
  const int type = png_get_color_type(g.png, g.info);
  int depth = png_get_bit_depth(g.png, g.info);
  check_size(w, h, path);
  if (type & PNG_COLOR_MASK_COLOR)
    throw ValidationError(path.string() + ": colour images are not supported; convert to grayscale");
  if (depth < 8) {
    png_set_expand_gray_1_2_4_to_8(g.png);
    depth = 8;
  }
  if (type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(g.png);
  png_read_update_info(g.png, g.info);
  const std::size_t row_bytes = png_get_rowbytes(g.png, g.info);
  std::vector<std::uint8_t> row(row_bytes);
  RealImage img(w, h);
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < h; ++y) {
    png_read_row(g.png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) {
      const unsigned v = depth == 16 ? (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1] : row[x];
      img(x, y) = static_cast<double>(v) / maxval;
    }
  }
  return img;
}

RealImage read_pfm(const fs::path& path) {
  const std::string s = read_all(path);
  HeaderReader hr(s);
  const std::string magic = hr.token();
  if (magic == "PF") throw ValidationError(path.string() + ": colour images are not supported; convert to grayscale");
  if (magic != "Pf") throw ValidationError(path.string() + ": not a grayscale PFM file");
  const long w = hr.integer(), h = hr.integer();
  const double scale = hr.real();
  check_size(static_cast<int>(w), static_cast<int>(h), path);
  if (scale == 0.0 || !std::isfinite(scale)) throw ValidationError(path.string() + ": bad PFM scale");
  const bool little = scale < 0;
  const std::size_t start = hr.data_start();
  RealImage img(static_cast<int>(w), static_cast<int>(h));
  if (s.size() < start + 4 * img.size()) throw ValidationError(path.string() + ": truncated PFM raster");
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::size_t at = start + 4 * (static_cast<std::size_t>(img.height - 1 - y) * img.width + x);
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) {
        const auto b = static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + k]));
        bits |= little ? b << (8 * k) : b << (8 * (3 - k));
      }
      img(x, y) = static_cast<double>(std::bit_cast<float>(bits));
    }
  require_finite(img, "PFM raster");
  return img;
}

void write_pgm(const fs::path& path, const RealImage& img, int bits) {
  if (bits != 8 && bits != 16) throw ValidationError("PGM depth must be 8 or 16 bits");
  require_finite(img, "image");
  const auto [lo, hi] = range_of(img);
  const double maxval = bits == 16 ? 65535.0 : 255.0;
  auto out = open_out(path);
  out << "P5\n" << img.width << ' ' << img.height << '\n' << static_cast<int>(maxval) << '\n';
  for (double v : img.data) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(t * maxval));
    if (bits == 16) out.put(static_cast<char>(q >> 8));
    out.put(static_cast<char>(q & 0xffu));
  }
}

void write_png(const fs::path& path, const RealImage& img) {
  require_finite(img, "image");
  const auto [lo, hi] = range_of(img);
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t k = 0; k < img.size(); ++k) {
    const double t = hi > lo ? (img.data[k] - lo) / (hi - lo) : 0.0;
    bytes[k] = static_cast<std::uint8_t>(std::lround(t * 255.0));
  }
  png_write_rows(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, bytes, static_cast<std::size_t>(img.width));
}

void write_png(const fs::path& path, const RgbImage& img) {
  png_write_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.data, static_cast<std::size_t>(img.width) * 3);
}

void write_pfm(const fs::path& path, const RealImage& img) {
  require_finite(img, "image");
  auto out = open_out(path);
  out << "Pf\n" << img.width << ' ' << img.height << "\n-1.0\n";
  for (int y = img.height - 1; y >= 0; --y)
    for (int x = 0; x < img.width; ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(img(x, y)));
      for (int k = 0; k < 4; ++k) out.put(static_cast<char>((bits >> (8 * k)) & 0xffu));
    }
}

void write_ewt1(const fs::path& path, const RealImage& img) {
  auto out = open_out(path);
  out.write("EWT1", 4);
  put_u32(out, static_cast<std::uint32_t>(img.width));
  put_u32(out, static_cast<std::uint32_t>(img.height));
  put_u32(out, 1);
  for (double v : img.data) put_f64(out, v);
}

void write_ewt1(const fs::path& path, const ComplexField& field) {
  auto out = open_out(path);
  out.write("EWT1", 4);
  put_u32(out, static_cast<std::uint32_t>(field.width));
  put_u32(out, static_cast<std::uint32_t>(field.height));
  put_u32(out, 2);
  for (const auto& v : field.data) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
  }
}

RealImage read_ewt1_real(const fs::path& path) {
  auto r = read_ewt1(path);
  if (r.channels != 1) throw ValidationError(path.string() + ": expected a real (one channel) raster");
  RealImage img(r.width, r.height);
  img.data = std::move(r.values);
  return img;
}

ComplexField read_ewt1_complex(const fs::path& path) {
  auto r = read_ewt1(path);
  ComplexField f(r.width, r.height);
  for (std::size_t k = 0; k < f.size(); ++k)
    f.data[k] = r.channels == 2 ? Complex(r.values[2 * k], r.values[2 * k + 1]) : Complex(r.values[k], 0.0);
  return f;
}

nlohmann::json read_json(const fs::path& path) {
  const std::string s = read_all(path);
  try {
    return nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace ewt
