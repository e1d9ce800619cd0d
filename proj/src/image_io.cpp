#include "palletproj/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace palletproj {

namespace {

inline unsigned char to_byte(float v) {
  const double scaled = std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0);
  return static_cast<unsigned char>(scaled);
}

// Skips PNM whitespace and '#' comments, then reads one unsigned integer.
int read_pnm_int(std::istream &in) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c))
    throw_error(ErrorCode::ParseError, "malformed PNM header");
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

RasterImage read_pnm(std::istream &in, int channels) {
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (maxval != 255)
    throw_error(ErrorCode::ParseError, "only maxval 255 PNM images are supported");
  RasterImage img(w, h, channels);
  const size_t n = static_cast<size_t>(w) * h * channels;
  std::vector<unsigned char> bytes(n);
  in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n)
    throw_error(ErrorCode::ParseError, "truncated PNM pixel data");
  for (size_t i = 0; i < n; ++i) img.samples[i] = static_cast<float>(bytes[i]) / 255.0f;
  return img;
}

struct FileCloser {
  void operator()(std::FILE *f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RasterImage read_png_file(const std::string &path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw_error(ErrorCode::Io, "cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw_error(ErrorCode::Io, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw_error(ErrorCode::ParseError, "failed to decode PNG " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int out_channels = png_get_channels(png, info);
  if (out_channels != 1 && out_channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw_error(ErrorCode::ParseError, "unsupported PNG channel layout in " + path);
  }

  RasterImage img(static_cast<int>(w), static_cast<int>(h), out_channels);
  std::vector<unsigned char> row(static_cast<size_t>(w) * out_channels);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (size_t i = 0; i < row.size(); ++i)
      img.samples[static_cast<size_t>(y) * row.size() + i] = static_cast<float>(row[i]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png_file(const std::string &path, const RasterImage &img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw_error(ErrorCode::Io, "cannot write " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw_error(ErrorCode::Io, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw_error(ErrorCode::Io, "failed to encode PNG " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.is_color() ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Keep output byte-stable across runs: no time chunk, fixed filter/level.
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_set_compression_level(png, 6);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (size_t i = 0; i < row.size(); ++i)
      row[i] = to_byte(img.samples[static_cast<size_t>(y) * row.size() + i]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_pnm(const std::string &path, const RasterImage &img, bool force_color) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorCode::Io, "cannot write " + path);
  const int channels = force_color ? 3 : img.channels;
  out << (channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(img.width) * channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (channels == 3 && img.channels == 1) {
        const unsigned char b = to_byte(img.at(x, y));
        row[x * 3] = row[x * 3 + 1] = row[x * 3 + 2] = b;
      } else {
        for (int c = 0; c < channels; ++c) row[x * channels + c] = to_byte(img.at(x, y, c));
      }
    }
    out.write(reinterpret_cast<const char *>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw_error(ErrorCode::Io, "short write to " + path);
}

bool has_suffix(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

RasterImage read_image(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::Io, "cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2) throw_error(ErrorCode::ParseError, "empty image file " + path);
  if (magic[0] == 'P' && magic[1] == '6') return read_pnm(in, 3);
  if (magic[0] == 'P' && magic[1] == '5') return read_pnm(in, 1);
  in.close();
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return read_png_file(path);
  throw_error(ErrorCode::ParseError, "unrecognized image format in " + path);
}

void write_image(const std::string &path, const RasterImage &img) {
  if (has_suffix(path, ".png")) {
    write_png_file(path, img);
  } else if (has_suffix(path, ".pgm")) {
    if (img.is_color()) {
      write_pnm(path, extract_channel(img, Channel::Luminance), false);
    } else {
      write_pnm(path, img, false);
    }
  } else if (has_suffix(path, ".ppm")) {
    write_pnm(path, img, true);
  } else {
    throw_error(ErrorCode::InvalidArgument, "unsupported image extension: " + path);
  }
}

}  // namespace palletproj
