#include "tumorlab/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tumorlab/format.hpp"

namespace tumorlab {

Heatmap make_heatmap(const Field& field, const RenderOptions& opts) {
  const Grid& g = field.grid;
  if (g.dims() != 2) throw std::invalid_argument("heatmaps need a 2D field");
  if (opts.scale < 1) throw std::invalid_argument("heatmap scale must be at least 1");
  if (!field.all_finite()) throw std::invalid_argument("cannot render a field with non-finite values");

  const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
  Heatmap map;
  map.min = opts.vmin.value_or(*lo_it);
  map.max = opts.vmax.value_or(*hi_it);
  const int nx = g.resolution(0), ny = g.resolution(1), s = opts.scale;
  map.width = nx * s;
  map.height = ny * s;
  map.pixels.resize(static_cast<std::size_t>(map.width) * map.height);

  const double span = map.max - map.min;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double v = field[g.flatten({i, j, 0})];
      std::uint8_t shade = 128;
      if (span > 0.0) {
        const double u = std::clamp((v - map.min) / span, 0.0, 1.0);
        shade = static_cast<std::uint8_t>(std::lround(255.0 * u));
      }
      const int row0 = (ny - 1 - j) * s;
      for (int r = 0; r < s; ++r) {
        auto* px = &map.pixels[static_cast<std::size_t>(row0 + r) * map.width + i * s];
        std::fill(px, px + s, shade);
      }
    }
  }
  return map;
}

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Heatmap& map) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(map.height);
  for (int r = 0; r < map.height; ++r) {
    rows[r] = const_cast<png_bytep>(map.pixels.data() + static_cast<std::size_t>(r) * map.width);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG encoding failed");
  }
  png_set_write_fn(png, &out, append_bytes, no_flush);
  png_set_compression_level(png, 9);
  png_set_IHDR(png, info, map.width, map.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::filesystem::path render_heatmap(const Field& field, const std::filesystem::path& png,
                                     const RenderOptions& opts) {
  const Heatmap map = make_heatmap(field, opts);
  const auto bytes = encode_png(map);
  {
    std::ofstream out(png, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + png.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  std::filesystem::path sidecar = png;
  sidecar.replace_extension(".range.txt");
  std::ofstream side(sidecar);
  if (!side) throw std::runtime_error("cannot write " + sidecar.string());
  side << "min = " << format_double(map.min) << "\nmax = " << format_double(map.max) << "\n";
  return sidecar;
}

}  // namespace tumorlab
