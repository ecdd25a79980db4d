#include "xfield/plot.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "xfield/error.hpp"

namespace xfield {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr std::array<Rgb, 10> kPalette = {{{31, 119, 180},
                                           {255, 127, 14},
                                           {44, 160, 44},
                                           {214, 39, 40},
                                           {148, 103, 189},
                                           {140, 86, 75},
                                           {227, 119, 194},
                                           {127, 127, 127},
                                           {188, 189, 34},
                                           {23, 190, 207}}};

struct Canvas {
  int w, h;
  std::vector<std::uint8_t> px;

  Canvas(int width, int height) : w(width), h(height), px(static_cast<std::size_t>(width * height * 3), 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    auto* p = &px[static_cast<std::size_t>((y * w + x) * 3)];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void line(double x0, double y0, double x1, double y1, Rgb c) {
    const int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      set(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
    }
  }
};

void save(const std::filesystem::path& path, const Canvas& c) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(c.w), static_cast<png_uint_32>(c.h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < c.h; ++y)
    png_write_row(png, const_cast<png_bytep>(&c.px[static_cast<std::size_t>(y * c.w * 3)]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::pair<int, int> image_extent(const LatticeSpec& spec) {
  spec.validate();
  const int nx = static_cast<int>(spec.dims[0]);
  const int ny = spec.dims.size() > 1 ? static_cast<int>(spec.dims[1]) : 1;
  return {nx, ny};
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series, int width,
                     int height) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ShapeError("plot series x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!(xlo <= xhi)) throw DataError("nothing to plot");
  if (xhi == xlo) xhi = xlo + 1.0;
  if (yhi == ylo) yhi = ylo + 1.0;
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;

  Canvas c(width, height);
  const int left = 40, right = width - 15, top = 15, bottom = height - 30;
  auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * (right - left); };
  auto py = [&](double y) { return bottom - (y - ylo) / (yhi - ylo) * (bottom - top); };
  const Rgb grid{225, 225, 225}, frame{0, 0, 0};
  for (int g = 1; g < 5; ++g) {
    const double fx = left + g * (right - left) / 5.0, fy = top + g * (bottom - top) / 5.0;
    c.line(fx, top, fx, bottom, grid);
    c.line(left, fy, right, fy, grid);
  }
  c.line(left, top, right, top, frame);
  c.line(left, bottom, right, bottom, frame);
  c.line(left, top, left, bottom, frame);
  c.line(right, top, right, bottom, frame);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const Rgb col = kPalette[s % kPalette.size()];
    const auto& ser = series[s];
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      const double x = px(ser.x[i]), y = py(ser.y[i]);
      if (ser.markers) {
        for (int dx = -2; dx <= 2; ++dx)
          for (int dy = -2; dy <= 2; ++dy) c.set(static_cast<int>(x) + dx, static_cast<int>(y) + dy, col);
      } else if (i > 0 && std::isfinite(ser.x[i - 1]) && std::isfinite(ser.y[i - 1])) {
        c.line(px(ser.x[i - 1]), py(ser.y[i - 1]), x, y, col);
      }
    }
  }
  save(path, c);
}

void write_label_png(const std::filesystem::path& path, const LatticeSpec& spec, const LabelField& z, int scale) {
  const auto [nx, ny] = image_extent(spec);
  if (z.size() < static_cast<std::size_t>(nx * ny)) throw ShapeError("label field smaller than its lattice slice");
  Canvas c(nx * scale, ny * scale);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const int label = z.labels[static_cast<std::size_t>(y * nx + x)];
      const Rgb col = label == 0 ? Rgb{0, 0, 0} : kPalette[static_cast<std::size_t>(label - 1) % kPalette.size()];
      for (int a = 0; a < scale; ++a)
        for (int b = 0; b < scale; ++b) c.set(x * scale + a, y * scale + b, col);
    }
  save(path, c);
}

void write_gray_png(const std::filesystem::path& path, const LatticeSpec& spec, const std::vector<double>& values,
                    int scale) {
  const auto [nx, ny] = image_extent(spec);
  const auto slice = static_cast<std::size_t>(nx * ny);
  if (values.size() < slice) throw ShapeError("image smaller than its lattice slice");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.begin() + static_cast<long>(slice));
  const double lo = *lo_it, span = std::max(*hi_it - lo, 1e-12);
  Canvas c(nx * scale, ny * scale);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const auto g = static_cast<std::uint8_t>(std::lround(255.0 * (values[static_cast<std::size_t>(y * nx + x)] - lo) / span));
      for (int a = 0; a < scale; ++a)
        for (int b = 0; b < scale; ++b) c.set(x * scale + a, y * scale + b, {g, g, g});
    }
  save(path, c);
}

}  // namespace xfield
