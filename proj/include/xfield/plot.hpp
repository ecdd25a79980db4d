#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xfield/lattice.hpp"
#include "xfield/potts.hpp"

namespace xfield {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // draw points instead of a polyline
};

// Line/point chart on a white canvas with a frame and light grid. Axis
// ranges cover all series. No text is rendered; callers write captions in
// the accompanying CSV.
void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series, int width = 640,
                     int height = 400);

// Label map of a 2D lattice (first slice of 3D), one colour per label,
// scaled by an integer factor.
void write_label_png(const std::filesystem::path& path, const LatticeSpec& spec, const LabelField& z, int scale = 2);

// Grey-scale image, linearly mapped from [lo, hi].
void write_gray_png(const std::filesystem::path& path, const LatticeSpec& spec, const std::vector<double>& values,
                    int scale = 2);

}  // namespace xfield
