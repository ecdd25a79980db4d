#include "xfield/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xfield/error.hpp"

namespace xfield {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::array<double, 2> polar(double radius, double deg) {
  return {radius * std::cos(deg * kDegToRad), radius * std::sin(deg * kDegToRad)};
}

}  // namespace

std::array<double, 2> PhantomSpec::placed_centre(const Insert& ins) const {
  if (ins.ring != Ring::Inner || inner_rotation_deg == 0.0) return ins.centre;
  const double c = std::cos(inner_rotation_deg * kDegToRad);
  const double s = std::sin(inner_rotation_deg * kDegToRad);
  return {c * ins.centre[0] - s * ins.centre[1], s * ins.centre[0] + c * ins.centre[1]};
}

std::array<double, 2> PhantomSpec::centre() const {
  return {0.5 * static_cast<double>(lattice.dims[0] - 1) * lattice.voxel_size[0] + translation[0],
          0.5 * static_cast<double>(lattice.dims[1] - 1) * lattice.voxel_size[1] + translation[1]};
}

void PhantomSpec::validate() const {
  lattice.validate();
  const int kk = k();
  if (kk < 1 || kk > 255) throw InvalidSpec("phantom needs 1..255 classes");
  auto check_label = [&](int l, const char* what) {
    if (l < 1 || l > kk) throw InvalidSpec(std::string(what) + " label outside 1..k");
  };
  check_label(body_label, "body");
  check_label(background_label, "background");
  if (!(body_radius > 0.0)) throw InvalidSpec("body radius must be positive");
  if (!(inner_rotation_deg >= 0.0 && inner_rotation_deg < 360.0))
    throw InvalidSpec("inner-ring rotation must lie in [0, 360)");
  if (!(bias_amplitude >= 0.0) || !(bias_length_scale > 0.0) || bias_modes < 1)
    throw InvalidSpec("bias field needs amplitude >= 0, length scale > 0 and at least one mode");
  for (const auto& c : classes)
    if (!(c.sd >= 0.0) || !std::isfinite(c.mean)) throw InvalidSpec("class '" + c.name + "' has invalid statistics");
  for (std::size_t a = 0; a < inserts.size(); ++a) {
    const auto& ins = inserts[a];
    check_label(ins.label, "insert");
    if (!(ins.radius > 0.0)) throw InvalidSpec("insert radius must be positive");
    const auto ca = placed_centre(ins);
    if (std::hypot(ca[0], ca[1]) + ins.radius > body_radius)
      throw InvalidSpec("insert " + std::to_string(a) + " extends outside the body");
    for (std::size_t b = a + 1; b < inserts.size(); ++b) {
      const auto cb = placed_centre(inserts[b]);
      if (std::hypot(ca[0] - cb[0], ca[1] - cb[1]) < ins.radius + inserts[b].radius)
        throw InvalidSpec("inserts " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
    }
  }
}

PhantomSpec PhantomSpec::ed_default() {
  PhantomSpec s;
  s.lattice = LatticeSpec::make({128, 128}, {1.0, 1.0});
  s.body_radius = 62.0;
  s.body_label = 5;
  s.background_label = 5;
  s.classes = {
      {"lung_inhale", -612.6, 90.06}, {"lung_exhale", -495.8, 89.16}, {"adipose", -316.8, 79.36},
      {"breast", -295.9, 67.42},      {"water", -294.5, 152.0},       {"muscle", -263.3, 71.55},
      {"liver", -259.6, 88.50},       {"spongy_bone", -191.1, 87.36}, {"dense_bone", 77.9, 89.94},
  };
  const double inner = 28.0, outer = 48.0, r = 9.0;
  // Inner inserts sit beside outer inserts of clearly different intensity.
  s.inserts = {
      {1, polar(inner, 45.0), r, Ring::Inner},   {3, polar(inner, 135.0), r, Ring::Inner},
      {6, polar(inner, 225.0), r, Ring::Inner},  {8, polar(inner, 315.0), r, Ring::Inner},
      {5, polar(outer, 0.0), r, Ring::Outer},    {7, polar(outer, 72.0), r, Ring::Outer},
      {9, polar(outer, 144.0), r, Ring::Outer},  {2, polar(outer, 216.0), r, Ring::Outer},
      {4, polar(outer, 288.0), r, Ring::Outer},
  };
  s.bias_amplitude = 0.0;
  s.bias_length_scale = 128.0;
  return s;
}

LabelField generate_truth(const PhantomSpec& spec) {
  spec.validate();
  const auto& lat = spec.lattice;
  const std::size_t n = lat.site_count();
  const auto c0 = spec.centre();
  std::vector<std::array<double, 2>> centres;
  for (const auto& ins : spec.inserts) {
    const auto c = spec.placed_centre(ins);
    centres.push_back({c[0] + c0[0], c[1] + c0[1]});
  }
  LabelField z(n, spec.k());
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = lat.position(i);
    int label = std::hypot(p[0] - c0[0], p[1] - c0[1]) <= spec.body_radius ? spec.body_label
                                                                           : spec.background_label;
    for (std::size_t a = 0; a < spec.inserts.size(); ++a)
      if (std::hypot(p[0] - centres[a][0], p[1] - centres[a][1]) <= spec.inserts[a].radius) {
        label = spec.inserts[a].label;
        break;
      }
    z.labels[i] = static_cast<std::uint8_t>(label);
  }
  return z;
}

std::vector<double> bias_field(const PhantomSpec& spec, Rng& rng) {
  const auto& lat = spec.lattice;
  const std::size_t n = lat.site_count();
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<std::array<double, 3>> modes;  // direction x, direction y, phase
  for (int m = 0; m < spec.bias_modes; ++m) {
    const double theta = angle(rng);
    const double phase = angle(rng);
    modes.push_back({std::cos(theta), std::sin(theta), phase});
  }
  std::vector<double> b(n, 0.0);
  if (spec.bias_amplitude == 0.0) return b;
  const double wave = 2.0 * std::numbers::pi / spec.bias_length_scale;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = lat.position(i);
    double v = 0.0;
    for (const auto& m : modes) v += std::cos(wave * (m[0] * p[0] + m[1] * p[1]) + m[2]);
    b[i] = v;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0)
    for (auto& v : b) v *= spec.bias_amplitude / peak;
  return b;
}

ImageVolume render_image(const LabelField& truth, const PhantomSpec& spec, Rng& rng) {
  spec.validate();
  truth.validate(spec.lattice.site_count());
  if (truth.k != spec.k()) throw ShapeError("ground truth k does not match the phantom classes");
  const auto bias = bias_field(spec, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  ImageVolume y{spec.lattice, std::vector<double>(truth.size())};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& c = spec.classes[truth.labels[i] - 1];
    y.values[i] = c.mean + c.sd * noise(rng) + bias[i];
  }
  return y;
}

}  // namespace xfield
