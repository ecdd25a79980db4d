#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xfield/lattice.hpp"
#include "xfield/potts.hpp"
#include "xfield/random.hpp"

namespace xfield {

enum class Ring { Inner, Outer };

// Cylindrical insert (a disc in 2D). The centre is in mm relative to the
// phantom centre, in the x-y plane.
struct Insert {
  int label = 1;
  std::array<double, 2> centre{0.0, 0.0};
  double radius = 1.0;
  Ring ring = Ring::Outer;
};

struct ClassStats {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
};

struct PhantomSpec {
  LatticeSpec lattice = LatticeSpec::make({128, 128});
  double body_radius = 62.0;  // mm, centred on the lattice centre
  int body_label = 5;
  int background_label = 5;  // sites outside the body
  std::vector<Insert> inserts;
  std::vector<ClassStats> classes;  // index 0 is label 1; k = classes.size()
  double inner_rotation_deg = 0.0;  // rotation of inner-ring inserts about the centre
  std::array<double, 2> translation{0.0, 0.0};  // mm, applied to everything
  double bias_amplitude = 0.0;     // peak absolute bias, intensity units
  double bias_length_scale = 128.0;  // mm, wavelength of the cosine modes
  int bias_modes = 4;
  std::uint64_t seed = 1;

  int k() const { return static_cast<int>(classes.size()); }
  // Throws InvalidSpec for bad radii, inserts outside the body, rotation
  // outside [0, 360) or overlapping inserts (after rotation).
  void validate() const;
  // Insert centre after applying the inner-ring rotation, relative to the
  // phantom centre and before translation.
  std::array<double, 2> placed_centre(const Insert& ins) const;
  // Phantom centre in lattice coordinates, mm, translation included.
  std::array<double, 2> centre() const;

  // 128 x 128 @ 1 mm: water body, four inner-ring and five outer-ring inserts
  // carrying the nine tissue classes with cone-beam CT intensity statistics.
  static PhantomSpec ed_default();
};

// Centre-of-voxel rasterisation: a site belongs to an insert when its centre
// lies within the insert radius. Deterministic; ignores the seed.
LabelField generate_truth(const PhantomSpec& spec);

// Smooth bias field: sum of low-frequency cosine modes with random
// directions and phases, rescaled so its peak magnitude equals the
// amplitude. Draws from rng even when the amplitude is zero.
std::vector<double> bias_field(const PhantomSpec& spec, Rng& rng);

// y_i = mean(z_i) + sd(z_i) * N(0, 1) + bias(i).
ImageVolume render_image(const LabelField& truth, const PhantomSpec& spec, Rng& rng);

}  // namespace xfield
