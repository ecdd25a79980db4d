#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xfield/lattice.hpp"
#include "xfield/potts.hpp"

namespace xfield {

// Displacement distribution of one object: Gaussian over distance, mm.
struct DeltaParams {
  double mu = 1.2;
  double sigma2 = 7.3 * 7.3;

  void validate() const;  // sigma2 > 0, mu >= 0
  bool operator==(const DeltaParams&) const = default;
};

// Global displacement hyperparameters with optional per-label overrides.
struct DeltaHyper {
  DeltaParams global;
  std::map<int, DeltaParams> per_label;  // keyed by label 1..k

  DeltaParams for_label(int j) const;
  void validate() const;
  bool operator==(const DeltaHyper&) const = default;
};

enum class FieldMode { Exact, Approx };

FieldMode parse_field_mode(const std::string& s);
std::string to_string(FieldMode m);

// Log-densities are clamped below here so the label softmax stays finite.
inline constexpr double kLogDensityFloor = -700.0;

// Minimum Euclidean distance (mm) from each site to the reference sites of
// one label.
struct DistanceField {
  int label = 0;
  std::vector<double> distance;
};

// Per-site, per-label log prior density, stored as k planes of n values.
struct FieldPrior {
  std::size_t n = 0;
  int k = 0;
  std::vector<double> log_density;  // index (j - 1) * n + i
  std::uint32_t source_checksum = 0;
  DeltaHyper hyper;
  FieldMode mode = FieldMode::Exact;

  double at(std::size_t i, int j) const { return log_density[static_cast<std::size_t>(j - 1) * n + i]; }
  std::span<const double> plane(int j) const {
    return {log_density.data() + static_cast<std::size_t>(j - 1) * n, n};
  }
  void validate() const;
};

struct FieldOptions {
  // Fill labels absent from the reference with the floor instead of failing.
  bool allow_empty = false;
  int workers = 1;
};

// Exact separable Euclidean distance transform in O(n) per axis, honouring
// anisotropic voxel sizes. Throws EmptyClassError when label j is absent.
DistanceField distance_transform(const LabelField& reference, const LatticeSpec& spec, int j);

// log N(d | mu, sigma2), the Gaussian density evaluated at a distance.
double log_normal_density(double d, double mu, double sigma2);

// Exact mode: log{ (1/n_j) sum_{h in j} phi(dist(h, i) | mu, sigma2) }.
// Approx mode: log phi(min_{h in j} dist(h, i) | mu, sigma2).
FieldPrior build_field_prior(const LabelField& reference, const LatticeSpec& spec,
                             const DeltaHyper& hyper, FieldMode mode, const FieldOptions& options = {});

// Rebuild after a hyperparameter update; labels whose parameters did not
// change produce bit-identical planes.
FieldPrior refresh_field_prior(const LabelField& reference, const LatticeSpec& spec,
                               const DeltaHyper& updated, FieldMode mode,
                               const FieldOptions& options = {});

// Exact mode is the default while n * k stays within this many site-label pairs.
inline constexpr std::size_t kExactModeLimit = std::size_t{1} << 20;
FieldMode default_field_mode(std::size_t n, int k);

// Label with the highest prior density at each site, lowest label on ties.
LabelField field_argmax(const FieldPrior& field);

}  // namespace xfield
