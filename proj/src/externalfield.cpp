#include "xfield/externalfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "xfield/checksum.hpp"
#include "xfield/error.hpp"
#include "xfield/parallel.hpp"

namespace xfield {

void DeltaParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidConfig("sigma2_delta must be positive");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidConfig("mu_delta must be non-negative");
}

DeltaParams DeltaHyper::for_label(int j) const {
  auto it = per_label.find(j);
  return it == per_label.end() ? global : it->second;
}

void DeltaHyper::validate() const {
  global.validate();
  for (const auto& [j, p] : per_label) {
    if (j < 1) throw InvalidConfig("per-label displacement override for invalid label");
    p.validate();
  }
}

FieldMode parse_field_mode(const std::string& s) {
  if (s == "exact") return FieldMode::Exact;
  if (s == "approx") return FieldMode::Approx;
  throw InvalidConfig("unknown field mode '" + s + "' (expected exact|approx)");
}

std::string to_string(FieldMode m) { return m == FieldMode::Exact ? "exact" : "approx"; }

void FieldPrior::validate() const {
  if (k < 1 || log_density.size() != n * static_cast<std::size_t>(k))
    throw ShapeError("field prior does not hold n x k values");
  for (double v : log_density)
    if (!std::isfinite(v)) throw DataError("field prior holds a non-finite value");
}

double log_normal_density(double d, double mu, double sigma2) {
  const double r = d - mu;
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * r * r / sigma2;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (x - x_q)^2 + f_q on the line, positions q * w.
void squared_edt_line(std::vector<double>& f, std::vector<double>& out, double w,
                      std::vector<std::size_t>& v, std::vector<double>& z) {
  const std::size_t n = f.size();
  v.resize(n);
  z.resize(n + 1);
  std::ptrdiff_t top = -1;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double xq = static_cast<double>(q) * w;
    double s = -kInf;
    while (top >= 0) {
      const double xv = static_cast<double>(v[top]) * w;
      s = ((f[q] + xq * xq) - (f[v[top]] + xv * xv)) / (2.0 * (xq - xv));
      if (s <= z[top]) {
        --top;
        s = -kInf;
      } else {
        break;
      }
    }
    ++top;
    v[top] = q;
    z[top] = s;
    z[top + 1] = kInf;
  }
  if (top < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  std::size_t j = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double xp = static_cast<double>(p) * w;
    while (z[j + 1] < xp) ++j;
    const double dx = xp - static_cast<double>(v[j]) * w;
    out[p] = dx * dx + f[v[j]];
  }
}

}  // namespace

DistanceField distance_transform(const LabelField& reference, const LatticeSpec& spec, int j) {
  spec.validate();
  reference.validate(spec.site_count());
  if (j < 1 || j > reference.k) throw BoundsError("label out of range");
  const std::size_t n = spec.site_count();
  std::vector<double> sq(n, kInf);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i)
    if (reference.labels[i] == j) {
      sq[i] = 0.0;
      any = true;
    }
  if (!any) throw EmptyClassError("label " + std::to_string(j) + " is empty in the reference");

  const std::array<std::size_t, 3> dims{spec.dims[0], spec.dims[1], spec.ndim() == 3 ? spec.dims[2] : 1};
  const std::array<std::size_t, 3> strides{1, dims[0], dims[0] * dims[1]};
  std::vector<double> line, out;
  std::vector<std::size_t> v;
  std::vector<double> z;
  for (std::size_t axis = 0; axis < spec.ndim(); ++axis) {
    const std::size_t len = dims[axis];
    line.resize(len);
    out.resize(len);
    const std::size_t stride = strides[axis];
    for (std::size_t start = 0; start < n; ++start) {
      // Line starts are the sites whose coordinate along this axis is 0.
      if ((start / stride) % len != 0) continue;
      for (std::size_t p = 0; p < len; ++p) line[p] = sq[start + p * stride];
      squared_edt_line(line, out, spec.voxel_size[axis], v, z);
      for (std::size_t p = 0; p < len; ++p) sq[start + p * stride] = out[p];
    }
  }
  DistanceField df;
  df.label = j;
  df.distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) df.distance[i] = std::sqrt(sq[i]);
  return df;
}

namespace {

// Mixture average over every reference site of the label. Densities depend
// only on the absolute coordinate offset, so they are tabulated once per
// label relative to the peak density and looked up per site pair.
void exact_plane(const LatticeSpec& spec, const std::vector<std::array<std::size_t, 3>>& members,
                 const DeltaParams& p, std::span<double> plane, int workers) {
  const std::array<std::size_t, 3> dims{spec.dims[0], spec.dims[1], spec.ndim() == 3 ? spec.dims[2] : 1};
  const std::array<double, 3> w{spec.voxel_size[0], spec.voxel_size[1],
                                spec.ndim() == 3 ? spec.voxel_size[2] : 1.0};
  const std::size_t n = plane.size();
  const double peak = log_normal_density(p.mu, p.mu, p.sigma2);
  std::vector<double> kernel(n);
  for (std::size_t c = 0; c < dims[2]; ++c)
    for (std::size_t b = 0; b < dims[1]; ++b)
      for (std::size_t a = 0; a < dims[0]; ++a) {
        const double dx = static_cast<double>(a) * w[0];
        const double dy = static_cast<double>(b) * w[1];
        const double dz = static_cast<double>(c) * w[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        kernel[a + dims[0] * (b + dims[1] * c)] = std::exp(log_normal_density(d, p.mu, p.sigma2) - peak);
      }
  const double log_norm = peak - std::log(static_cast<double>(members.size()));
  auto absdiff = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
  parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto c = spec.coords(i);
      double sum = 0.0;
      for (const auto& h : members)
        sum += kernel[absdiff(c[0], h[0]) + dims[0] * (absdiff(c[1], h[1]) + dims[1] * absdiff(c[2], h[2]))];
      const double v = sum > 0.0 ? std::log(sum) + log_norm : -kInf;
      plane[i] = std::max(v, kLogDensityFloor);
    }
  });
}

void approx_plane(const DistanceField& df, const DeltaParams& p, std::span<double> plane, int workers) {
  parallel_for(plane.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      plane[i] = std::max(log_normal_density(df.distance[i], p.mu, p.sigma2), kLogDensityFloor);
  });
}

}  // namespace

FieldPrior build_field_prior(const LabelField& reference, const LatticeSpec& spec, const DeltaHyper& hyper,
                             FieldMode mode, const FieldOptions& options) {
  spec.validate();
  reference.validate(spec.site_count());
  hyper.validate();
  FieldPrior fp;
  fp.n = spec.site_count();
  fp.k = reference.k;
  fp.hyper = hyper;
  fp.mode = mode;
  fp.source_checksum = crc32_of(std::span<const std::uint8_t>(reference.labels));
  fp.log_density.assign(fp.n * static_cast<std::size_t>(fp.k), kLogDensityFloor);

  const auto counts = reference.counts();
  for (int j = 1; j <= fp.k; ++j) {
    std::span<double> plane(fp.log_density.data() + static_cast<std::size_t>(j - 1) * fp.n, fp.n);
    if (counts[j - 1] == 0) {
      if (options.allow_empty) continue;
      throw EmptyClassError("label " + std::to_string(j) + " is empty in the reference");
    }
    const DeltaParams p = hyper.for_label(j);
    if (mode == FieldMode::Exact) {
      std::vector<std::array<std::size_t, 3>> members;
      members.reserve(counts[j - 1]);
      for (std::size_t i = 0; i < fp.n; ++i)
        if (reference.labels[i] == j) members.push_back(spec.coords(i));
      exact_plane(spec, members, p, plane, options.workers);
    } else {
      approx_plane(distance_transform(reference, spec, j), p, plane, options.workers);
    }
  }
  return fp;
}

FieldPrior refresh_field_prior(const LabelField& reference, const LatticeSpec& spec, const DeltaHyper& updated,
                               FieldMode mode, const FieldOptions& options) {
  return build_field_prior(reference, spec, updated, mode, options);
}

FieldMode default_field_mode(std::size_t n, int k) {
  return n * static_cast<std::size_t>(k) <= kExactModeLimit ? FieldMode::Exact : FieldMode::Approx;
}

LabelField field_argmax(const FieldPrior& field) {
  LabelField z(field.n, field.k);
  for (std::size_t i = 0; i < field.n; ++i) {
    int best = 1;
    for (int j = 2; j <= field.k; ++j)
      if (field.at(i, j) > field.at(i, best)) best = j;
    z.labels[i] = static_cast<std::uint8_t>(best);
  }
  return z;
}

}  // namespace xfield
