#include "xfield/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xfield/error.hpp"

namespace xfield {

LatticeSpec LatticeSpec::make(std::vector<std::size_t> dims, std::vector<double> voxel) {
  LatticeSpec s;
  s.dims = std::move(dims);
  s.voxel_size = voxel.empty() ? std::vector<double>(s.dims.size(), 1.0) : std::move(voxel);
  s.validate();
  return s;
}

std::size_t LatticeSpec::site_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void LatticeSpec::validate() const {
  if (dims.size() != 2 && dims.size() != 3)
    throw InvalidSpec("lattice must be 2D or 3D, got " + std::to_string(dims.size()) + " dims");
  if (voxel_size.size() != dims.size())
    throw InvalidSpec("voxel_size must have one entry per axis");
  for (auto d : dims)
    if (d == 0) throw InvalidSpec("lattice dimension is zero");
  for (auto v : voxel_size)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidSpec("voxel size must be positive and finite");
  if (site_count() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidSpec("lattice too large");
}

std::array<std::size_t, 3> LatticeSpec::coords(std::size_t i) const {
  std::array<std::size_t, 3> c{0, 0, 0};
  c[0] = i % dims[0];
  i /= dims[0];
  c[1] = i % dims[1];
  if (dims.size() == 3) c[2] = i / dims[1];
  return c;
}

std::size_t LatticeSpec::index(std::array<std::size_t, 3> c) const {
  const std::size_t nz_stride = dims[0] * dims[1];
  return c[0] + dims[0] * c[1] + (dims.size() == 3 ? nz_stride * c[2] : 0);
}

std::array<double, 3> LatticeSpec::position(std::size_t i) const {
  const auto c = coords(i);
  std::array<double, 3> p{0, 0, 0};
  for (std::size_t a = 0; a < dims.size(); ++a) p[a] = static_cast<double>(c[a]) * voxel_size[a];
  return p;
}

namespace {

template <typename Visit>
void for_each_neighbour(const LatticeSpec& s, std::size_t i, Visit&& visit) {
  const auto c = s.coords(i);
  // Lower neighbours first so the visit order is ascending in index.
  std::array<std::size_t, 3> strides{1, s.dims[0], s.dims[0] * s.dims[1]};
  for (std::size_t a = s.ndim(); a-- > 0;)
    if (c[a] > 0) visit(i - strides[a]);
  for (std::size_t a = 0; a < s.ndim(); ++a)
    if (c[a] + 1 < s.dims[a]) visit(i + strides[a]);
}

}  // namespace

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  n_ = spec_.site_count();
  offsets_.assign(n_ + 1, 0);
  adj_.reserve(n_ * 2 * spec_.ndim());
  partition_.block_of.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for_each_neighbour(spec_, i, [&](std::size_t j) {
      adj_.push_back(static_cast<std::uint32_t>(j));
      if (j > i) edges_.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    });
    offsets_[i + 1] = static_cast<std::uint32_t>(adj_.size());
    const auto c = spec_.coords(i);
    const auto b = static_cast<std::uint8_t>((c[0] + c[1] + c[2]) & 1U);
    partition_.block_of[i] = b;
    partition_.sites[b].push_back(static_cast<std::uint32_t>(i));
  }
}

std::pair<EdgeSet, BlockPartition> build_lattice(const LatticeSpec& spec) {
  Lattice lat(spec);
  return {lat.edges(), lat.partition()};
}

std::vector<std::size_t> neighbours(const LatticeSpec& spec, std::size_t i) {
  spec.validate();
  if (i >= spec.site_count())
    throw BoundsError("site index " + std::to_string(i) + " out of range");
  std::vector<std::size_t> out;
  for_each_neighbour(spec, i, [&](std::size_t j) { out.push_back(j); });
  return out;
}

}  // namespace xfield
