#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace xfield {

// Regular 2D or 3D lattice. Sites are linearised row-major with x fastest:
//   i = x + nx * (y + ny * z)
// Every module shares this ordering, including the on-disk volume format.
struct LatticeSpec {
  std::vector<std::size_t> dims;    // (nx, ny) or (nx, ny, nz)
  std::vector<double> voxel_size;   // mm per axis, same length as dims

  static LatticeSpec make(std::vector<std::size_t> dims, std::vector<double> voxel = {});

  std::size_t ndim() const { return dims.size(); }
  std::size_t site_count() const;
  void validate() const;  // throws InvalidSpec

  std::array<std::size_t, 3> coords(std::size_t i) const;
  std::size_t index(std::array<std::size_t, 3> c) const;
  // Physical position of the voxel centre, mm; the first voxel sits at 0.
  std::array<double, 3> position(std::size_t i) const;

  bool operator==(const LatticeSpec&) const = default;
};

using Edge = std::pair<std::uint32_t, std::uint32_t>;

struct EdgeSet {
  std::vector<Edge> edges;  // unordered first-order pairs, each once, first < second
  std::size_t size() const { return edges.size(); }
};

struct BlockPartition {
  std::vector<std::uint8_t> block_of;             // parity of the coordinate sum
  std::array<std::vector<std::uint32_t>, 2> sites; // sites of each block, ascending
};

// Immutable geometry bundle: safe for concurrent reads.
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec);

  const LatticeSpec& spec() const { return spec_; }
  std::size_t size() const { return n_; }
  const EdgeSet& edges() const { return edges_; }
  const BlockPartition& partition() const { return partition_; }

  std::span<const std::uint32_t> neighbours(std::size_t i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }

 private:
  LatticeSpec spec_;
  std::size_t n_ = 0;
  EdgeSet edges_;
  BlockPartition partition_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> adj_;
};

// Per-site intensities on a lattice.
struct ImageVolume {
  LatticeSpec spec;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

std::pair<EdgeSet, BlockPartition> build_lattice(const LatticeSpec& spec);

// First-order neighbours of site i in ascending index order.
std::vector<std::size_t> neighbours(const LatticeSpec& spec, std::size_t i);

}  // namespace xfield
