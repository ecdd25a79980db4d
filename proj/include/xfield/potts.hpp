#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xfield/lattice.hpp"
#include "xfield/random.hpp"

namespace xfield {

// Per-site categorical labels in 1..k (0 is never a valid label).
struct LabelField {
  std::vector<std::uint8_t> labels;
  int k = 0;

  LabelField() = default;
  LabelField(std::vector<std::uint8_t> l, int k_) : labels(std::move(l)), k(k_) {}
  LabelField(std::size_t n, int k_, std::uint8_t fill = 1) : labels(n, fill), k(k_) {}

  std::size_t size() const { return labels.size(); }
  std::uint8_t operator[](std::size_t i) const { return labels[i]; }
  std::uint8_t& operator[](std::size_t i) { return labels[i]; }

  // Throws ShapeError on length mismatch, DataError on labels outside 1..k.
  void validate(std::size_t n) const;
  // Number of sites holding each label; index 0 is label 1.
  std::vector<std::size_t> counts() const;

  bool operator==(const LabelField&) const = default;
};

// Count of like-labelled neighbour pairs.
using SufficientStat = std::size_t;

SufficientStat sufficient_statistic(const LabelField& z, const Lattice& lattice);
SufficientStat sufficient_statistic(const LabelField& z, const EdgeSet& edges);

// Number of neighbours of site i carrying each label; index 0 is label 1.
void neighbour_label_counts(std::size_t i, const LabelField& z, const Lattice& lattice,
                            std::vector<int>& out);

// Potts conditional of z_i given its neighbours, without data.
std::vector<double> prior_conditional(std::size_t i, const LabelField& z, double beta,
                                      const Lattice& lattice);

// Disjoint sets with path halving and union by size.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n);
  std::uint32_t find(std::uint32_t x);
  void unite(std::uint32_t a, std::uint32_t b);

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// One Swendsen-Wang update. Bonds on like-labelled edges are drawn in edge
// order with probability 1 - exp(-beta); each resulting cluster receives one
// uniform label, drawn in order of the cluster's lowest site index.
LabelField swendsen_wang_step(const LabelField& z, double beta, const Lattice& lattice, Rng& rng);
void swendsen_wang_inplace(LabelField& z, double beta, const Lattice& lattice, Rng& rng);

// Independent uniform labels.
LabelField random_labels(std::size_t n, int k, Rng& rng);

}  // namespace xfield
