#include "xfield/potts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xfield/error.hpp"

namespace xfield {

void LabelField::validate(std::size_t n) const {
  if (labels.size() != n)
    throw ShapeError("label field has " + std::to_string(labels.size()) + " sites, lattice has " +
                     std::to_string(n));
  if (k < 1 || k > 255) throw DataError("label count k must be in 1..255");
  for (auto l : labels)
    if (l < 1 || l > k) throw DataError("label " + std::to_string(l) + " outside 1.." + std::to_string(k));
}

std::vector<std::size_t> LabelField::counts() const {
  std::vector<std::size_t> c(static_cast<std::size_t>(k), 0);
  for (auto l : labels) ++c[l - 1];
  return c;
}

SufficientStat sufficient_statistic(const LabelField& z, const EdgeSet& edges) {
  SufficientStat s = 0;
  for (const auto& [a, b] : edges.edges) {
    if (a >= z.size() || b >= z.size()) throw ShapeError("edge set does not match label field");
    s += (z.labels[a] == z.labels[b]);
  }
  return s;
}

SufficientStat sufficient_statistic(const LabelField& z, const Lattice& lattice) {
  if (z.size() != lattice.size()) throw ShapeError("label field does not match lattice");
  return sufficient_statistic(z, lattice.edges());
}

void neighbour_label_counts(std::size_t i, const LabelField& z, const Lattice& lattice,
                            std::vector<int>& out) {
  out.assign(static_cast<std::size_t>(z.k), 0);
  for (auto nb : lattice.neighbours(i)) ++out[z.labels[nb] - 1];
}

std::vector<double> prior_conditional(std::size_t i, const LabelField& z, double beta,
                                      const Lattice& lattice) {
  if (z.size() != lattice.size()) throw ShapeError("label field does not match lattice");
  if (i >= z.size()) throw BoundsError("site index out of range");
  if (!std::isfinite(beta)) throw DomainError("beta must be finite");
  std::vector<int> counts;
  neighbour_label_counts(i, z, lattice, counts);
  std::vector<double> p(counts.size());
  const int top = *std::max_element(counts.begin(), counts.end());
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    // Shift by the largest count so the exponent never overflows.
    p[j] = std::exp(beta * (counts[j] - top));
    total += p[j];
  }
  for (auto& v : p) v /= total;
  return p;
}

DisjointSet::DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
  for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

std::uint32_t DisjointSet::find(std::uint32_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void DisjointSet::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
}

void swendsen_wang_inplace(LabelField& z, double beta, const Lattice& lattice, Rng& rng) {
  if (z.size() != lattice.size()) throw ShapeError("label field does not match lattice");
  if (!(beta >= 0.0)) throw DomainError("Swendsen-Wang requires beta >= 0");
  const double bond_p = -std::expm1(-beta);
  DisjointSet clusters(z.size());
  if (bond_p > 0.0) {
    for (const auto& [a, b] : lattice.edges().edges) {
      if (z.labels[a] != z.labels[b]) continue;
      if (uniform01(rng) < bond_p) clusters.unite(a, b);
    }
  }
  constexpr std::uint8_t unset = 0;
  std::vector<std::uint8_t> new_label(z.size(), unset);
  std::uniform_int_distribution<int> pick(1, z.k);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto root = clusters.find(static_cast<std::uint32_t>(i));
    if (new_label[root] == unset) new_label[root] = static_cast<std::uint8_t>(pick(rng));
    z.labels[i] = new_label[root];
  }
}

LabelField swendsen_wang_step(const LabelField& z, double beta, const Lattice& lattice, Rng& rng) {
  LabelField out = z;
  swendsen_wang_inplace(out, beta, lattice, rng);
  return out;
}

LabelField random_labels(std::size_t n, int k, Rng& rng) {
  std::uniform_int_distribution<int> pick(1, k);
  LabelField z(n, k);
  for (auto& l : z.labels) l = static_cast<std::uint8_t>(pick(rng));
  return z;
}

}  // namespace xfield
