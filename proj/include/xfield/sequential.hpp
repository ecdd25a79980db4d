#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xfield/engine.hpp"
#include "xfield/externalfield.hpp"

namespace xfield {

// Monte Carlo posterior label probabilities, index (j - 1) * n + i.
struct LabelWeights {
  std::size_t n = 0;
  int k = 0;
  std::vector<double> w;

  double at(std::size_t i, int j) const { return w[static_cast<std::size_t>(j - 1) * n + i]; }
};

LabelWeights posterior_weights(const ChainResult& result);
LabelWeights posterior_weights(std::span<const std::uint32_t> counts, std::size_t n, int k);

// Weighted displacement statistics of one label.
struct DeltaStat {
  double nu_hat = 0.0;  // effective count, sum of weights
  double m_hat = 0.0;   // weighted mean minimum distance, mm
  double s2_hat = 0.0;  // weighted variance about m_hat, mm^2

  bool empty() const { return nu_hat == 0.0; }
};

struct DeltaSufficientStats {
  std::vector<DeltaStat> per_label;  // index 0 is label 1
};

// `dists[j - 1]` holds the distance field of label j; an empty distance
// vector marks a label absent from the reference, whose stats stay empty.
DeltaSufficientStats delta_sufficient_stats(const LabelWeights& w, const std::vector<DistanceField>& dists);

// Merges statistics of two disjoint batches into one.
DeltaStat pool_stats(const DeltaStat& a, const DeltaStat& b);

// Mean pairwise distance between the sites of label j, (1/n_j^2) sum_g sum_h dist(g, h).
double intra_object_mean_distance(const LabelField& reference, const LatticeSpec& spec, int j);

struct DeltaPrior {
  double n_prior = 1.0;   // pseudo-count
  double mu_prior = 1.2;  // mm
  double sigma2_prior = 7.3 * 7.3;  // mm^2
};

struct DeltaPriorState {
  std::vector<DeltaPrior> per_label;  // index 0 is label 1

  void validate() const;  // throws InvalidConfig
  // Plug-in displacement hyperparameters for refreshing the field prior.
  DeltaHyper to_hyper() const;
};

// Conjugate Gaussian update per label. A label with nu_hat = 0 keeps its
// prior unchanged.
DeltaPriorState update_delta_hyperparams(const DeltaPriorState& prior, const DeltaSufficientStats& stats);

// Adds a per-label offset to m_hat, e.g. intra_object_mean_distance to
// offset the downward bias of minimum distances.
DeltaSufficientStats add_distance_offset(DeltaSufficientStats stats, const std::vector<double>& offset);

}  // namespace xfield
