#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xfield/potts.hpp"

namespace xfield {

// 2|A ∩ B| / (|A| + |B|) for label j; 1 when both sets are empty.
double dice(const LabelField& predicted, const LabelField& truth, int j);

// Fraction of sites where predicted != truth.
double misclassification(const LabelField& predicted, const LabelField& truth);

struct ScoreReport {
  int k = 0;
  std::vector<double> dice;  // index 0 is label 1
  double misclassification = 0.0;
  // confusion[(t - 1) * k + (p - 1)] counts sites with truth t predicted as p.
  std::vector<std::uint64_t> confusion;

  double accuracy_from_confusion() const;
};

ScoreReport score(const LabelField& predicted, const LabelField& truth);

// Shortest window of ceil(level * N) sorted samples.
std::pair<double, double> hpd_interval(std::span<const double> samples, double level);

struct PairedSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1); 0 for a single pair
};

// Mean and SD of a - b over paired entries.
PairedSummary paired_difference_summary(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace xfield
