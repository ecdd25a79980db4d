#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xfield/lattice.hpp"
#include "xfield/potts.hpp"
#include "xfield/random.hpp"

namespace xfield {

struct PathTableMeta {
  std::vector<std::size_t> dims;
  int k = 0;
  std::size_t sweeps = 0;
  std::size_t burnin = 0;
  std::uint64_t seed = 0;

  bool operator==(const PathTableMeta&) const = default;
};

// Monte Carlo estimate of E[S(z) | beta] on an increasing grid starting at 0,
// linearly interpolated between grid points.
struct PathTable {
  std::vector<double> beta_grid;
  std::vector<double> expected_stat;
  PathTableMeta meta;

  void validate() const;  // throws InvalidConfig
  double min_beta() const { return beta_grid.front(); }
  double max_beta() const { return beta_grid.back(); }
  bool covers(double beta) const { return beta >= min_beta() && beta <= max_beta(); }
  // Throws ExtrapolationError outside the grid.
  double interpolate(double beta) const;
  // Integral of the interpolated curve from the first grid point to beta.
  double integral_to(double beta) const;

  bool operator==(const PathTable&) const = default;
};

// Uniform prior on [lower, upper].
struct BetaPrior {
  double lower = 0.0;
  double upper = 2.0;

  void validate() const;
  bool contains(double b) const { return b >= lower && b <= upper; }
};

// 0, step, 2*step, ... up to max (inclusive within rounding).
std::vector<double> make_beta_grid(double max, double step);

// Pool-adjacent-violators fit: the closest non-decreasing sequence in L2.
std::vector<double> isotonic_nondecreasing(std::span<const double> values);

// Runs Swendsen-Wang at every grid value from independent uniform starts and
// averages S(z) over the post-burn-in sweeps, then isotonic-smooths the curve.
// Grid point g draws from the stream (seed, g), so the table does not depend
// on the worker count.
PathTable calibrate(const LatticeSpec& spec, int k, std::vector<double> grid, std::size_t sweeps,
                    std::size_t burnin, std::uint64_t seed, int workers = 1);

// log{C(beta_from) / C(beta_to)}: the integral of E[S|beta] from beta_to to
// beta_from. Antisymmetric and additive along the path.
double log_ratio_normalising(const PathTable& table, double beta_from, double beta_to);

struct BetaUpdate {
  double beta;
  bool accepted;
};

// One random-walk Metropolis-Hastings step for beta given S(z).
BetaUpdate update_beta(double beta_current, SufficientStat stat, const PathTable& table,
                       const BetaPrior& prior, double proposal_sd, Rng& rng);

// Doubling/halving rule for the random-walk scale. During burn-in the
// acceptance rate of each window is pushed into [low, high]; freeze() stops
// further changes.
class ProposalTuner {
 public:
  explicit ProposalTuner(double initial_sd, std::size_t window = 50, double low = 0.2,
                         double high = 0.6);

  double sd() const { return sd_; }
  void record(bool accepted);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  double sd_;
  std::size_t window_;
  double low_, high_;
  std::size_t seen_ = 0;
  std::size_t accepted_ = 0;
  bool frozen_ = false;
};

}  // namespace xfield
