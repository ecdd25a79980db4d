#include "xfield/pathsampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xfield/error.hpp"
#include "xfield/parallel.hpp"

namespace xfield {

void PathTable::validate() const {
  if (beta_grid.empty()) throw InvalidConfig("path table is empty");
  if (beta_grid.size() != expected_stat.size())
    throw InvalidConfig("path table columns differ in length");
  if (beta_grid.front() != 0.0) throw InvalidConfig("path table grid must start at beta = 0");
  for (std::size_t g = 1; g < beta_grid.size(); ++g)
    if (!(beta_grid[g] > beta_grid[g - 1])) throw InvalidConfig("path table grid must be strictly increasing");
  for (double v : expected_stat)
    if (!std::isfinite(v)) throw InvalidConfig("path table holds a non-finite value");
}

namespace {

std::size_t segment_of(const std::vector<double>& grid, double beta) {
  // Index g with grid[g] <= beta < grid[g+1]; the last point maps to the last segment.
  auto it = std::upper_bound(grid.begin(), grid.end(), beta);
  std::size_t g = static_cast<std::size_t>(it - grid.begin());
  g = g == 0 ? 0 : g - 1;
  return std::min(g, grid.size() >= 2 ? grid.size() - 2 : 0);
}

void require_covered(const PathTable& t, double beta) {
  if (!std::isfinite(beta) || !t.covers(beta))
    throw ExtrapolationError("beta = " + std::to_string(beta) + " outside path table range [" +
                             std::to_string(t.min_beta()) + ", " + std::to_string(t.max_beta()) + "]");
}

}  // namespace

double PathTable::interpolate(double beta) const {
  require_covered(*this, beta);
  if (beta_grid.size() == 1) return expected_stat.front();
  const std::size_t g = segment_of(beta_grid, beta);
  if (beta == beta_grid[g]) return expected_stat[g];
  if (beta == beta_grid[g + 1]) return expected_stat[g + 1];
  const double t = (beta - beta_grid[g]) / (beta_grid[g + 1] - beta_grid[g]);
  return expected_stat[g] + t * (expected_stat[g + 1] - expected_stat[g]);
}

double PathTable::integral_to(double beta) const {
  require_covered(*this, beta);
  if (beta_grid.size() == 1) return 0.0;
  const std::size_t last = segment_of(beta_grid, beta);
  double total = 0.0;
  for (std::size_t g = 0; g < last; ++g)
    total += 0.5 * (expected_stat[g] + expected_stat[g + 1]) * (beta_grid[g + 1] - beta_grid[g]);
  total += 0.5 * (expected_stat[last] + interpolate(beta)) * (beta - beta_grid[last]);
  return total;
}

void BetaPrior::validate() const {
  if (!(lower >= 0.0) || !(lower < upper) || !std::isfinite(upper))
    throw InvalidConfig("beta prior needs 0 <= lower < upper");
}

std::vector<double> make_beta_grid(double max, double step) {
  if (!(step > 0.0) || !(max >= 0.0)) throw InvalidConfig("beta grid needs step > 0 and max >= 0");
  const auto count = static_cast<std::size_t>(std::floor(max / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t g = 0; g < count; ++g) grid[g] = static_cast<double>(g) * step;
  return grid;
}

std::vector<double> isotonic_nondecreasing(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      auto top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean());
  return out;
}

PathTable calibrate(const LatticeSpec& spec, int k, std::vector<double> grid, std::size_t sweeps,
                    std::size_t burnin, std::uint64_t seed, int workers) {
  if (grid.empty()) throw InvalidConfig("calibration grid is empty");
  if (k < 1 || k > 255) throw InvalidConfig("k must be in 1..255");
  if (!(sweeps > burnin)) throw InvalidConfig("calibration needs sweeps > burnin");
  PathTable table;
  table.beta_grid = std::move(grid);
  table.expected_stat.assign(table.beta_grid.size(), 0.0);
  table.meta = {spec.dims, k, sweeps, burnin, seed};
  table.validate();
  for (double b : table.beta_grid)
    if (b < 0.0) throw InvalidConfig("calibration grid must be non-negative");

  const Lattice lattice(spec);
  parallel_for(table.beta_grid.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      Rng rng = make_stream(seed, {0x5357ULL, g});
      LabelField z = random_labels(lattice.size(), k, rng);
      double total = 0.0;
      for (std::size_t s = 0; s < sweeps; ++s) {
        swendsen_wang_inplace(z, table.beta_grid[g], lattice, rng);
        if (s >= burnin) total += static_cast<double>(sufficient_statistic(z, lattice));
      }
      table.expected_stat[g] = total / static_cast<double>(sweeps - burnin);
    }
  });
  table.expected_stat = isotonic_nondecreasing(table.expected_stat);
  return table;
}

double log_ratio_normalising(const PathTable& table, double beta_from, double beta_to) {
  if (beta_from == beta_to) {
    require_covered(table, beta_from);
    return 0.0;
  }
  return table.integral_to(beta_from) - table.integral_to(beta_to);
}

BetaUpdate update_beta(double beta_current, SufficientStat stat, const PathTable& table,
                       const BetaPrior& prior, double proposal_sd, Rng& rng) {
  if (!(proposal_sd > 0.0) || !std::isfinite(proposal_sd))
    throw InvalidConfig("proposal_sd must be positive");
  prior.validate();
  if (!prior.contains(beta_current)) throw DomainError("current beta outside prior support");
  std::normal_distribution<double> step(0.0, proposal_sd);
  const double proposal = beta_current + step(rng);
  const double u = uniform01(rng);
  if (!prior.contains(proposal)) return {beta_current, false};
  const double log_rho = log_ratio_normalising(table, beta_current, proposal) +
                         (proposal - beta_current) * static_cast<double>(stat);
  if (std::log(u) < log_rho) return {proposal, true};
  return {beta_current, false};
}

ProposalTuner::ProposalTuner(double initial_sd, std::size_t window, double low, double high)
    : sd_(initial_sd), window_(window), low_(low), high_(high) {
  if (!(initial_sd > 0.0)) throw InvalidConfig("proposal_sd must be positive");
  if (window == 0 || !(low < high)) throw InvalidConfig("invalid proposal tuning window");
}

void ProposalTuner::record(bool accepted) {
  if (frozen_) return;
  ++seen_;
  accepted_ += accepted;
  if (seen_ < window_) return;
  const double rate = static_cast<double>(accepted_) / static_cast<double>(seen_);
  if (rate < low_) sd_ *= 0.5;
  else if (rate > high_) sd_ *= 2.0;
  seen_ = accepted_ = 0;
}

}  // namespace xfield
