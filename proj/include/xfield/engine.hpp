#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "xfield/externalfield.hpp"
#include "xfield/lattice.hpp"
#include "xfield/pathsampler.hpp"
#include "xfield/potts.hpp"
#include "xfield/random.hpp"

namespace xfield {

// Priors of one mixture component: mu ~ N(m, phi2), sigma2 ~ IG(nu/2, nu*s2/2).
struct ComponentPrior {
  std::string name;
  double m = 0.0;
  double phi2 = 1.0;
  double nu = 1.0;
  double s2 = 1.0;
};

struct NoisePriors {
  std::vector<ComponentPrior> components;  // index 0 is label 1

  int k() const { return static_cast<int>(components.size()); }
  void validate() const;  // throws InvalidConfig

  // Informative cone-beam CT priors for the nine electron-density phantom
  // tissues, in label order 1..9.
  static NoisePriors ed_phantom();
};

struct MixtureParams {
  std::vector<double> mu;
  std::vector<double> sigma2;

  int k() const { return static_cast<int>(mu.size()); }
  void validate() const;
  static MixtureParams from_prior_means(const NoisePriors& priors);
};

enum class BetaMode { Sample, Fixed };

struct ChainConfig {
  std::size_t iterations = 5500;
  std::size_t burnin = 500;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  BetaMode beta_mode = BetaMode::Sample;
  double beta_fixed = 0.0;   // used when beta_mode == Fixed
  double beta_init = 1.0;    // starting value when sampling
  BetaPrior beta_prior{0.0, 2.0};
  double proposal_sd = 0.01;
  bool adapt_proposal = true;  // doubling/halving during burn-in only
  bool use_field = true;
  int workers = 1;

  void validate() const;  // throws InvalidConfig
  std::size_t retained() const { return iterations > burnin ? (iterations - burnin + thin - 1) / thin : 0; }
};

struct ChainResult {
  std::size_t n = 0;
  int k = 0;
  std::size_t iterations = 0;
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::size_t retained = 0;

  // One entry per iteration, including burn-in.
  std::vector<double> beta_trace;
  std::vector<SufficientStat> stat_trace;
  std::vector<double> mu_trace;      // iteration-major, k per row
  std::vector<double> sigma2_trace;  // iteration-major, k per row
  std::vector<std::int64_t> correct_trace;  // empty without ground truth

  // Allocation counts over retained iterations, index (j - 1) * n + i.
  std::vector<std::uint32_t> counts;
  LabelField modal;

  double final_proposal_sd = 0.0;
  std::size_t beta_accepted = 0;

  std::uint32_t count(std::size_t i, int j) const { return counts[static_cast<std::size_t>(j - 1) * n + i]; }
  double posterior_mean_beta() const;  // over retained iterations
};

// Full conditional of z_i with data and (optionally) the field prior:
// softmax_j of log phi(y_i | mu_j, sigma2_j) + field(i, j) + beta * (#neighbours labelled j).
std::vector<double> posterior_conditional(std::size_t i, const LabelField& z, double y_i,
                                          const MixtureParams& params, const FieldPrior* field,
                                          double beta, const Lattice& lattice);

// One chequerboard sweep: block 0 then block 1, every site of a block drawn
// from its full conditional. The uniform driving site i is keyed by
// (seed, iteration, i), so the result is independent of `workers`.
void update_labels_chequerboard(LabelField& z, const ImageVolume& y, const MixtureParams& params,
                                const FieldPrior* field, double beta, const Lattice& lattice,
                                std::uint64_t seed, std::uint64_t iteration, int workers = 1);

// Semi-conjugate Gibbs: mu_j | sigma2_j, then sigma2_j | mu_j. Empty
// components draw from their priors.
MixtureParams update_mixture_params(const ImageVolume& y, const LabelField& z, const NoisePriors& priors,
                                    const MixtureParams& params, Rng& rng);

// Starting labels: field argmax when a field is used, otherwise the most
// likely component under the prior means and scales.
LabelField initial_labels(const ImageVolume& y, const NoisePriors& priors, const FieldPrior* field);

ChainResult run_chain(const ImageVolume& y, const ChainConfig& config, const NoisePriors& priors,
                      const FieldPrior* field, const PathTable* table, const LabelField* truth);

// Per-site argmax of allocation counts; ties go to the lowest label.
LabelField modal_labels(const ChainResult& result);

}  // namespace xfield
