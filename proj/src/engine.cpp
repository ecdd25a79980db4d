#include "xfield/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "xfield/error.hpp"
#include "xfield/parallel.hpp"

namespace xfield {

namespace {

constexpr std::uint64_t kLabelStream = 0x4C41424CULL;
constexpr std::uint64_t kParamStream = 0x50415241ULL;
constexpr std::uint64_t kBetaStream = 0x42455441ULL;

// Per-component constants of log phi(y | mu, sigma2).
struct GaussianTerms {
  std::vector<double> mu, log_norm, inv_two_var;

  explicit GaussianTerms(const MixtureParams& p) : mu(p.mu) {
    for (double s2 : p.sigma2) {
      log_norm.push_back(-0.5 * std::log(2.0 * std::numbers::pi * s2));
      inv_two_var.push_back(0.5 / s2);
    }
  }

  double operator()(std::size_t j, double y) const {
    const double r = y - mu[j];
    return log_norm[j] - r * r * inv_two_var[j];
  }
};

// Fills prob with the normalised full conditional of site i.
void site_conditional(std::size_t i, const LabelField& z, double y, const GaussianTerms& g,
                      const FieldPrior* field, double beta, const Lattice& lattice, std::vector<double>& prob) {
  const std::size_t k = static_cast<std::size_t>(z.k);
  prob.assign(k, 0.0);
  for (auto nb : lattice.neighbours(i)) prob[z.labels[nb] - 1] += beta;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    prob[j] += g(j, y);
    if (field) prob[j] += field->log_density[j * field->n + i];
    top = std::max(top, prob[j]);
  }
  double total = 0.0;
  for (auto& v : prob) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : prob) v /= total;
}

std::uint8_t draw_categorical(const std::vector<double>& prob, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < prob.size(); ++j) {
    acc += prob[j];
    if (u < acc) return static_cast<std::uint8_t>(j + 1);
  }
  return static_cast<std::uint8_t>(prob.size());
}

void check_shapes(const ImageVolume& y, const LabelField& z, const MixtureParams& params,
                  const FieldPrior* field, const Lattice& lattice) {
  if (y.size() != lattice.size()) throw ShapeError("image does not match lattice");
  if (z.size() != lattice.size()) throw ShapeError("label field does not match lattice");
  if (params.k() != z.k) throw ShapeError("mixture parameters do not match k");
  if (field && (field->n != lattice.size() || field->k != z.k))
    throw ShapeError("field prior does not match lattice or k");
}

}  // namespace

void NoisePriors::validate() const {
  if (components.empty() || components.size() > 255) throw InvalidConfig("noise priors need 1..255 components");
  for (const auto& c : components) {
    if (!(c.phi2 > 0.0) || !(c.nu > 0.0) || !(c.s2 > 0.0) || !std::isfinite(c.m))
      throw InvalidConfig("noise prior for '" + c.name + "' needs phi2, nu, s2 > 0");
  }
}

NoisePriors NoisePriors::ed_phantom() {
  const double phi2 = 26.88 * 26.88;
  auto sq = [](double s) { return s * s; };
  return NoisePriors{{
      {"lung_inhale", -612.6, phi2, 25.0, sq(90.06)},
      {"lung_exhale", -495.8, phi2, 25.0, sq(89.16)},
      {"adipose", -316.8, phi2, 25.0, sq(79.36)},
      {"breast", -295.9, phi2, 25.0, sq(67.42)},
      {"water", -294.5, phi2, 25.0, sq(152.0)},
      {"muscle", -263.3, phi2, 25.0, sq(71.55)},
      {"liver", -259.6, phi2, 25.0, sq(88.50)},
      {"spongy_bone", -191.1, phi2, 25.0, sq(87.36)},
      {"dense_bone", 77.9, phi2, 25.0, sq(89.94)},
  }};
}

void MixtureParams::validate() const {
  if (mu.size() != sigma2.size() || mu.empty()) throw InvalidConfig("mixture parameters are inconsistent");
  for (double s : sigma2)
    if (!(s > 0.0)) throw InvalidConfig("component variance must be positive");
}

MixtureParams MixtureParams::from_prior_means(const NoisePriors& priors) {
  MixtureParams p;
  for (const auto& c : priors.components) {
    p.mu.push_back(c.m);
    p.sigma2.push_back(c.s2);
  }
  return p;
}

void ChainConfig::validate() const {
  if (!(iterations > burnin)) throw InvalidConfig("iterations must exceed burnin");
  if (thin < 1) throw InvalidConfig("thinning interval must be >= 1");
  if (beta_mode == BetaMode::Fixed) {
    if (!std::isfinite(beta_fixed)) throw InvalidConfig("fixed beta must be finite");
  } else {
    beta_prior.validate();
    if (!beta_prior.contains(beta_init)) throw InvalidConfig("initial beta outside its prior support");
    if (!(proposal_sd > 0.0)) throw InvalidConfig("proposal_sd must be positive");
  }
}

double ChainResult::posterior_mean_beta() const {
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t t = burnin; t < beta_trace.size(); t += thin) {
    sum += beta_trace[t];
    ++m;
  }
  return m ? sum / static_cast<double>(m) : 0.0;
}

std::vector<double> posterior_conditional(std::size_t i, const LabelField& z, double y_i,
                                          const MixtureParams& params, const FieldPrior* field,
                                          double beta, const Lattice& lattice) {
  if (!std::isfinite(y_i)) throw DataError("non-finite intensity at site " + std::to_string(i));
  if (z.size() != lattice.size()) throw ShapeError("label field does not match lattice");
  if (i >= z.size()) throw BoundsError("site index out of range");
  if (params.k() != z.k) throw ShapeError("mixture parameters do not match k");
  if (field && (field->n != lattice.size() || field->k != z.k))
    throw ShapeError("field prior does not match lattice or k");
  std::vector<double> prob;
  site_conditional(i, z, y_i, GaussianTerms(params), field, beta, lattice, prob);
  return prob;
}

void update_labels_chequerboard(LabelField& z, const ImageVolume& y, const MixtureParams& params,
                                const FieldPrior* field, double beta, const Lattice& lattice,
                                std::uint64_t seed, std::uint64_t iteration, int workers) {
  check_shapes(y, z, params, field, lattice);
  if (z.k == 1) return;
  const GaussianTerms g(params);
  for (const auto& block : lattice.partition().sites) {
    parallel_for(block.size(), workers, [&](std::size_t begin, std::size_t end) {
      std::vector<double> prob;
      for (std::size_t s = begin; s < end; ++s) {
        const std::size_t i = block[s];
        site_conditional(i, z, y.values[i], g, field, beta, lattice, prob);
        z.labels[i] = draw_categorical(prob, keyed_uniform(seed, {kLabelStream, iteration, i}));
      }
    });
  }
}

MixtureParams update_mixture_params(const ImageVolume& y, const LabelField& z, const NoisePriors& priors,
                                    const MixtureParams& params, Rng& rng) {
  if (y.size() != z.size()) throw ShapeError("image does not match label field");
  if (priors.k() != z.k || params.k() != z.k) throw ShapeError("priors or parameters do not match k");
  const std::size_t k = static_cast<std::size_t>(z.k);
  std::vector<double> count(k, 0.0), sum(k, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    count[z.labels[i] - 1] += 1.0;
    sum[z.labels[i] - 1] += y.values[i];
  }
  MixtureParams next = params;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& pr = priors.components[j];
    const double precision = 1.0 / pr.phi2 + count[j] / params.sigma2[j];
    const double mean = (pr.m / pr.phi2 + sum[j] / params.sigma2[j]) / precision;
    std::normal_distribution<double> mu_draw(mean, std::sqrt(1.0 / precision));
    next.mu[j] = mu_draw(rng);
  }
  std::vector<double> ss(k, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = y.values[i] - next.mu[z.labels[i] - 1];
    ss[z.labels[i] - 1] += r * r;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const auto& pr = priors.components[j];
    const double shape = 0.5 * (pr.nu + count[j]);
    const double scale = 0.5 * (pr.nu * pr.s2 + ss[j]);
    // sigma2 ~ IG(shape, scale)  <=>  1 / sigma2 ~ Gamma(shape, rate = scale)
    std::gamma_distribution<double> precision_draw(shape, 1.0 / scale);
    next.sigma2[j] = 1.0 / precision_draw(rng);
  }
  return next;
}

LabelField initial_labels(const ImageVolume& y, const NoisePriors& priors, const FieldPrior* field) {
  if (field) return field_argmax(*field);
  const GaussianTerms g(MixtureParams::from_prior_means(priors));
  LabelField z(y.size(), priors.k());
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < static_cast<std::size_t>(priors.k()); ++j)
      if (g(j, y.values[i]) > g(best, y.values[i])) best = j;
    z.labels[i] = static_cast<std::uint8_t>(best + 1);
  }
  return z;
}

ChainResult run_chain(const ImageVolume& y, const ChainConfig& config, const NoisePriors& priors,
                      const FieldPrior* field, const PathTable* table, const LabelField* truth) {
  config.validate();
  priors.validate();
  y.spec.validate();
  const Lattice lattice(y.spec);
  if (y.size() != lattice.size()) throw ShapeError("image payload does not match its lattice");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!std::isfinite(y.values[i])) throw DataError("non-finite intensity at site " + std::to_string(i));
  const FieldPrior* active_field = config.use_field ? field : nullptr;
  if (active_field) {
    if (active_field->n != y.size() || active_field->k != priors.k())
      throw ShapeError("field prior does not match image or k");
  }
  if (truth) truth->validate(y.size());
  if (truth && truth->k != priors.k()) throw ShapeError("ground truth k does not match priors");
  const bool sample_beta = config.beta_mode == BetaMode::Sample;
  if (sample_beta) {
    if (!table) throw InvalidConfig("sampling beta requires a path table");
    table->validate();
    if (!table->covers(config.beta_prior.lower) || !table->covers(config.beta_prior.upper))
      throw InvalidConfig("beta prior support must lie within the path table range");
  }

  const int k = priors.k();
  const std::size_t n = y.size();
  ChainResult r;
  r.n = n;
  r.k = k;
  r.iterations = config.iterations;
  r.burnin = config.burnin;
  r.thin = config.thin;
  r.retained = config.retained();
  r.counts.assign(n * static_cast<std::size_t>(k), 0);
  r.beta_trace.reserve(config.iterations);
  r.stat_trace.reserve(config.iterations);
  r.mu_trace.reserve(config.iterations * k);
  r.sigma2_trace.reserve(config.iterations * k);
  if (truth) r.correct_trace.reserve(config.iterations);

  LabelField z = initial_labels(y, priors, active_field);
  MixtureParams params = MixtureParams::from_prior_means(priors);
  double beta = sample_beta ? config.beta_init : config.beta_fixed;
  ProposalTuner tuner(sample_beta ? config.proposal_sd : 1.0);
  if (!config.adapt_proposal) tuner.freeze();

  for (std::size_t t = 0; t < config.iterations; ++t) {
    if (t == config.burnin) tuner.freeze();
    update_labels_chequerboard(z, y, params, active_field, beta, lattice, config.seed, t, config.workers);
    Rng param_rng = make_stream(config.seed, {kParamStream, t});
    params = update_mixture_params(y, z, priors, params, param_rng);
    const SufficientStat stat = sufficient_statistic(z, lattice);
    if (sample_beta) {
      Rng beta_rng = make_stream(config.seed, {kBetaStream, t});
      const auto step = update_beta(beta, stat, *table, config.beta_prior, tuner.sd(), beta_rng);
      beta = step.beta;
      tuner.record(step.accepted);
      if (t >= config.burnin) r.beta_accepted += step.accepted;
    }
    r.beta_trace.push_back(beta);
    r.stat_trace.push_back(stat);
    r.mu_trace.insert(r.mu_trace.end(), params.mu.begin(), params.mu.end());
    r.sigma2_trace.insert(r.sigma2_trace.end(), params.sigma2.begin(), params.sigma2.end());
    if (truth) {
      std::int64_t correct = 0;
      for (std::size_t i = 0; i < n; ++i) correct += (z.labels[i] == truth->labels[i]);
      r.correct_trace.push_back(correct);
    }
    if (t >= config.burnin && (t - config.burnin) % config.thin == 0)
      for (std::size_t i = 0; i < n; ++i) ++r.counts[static_cast<std::size_t>(z.labels[i] - 1) * n + i];
  }
  r.final_proposal_sd = sample_beta ? tuner.sd() : 0.0;
  r.modal = modal_labels(r);
  return r;
}

LabelField modal_labels(const ChainResult& result) {
  if (result.counts.size() != result.n * static_cast<std::size_t>(result.k))
    throw ShapeError("allocation counts do not match n x k");
  LabelField z(result.n, result.k);
  for (std::size_t i = 0; i < result.n; ++i) {
    int best = 1;
    for (int j = 2; j <= result.k; ++j)
      if (result.count(i, j) > result.count(i, best)) best = j;
    z.labels[i] = static_cast<std::uint8_t>(best);
  }
  return z;
}

}  // namespace xfield
