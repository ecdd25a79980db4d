#include "xfield/sequential.hpp"

#include <cmath>
#include <string>

#include "xfield/error.hpp"

namespace xfield {

LabelWeights posterior_weights(std::span<const std::uint32_t> counts, std::size_t n, int k) {
  if (k < 1 || counts.size() != n * static_cast<std::size_t>(k))
    throw ShapeError("allocation counts do not match n x k");
  LabelWeights lw;
  lw.n = n;
  lw.k = k;
  lw.w.assign(counts.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t total = 0;
    for (int j = 0; j < k; ++j) total += counts[static_cast<std::size_t>(j) * n + i];
    if (total == 0) throw InvalidState("no retained iterations at site " + std::to_string(i));
    const double inv = 1.0 / static_cast<double>(total);
    for (int j = 0; j < k; ++j) {
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      lw.w[idx] = static_cast<double>(counts[idx]) * inv;
    }
  }
  return lw;
}

LabelWeights posterior_weights(const ChainResult& result) {
  if (result.retained == 0) throw InvalidState("chain has zero retained iterations");
  return posterior_weights(result.counts, result.n, result.k);
}

DeltaSufficientStats delta_sufficient_stats(const LabelWeights& w, const std::vector<DistanceField>& dists) {
  if (dists.size() != static_cast<std::size_t>(w.k)) throw ShapeError("need one distance field per label");
  DeltaSufficientStats out;
  out.per_label.resize(dists.size());
  for (int j = 1; j <= w.k; ++j) {
    const auto& d = dists[j - 1].distance;
    if (d.empty()) continue;
    if (d.size() != w.n) throw ShapeError("distance field does not match weights");
    DeltaStat s;
    double wd = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
      s.nu_hat += w.at(i, j);
      wd += w.at(i, j) * d[i];
    }
    if (s.nu_hat > 0.0) {
      s.m_hat = wd / s.nu_hat;
      double ss = 0.0;
      for (std::size_t i = 0; i < w.n; ++i) {
        const double r = d[i] - s.m_hat;
        ss += w.at(i, j) * r * r;
      }
      s.s2_hat = ss / s.nu_hat;
    }
    out.per_label[j - 1] = s;
  }
  return out;
}

DeltaStat pool_stats(const DeltaStat& a, const DeltaStat& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  DeltaStat p;
  p.nu_hat = a.nu_hat + b.nu_hat;
  p.m_hat = (a.nu_hat * a.m_hat + b.nu_hat * b.m_hat) / p.nu_hat;
  const double diff = a.m_hat - b.m_hat;
  p.s2_hat = (a.nu_hat * a.s2_hat + b.nu_hat * b.s2_hat + a.nu_hat * b.nu_hat / p.nu_hat * diff * diff) / p.nu_hat;
  return p;
}

double intra_object_mean_distance(const LabelField& reference, const LatticeSpec& spec, int j) {
  reference.validate(spec.site_count());
  std::vector<std::array<double, 3>> pts;
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (reference.labels[i] == j) pts.push_back(spec.position(i));
  if (pts.empty()) throw EmptyClassError("label " + std::to_string(j) + " is empty in the reference");
  double total = 0.0;
  for (const auto& g : pts)
    for (const auto& h : pts) {
      const double dx = g[0] - h[0], dy = g[1] - h[1], dz = g[2] - h[2];
      total += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  const double nj = static_cast<double>(pts.size());
  return total / (nj * nj);
}

void DeltaPriorState::validate() const {
  if (per_label.empty()) throw InvalidConfig("displacement prior has no labels");
  for (const auto& p : per_label) {
    if (!(p.n_prior > 0.0)) throw InvalidConfig("displacement prior pseudo-count must be positive");
    if (!(p.sigma2_prior > 0.0)) throw InvalidConfig("displacement prior variance must be positive");
    if (!(p.mu_prior >= 0.0)) throw InvalidConfig("displacement prior mean must be non-negative");
  }
}

DeltaHyper DeltaPriorState::to_hyper() const {
  validate();
  DeltaHyper h;
  h.global = {per_label.front().mu_prior, per_label.front().sigma2_prior};
  for (std::size_t j = 0; j < per_label.size(); ++j)
    h.per_label[static_cast<int>(j + 1)] = {per_label[j].mu_prior, per_label[j].sigma2_prior};
  return h;
}

DeltaPriorState update_delta_hyperparams(const DeltaPriorState& prior, const DeltaSufficientStats& stats) {
  prior.validate();
  if (stats.per_label.size() != prior.per_label.size())
    throw ShapeError("displacement stats and prior have different label counts");
  DeltaPriorState post = prior;
  for (std::size_t j = 0; j < prior.per_label.size(); ++j) {
    const auto& s = stats.per_label[j];
    if (s.empty()) continue;
    const auto& p = prior.per_label[j];
    auto& q = post.per_label[j];
    q.n_prior = p.n_prior + s.nu_hat;
    q.mu_prior = (p.n_prior * p.mu_prior + s.nu_hat * s.m_hat) / q.n_prior;
    // Between-batch term about the prior mean, so successive updates pool exactly.
    const double diff = s.m_hat - p.mu_prior;
    q.sigma2_prior =
        (p.n_prior * p.sigma2_prior + s.nu_hat * s.s2_hat + p.n_prior * s.nu_hat / q.n_prior * diff * diff) /
        q.n_prior;
  }
  return post;
}

DeltaSufficientStats add_distance_offset(DeltaSufficientStats stats, const std::vector<double>& offset) {
  if (offset.size() != stats.per_label.size()) throw ShapeError("need one offset per label");
  for (std::size_t j = 0; j < offset.size(); ++j)
    if (!stats.per_label[j].empty()) stats.per_label[j].m_hat += offset[j];
  return stats;
}

}  // namespace xfield
