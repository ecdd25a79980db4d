#include "xfield/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xfield/error.hpp"

namespace xfield {

namespace {

void same_shape(const LabelField& a, const LabelField& b) {
  if (a.size() != b.size()) throw ShapeError("label fields differ in size");
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s;
    while (e + 1 < order.size() && v[order[e + 1]] == v[order[s]]) ++e;
    const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t t = s; t <= e; ++t) r[order[t]] = avg;
    s = e + 1;
  }
  return r;
}

}  // namespace

double dice(const LabelField& predicted, const LabelField& truth, int j) {
  same_shape(predicted, truth);
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted.labels[i] == j, t = truth.labels[i] == j;
    a += p;
    b += t;
    both += p && t;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

double misclassification(const LabelField& predicted, const LabelField& truth) {
  same_shape(predicted, truth);
  if (truth.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted.labels[i] != truth.labels[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double ScoreReport::accuracy_from_confusion() const {
  std::uint64_t total = 0, diag = 0;
  for (int t = 0; t < k; ++t)
    for (int p = 0; p < k; ++p) {
      total += confusion[static_cast<std::size_t>(t * k + p)];
      if (t == p) diag += confusion[static_cast<std::size_t>(t * k + p)];
    }
  return total ? static_cast<double>(diag) / static_cast<double>(total) : 1.0;
}

ScoreReport score(const LabelField& predicted, const LabelField& truth) {
  same_shape(predicted, truth);
  ScoreReport r;
  r.k = std::max(predicted.k, truth.k);
  r.confusion.assign(static_cast<std::size_t>(r.k * r.k), 0);
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++r.confusion[static_cast<std::size_t>((truth.labels[i] - 1) * r.k + (predicted.labels[i] - 1))];
  for (int j = 1; j <= r.k; ++j) r.dice.push_back(dice(predicted, truth, j));
  r.misclassification = misclassification(predicted, truth);
  return r;
}

std::pair<double, double> hpd_interval(std::span<const double> samples, double level) {
  if (samples.empty()) throw DataError("HPD interval of an empty sample");
  if (samples.size() < 2) throw DataError("HPD interval needs at least two samples");
  if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("HPD level must lie in (0, 1)");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9)));
  std::size_t best = 0;
  for (std::size_t a = 1; a + m - 1 < n; ++a)
    if (s[a + m - 1] - s[a] < s[best + m - 1] - s[best]) best = a;
  return {s[best], s[best + m - 1]};
}

PairedSummary paired_difference_summary(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("paired lists differ in length");
  if (a.empty()) throw DataError("paired difference of empty lists");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = (a[i] - b[i]) - mean;
    ss += r * r;
  }
  return {mean, a.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("spearman needs two equal-length lists of size >= 2");
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace xfield
