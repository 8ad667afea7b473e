#include "bifid/campaign/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bifid/errors.hpp"
#include "bifid/surface/rank_stats.hpp"

namespace bifid::campaign {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(W+ <= w) and P(W+ >= w) under the null, where every rank carries a random
// sign. Ranks are doubled so tied (half-integer) ranks stay integral.
std::pair<double, double> exact_tails(const std::vector<double>& ranks, double w_plus) {
  std::vector<long> doubled;
  long total = 0;
  for (double r : ranks) {
    doubled.push_back(std::lround(2.0 * r));
    total += doubled.back();
  }
  std::vector<double> dist(static_cast<std::size_t>(total + 1), 0.0);
  dist[0] = 1.0;
  long reach = 0;
  for (long r : doubled) {
    for (long s = reach; s >= 0; --s) {
      if (dist[static_cast<std::size_t>(s)] != 0.0) dist[static_cast<std::size_t>(s + r)] += dist[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  const double count = std::pow(2.0, static_cast<double>(ranks.size()));
  const long w = std::lround(2.0 * w_plus);
  double lower = 0.0;
  double upper = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= w) lower += dist[static_cast<std::size_t>(s)];
    if (s >= w) upper += dist[static_cast<std::size_t>(s)];
  }
  return {lower / count, upper / count};
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) throw ArgumentError("wilcoxon: samples must have equal length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw ArgumentError("wilcoxon: non-finite difference");
    if (d != 0.0) diff.push_back(d);
  }
  WilcoxonResult res;
  res.n = static_cast<int>(diff.size());
  if (diff.empty()) return res;

  std::vector<double> mag(diff.size());
  std::transform(diff.begin(), diff.end(), mag.begin(), [](double d) { return std::abs(d); });
  const auto ranks = surface::average_ranks(mag);
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];

  const bool exact = method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && res.n <= 25);
  if (exact) {
    const auto [lower, upper] = exact_tails(ranks, res.w_plus);
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    return res;
  }
  const double n = res.n;
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  // Tie correction: subtract sum(t^3 - t) / 48 over groups of tied magnitudes.
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (var <= 0.0) return res;
  const double dev = std::max(0.0, std::abs(res.w_plus - mean) - 0.5);
  res.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(dev / std::sqrt(var))));
  return res;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("summarize: empty input");
  std::vector<double> v(values.begin(), values.end());
  Summary s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

}  // namespace bifid::campaign
