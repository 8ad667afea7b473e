#include "bifid/surface/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "bifid/errors.hpp"

namespace bifid::surface {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("spearman: length mismatch");
  if (a.size() < 2) throw ArgumentError("spearman: need at least two values");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw ArgumentError("spearman: non-finite value");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return std::nullopt;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

int correlation_bin(double r_s) {
  if (!std::isfinite(r_s) || r_s < -1.0 || r_s > 1.0) {
    throw ArgumentError("correlation_bin: coefficient must lie in [-1, 1]");
  }
  const int bin = static_cast<int>(std::ceil((r_s + 1.0) / kBinWidth)) - 1;
  return std::clamp(bin, 0, kCorrelationBins - 1);
}

double bin_lower(int bin) { return -1.0 + kBinWidth * bin; }
double bin_upper(int bin) { return -1.0 + kBinWidth * (bin + 1); }

std::string bin_label(int bin) {
  if (bin < 0 || bin >= kCorrelationBins) throw ArgumentError("bin_label: bin out of range");
  char buf[32];
  std::snprintf(buf, sizeof buf, "[%.2f,%.2f]", bin_lower(bin), bin_upper(bin));
  return buf;
}

std::array<std::vector<std::size_t>, kCorrelationBins> bin_pairs(std::span<const double> r_s) {
  std::array<std::vector<std::size_t>, kCorrelationBins> bins;
  for (std::size_t i = 0; i < r_s.size(); ++i) bins[static_cast<std::size_t>(correlation_bin(r_s[i]))].push_back(i);
  return bins;
}

}  // namespace bifid::surface
