#pragma once

#include <span>
#include <vector>

namespace bifid::campaign {

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;   // sum of ranks of positive differences
  double w_minus = 0.0;  // sum of ranks of negative differences
  int n = 0;             // nonzero differences
};

/// Paired two-sided Wilcoxon signed-rank test on a - b. Zero differences are
/// dropped and tied magnitudes share average ranks. Auto uses the exact null
/// distribution for n <= 25 and the normal approximation (tie and continuity
/// corrected) above. All differences zero gives p = 1. Throws ArgumentError on
/// a length mismatch.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

struct Summary {
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
/// Throws ArgumentError on an empty input.
Summary summarize(std::span<const double> values);

}  // namespace bifid::campaign
