#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bifid::surface {

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation (Pearson coefficient of the rank vectors).
/// Returns nullopt ("undefined") when either input has zero rank variance.
/// Throws ArgumentError on a length mismatch or fewer than two values.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// Eight correlation bins of width 0.25 over [-1, 1]. A coefficient exactly on
/// a boundary belongs to the lower bin; -1 belongs to the first bin.
inline constexpr int kCorrelationBins = 8;
inline constexpr double kBinWidth = 0.25;

/// Throws ArgumentError for non-finite values or values outside [-1, 1].
int correlation_bin(double r_s);
double bin_lower(int bin);
double bin_upper(int bin);
/// e.g. "[0.75,1.00]"
std::string bin_label(int bin);

/// Groups item indices by the bin of their coefficient.
std::array<std::vector<std::size_t>, kCorrelationBins> bin_pairs(std::span<const double> r_s);

}  // namespace bifid::surface
