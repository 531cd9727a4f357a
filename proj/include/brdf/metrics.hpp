#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace brdf {

/// Guard added to every density before taking logs: the gap between 1 and
/// the next representable double.
inline constexpr double kAnllEpsilon = std::numeric_limits<double>::epsilon();

/// -(1/M) * sum log(f_j + eps). Finite for any nonnegative input.
inline double anll_of_values(std::span<const double> densities) {
    if (densities.empty()) throw std::invalid_argument("ANLL needs at least one test point");
    double sum = 0.0;
    for (double f : densities) sum += std::log(f + kAnllEpsilon);
    return -sum / static_cast<double>(densities.size());
}

/// (1/M) * sum |estimate_j - truth_j|.
inline double mae_of_values(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.empty()) throw std::invalid_argument("MAE needs at least one test point");
    if (estimate.size() != truth.size()) throw std::invalid_argument("MAE inputs differ in length");
    double sum = 0.0;
    for (std::size_t j = 0; j < estimate.size(); ++j) {
        if (!std::isfinite(estimate[j])) throw std::domain_error("non-finite density");
        sum += std::abs(estimate[j] - truth[j]);
    }
    return sum / static_cast<double>(estimate.size());
}

}  // namespace brdf
