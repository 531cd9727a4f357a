#pragma once

#include <optional>
#include <span>
#include <vector>

#include "brdf/kernels.hpp"
#include "brdf/matrix.hpp"

namespace brdf {

/// Gaussian kernel density estimate with bandwidth matrix H = factor^2 * cov,
/// cov the unbiased sample covariance and factor Scott's n^(-1/(d+4)) unless
/// overridden.
class KdeModel {
public:
    KdeModel(Matrix data, std::optional<double> factor_override = std::nullopt);

    /// Fixed row-major d x d bandwidth matrix; factor() reports 1. Needs n >= 1.
    static KdeModel with_bandwidth(Matrix data, const std::vector<double>& bandwidth);

    const Matrix& data() const noexcept { return data_; }
    std::size_t dim() const noexcept { return data_.cols(); }
    double factor() const noexcept { return factor_; }
    bool diagonal_fallback() const noexcept { return diagonal_fallback_; }
    /// Row-major d x d bandwidth matrix H.
    const std::vector<double>& bandwidth() const noexcept { return bandwidth_; }

    double eval(std::span<const double> x) const noexcept;
    std::vector<double> eval_batch(const Matrix& points, kernels::Exec exec = kernels::Exec::parallel) const;

private:
    KdeModel() = default;
    void set_bandwidth(const std::vector<double>& h);

    Matrix data_;
    double factor_ = 1.0;
    bool diagonal_fallback_ = false;
    std::vector<double> bandwidth_;
    std::vector<double> chol_;  // row-major lower Cholesky factor of H
    double log_norm_ = 0.0;     // -log((2 pi)^(d/2) sqrt(det H))
};

double scott_factor(std::size_t n, std::size_t d);

KdeModel fit_kde(const Matrix& data, std::optional<double> factor_override = std::nullopt);

}  // namespace brdf
