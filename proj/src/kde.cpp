#include "brdf/kde.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace brdf {

double scott_factor(std::size_t n, std::size_t d) {
    return std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
}

KdeModel::KdeModel(Matrix data, std::optional<double> factor_override) : data_(std::move(data)) {
    const std::size_t n = data_.rows();
    const std::size_t d = data_.cols();
    if (n < 2) throw std::invalid_argument("KDE needs at least two training rows");
    if (d < 1) throw std::invalid_argument("KDE needs at least one column");
    factor_ = factor_override ? *factor_override : scott_factor(n, d);
    if (!(factor_ > 0.0) || !std::isfinite(factor_)) throw std::invalid_argument("KDE factor must be positive");

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
        data_.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double max_ev = eig.eigenvalues().maxCoeff();
    const double min_ev = eig.eigenvalues().minCoeff();
    if (!(max_ev > 0.0) || !(min_ev > 1e-12 * max_ev)) {
        diagonal_fallback_ = true;
        const double floor = std::max(1e-12, 1e-12 * cov.diagonal().maxCoeff());
        Eigen::VectorXd diag = cov.diagonal().cwiseMax(floor);
        cov = diag.asDiagonal();
    }
    Eigen::MatrixXd h = factor_ * factor_ * cov;
    std::vector<double> flat(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    set_bandwidth(flat);
}

KdeModel KdeModel::with_bandwidth(Matrix data, const std::vector<double>& bandwidth) {
    if (data.rows() < 1 || data.cols() < 1) throw std::invalid_argument("KDE needs at least one training row");
    KdeModel m;
    m.data_ = std::move(data);
    m.factor_ = 1.0;
    m.set_bandwidth(bandwidth);
    return m;
}

void KdeModel::set_bandwidth(const std::vector<double>& flat) {
    const std::size_t d = data_.cols();
    if (flat.size() != d * d) throw std::invalid_argument("bandwidth matrix must be d x d");
    Eigen::MatrixXd h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * d + j];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("KDE bandwidth matrix is not positive definite");
    Eigen::MatrixXd l = llt.matrixL();

    bandwidth_ = flat;
    chol_.assign(d * d, 0.0);
    double log_det = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        log_det += 2.0 * std::log(l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
        for (std::size_t j = 0; j <= i; ++j) {
            chol_[i * d + j] = l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    log_norm_ = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
}

double KdeModel::eval(std::span<const double> x) const noexcept {
    const std::size_t n = data_.rows();
    const std::size_t d = data_.cols();
    // d is small; a stack buffer covers the usual case.
    double small[32];
    std::vector<double> big;
    double* z = small;
    if (d > 32) {
        big.resize(d);
        z = big.data();
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        auto xi = data_.row(r);
        double q = 0.0;
        // forward substitution L z = x - x_i
        for (std::size_t i = 0; i < d; ++i) {
            double v = x[i] - xi[i];
            for (std::size_t j = 0; j < i; ++j) v -= chol_[i * d + j] * z[j];
            z[i] = v / chol_[i * d + i];
            q += z[i] * z[i];
        }
        sum += std::exp(-0.5 * q);
    }
    return std::exp(log_norm_) * sum / static_cast<double>(n);
}

std::vector<double> KdeModel::eval_batch(const Matrix& points, kernels::Exec exec) const {
    std::vector<double> out(points.rows());
    const auto m = static_cast<std::int64_t>(points.rows());
    if (exec == kernels::Exec::serial) {
        for (std::int64_t i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = eval(points.row(static_cast<std::size_t>(i)));
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = eval(points.row(static_cast<std::size_t>(i)));
    }
    return out;
}

KdeModel fit_kde(const Matrix& data, std::optional<double> factor_override) {
    return KdeModel(data, factor_override);
}

}  // namespace brdf
