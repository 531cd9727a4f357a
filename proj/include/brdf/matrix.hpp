#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace brdf {

/// Dense row-major sample matrix: one observation per row.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) noexcept {
        return {values_.data() + i * cols_, cols_};
    }

    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

    std::span<const double> values() const noexcept { return values_; }

    void append_row(std::span<const double> row);

    /// Rows selected by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> indices) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

}  // namespace brdf
