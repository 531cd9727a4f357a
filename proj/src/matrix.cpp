#include "brdf/matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace brdf {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    for (const auto& r : rows) {
        append_row(std::span<const double>(r.begin(), r.size()));
    }
}

void Matrix::append_row(std::span<const double> row) {
    if (rows_ == 0 && cols_ == 0) {
        cols_ = row.size();
    } else if (row.size() != cols_) {
        throw std::invalid_argument("row width mismatch");
    }
    values_.insert(values_.end(), row.begin(), row.end());
    ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = row(indices[i]);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

}  // namespace brdf
