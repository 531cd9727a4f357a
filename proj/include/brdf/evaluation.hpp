#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brdf/datasets.hpp"
#include "brdf/forest.hpp"
#include "brdf/matrix.hpp"
#include "brdf/metrics.hpp"

namespace brdf {

using DensityFn = std::function<double(std::span<const double>)>;

double mae(const DensityFn& estimator, const DensityFn& truth, const Matrix& test_points);
double anll(const DensityFn& estimator, const Matrix& test_points);

struct EvalReport {
    std::string metric;  // "mae" | "anll"
    double value = 0.0;
    std::size_t n_test = 0;
    double epsilon_used = 0.0;  // anll only
    std::string fingerprint;
};

struct KfoldOptions {
    std::optional<PreprocessOptions> preprocess;  // refit on each fold's training rows
    int workers = 0;
    bool keep_models = false;
};

struct FoldModel {
    std::optional<PreprocessState> preprocess;
    Forest forest;
};

struct KfoldResult {
    std::vector<double> per_fold;
    double mean = 0.0;
    std::vector<FoldModel> models;  // filled when keep_models
};

/// Contiguous folds in row order (shuffle beforehand if the rows are sorted).
/// Row range of fold f: [f*n/folds, (f+1)*n/folds).
std::pair<std::size_t, std::size_t> fold_range(std::size_t rows, std::size_t folds, std::size_t fold);

/// Fit-and-score callback: returns densities of `test` under a model fit on `train`.
using FoldScorer = std::function<std::vector<double>(const Matrix& train, const Matrix& test)>;

/// Contiguous-fold ANLL for any estimator, with optional per-fold preprocessing.
std::vector<double> kfold_scores(const Matrix& data, std::size_t folds,
                                 const std::optional<PreprocessOptions>& preprocess, const FoldScorer& scorer,
                                 std::vector<std::optional<PreprocessState>>* states = nullptr);

/// Each fold: fit a forest with `config` on the complement, ANLL on the fold.
KfoldResult kfold_anll(const Matrix& data, const ForestConfig& config, std::size_t folds,
                       const KfoldOptions& options = {});

struct SplitSelection {
    std::size_t splits = 0;
    std::vector<std::size_t> grid;
    std::vector<double> scores;  // k-fold ANLL per grid value
};

/// Picks the split count from `grid` with the lowest k-fold ANLL on `data`
/// (ties to the earlier grid entry).
SplitSelection select_splits(const Matrix& data, const ForestConfig& config, std::span<const std::size_t> grid,
                             std::size_t folds, int workers = 0);

}  // namespace brdf
