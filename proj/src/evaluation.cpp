#include "brdf/evaluation.hpp"

#include <numeric>

#include "brdf/error.hpp"

namespace brdf {

double mae(const DensityFn& estimator, const DensityFn& truth, const Matrix& test_points) {
    std::vector<double> est(test_points.rows());
    std::vector<double> ref(test_points.rows());
    for (std::size_t j = 0; j < test_points.rows(); ++j) {
        est[j] = estimator(test_points.row(j));
        ref[j] = truth(test_points.row(j));
    }
    return mae_of_values(est, ref);
}

double anll(const DensityFn& estimator, const Matrix& test_points) {
    std::vector<double> est(test_points.rows());
    for (std::size_t j = 0; j < test_points.rows(); ++j) est[j] = estimator(test_points.row(j));
    return anll_of_values(est);
}

std::pair<std::size_t, std::size_t> fold_range(std::size_t rows, std::size_t folds, std::size_t fold) {
    return {fold * rows / folds, (fold + 1) * rows / folds};
}

std::vector<double> kfold_scores(const Matrix& data, std::size_t folds,
                                 const std::optional<PreprocessOptions>& preprocess, const FoldScorer& scorer,
                                 std::vector<std::optional<PreprocessState>>* states) {
    if (folds < 2) throw ConfigError("k-fold evaluation needs at least two folds");
    if (data.rows() < folds) throw ConfigError("need at least as many rows as folds");

    std::vector<double> scores;
    for (std::size_t f = 0; f < folds; ++f) {
        auto [begin, end] = fold_range(data.rows(), folds, f);
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r = 0; r < data.rows(); ++r) (r >= begin && r < end ? test_rows : train_rows).push_back(r);

        std::optional<PreprocessState> state;
        Matrix train = data.select_rows(train_rows);
        Matrix test = data.select_rows(test_rows);
        if (preprocess) {
            state = fit_preprocess(data, train_rows, *preprocess);
            train = apply_preprocess(*state, train);
            test = apply_preprocess(*state, test);
        }
        scores.push_back(anll_of_values(scorer(train, test)));
        if (states) states->push_back(std::move(state));
    }
    return scores;
}

KfoldResult kfold_anll(const Matrix& data, const ForestConfig& config, std::size_t folds,
                       const KfoldOptions& options) {
    KfoldResult result;
    std::vector<Forest> forests;
    std::vector<std::optional<PreprocessState>> states;
    result.per_fold = kfold_scores(
        data, folds, options.preprocess,
        [&](const Matrix& train, const Matrix& test) {
            Forest forest = fit_forest(train, config, options.workers);
            auto values = forest.eval_batch(test);
            if (options.keep_models) forests.push_back(std::move(forest));
            return values;
        },
        &states);
    if (options.keep_models) {
        for (std::size_t f = 0; f < forests.size(); ++f) {
            result.models.push_back(FoldModel{std::move(states[f]), std::move(forests[f])});
        }
    }
    result.mean = std::accumulate(result.per_fold.begin(), result.per_fold.end(), 0.0) /
                  static_cast<double>(result.per_fold.size());
    return result;
}

SplitSelection select_splits(const Matrix& data, const ForestConfig& config, std::span<const std::size_t> grid,
                             std::size_t folds, int workers) {
    if (grid.empty()) throw ConfigError("split grid is empty");
    SplitSelection sel;
    sel.grid.assign(grid.begin(), grid.end());
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        ForestConfig c = config;
        c.splits = grid[g];
        KfoldOptions opts;
        opts.workers = workers;
        sel.scores.push_back(kfold_anll(data, c, folds, opts).mean);
        if (sel.scores[g] < sel.scores[best]) best = g;
    }
    sel.splits = grid[best];
    return sel;
}

}  // namespace brdf
