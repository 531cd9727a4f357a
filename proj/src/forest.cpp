#include "brdf/forest.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "brdf/error.hpp"
#include "brdf/metrics.hpp"

namespace brdf {

std::string to_string(SplitMode mode) {
    switch (mode) {
        case SplitMode::purely_random: return "pure";
        case SplitMode::adaptive_axis: return "axis";
        case SplitMode::adaptive_oblique: return "oblique";
    }
    return "axis";
}

SplitMode split_mode_from_string(const std::string& name) {
    if (name == "pure") return SplitMode::purely_random;
    if (name == "axis") return SplitMode::adaptive_axis;
    if (name == "oblique") return SplitMode::adaptive_oblique;
    throw ConfigError("unknown split mode '" + name + "' (expected pure, axis or oblique)");
}

void ForestConfig::validate() const {
    if (trees < 1) throw ConfigError("tree count m must be >= 1");
    if (candidates < 1) throw ConfigError("candidate count k must be >= 1");
    if (cv_folds < 2) throw ConfigError("cv folds must be >= 2");
    if (probes < 1) throw ConfigError("probe count t must be >= 1");
    if (mc_points < 1) throw ConfigError("mc points must be >= 1");
    if (!(margin >= 0.0)) throw ConfigError("margin must be nonnegative");
}

std::vector<std::uint32_t> assign_folds(std::size_t rows, std::size_t folds, Rng& rng) {
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::uint32_t> fold_of_row(rows);
    for (std::size_t pos = 0; pos < rows; ++pos) fold_of_row[order[pos]] = static_cast<std::uint32_t>(pos % folds);
    return fold_of_row;
}

Partition draw_candidate(const Matrix& data, const BoundingBox& box, const ForestConfig& config,
                         std::size_t tree_index, std::size_t candidate) {
    Rng rng = make_rng(config.seed, {stream::tree, tree_index, stream::candidate, candidate});
    switch (config.mode) {
        case SplitMode::purely_random: return purely_random_partition(box, config.splits, rng);
        case SplitMode::adaptive_axis: return adaptive_partition(box, config.splits, config.probes, data, rng);
        case SplitMode::adaptive_oblique:
            return adaptive_oblique_partition(box, config.splits, config.probes, data, rng);
    }
    throw std::logic_error("unhandled split mode");
}

namespace {

// Validation ANLL of every fold for one fixed partition. Equivalent to
// fit_tree on the fold's training rows followed by ANLL on its held-out rows.
std::vector<double> fold_scores(std::span<const LeafId> leaf_of_row, std::span<const std::uint32_t> fold_of_row,
                                std::size_t folds, const VolumeTable& volumes) {
    const std::size_t leaves = volumes.volumes.size();
    const std::size_t n = leaf_of_row.size();
    kernels::LeafCounts total = kernels::tally(leaf_of_row, leaves);

    std::vector<std::vector<std::uint64_t>> held(folds, std::vector<std::uint64_t>(leaves, 0));
    std::vector<std::uint64_t> held_rows(folds, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto f = fold_of_row[r];
        ++held_rows[f];
        if (leaf_of_row[r] != kOutside) ++held[f][static_cast<std::size_t>(leaf_of_row[r])];
    }

    std::vector<double> scores(folds);
    std::vector<double> values;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::uint64_t n_train = n - held_rows[f];
        values.clear();
        for (std::size_t r = 0; r < n; ++r) {
            if (fold_of_row[r] != f) continue;
            const LeafId id = leaf_of_row[r];
            if (id == kOutside) {
                values.push_back(0.0);
                continue;
            }
            const auto j = static_cast<std::size_t>(id);
            values.push_back(cell_density(total.counts[j] - held[f][j], n_train, volumes.volumes[j]));
        }
        scores[f] = anll_of_values(values);
    }
    return scores;
}

}  // namespace

BestScoredTree best_scored_tree(const Matrix& data, const BoundingBox& box, const ForestConfig& config,
                                std::size_t tree_index) {
    config.validate();
    if (data.rows() < config.cv_folds) throw ConfigError("need at least as many rows as cv folds");
    if (data.cols() != box.dim()) throw ConfigError("data dimension does not match bounding box");

    Rng fold_rng = make_rng(config.seed, {stream::tree, tree_index, stream::folds});
    SelectionRecord record;
    record.fold_of_row = assign_folds(data.rows(), config.cv_folds, fold_rng);

    std::optional<Partition> best_partition;
    std::optional<VolumeTable> best_volumes;
    std::vector<LeafId> leaf_of_row(data.rows());
    for (std::size_t c = 0; c < config.candidates; ++c) {
        Partition part = draw_candidate(data, box, config, tree_index, c);
        Rng volume_rng = make_rng(config.seed, {stream::tree, tree_index, stream::volume, c});
        VolumeTable volumes = volumes_for(part, config.mc_points, volume_rng);

        kernels::locate_rows_serial(part, data, leaf_of_row);
        std::vector<double> scores = fold_scores(leaf_of_row, record.fold_of_row, config.cv_folds, volumes);
        double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());

        record.fold_scores.push_back(std::move(scores));
        record.mean_scores.push_back(mean);
        if (c == 0 || mean < record.mean_scores[record.chosen]) {
            record.chosen = c;
            best_partition.emplace(std::move(part));
            best_volumes.emplace(std::move(volumes));
        }
    }

    DensityTree tree = fit_tree(std::move(*best_partition), std::move(*best_volumes), data);
    return BestScoredTree{std::move(tree), std::move(record)};
}

Forest::Forest(ForestConfig config, BoundingBox box, std::vector<DensityTree> trees,
               std::vector<SelectionRecord> records)
    : config_(std::move(config)), box_(std::move(box)), trees_(std::move(trees)), records_(std::move(records)) {
    if (trees_.empty()) throw std::invalid_argument("forest needs at least one tree");
    if (!records_.empty() && records_.size() != trees_.size()) {
        throw std::invalid_argument("one selection record per tree expected");
    }
}

double Forest::eval(std::span<const double> x) const noexcept {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.eval(x);
    return sum / static_cast<double>(trees_.size());
}

std::vector<double> Forest::eval_batch(const Matrix& points, kernels::Exec exec) const {
    std::vector<double> out(points.rows());
    const auto n = static_cast<std::int64_t>(points.rows());
    if (exec == kernels::Exec::serial) {
        for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = eval(points.row(static_cast<std::size_t>(i)));
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = eval(points.row(static_cast<std::size_t>(i)));
    }
    return out;
}

double Forest::integrate() const noexcept {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.integrate();
    return sum / static_cast<double>(trees_.size());
}

Forest fit_forest(const Matrix& data, const ForestConfig& config, int workers) {
    config.validate();
    if (data.rows() < config.cv_folds) throw ConfigError("need at least as many rows as cv folds");
    BoundingBox box = bounding_box_of(data, config.margin);

    const auto m = static_cast<std::int64_t>(config.trees);
    std::vector<std::optional<BestScoredTree>> built(config.trees);
    std::exception_ptr failure;
    const int threads = workers > 0 ? workers : kernels::default_workers();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < m; ++i) {
        try {
            built[static_cast<std::size_t>(i)].emplace(best_scored_tree(data, box, config, static_cast<std::size_t>(i)));
        } catch (...) {
#pragma omp critical(brdf_forest_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<DensityTree> trees;
    std::vector<SelectionRecord> records;
    trees.reserve(config.trees);
    records.reserve(config.trees);
    for (auto& b : built) {
        trees.push_back(std::move(b->tree));
        records.push_back(std::move(b->record));
    }
    return Forest(config, std::move(box), std::move(trees), std::move(records));
}

}  // namespace brdf
