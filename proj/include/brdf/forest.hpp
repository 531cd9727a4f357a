#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brdf/density_tree.hpp"
#include "brdf/kernels.hpp"
#include "brdf/partition.hpp"

namespace brdf {

enum class SplitMode { purely_random, adaptive_axis, adaptive_oblique };

std::string to_string(SplitMode mode);
SplitMode split_mode_from_string(const std::string& name);  // pure | axis | oblique

struct ForestConfig {
    std::size_t trees = 10;       // m
    std::size_t candidates = 5;   // k
    std::size_t splits = 32;      // p
    std::size_t probes = 30;      // t
    std::size_t cv_folds = 10;
    std::size_t mc_points = kDefaultMcPoints;
    SplitMode mode = SplitMode::adaptive_axis;
    std::uint64_t seed = 0;
    double margin = 0.0;

    void validate() const;
    bool operator==(const ForestConfig&) const = default;
};

/// Audit trail of one best-scored selection.
struct SelectionRecord {
    std::vector<std::vector<double>> fold_scores;  // [candidate][fold] validation ANLL
    std::vector<double> mean_scores;                // [candidate]
    std::size_t chosen = 0;
    std::vector<std::uint32_t> fold_of_row;         // shared by every candidate
};

struct BestScoredTree {
    DensityTree tree;
    SelectionRecord record;
};

/// Draws `config.candidates` partitions, scores each by cross-validated ANLL on
/// a shared fold assignment, keeps the argmin (ties to the lower index) and
/// refits its cell counts on every row.
BestScoredTree best_scored_tree(const Matrix& data, const BoundingBox& box, const ForestConfig& config,
                                std::size_t tree_index);

/// One candidate partition for tree `tree_index`, drawn from its own stream.
Partition draw_candidate(const Matrix& data, const BoundingBox& box, const ForestConfig& config,
                         std::size_t tree_index, std::size_t candidate);

/// Fold id per row, shuffled once per tree.
std::vector<std::uint32_t> assign_folds(std::size_t rows, std::size_t folds, Rng& rng);

class Forest {
public:
    Forest(ForestConfig config, BoundingBox box, std::vector<DensityTree> trees,
           std::vector<SelectionRecord> records);

    const ForestConfig& config() const noexcept { return config_; }
    const BoundingBox& bounding_box() const noexcept { return box_; }
    const std::vector<DensityTree>& trees() const noexcept { return trees_; }
    const std::vector<SelectionRecord>& records() const noexcept { return records_; }
    std::size_t dim() const noexcept { return box_.dim(); }

    double eval(std::span<const double> x) const noexcept;
    std::vector<double> eval_batch(const Matrix& points, kernels::Exec exec = kernels::Exec::parallel) const;
    double integrate() const noexcept;

private:
    ForestConfig config_;
    BoundingBox box_;
    std::vector<DensityTree> trees_;
    std::vector<SelectionRecord> records_;
};

/// Builds `config.trees` best-scored trees, one independent sub-stream per
/// tree. `workers` > 0 fixes the OpenMP thread count; the result does not
/// depend on it.
Forest fit_forest(const Matrix& data, const ForestConfig& config, int workers = 0);

}  // namespace brdf
