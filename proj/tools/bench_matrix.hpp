#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "brdf/datasets.hpp"
#include "brdf/forest.hpp"

namespace brdf::bench {

/// One (dataset, method, repeat) cell of a benchmark matrix. Everything a
/// replay needs is in here; to_json(cell) is its fingerprinted config.
struct Cell {
    std::string dataset;  // "type1:<d>", "type2:<d>" or "csv:<path>"
    std::string method;   // brdf-ap | brdf-ob | brdf-pr | kde
    std::size_t n = 2000;
    std::size_t test_n = 10000;
    bool test_grid = false;  // synthetic only: midpoint grid of about test_n points on [0,1]^d instead of fresh draws
    std::size_t repeat = 0;
    std::uint64_t seed = 0;  // cell seed (shared by every method of the same dataset/repeat)
    ForestConfig forest;
    std::vector<std::size_t> split_grid;  // more than one entry: tuned by k-fold ANLL
    std::size_t tune_folds = 5;
    std::size_t kfold = 10;               // csv datasets only
    std::optional<PreprocessOptions> preprocess;  // csv datasets only
    CsvOptions csv;
};

struct CellResult {
    std::vector<std::pair<std::string, double>> metrics;  // (metric, value)
    double train_time_s = 0.0;
    double tune_time_s = 0.0;
    std::size_t splits_selected = 0;
    std::size_t d = 0;
    std::size_t n = 0;
};

nlohmann::json to_json(const Cell& cell);
Cell cell_from_json(const nlohmann::json& j);

/// Seed of a (dataset, repeat) cell derived from the matrix seed.
std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& dataset, std::size_t repeat);

CellResult run_cell(const Cell& cell, int workers);

struct BenchMatrix {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::string> metrics;  // requested; csv datasets always report anll
    std::size_t repeats = 20;
    std::uint64_t seed = 0;
    Cell prototype;  // n, test_n, forest, grid, folds, preprocess
};

/// Runs every cell in (dataset, method, repeat) order. Writes one JSON line per
/// cell metric plus one summary line per (dataset, method, metric) to
/// `jsonl`, and an aligned text table to `summary`. Failed cells are
/// recorded and the matrix continues. Returns the number of failed cells.
std::size_t run_matrix(const BenchMatrix& matrix, int workers, std::ostream& jsonl, std::ostream& summary);

}  // namespace brdf::bench
