#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brdf/matrix.hpp"
#include "brdf/rng.hpp"

namespace brdf {

enum class SyntheticFamily { type1, type2 };

std::string to_string(SyntheticFamily family);
SyntheticFamily synthetic_family_from_string(const std::string& name);

/// Product distribution on [0,1]^d with i.i.d. margins:
///   type1: 0.3 U(0.7, 1) + 0.7 U(0, 0.4)
///   type2: 0.3 Beta(11, 20) + 0.7 U(0.5, 1)
struct SyntheticSpec {
    SyntheticFamily family = SyntheticFamily::type1;
    std::size_t dim = 1;

    bool operator==(const SyntheticSpec&) const = default;
};

Matrix sample_synthetic(const SyntheticSpec& spec, std::size_t n, Rng& rng);
double margin_density(SyntheticFamily family, double x);
double true_density(const SyntheticSpec& spec, std::span<const double> x);
double beta_pdf(double x, double a, double b);

struct Dataset {
    Matrix data;
    std::vector<std::string> names;  // empty without a header
};

struct CsvOptions {
    bool header = false;
    char delimiter = ',';
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_csv(const std::filesystem::path& path, const Matrix& data, const std::vector<std::string>& names = {});

/// (n, d) of the public real-data benchmarks, keyed by lower-case name.
std::optional<std::pair<std::size_t, std::size_t>> expected_shape(const std::string& dataset_name);

/// Throws ConfigError when a known dataset does not have its documented
/// shape. `cols` is the width after preprocessing.
void validate_known_shape(const std::string& dataset_name, std::size_t rows, std::size_t cols);

struct PreprocessOptions {
    std::size_t discrete_threshold = 10;  // <= this many unique training values: discrete
    double corr_threshold = 0.98;         // |pearson| above this: drop the later column
};

struct PreprocessState {
    std::size_t input_columns = 0;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped_discrete;
    std::vector<std::size_t> dropped_correlated;
    std::vector<std::size_t> dropped_constant;
    std::vector<double> means;  // per kept column
    std::vector<double> stds;   // per kept column, population convention

    bool operator==(const PreprocessState&) const = default;
};

/// Statistics come from `training_rows` only.
PreprocessState fit_preprocess(const Matrix& data, std::span<const std::size_t> training_rows,
                               const PreprocessOptions& options = {});
PreprocessState fit_preprocess(const Matrix& data, const PreprocessOptions& options = {});

Matrix apply_preprocess(const PreprocessState& state, const Matrix& data);

}  // namespace brdf
