#include "brdf/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "brdf/error.hpp"

namespace brdf {

std::string to_string(SyntheticFamily family) { return family == SyntheticFamily::type1 ? "type1" : "type2"; }

SyntheticFamily synthetic_family_from_string(const std::string& name) {
    if (name == "type1") return SyntheticFamily::type1;
    if (name == "type2") return SyntheticFamily::type2;
    throw ConfigError("unknown synthetic family '" + name + "' (expected type1 or type2)");
}

double beta_pdf(double x, double a, double b) {
    if (x < 0.0 || x > 1.0) return 0.0;
    if ((x == 0.0 && a > 1.0) || (x == 1.0 && b > 1.0)) return 0.0;
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    return std::exp(log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
}

double margin_density(SyntheticFamily family, double x) {
    if (family == SyntheticFamily::type1) {
        double f = 0.0;
        if (x >= 0.7 && x <= 1.0) f += 0.3 / 0.3;
        if (x >= 0.0 && x <= 0.4) f += 0.7 / 0.4;
        return f;
    }
    double f = 0.3 * beta_pdf(x, 11.0, 20.0);
    if (x >= 0.5 && x <= 1.0) f += 0.7 / 0.5;
    return f;
}

double true_density(const SyntheticSpec& spec, std::span<const double> x) {
    double f = 1.0;
    for (std::size_t i = 0; i < spec.dim; ++i) f *= margin_density(spec.family, x[i]);
    return f;
}

namespace {

double sample_margin(SyntheticFamily family, Rng& rng) {
    const bool first = uniform01(rng) < 0.3;
    if (family == SyntheticFamily::type1) {
        return first ? uniform(rng, 0.7, 1.0) : uniform(rng, 0.0, 0.4);
    }
    if (!first) return uniform(rng, 0.5, 1.0);
    const double g1 = std::gamma_distribution<double>(11.0, 1.0)(rng);
    const double g2 = std::gamma_distribution<double>(20.0, 1.0)(rng);
    return g1 / (g1 + g2);
}

}  // namespace

Matrix sample_synthetic(const SyntheticSpec& spec, std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    if (spec.dim < 1) throw std::invalid_argument("dimension must be >= 1");
    Matrix out(n, spec.dim);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < spec.dim; ++i) out(r, i) = sample_margin(spec.family, rng);
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    std::size_t row_no = 0;
    std::size_t width = 0;
    std::vector<double> values;
    bool header_pending = options.header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, options.delimiter);
        if (header_pending) {
            for (auto f : fields) ds.names.push_back(unquote(f));
            width = fields.size();
            header_pending = false;
            continue;
        }
        ++row_no;
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            std::ostringstream msg;
            msg << path.string() << ": row " << row_no << " (line " << line_no << ") has " << fields.size()
                << " columns, expected " << width;
            throw IoError(msg.str());
        }
        values.assign(width, 0.0);
        for (std::size_t c = 0; c < width; ++c) {
            auto f = fields[c];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[c]);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(values[c])) {
                std::ostringstream msg;
                msg << path.string() << ": row " << row_no << " column " << (c + 1) << ": '" << f
                    << "' is not a finite number";
                throw IoError(msg.str());
            }
        }
        ds.data.append_row(values);
    }
    if (in.bad()) throw IoError("read error on '" + path.string() + "'");
    if (ds.data.rows() == 0) throw IoError("'" + path.string() + "' holds no data rows");
    return ds;
}

void write_csv(const std::filesystem::path& path, const Matrix& data, const std::vector<std::string>& names) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (!names.empty()) {
        for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
        out << '\n';
    }
    char buf[64];
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, data(r, c));
            if (c) out << ',';
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

std::optional<std::pair<std::size_t, std::size_t>> expected_shape(const std::string& dataset_name) {
    static const std::map<std::string, std::pair<std::size_t, std::size_t>> shapes = {
        {"parkinsons", {5875, 15}},
        {"ionosphere", {351, 32}},
        {"red_wine", {1599, 11}},
        {"white_wine", {4898, 11}},
    };
    auto it = shapes.find(dataset_name);
    if (it == shapes.end()) return std::nullopt;
    return it->second;
}

void validate_known_shape(const std::string& dataset_name, std::size_t rows, std::size_t cols) {
    auto shape = expected_shape(dataset_name);
    if (!shape) return;
    if (shape->first != rows || shape->second != cols) {
        std::ostringstream msg;
        msg << dataset_name << ": expected (" << shape->first << ", " << shape->second << ") after preprocessing, got ("
            << rows << ", " << cols << ")";
        throw ConfigError(msg.str());
    }
}

namespace {

double pearson(const Matrix& data, std::span<const std::size_t> rows, std::size_t a, std::size_t b) {
    double ma = 0.0, mb = 0.0;
    for (auto r : rows) {
        ma += data(r, a);
        mb += data(r, b);
    }
    ma /= static_cast<double>(rows.size());
    mb /= static_cast<double>(rows.size());
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (auto r : rows) {
        const double da = data(r, a) - ma;
        const double db = data(r, b) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

PreprocessState fit_preprocess(const Matrix& data, std::span<const std::size_t> training_rows,
                               const PreprocessOptions& options) {
    if (training_rows.size() < 2) throw std::invalid_argument("preprocessing needs at least two training rows");
    for (auto r : training_rows) {
        if (r >= data.rows()) throw std::out_of_range("training row index out of range");
    }
    PreprocessState st;
    st.input_columns = data.cols();

    std::vector<std::size_t> candidates;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        std::set<double> unique;
        for (auto r : training_rows) {
            unique.insert(data(r, c));
            if (unique.size() > options.discrete_threshold) break;
        }
        if (unique.size() <= options.discrete_threshold) {
            st.dropped_discrete.push_back(c);
        } else {
            candidates.push_back(c);
        }
    }

    // Ascending index order: a column is dropped when it correlates with an
    // earlier column that is still kept.
    std::vector<std::size_t> uncorrelated;
    for (auto c : candidates) {
        bool drop = false;
        for (auto k : uncorrelated) {
            if (std::abs(pearson(data, training_rows, k, c)) > options.corr_threshold) {
                drop = true;
                break;
            }
        }
        (drop ? st.dropped_correlated : uncorrelated).push_back(c);
    }

    const double n = static_cast<double>(training_rows.size());
    for (auto c : uncorrelated) {
        double mean = 0.0;
        for (auto r : training_rows) mean += data(r, c);
        mean /= n;
        double var = 0.0;
        for (auto r : training_rows) var += (data(r, c) - mean) * (data(r, c) - mean);
        const double sd = std::sqrt(var / n);
        if (!(sd > 0.0)) {
            st.dropped_constant.push_back(c);
            continue;
        }
        st.kept.push_back(c);
        st.means.push_back(mean);
        st.stds.push_back(sd);
    }
    return st;
}

PreprocessState fit_preprocess(const Matrix& data, const PreprocessOptions& options) {
    std::vector<std::size_t> rows(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return fit_preprocess(data, rows, options);
}

Matrix apply_preprocess(const PreprocessState& state, const Matrix& data) {
    if (data.cols() != state.input_columns) throw std::invalid_argument("column count does not match preprocessing state");
    Matrix out(data.rows(), state.kept.size());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t k = 0; k < state.kept.size(); ++k) {
            out(r, k) = (data(r, state.kept[k]) - state.means[k]) / state.stds[k];
        }
    }
    return out;
}

}  // namespace brdf
