#include "bench_matrix.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "brdf/error.hpp"
#include "brdf/evaluation.hpp"
#include "brdf/kde.hpp"
#include "brdf/metrics.hpp"
#include "brdf/serialize.hpp"

namespace brdf::bench {

using nlohmann::json;

namespace {

struct ParsedDataset {
    bool synthetic = true;
    SyntheticSpec spec;
    std::string path;
};

ParsedDataset parse_dataset(const std::string& name) {
    ParsedDataset p;
    auto colon = name.find(':');
    if (colon == std::string::npos) throw ConfigError("dataset '" + name + "' must look like type1:<d>, type2:<d> or csv:<path>");
    const std::string kind = name.substr(0, colon);
    const std::string rest = name.substr(colon + 1);
    if (kind == "csv") {
        p.synthetic = false;
        p.path = rest;
        return p;
    }
    p.spec.family = synthetic_family_from_string(kind);
    try {
        std::size_t used = 0;
        const long d = std::stol(rest, &used);
        if (used != rest.size() || d < 1) throw std::invalid_argument("bad dim");
        p.spec.dim = static_cast<std::size_t>(d);
    } catch (const std::exception&) {
        throw ConfigError("dataset '" + name + "': dimension must be a positive integer");
    }
    return p;
}

SplitMode method_mode(const std::string& method) {
    if (method == "brdf-ap") return SplitMode::adaptive_axis;
    if (method == "brdf-ob") return SplitMode::adaptive_oblique;
    if (method == "brdf-pr") return SplitMode::purely_random;
    throw ConfigError("unknown method '" + method + "' (expected brdf-ap, brdf-ob, brdf-pr or kde)");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& dataset, std::size_t repeat) {
    return derive_seed(master_seed, {fnv1a(dataset), repeat});
}

json to_json(const Cell& c) {
    json j = {{"dataset", c.dataset},       {"method", c.method},          {"n", c.n},
              {"test_n", c.test_n},         {"test_grid", c.test_grid},   {"repeat", c.repeat},          {"seed", c.seed},
              {"forest", io::to_json(c.forest)}, {"split_grid", c.split_grid}, {"tune_folds", c.tune_folds},
              {"kfold", c.kfold},           {"csv_header", c.csv.header},  {"csv_delimiter", std::string(1, c.csv.delimiter)}};
    if (c.preprocess) {
        j["preprocess"] = {{"discrete_threshold", c.preprocess->discrete_threshold},
                           {"corr_threshold", c.preprocess->corr_threshold}};
    } else {
        j["preprocess"] = nullptr;
    }
    return j;
}

Cell cell_from_json(const json& j) {
    Cell c;
    c.dataset = j.at("dataset").get<std::string>();
    c.method = j.at("method").get<std::string>();
    c.n = j.at("n").get<std::size_t>();
    c.test_n = j.at("test_n").get<std::size_t>();
    c.test_grid = j.value("test_grid", false);
    c.repeat = j.at("repeat").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.forest = io::forest_config_from_json(j.at("forest"));
    c.split_grid = j.at("split_grid").get<std::vector<std::size_t>>();
    c.tune_folds = j.at("tune_folds").get<std::size_t>();
    c.kfold = j.at("kfold").get<std::size_t>();
    c.csv.header = j.value("csv_header", false);
    c.csv.delimiter = j.value("csv_delimiter", std::string(",")).at(0);
    if (j.contains("preprocess") && !j.at("preprocess").is_null()) {
        PreprocessOptions p;
        p.discrete_threshold = j.at("preprocess").at("discrete_threshold").get<std::size_t>();
        p.corr_threshold = j.at("preprocess").at("corr_threshold").get<double>();
        c.preprocess = p;
    }
    return c;
}

namespace {

// Cell midpoints of a regular grid with round(m^(1/d)) points per axis.
Matrix midpoint_grid(std::size_t m, std::size_t d) {
    const auto per_axis = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(m), 1.0 / static_cast<double>(d)))));
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    Matrix out(total, d);
    for (std::size_t r = 0; r < total; ++r) {
        std::size_t rest = r;
        for (std::size_t i = 0; i < d; ++i) {
            out(r, i) = (static_cast<double>(rest % per_axis) + 0.5) / static_cast<double>(per_axis);
            rest /= per_axis;
        }
    }
    return out;
}

CellResult run_synthetic(const Cell& cell, const SyntheticSpec& spec, int workers) {
    Rng train_rng = make_rng(cell.seed, {stream::train});
    Rng test_rng = make_rng(cell.seed, {stream::test});
    const Matrix train = sample_synthetic(spec, cell.n, train_rng);
    const Matrix test = cell.test_grid ? midpoint_grid(cell.test_n, spec.dim) : sample_synthetic(spec, cell.test_n, test_rng);

    CellResult out;
    out.d = spec.dim;
    out.n = cell.n;
    std::vector<double> estimate;
    if (cell.method == "kde") {
        auto t0 = std::chrono::steady_clock::now();
        KdeModel kde = fit_kde(train);
        out.train_time_s = seconds_since(t0);
        estimate = kde.eval_batch(test);
    } else {
        ForestConfig cfg = cell.forest;
        cfg.mode = method_mode(cell.method);
        if (cell.split_grid.size() > 1) {
            auto t0 = std::chrono::steady_clock::now();
            cfg.splits = select_splits(train, cfg, cell.split_grid, cell.tune_folds, workers).splits;
            out.tune_time_s = seconds_since(t0);
        } else if (cell.split_grid.size() == 1) {
            cfg.splits = cell.split_grid.front();
        }
        out.splits_selected = cfg.splits;
        auto t0 = std::chrono::steady_clock::now();
        Forest forest = fit_forest(train, cfg, workers);
        out.train_time_s = seconds_since(t0);
        estimate = forest.eval_batch(test);
    }
    std::vector<double> truth(test.rows());
    for (std::size_t j = 0; j < test.rows(); ++j) truth[j] = true_density(spec, test.row(j));
    out.metrics.emplace_back("mae", mae_of_values(estimate, truth));
    out.metrics.emplace_back("anll", anll_of_values(estimate));
    return out;
}

CellResult run_csv(const Cell& cell, const std::string& path, int workers) {
    const Dataset ds = load_csv(path, cell.csv);
    // Contiguous folds over a seeded shuffle of the rows.
    std::vector<std::size_t> order(ds.data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(cell.seed, {stream::folds});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const Matrix data = ds.data.select_rows(order);

    CellResult out;
    out.n = data.rows();
    double train_time = 0.0;
    double tune_time = 0.0;
    std::size_t kept_cols = data.cols();
    FoldScorer scorer;
    if (cell.method == "kde") {
        scorer = [&](const Matrix& train, const Matrix& test) {
            kept_cols = train.cols();
            auto t0 = std::chrono::steady_clock::now();
            KdeModel kde = fit_kde(train);
            train_time += seconds_since(t0);
            return kde.eval_batch(test);
        };
    } else {
        scorer = [&](const Matrix& train, const Matrix& test) {
            kept_cols = train.cols();
            ForestConfig cfg = cell.forest;
            cfg.mode = method_mode(cell.method);
            if (cell.split_grid.size() > 1) {
                auto t0 = std::chrono::steady_clock::now();
                cfg.splits = select_splits(train, cfg, cell.split_grid, cell.tune_folds, workers).splits;
                tune_time += seconds_since(t0);
            } else if (cell.split_grid.size() == 1) {
                cfg.splits = cell.split_grid.front();
            }
            out.splits_selected = cfg.splits;
            auto t0 = std::chrono::steady_clock::now();
            Forest forest = fit_forest(train, cfg, workers);
            train_time += seconds_since(t0);
            return forest.eval_batch(test);
        };
    }
    std::vector<double> folds = kfold_scores(data, cell.kfold, cell.preprocess, scorer);
    out.d = kept_cols;
    out.train_time_s = train_time / static_cast<double>(folds.size());
    out.tune_time_s = tune_time / static_cast<double>(folds.size());
    out.metrics.emplace_back("anll", std::accumulate(folds.begin(), folds.end(), 0.0) / static_cast<double>(folds.size()));
    return out;
}

}  // namespace

CellResult run_cell(const Cell& cell, int workers) {
    ParsedDataset p = parse_dataset(cell.dataset);
    if (cell.method != "kde") method_mode(cell.method);
    return p.synthetic ? run_synthetic(cell, p.spec, workers) : run_csv(cell, p.path, workers);
}

std::size_t run_matrix(const BenchMatrix& matrix, int workers, std::ostream& jsonl, std::ostream& summary) {
    for (const auto& ds : matrix.datasets) parse_dataset(ds);
    for (const auto& m : matrix.methods) {
        if (m != "kde") method_mode(m);
    }
    for (const auto& metric : matrix.metrics) {
        if (metric != "mae" && metric != "anll") throw ConfigError("unknown metric '" + metric + "'");
    }

    struct Group {
        std::size_t d = 0, n = 0;
        std::vector<double> values;
        std::vector<double> times;
    };
    std::vector<std::tuple<std::string, std::string, std::string>> group_order;
    std::map<std::tuple<std::string, std::string, std::string>, Group> groups;
    std::size_t failures = 0;

    for (const auto& dataset : matrix.datasets) {
        const bool synthetic = parse_dataset(dataset).synthetic;
        for (const auto& method : matrix.methods) {
            for (std::size_t rep = 0; rep < matrix.repeats; ++rep) {
                Cell cell = matrix.prototype;
                cell.dataset = dataset;
                cell.method = method;
                cell.repeat = rep;
                cell.seed = cell_seed(matrix.seed, dataset, rep);
                cell.forest.seed = derive_seed(cell.seed, {stream::tree});
                const json config = to_json(cell);
                const std::string fp = io::fingerprint(config);
                try {
                    CellResult res = run_cell(cell, workers);
                    for (const auto& [metric, value] : res.metrics) {
                        const bool wanted = synthetic
                            ? std::find(matrix.metrics.begin(), matrix.metrics.end(), metric) != matrix.metrics.end()
                            : metric == "anll";
                        if (!wanted) continue;
                        json line = {{"kind", "cell"},          {"status", "ok"},
                                     {"dataset", dataset},      {"method", method},
                                     {"d", res.d},              {"n", res.n},
                                     {"repeat", rep},           {"seed", cell.seed},
                                     {"metric", metric},        {"value", value},
                                     {"train_time_s", res.train_time_s}, {"tune_time_s", res.tune_time_s},
                                     {"splits_selected", res.splits_selected},
                                     {"epsilon_used", metric == "anll" ? kAnllEpsilon : 0.0},
                                     {"config", config},        {"fingerprint", fp}};
                        jsonl << line.dump() << '\n';
                        auto key = std::make_tuple(dataset, method, metric);
                        if (!groups.count(key)) group_order.push_back(key);
                        auto& g = groups[key];
                        g.d = res.d;
                        g.n = res.n;
                        g.values.push_back(value);
                        g.times.push_back(res.train_time_s + res.tune_time_s);
                    }
                } catch (const std::exception& e) {
                    ++failures;
                    json line = {{"kind", "cell"},   {"status", "error"}, {"dataset", dataset}, {"method", method},
                                 {"repeat", rep},    {"seed", cell.seed}, {"error", e.what()},  {"config", config},
                                 {"fingerprint", fp}};
                    jsonl << line.dump() << '\n';
                }
                jsonl.flush();
            }
        }
    }

    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %-28s %4s %7s %-6s %12s %12s %12s %5s\n", "method", "dataset", "d", "n",
                  "metric", "mean", "std", "time_mean", "reps");
    summary << buf;
    for (const auto& key : group_order) {
        const auto& [dataset, method, metric] = key;
        const Group& g = groups.at(key);
        const double k = static_cast<double>(g.values.size());
        const double mean = std::accumulate(g.values.begin(), g.values.end(), 0.0) / k;
        double ss = 0.0;
        for (double v : g.values) ss += (v - mean) * (v - mean);
        const double sd = g.values.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
        const double time_mean = std::accumulate(g.times.begin(), g.times.end(), 0.0) / k;
        json line = {{"kind", "summary"}, {"dataset", dataset}, {"method", method}, {"metric", metric},
                     {"d", g.d},          {"n", g.n},           {"mean", mean},     {"std", sd},
                     {"time_mean_s", time_mean}, {"repeats", g.values.size()}, {"values", g.values}};
        jsonl << line.dump() << '\n';
        std::snprintf(buf, sizeof buf, "%-10s %-28s %4zu %7zu %-6s %12.6f %12.6f %12.4f %5zu\n", method.c_str(),
                      dataset.c_str(), g.d, g.n, metric.c_str(), mean, sd, time_mean, g.values.size());
        summary << buf;
    }
    return failures;
}

}  // namespace brdf::bench
