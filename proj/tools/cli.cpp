#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "bench_matrix.hpp"
#include "brdf/datasets.hpp"
#include "brdf/error.hpp"
#include "brdf/evaluation.hpp"
#include "brdf/forest.hpp"
#include "brdf/kde.hpp"
#include "brdf/kernels.hpp"
#include "brdf/metrics.hpp"
#include "brdf/serialize.hpp"

namespace brdf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ForestFlags {
    std::string mode = "axis";
    std::size_t trees = 10;
    std::size_t candidates = 5;
    std::vector<std::size_t> splits{32};
    std::size_t probes = 30;
    std::size_t folds = 10;
    std::size_t mc_points = kDefaultMcPoints;
    double margin = 0.0;

    ForestConfig to_config(std::uint64_t seed) const {
        ForestConfig c;
        c.mode = split_mode_from_string(mode);
        c.trees = trees;
        c.candidates = candidates;
        c.splits = splits.front();
        c.probes = probes;
        c.cv_folds = folds;
        c.mc_points = mc_points;
        c.margin = margin;
        c.seed = seed;
        c.validate();
        return c;
    }
};

void add_forest_flags(CLI::App* app, ForestFlags& f, bool split_grid) {
    app->add_option("--mode", f.mode, "Partition rule: pure, axis or oblique")
        ->check(CLI::IsMember({"pure", "axis", "oblique"}))
        ->capture_default_str();
    app->add_option("--trees", f.trees, "Trees per forest (m)")->capture_default_str();
    app->add_option("--candidates", f.candidates, "Candidate partitions per tree (k)")->capture_default_str();
    auto* splits = app->add_option("--splits", f.splits, split_grid ? "Split counts (p); several are tuned by k-fold ANLL"
                                                                    : "Splits per partition (p)")
                       ->capture_default_str();
    if (split_grid) {
        splits->delimiter(',');
    } else {
        splits->expected(1);
    }
    app->add_option("--probes", f.probes, "Probe samples per adaptive split (t)")->capture_default_str();
    app->add_option("--folds", f.folds, "Cross-validation folds for candidate selection")->capture_default_str();
    app->add_option("--mc-points", f.mc_points, "Monte Carlo volume points for oblique cells")->capture_default_str();
    app->add_option("--margin", f.margin, "Bounding box margin as a fraction of each range")->capture_default_str();
}

struct PreprocessFlags {
    bool enabled = false;
    std::size_t discrete_threshold = 10;
    double corr_threshold = 0.98;

    std::optional<PreprocessOptions> options() const {
        if (!enabled) return std::nullopt;
        return PreprocessOptions{discrete_threshold, corr_threshold};
    }
};

void add_preprocess_flags(CLI::App* app, PreprocessFlags& p) {
    app->add_flag("--preprocess", p.enabled, "Drop discrete/correlated columns and z-score with training statistics");
    app->add_option("--discrete-threshold", p.discrete_threshold, "Max unique values of a discrete column")
        ->capture_default_str();
    app->add_option("--corr-threshold", p.corr_threshold, "Pearson |rho| above which the later column is dropped")
        ->capture_default_str();
}

struct CsvFlags {
    bool header = false;
    std::string delimiter = ",";

    CsvOptions options() const {
        if (delimiter.size() != 1) throw ConfigError("--delimiter must be a single character");
        return CsvOptions{header, delimiter[0]};
    }
};

void add_csv_flags(CLI::App* app, CsvFlags& c) {
    app->add_flag("--header", c.header, "First CSV line holds column names");
    app->add_option("--delimiter", c.delimiter, "CSV field separator")->capture_default_str();
}

void require_file(const std::string& path) {
    if (!fs::is_regular_file(path)) throw IoError("input file '" + path + "' does not exist");
}

// Writes via a sibling temporary so a failure never leaves a partial file.
void write_text_atomically(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw IoError("write error on '" + path.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move output into place at '" + path.string() + "': " + ec.message());
}

struct Model {
    std::string method;  // brdf | kde
    std::optional<PreprocessState> preprocess;
    std::optional<Forest> forest;
    std::optional<KdeModel> kde;

    std::vector<double> eval(const Matrix& raw) const {
        Matrix points = preprocess ? apply_preprocess(*preprocess, raw) : raw;
        if (forest) {
            if (points.cols() != forest->dim()) throw ConfigError("data width does not match the model");
            return forest->eval_batch(points);
        }
        if (points.cols() != kde->dim()) throw ConfigError("data width does not match the model");
        return kde->eval_batch(points);
    }

    json config() const {
        json c = {{"method", method}};
        if (forest) c["forest"] = io::to_json(forest->config());
        if (kde) c["kde_factor"] = kde->factor();
        c["preprocess"] = preprocess.has_value();
        return c;
    }

    std::uint64_t seed() const { return forest ? forest->config().seed : 0; }
};

json model_to_json(const Model& m) {
    json j = {{"format", "brdf-model"}, {"version", 1}, {"method", m.method}};
    j["preprocess"] = m.preprocess ? io::to_json(*m.preprocess) : json(nullptr);
    if (m.forest) j["forest"] = io::to_json(*m.forest);
    if (m.kde) j["kde"] = io::to_json(*m.kde);
    return j;
}

Model model_from_json(const json& j) {
    if (j.value("format", std::string{}) != "brdf-model") throw IoError("not a brdf model file");
    Model m;
    m.method = j.at("method").get<std::string>();
    if (j.contains("preprocess") && !j.at("preprocess").is_null()) {
        m.preprocess = io::preprocess_state_from_json(j.at("preprocess"));
    }
    if (m.method == "brdf") {
        m.forest.emplace(io::forest_from_json(j.at("forest")));
    } else if (m.method == "kde") {
        m.kde.emplace(io::kde_from_json(j.at("kde")));
    } else {
        throw IoError("unknown model method '" + m.method + "'");
    }
    return m;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// ---- synth ----

struct SynthArgs {
    std::string family;
    std::size_t dim = 1;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    if (a.n < 1) throw ConfigError("--n must be >= 1");
    if (a.dim < 1) throw ConfigError("--dim must be >= 1");
    SyntheticSpec spec{synthetic_family_from_string(a.family), a.dim};
    Rng rng = make_rng(a.seed, {stream::train});
    Matrix data = sample_synthetic(spec, a.n, rng);
    write_csv(a.out, data);
    json sidecar = io::to_json(spec);
    sidecar["kind"] = "synthetic";
    sidecar["n"] = a.n;
    sidecar["seed"] = a.seed;
    io::write_json_file(a.out + ".json", sidecar);
    out << "wrote " << a.n << "x" << a.dim << " samples to " << a.out << " (truth sidecar " << a.out << ".json)\n";
    return 0;
}

// ---- fit ----

struct FitArgs {
    std::string data;
    CsvFlags csv;
    std::string method = "brdf";
    ForestFlags forest;
    PreprocessFlags preprocess;
    std::uint64_t seed = 0;
    int workers = 0;
    std::optional<double> kde_factor;
    std::string dataset_name;
    std::string out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    require_file(a.data);
    Dataset ds = load_csv(a.data, a.csv.options());
    Model model;
    model.method = a.method;
    Matrix train = ds.data;
    if (auto opts = a.preprocess.options()) {
        model.preprocess = fit_preprocess(ds.data, *opts);
        train = apply_preprocess(*model.preprocess, ds.data);
        if (train.cols() == 0) throw ModelError("preprocessing dropped every column");
    }
    if (!a.dataset_name.empty()) validate_known_shape(a.dataset_name, train.rows(), train.cols());
    if (a.method == "brdf") {
        ForestConfig cfg = a.forest.to_config(a.seed);
        model.forest.emplace(fit_forest(train, cfg, a.workers));
    } else {
        model.kde.emplace(fit_kde(train, a.kde_factor));
    }
    write_text_atomically(a.out, model_to_json(model).dump() + "\n");
    out << "fitted " << a.method << " on " << train.rows() << "x" << train.cols() << " rows; model written to " << a.out
        << "\n";
    return 0;
}

// ---- predict ----

struct PredictArgs {
    std::string model;
    std::string data;
    CsvFlags csv;
    std::string out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    require_file(a.model);
    require_file(a.data);
    Model model = model_from_json(io::read_json_file(a.model));
    Dataset ds = load_csv(a.data, a.csv.options());
    std::vector<double> densities = model.eval(ds.data);
    std::string text;
    for (double v : densities) text += format_double(v) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        write_text_atomically(a.out, text);
    }
    return 0;
}

// ---- eval ----

struct EvalArgs {
    std::string model;
    std::string estimator = "model";
    std::string data;
    CsvFlags csv;
    std::string truth;
    std::vector<std::string> metrics{"anll"};
    std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    require_file(a.data);
    std::optional<SyntheticSpec> truth;
    if (!a.truth.empty()) {
        require_file(a.truth);
        truth = io::synthetic_spec_from_json(io::read_json_file(a.truth));
    }
    std::optional<Model> model;
    if (a.estimator == "model") {
        if (a.model.empty()) throw ConfigError("--model is required unless --estimator is truth or zero");
        require_file(a.model);
        model = model_from_json(io::read_json_file(a.model));
    }
    Dataset ds = load_csv(a.data, a.csv.options());

    std::vector<double> estimate(ds.data.rows(), 0.0);
    json config;
    std::uint64_t seed = 0;
    if (model) {
        estimate = model->eval(ds.data);
        config = model->config();
        seed = model->seed();
    } else if (a.estimator == "truth") {
        if (!truth) throw ModelError("truth density unavailable");
        for (std::size_t j = 0; j < ds.data.rows(); ++j) estimate[j] = true_density(*truth, ds.data.row(j));
        config = {{"method", "truth"}};
    } else {
        config = {{"method", "zero"}};
    }

    std::ostringstream lines;
    for (const auto& metric : a.metrics) {
        json report = {{"kind", "eval"}, {"data", a.data}, {"estimator", a.estimator}, {"metric", metric},
                       {"n_test", ds.data.rows()}, {"seed", seed}, {"config", config}};
        if (metric == "mae") {
            if (!truth) throw ModelError("truth density unavailable");
            if (model && model->preprocess) throw ModelError("truth density unavailable for preprocessed models");
            if (ds.data.cols() != truth->dim) throw ConfigError("data width does not match the truth sidecar");
            std::vector<double> ref(ds.data.rows());
            for (std::size_t j = 0; j < ds.data.rows(); ++j) ref[j] = true_density(*truth, ds.data.row(j));
            report["value"] = mae_of_values(estimate, ref);
            report["epsilon_used"] = 0.0;
        } else {
            report["value"] = anll_of_values(estimate);
            report["epsilon_used"] = kAnllEpsilon;
        }
        report["fingerprint"] = io::fingerprint({{"config", config}, {"metric", metric}, {"data", a.data}});
        lines << report.dump() << '\n';
    }
    if (a.out.empty()) {
        out << lines.str();
    } else {
        std::ofstream f(a.out, std::ios::app | std::ios::binary);
        if (!f) throw IoError("cannot append to '" + a.out + "'");
        f << lines.str();
    }
    return 0;
}

// ---- bench ----

struct BenchArgs {
    std::vector<std::string> datasets{"type1:1"};
    std::vector<std::string> methods{"brdf-ap", "kde"};
    std::vector<std::string> metrics{"mae"};
    std::size_t repeats = 20;
    std::size_t n = 2000;
    std::size_t test_n = 10000;
    bool test_grid = false;
    std::size_t tune_folds = 5;
    std::size_t kfold = 10;
    ForestFlags forest;
    PreprocessFlags preprocess;
    CsvFlags csv;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
    std::string summary;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    bench::BenchMatrix matrix;
    matrix.datasets = a.datasets;
    matrix.methods = a.methods;
    matrix.metrics = a.metrics;
    matrix.repeats = a.repeats;
    matrix.seed = a.seed;
    if (a.repeats < 1) throw ConfigError("--repeats must be >= 1");
    matrix.prototype.n = a.n;
    matrix.prototype.test_n = a.test_n;
    matrix.prototype.test_grid = a.test_grid;
    matrix.prototype.forest = a.forest.to_config(0);
    matrix.prototype.split_grid = a.forest.splits;
    matrix.prototype.tune_folds = a.tune_folds;
    matrix.prototype.kfold = a.kfold;
    matrix.prototype.preprocess = a.preprocess.options();
    matrix.prototype.csv = a.csv.options();
    for (const auto& ds : a.datasets) {
        if (ds.rfind("csv:", 0) == 0) require_file(ds.substr(4));
    }

    std::ofstream jsonl_file;
    std::ostream* jsonl = &out;
    if (!a.out.empty()) {
        jsonl_file.open(a.out, std::ios::app | std::ios::binary);
        if (!jsonl_file) throw IoError("cannot append to '" + a.out + "'");
        jsonl = &jsonl_file;
    }
    std::ostringstream table;
    std::size_t failures = bench::run_matrix(matrix, a.workers, *jsonl, table);
    if (a.summary.empty()) {
        out << table.str();
    } else {
        write_text_atomically(a.summary, table.str());
    }
    if (failures) out << failures << " cell(s) failed; see the JSON lines for details\n";
    return failures ? 1 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random-forest density estimator with cross-validated tree selection"};
    app.require_subcommand(1);
    app.allow_config_extras(false);
    app.set_config("--config", "", "Read options from a TOML/INI file (unknown keys are rejected)");

    int workers = 0;

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Sample a synthetic dataset with a truth-density sidecar");
    synth_cmd->add_option("--family", synth.family, "type1 or type2")->required()->check(CLI::IsMember({"type1", "type2"}));
    synth_cmd->add_option("--dim", synth.dim, "Dimension d")->capture_default_str();
    synth_cmd->add_option("--n", synth.n, "Sample count")->required();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->required();
    synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a density model and write it as JSON");
    fit_cmd->add_option("--data", fit.data, "Training CSV")->required();
    add_csv_flags(fit_cmd, fit.csv);
    fit_cmd->add_option("--method", fit.method, "brdf or kde")->check(CLI::IsMember({"brdf", "kde"}))->capture_default_str();
    add_forest_flags(fit_cmd, fit.forest, false);
    add_preprocess_flags(fit_cmd, fit.preprocess);
    fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
    fit_cmd->add_option("--workers", fit.workers, "OpenMP worker threads (0: runtime default)");
    fit_cmd->add_option("--kde-factor", fit.kde_factor, "Override Scott's bandwidth factor");
    fit_cmd->add_option("--dataset-name", fit.dataset_name, "Validate against a known dataset shape (e.g. white_wine)");
    fit_cmd->add_option("--out", fit.out, "Output model path")->required();

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Evaluate a model's density at CSV rows");
    predict_cmd->add_option("--model", predict.model, "Model JSON")->required();
    predict_cmd->add_option("--data", predict.data, "Query CSV")->required();
    add_csv_flags(predict_cmd, predict.csv);
    predict_cmd->add_option("--workers", workers, "OpenMP worker threads (0: runtime default)");
    predict_cmd->add_option("--out", predict.out, "Output path (one density per line; default stdout)");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Compute MAE / ANLL reports as JSON lines");
    eval_cmd->add_option("--model", eval.model, "Model JSON");
    eval_cmd->add_option("--estimator", eval.estimator, "model, truth or zero")
        ->check(CLI::IsMember({"model", "truth", "zero"}))
        ->capture_default_str();
    eval_cmd->add_option("--data", eval.data, "Test CSV")->required();
    add_csv_flags(eval_cmd, eval.csv);
    eval_cmd->add_option("--workers", workers, "OpenMP worker threads (0: runtime default)");
    eval_cmd->add_option("--truth", eval.truth, "Synthetic sidecar JSON holding the true density");
    eval_cmd->add_option("--metric", eval.metrics, "mae and/or anll")
        ->delimiter(',')
        ->check(CLI::IsMember({"mae", "anll"}))
        ->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "Append reports to this JSON-lines file (default stdout)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run a methods x datasets x seeds matrix");
    bench_cmd->add_option("--datasets", bench.datasets, "type1:<d>, type2:<d> or csv:<path>")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--methods", bench.methods, "brdf-ap, brdf-ob, brdf-pr, kde")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--metric", bench.metrics, "mae and/or anll (csv datasets report anll)")
        ->delimiter(',')
        ->check(CLI::IsMember({"mae", "anll"}))
        ->capture_default_str();
    bench_cmd->add_option("--repeats", bench.repeats, "Repeats per cell")->capture_default_str();
    bench_cmd->add_option("--n", bench.n, "Training samples (synthetic)")->capture_default_str();
    bench_cmd->add_option("--test-n", bench.test_n, "Test samples (synthetic)")->capture_default_str();
    bench_cmd->add_flag("--test-grid", bench.test_grid, "Score synthetic MAE on a midpoint grid over [0,1]^d instead of fresh draws");
    bench_cmd->add_option("--tune-folds", bench.tune_folds, "Folds used to tune the split grid")->capture_default_str();
    bench_cmd->add_option("--kfold", bench.kfold, "Test folds for csv datasets")->capture_default_str();
    add_forest_flags(bench_cmd, bench.forest, true);
    add_preprocess_flags(bench_cmd, bench.preprocess);
    add_csv_flags(bench_cmd, bench.csv);
    bench_cmd->add_option("--seed", bench.seed, "Matrix seed")->required();
    bench_cmd->add_option("--workers", bench.workers, "OpenMP worker threads (0: runtime default)");
    bench_cmd->add_option("--out", bench.out, "Append JSON lines here (default stdout)");
    bench_cmd->add_option("--summary", bench.summary, "Write the text summary here (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, out);
        if (*fit_cmd) {
            kernels::set_workers(fit.workers);
            return cmd_fit(fit, out);
        }
        kernels::set_workers(workers);
        if (*predict_cmd) return cmd_predict(predict, out);
        if (*eval_cmd) return cmd_eval(eval, out);
        if (*bench_cmd) {
            kernels::set_workers(bench.workers);
            return cmd_bench(bench, out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace brdf::cli
