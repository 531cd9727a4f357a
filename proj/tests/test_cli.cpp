#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bench_matrix.hpp"
#include "brdf/datasets.hpp"
#include "brdf/metrics.hpp"
#include "cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path dir() {
    fs::path d = fs::path(BRDF_TEST_TMP) / "cli";
    fs::create_directories(d);
    return d;
}

std::string p(const std::string& name) { return (dir() / name).string(); }

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = brdf::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> jsonl(const std::string& text) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '{') out.push_back(json::parse(line));
    }
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes data and a truth sidecar") {
    auto a = run({"synth", "--family", "type1", "--dim", "2", "--n", "1000", "--seed", "3", "--out", p("s1.csv")});
    REQUIRE(a.code == 0);
    auto ds = brdf::load_csv(p("s1.csv"));
    CHECK(ds.data.rows() == 1000);
    CHECK(ds.data.cols() == 2);
    auto side = json::parse(slurp(p("s1.csv.json")));
    CHECK(side["family"] == "type1");
    CHECK(side["dim"] == 2);
    CHECK(side["seed"] == 3);

    const std::string first = slurp(p("s1.csv"));
    REQUIRE(run({"synth", "--family", "type1", "--dim", "2", "--n", "1000", "--seed", "3", "--out", p("s1.csv")}).code == 0);
    CHECK(slurp(p("s1.csv")) == first);
    REQUIRE(run({"synth", "--family", "type1", "--dim", "2", "--n", "1000", "--seed", "4", "--out", p("s2.csv")}).code == 0);
    CHECK(slurp(p("s2.csv")) != first);
}

TEST_CASE("fit and predict") {
    REQUIRE(run({"synth", "--family", "type2", "--dim", "2", "--n", "600", "--seed", "5", "--out", p("train.csv")}).code == 0);
    REQUIRE(run({"synth", "--family", "type2", "--dim", "2", "--n", "200", "--seed", "6", "--out", p("test.csv")}).code == 0);
    const std::vector<std::string> base{"fit", "--data", p("train.csv"), "--trees", "6", "--candidates", "2",
                                        "--splits", "20", "--folds", "4", "--seed", "11"};
    auto with = [&](std::vector<std::string> extra) {
        auto v = base;
        v.insert(v.end(), extra.begin(), extra.end());
        return v;
    };
    REQUIRE(run(with({"--workers", "1", "--out", p("m1.json")})).code == 0);
    REQUIRE(run(with({"--workers", "8", "--out", p("m8.json")})).code == 0);
    CHECK(slurp(p("m1.json")) == slurp(p("m8.json")));
    REQUIRE(run(with({"--mode", "oblique", "--workers", "1", "--out", p("o1.json")})).code == 0);
    REQUIRE(run(with({"--mode", "oblique", "--workers", "8", "--out", p("o8.json")})).code == 0);
    CHECK(slurp(p("o1.json")) == slurp(p("o8.json")));

    auto pr = run({"predict", "--model", p("m1.json"), "--data", p("test.csv")});
    REQUIRE(pr.code == 0);
    std::istringstream in(pr.out);
    std::size_t lines = 0;
    for (double v; in >> v; ++lines) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
    CHECK(lines == 200);

    REQUIRE(run({"fit", "--data", p("train.csv"), "--method", "kde", "--out", p("k.json")}).code == 0);
    REQUIRE(run({"predict", "--model", p("k.json"), "--data", p("test.csv"), "--out", p("k.txt")}).code == 0);
    CHECK(!slurp(p("k.txt")).empty());
}

TEST_CASE("missing input fails cleanly") {
    fs::remove(p("never.json"));
    auto r = run({"fit", "--data", p("does_not_exist.csv"), "--out", p("never.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("does_not_exist.csv") != std::string::npos);
    CHECK_FALSE(fs::exists(p("never.json")));
    CHECK(run({"predict", "--model", p("nope.json"), "--data", p("test.csv")}).code == 2);
}

TEST_CASE("eval with stub estimators") {
    REQUIRE(run({"synth", "--family", "type1", "--dim", "1", "--n", "300", "--seed", "8", "--out", p("e.csv")}).code == 0);
    auto t = run({"eval", "--estimator", "truth", "--data", p("e.csv"), "--truth", p("e.csv.json"), "--metric", "mae,anll"});
    REQUIRE(t.code == 0);
    auto lines = jsonl(t.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0]["metric"] == "mae");
    CHECK(lines[0]["value"].get<double>() == 0.0);
    CHECK(lines[0]["n_test"] == 300);
    for (const char* key : {"kind", "data", "estimator", "seed", "config", "epsilon_used", "fingerprint"})
        CHECK(lines[1].contains(key));

    auto z = run({"eval", "--estimator", "zero", "--data", p("e.csv"), "--metric", "anll"});
    REQUIRE(z.code == 0);
    auto zl = jsonl(z.out);
    CHECK(std::abs(zl.at(0)["value"].get<double>() - 36.04365338911715) <= 1e-12);
    CHECK(zl.at(0)["epsilon_used"].get<double>() == brdf::kAnllEpsilon);

    auto bad = run({"eval", "--estimator", "zero", "--data", p("e.csv"), "--metric", "mae"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("truth density unavailable") != std::string::npos);

    fs::remove(p("eval.jsonl"));
    REQUIRE(run({"eval", "--estimator", "zero", "--data", p("e.csv"), "--out", p("eval.jsonl")}).code == 0);
    REQUIRE(run({"eval", "--estimator", "zero", "--data", p("e.csv"), "--out", p("eval.jsonl")}).code == 0);
    CHECK(jsonl(slurp(p("eval.jsonl"))).size() == 2);
}

TEST_CASE("bench lines carry their config and replay") {
    auto r = run({"bench", "--datasets", "type1:1", "--methods", "brdf-ap", "--repeats", "2", "--n", "300",
                  "--test-n", "500", "--trees", "3", "--candidates", "2", "--folds", "4", "--splits", "8,16",
                  "--tune-folds", "3", "--metric", "mae,anll", "--seed", "42"});
    REQUIRE(r.code == 0);
    auto lines = jsonl(r.out);
    std::vector<json> cells, summaries;
    for (auto& l : lines) (l["kind"] == "cell" ? cells : summaries).push_back(l);
    REQUIRE(cells.size() == 4);
    REQUIRE(summaries.size() == 2);
    for (const char* key : {"dataset", "method", "d", "n", "repeat", "seed", "metric", "value", "train_time_s",
                            "tune_time_s", "splits_selected", "epsilon_used", "config", "fingerprint"})
        CHECK(cells[0].contains(key));
    CHECK(r.out.find("method") != std::string::npos);

    // replay the first cell from its stored config
    auto cell = brdf::bench::cell_from_json(cells[0]["config"]);
    auto res = brdf::bench::run_cell(cell, 1);
    double replayed = -1.0;
    for (auto& [m, v] : res.metrics)
        if (m == cells[0]["metric"]) replayed = v;
    CHECK(std::abs(replayed - cells[0]["value"].get<double>()) <= 1e-12);

    for (auto& s : summaries) {
        auto values = s["values"].get<std::vector<double>>();
        REQUIRE(values.size() == 2);
        CHECK(std::abs(s["mean"].get<double>() - (values[0] + values[1]) / 2.0) <= 1e-12);
    }

    // same seed, same values
    auto again = run({"bench", "--datasets", "type1:1", "--methods", "brdf-ap", "--repeats", "2", "--n", "300",
                      "--test-n", "500", "--trees", "3", "--candidates", "2", "--folds", "4", "--splits", "8,16",
                      "--tune-folds", "3", "--metric", "mae,anll", "--seed", "42"});
    auto again_lines = jsonl(again.out);
    REQUIRE(again_lines.size() == lines.size());
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(again_lines[i]["value"] == lines[i]["value"]);
}

TEST_CASE("bench grid test points") {
    auto r = run({"bench", "--datasets", "type1:2", "--methods", "kde", "--repeats", "1", "--n", "300", "--test-n", "400",
                  "--test-grid", "--seed", "3"});
    REQUIRE(r.code == 0);
    auto lines = jsonl(r.out);
    REQUIRE(!lines.empty());
    CHECK(lines[0]["config"]["test_grid"] == true);
    auto cell = brdf::bench::cell_from_json(lines[0]["config"]);
    CHECK(cell.test_grid);
    CHECK(std::abs(brdf::bench::run_cell(cell, 1).metrics.at(0).second - lines[0]["value"].get<double>()) <= 1e-12);
}

TEST_CASE("bench argument errors") {
    CHECK(run({"bench", "--datasets", "type1:1"}).code == 2);
    CHECK(run({"bench", "--seed", "1", "--no-such-flag"}).code == 2);
    std::ofstream(p("bad.ini")) << "seed=1\nsplitz=4\n";
    CHECK(run({"bench", "--config", p("bad.ini")}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("a failing cell is recorded and the matrix continues") {
    std::ofstream(p("tiny.csv")) << "0.1,0.2\n0.3,0.4\n0.5,0.6\n";
    auto r = run({"bench", "--datasets", "csv:" + p("tiny.csv") + ",type1:1", "--methods", "kde", "--repeats", "1",
                  "--n", "200", "--test-n", "200", "--seed", "1"});
    CHECK(r.code == 1);
    auto lines = jsonl(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0]["status"] == "error");
    CHECK(lines[0].contains("error"));
    CHECK(lines[1]["status"] == "ok");
}

}  // TEST_SUITE
