#include "brdf/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "brdf/error.hpp"

namespace brdf::io {

namespace {

const char* mode_name(PartitionMode m) { return m == PartitionMode::axis_parallel ? "axis_parallel" : "oblique"; }

PartitionMode mode_from_name(const std::string& s) {
    if (s == "axis_parallel") return PartitionMode::axis_parallel;
    if (s == "oblique") return PartitionMode::oblique;
    throw IoError("unknown partition mode '" + s + "'");
}

template <typename F>
auto parse_guard(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

json to_json(const BoundingBox& box) { return {{"lower", box.lower}, {"upper", box.upper}}; }

BoundingBox bounding_box_from_json(const json& j) {
    return parse_guard("bounding box", [&] {
        return BoundingBox(j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>());
    });
}

json to_json(const Partition& part) {
    json splits = json::array();
    for (const Split& s : part.splits()) {
        if (const auto* a = std::get_if<AxisSplit>(&s)) {
            splits.push_back({{"cell", a->cell},
                              {"dimension", a->dimension},
                              {"proportion", a->proportion},
                              {"threshold", a->threshold},
                              {"lower_child", a->lower_child},
                              {"upper_child", a->upper_child}});
        } else {
            const auto& o = std::get<ObliqueSplit>(s);
            splits.push_back({{"cell", o.cell},
                              {"normal", o.normal},
                              {"offset", o.offset},
                              {"anchor", o.anchor},
                              {"lower_child", o.lower_child},
                              {"upper_child", o.upper_child}});
        }
    }
    const auto& dg = part.diagnostics();
    return {{"mode", mode_name(part.mode())},
            {"bounding_box", to_json(part.bounding_box())},
            {"splits", std::move(splits)},
            {"diagnostics",
             {{"centroid_fallbacks", dg.centroid_fallbacks},
              {"rejected_normals", dg.rejected_normals},
              {"skipped_splits", dg.skipped_splits},
              {"no_probe_in_box", dg.no_probe_in_box}}}};
}

Partition partition_from_json(const json& j) {
    return parse_guard("partition", [&] {
        Partition part(bounding_box_from_json(j.at("bounding_box")), mode_from_name(j.at("mode").get<std::string>()));
        for (const auto& s : j.at("splits")) {
            const auto cell = s.at("cell").get<LeafId>();
            if (part.mode() == PartitionMode::axis_parallel) {
                const auto& a = part.split_axis(cell, s.at("dimension").get<std::size_t>(), s.at("proportion").get<double>());
                if (a.threshold != s.at("threshold").get<double>()) throw IoError("partition replay: threshold mismatch");
            } else {
                part.split_oblique_exact(cell, s.at("normal").get<std::vector<double>>(), s.at("offset").get<double>(),
                                         s.at("anchor").get<std::vector<double>>());
            }
            const Split& last = part.splits().back();
            auto children = std::visit([](const auto& x) { return std::pair{x.lower_child, x.upper_child}; }, last);
            if (children.first != s.at("lower_child").get<LeafId>() ||
                children.second != s.at("upper_child").get<LeafId>()) {
                throw IoError("partition replay: child id mismatch");
            }
        }
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            auto& dg = part.diagnostics();
            dg.centroid_fallbacks = d.value("centroid_fallbacks", std::size_t{0});
            dg.rejected_normals = d.value("rejected_normals", std::size_t{0});
            dg.skipped_splits = d.value("skipped_splits", std::size_t{0});
            dg.no_probe_in_box = d.value("no_probe_in_box", std::size_t{0});
        }
        return part;
    });
}

json to_json(const VolumeTable& t) {
    return {{"method", t.method == VolumeMethod::exact ? "exact" : "monte_carlo"},
            {"mc_points", t.mc_points},
            {"box_volume", t.box_volume},
            {"volumes", t.volumes},
            {"hits", t.hits}};
}

VolumeTable volume_table_from_json(const json& j) {
    return parse_guard("volume table", [&] {
        VolumeTable t;
        const auto method = j.at("method").get<std::string>();
        if (method == "exact") {
            t.method = VolumeMethod::exact;
        } else if (method == "monte_carlo") {
            t.method = VolumeMethod::monte_carlo;
        } else {
            throw IoError("unknown volume method '" + method + "'");
        }
        t.mc_points = j.at("mc_points").get<std::size_t>();
        t.box_volume = j.at("box_volume").get<double>();
        t.volumes = j.at("volumes").get<std::vector<double>>();
        t.hits = j.value("hits", std::vector<std::uint64_t>{});
        return t;
    });
}

json to_json(const DensityTree& tree) {
    return {{"partition", to_json(tree.partition())},
            {"volumes", to_json(tree.volumes())},
            {"counts", tree.counts()},
            {"n_train", tree.n_train()},
            {"n_outside", tree.n_outside()}};
}

DensityTree density_tree_from_json(const json& j) {
    return parse_guard("density tree", [&] {
        return DensityTree(partition_from_json(j.at("partition")), volume_table_from_json(j.at("volumes")),
                           j.at("counts").get<std::vector<std::uint64_t>>(), j.at("n_train").get<std::uint64_t>(),
                           j.value("n_outside", std::uint64_t{0}));
    });
}

json to_json(const ForestConfig& c) {
    return {{"trees", c.trees},         {"candidates", c.candidates}, {"splits", c.splits},
            {"probes", c.probes},       {"cv_folds", c.cv_folds},     {"mc_points", c.mc_points},
            {"mode", to_string(c.mode)}, {"seed", c.seed},             {"margin", c.margin}};
}

ForestConfig forest_config_from_json(const json& j) {
    return parse_guard("forest config", [&] {
        static const std::vector<std::string> known = {"trees",    "candidates", "splits", "probes", "cv_folds",
                                                       "mc_points", "mode",       "seed",   "margin"};
        for (const auto& [key, _] : j.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw ConfigError("unknown forest config key '" + key + "'");
            }
        }
        ForestConfig c;
        c.trees = j.value("trees", c.trees);
        c.candidates = j.value("candidates", c.candidates);
        c.splits = j.value("splits", c.splits);
        c.probes = j.value("probes", c.probes);
        c.cv_folds = j.value("cv_folds", c.cv_folds);
        c.mc_points = j.value("mc_points", c.mc_points);
        if (j.contains("mode")) c.mode = split_mode_from_string(j.at("mode").get<std::string>());
        c.seed = j.value("seed", c.seed);
        c.margin = j.value("margin", c.margin);
        c.validate();
        return c;
    });
}

json to_json(const SelectionRecord& r) {
    return {{"fold_scores", r.fold_scores},
            {"mean_scores", r.mean_scores},
            {"chosen", r.chosen},
            {"fold_of_row", r.fold_of_row}};
}

SelectionRecord selection_record_from_json(const json& j) {
    return parse_guard("selection record", [&] {
        SelectionRecord r;
        r.fold_scores = j.at("fold_scores").get<std::vector<std::vector<double>>>();
        r.mean_scores = j.at("mean_scores").get<std::vector<double>>();
        r.chosen = j.at("chosen").get<std::size_t>();
        r.fold_of_row = j.at("fold_of_row").get<std::vector<std::uint32_t>>();
        return r;
    });
}

json to_json(const Forest& forest) {
    json trees = json::array();
    for (const auto& t : forest.trees()) trees.push_back(to_json(t));
    json records = json::array();
    for (const auto& r : forest.records()) records.push_back(to_json(r));
    return {{"config", to_json(forest.config())},
            {"bounding_box", to_json(forest.bounding_box())},
            {"trees", std::move(trees)},
            {"selection_records", std::move(records)}};
}

Forest forest_from_json(const json& j) {
    return parse_guard("forest", [&] {
        std::vector<DensityTree> trees;
        for (const auto& t : j.at("trees")) trees.push_back(density_tree_from_json(t));
        std::vector<SelectionRecord> records;
        for (const auto& r : j.value("selection_records", json::array())) records.push_back(selection_record_from_json(r));
        return Forest(forest_config_from_json(j.at("config")), bounding_box_from_json(j.at("bounding_box")),
                      std::move(trees), std::move(records));
    });
}

json to_json(const PreprocessState& s) {
    return {{"input_columns", s.input_columns},
            {"kept", s.kept},
            {"dropped_discrete", s.dropped_discrete},
            {"dropped_correlated", s.dropped_correlated},
            {"dropped_constant", s.dropped_constant},
            {"means", s.means},
            {"stds", s.stds}};
}

PreprocessState preprocess_state_from_json(const json& j) {
    return parse_guard("preprocess state", [&] {
        PreprocessState s;
        s.input_columns = j.at("input_columns").get<std::size_t>();
        s.kept = j.at("kept").get<std::vector<std::size_t>>();
        s.dropped_discrete = j.at("dropped_discrete").get<std::vector<std::size_t>>();
        s.dropped_correlated = j.at("dropped_correlated").get<std::vector<std::size_t>>();
        s.dropped_constant = j.value("dropped_constant", std::vector<std::size_t>{});
        s.means = j.at("means").get<std::vector<double>>();
        s.stds = j.at("stds").get<std::vector<double>>();
        if (s.means.size() != s.kept.size() || s.stds.size() != s.kept.size()) {
            throw IoError("preprocess state: statistics do not match kept columns");
        }
        return s;
    });
}

json to_json(const KdeModel& model) {
    json rows = json::array();
    for (std::size_t r = 0; r < model.data().rows(); ++r) {
        auto x = model.data().row(r);
        rows.push_back(std::vector<double>(x.begin(), x.end()));
    }
    return {{"factor", model.factor()}, {"diagonal_fallback", model.diagonal_fallback()},
            {"bandwidth", model.bandwidth()}, {"data", std::move(rows)}};
}

KdeModel kde_from_json(const json& j) {
    return parse_guard("kde model", [&] {
        Matrix data;
        for (const auto& r : j.at("data")) data.append_row(r.get<std::vector<double>>());
        return KdeModel(std::move(data), j.at("factor").get<double>());
    });
}

json to_json(const SyntheticSpec& spec) { return {{"family", to_string(spec.family)}, {"dim", spec.dim}}; }

SyntheticSpec synthetic_spec_from_json(const json& j) {
    return parse_guard("synthetic spec", [&] {
        return SyntheticSpec{synthetic_family_from_string(j.at("family").get<std::string>()),
                             j.at("dim").get<std::size_t>()};
    });
}

std::string fingerprint(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump() << '\n';
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

}  // namespace brdf::io
