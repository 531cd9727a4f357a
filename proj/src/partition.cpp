#include "brdf/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "brdf/error.hpp"

namespace brdf {

BoundingBox::BoundingBox(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.empty() || lower.size() != upper.size()) {
        throw std::invalid_argument("bounding box needs matching non-empty bounds");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(upper[i] > lower[i])) throw std::invalid_argument("bounding box side must have upper > lower");
    }
}

double BoundingBox::volume() const noexcept {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
}

bool BoundingBox::contains(std::span<const double> x) const noexcept {
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
}

BoundingBox bounding_box_of(const Matrix& data, double margin) {
    if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("empty dataset");
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw std::invalid_argument("margin must be a nonnegative real");
    const std::size_t d = data.cols();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        auto x = data.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            if (!std::isfinite(x[i])) throw std::invalid_argument("non-finite input");
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        double range = hi[i] - lo[i];
        if (range > 0.0) {
            lo[i] -= margin * range;
            hi[i] += margin * range;
        } else {
            double pad = std::max(1e-6, 1e-6 * std::abs(lo[i]));
            lo[i] -= pad;
            hi[i] += pad;
        }
    }
    return BoundingBox(std::move(lo), std::move(hi));
}

double ObliqueSplit::side_value(std::span<const double> x) const noexcept {
    double s = offset;
    for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * x[i];
    return s;
}

Partition::Partition(BoundingBox box, PartitionMode mode) : box_(std::move(box)), mode_(mode) {
    if (box_.dim() == 0) throw std::invalid_argument("bounding box has no dimensions");
    cells_.push_back(Cell{0, box_.lower, box_.upper, {}});
    nodes_.push_back(Node{});
    leaf_node_.push_back(0);
}

std::pair<std::int32_t, std::int32_t> Partition::grow(LeafId leaf, std::int32_t split_index) {
    const auto parent = leaf_node_[static_cast<std::size_t>(leaf)];
    const auto lower = static_cast<std::int32_t>(nodes_.size());
    const auto upper = lower + 1;
    const auto upper_leaf = static_cast<LeafId>(cells_.size());
    nodes_.push_back(Node{-1, -1, -1, leaf});
    nodes_.push_back(Node{-1, -1, -1, upper_leaf});
    nodes_[static_cast<std::size_t>(parent)].split = split_index;
    nodes_[static_cast<std::size_t>(parent)].lower = lower;
    nodes_[static_cast<std::size_t>(parent)].upper = upper;
    leaf_node_[static_cast<std::size_t>(leaf)] = lower;
    leaf_node_.push_back(upper);
    return {leaf, upper_leaf};
}

const AxisSplit& Partition::split_axis(LeafId leaf, std::size_t dimension, double proportion) {
    if (mode_ != PartitionMode::axis_parallel) throw std::logic_error("axis split on an oblique partition");
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= cells_.size()) throw std::out_of_range("leaf id");
    if (dimension >= dim()) throw std::invalid_argument("split dimension out of range");
    if (!(proportion > 0.0 && proportion < 1.0)) throw std::invalid_argument("split proportion must lie in (0, 1)");

    const Cell& parent = cells_[static_cast<std::size_t>(leaf)];
    const double lo = parent.lower[dimension];
    const double hi = parent.upper[dimension];
    const double threshold = lo + proportion * (hi - lo);
    if (!(threshold > lo && threshold < hi)) throw std::invalid_argument("split collapses a cell side");

    Cell upper_cell = parent;
    upper_cell.lower[dimension] = threshold;
    cells_[static_cast<std::size_t>(leaf)].upper[dimension] = threshold;

    auto [lo_id, hi_id] = grow(leaf, static_cast<std::int32_t>(splits_.size()));
    upper_cell.id = hi_id;
    cells_.push_back(std::move(upper_cell));
    splits_.emplace_back(AxisSplit{leaf, dimension, proportion, threshold, lo_id, hi_id});
    return std::get<AxisSplit>(splits_.back());
}

const ObliqueSplit& Partition::split_oblique(LeafId leaf, std::vector<double> normal, std::vector<double> anchor) {
    double offset = 0.0;
    for (std::size_t i = 0; i < normal.size() && i < anchor.size(); ++i) offset -= normal[i] * anchor[i];
    return split_oblique_exact(leaf, std::move(normal), offset, std::move(anchor));
}

const ObliqueSplit& Partition::split_oblique_exact(LeafId leaf, std::vector<double> normal, double offset,
                                                   std::vector<double> anchor) {
    if (mode_ != PartitionMode::oblique) throw std::logic_error("oblique split on an axis-parallel partition");
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= cells_.size()) throw std::out_of_range("leaf id");
    if (normal.size() != dim() || anchor.size() != dim()) throw std::invalid_argument("normal/anchor dimension mismatch");
    if (std::all_of(normal.begin(), normal.end(), [](double w) { return w == 0.0; })) {
        throw std::invalid_argument("zero normal vector");
    }

    Cell& parent = cells_[static_cast<std::size_t>(leaf)];
    Cell upper_cell = parent;
    parent.halfspaces.push_back(Halfspace{normal, offset, true});
    upper_cell.halfspaces.push_back(Halfspace{normal, offset, false});

    auto [lo_id, hi_id] = grow(leaf, static_cast<std::int32_t>(splits_.size()));
    upper_cell.id = hi_id;
    cells_.push_back(std::move(upper_cell));
    splits_.emplace_back(ObliqueSplit{leaf, std::move(normal), offset, std::move(anchor), lo_id, hi_id});
    return std::get<ObliqueSplit>(splits_.back());
}

bool Partition::oblique_split_is_proper(LeafId leaf, std::span<const double> normal,
                                        std::span<const double> anchor) const {
    double norm2 = 0.0;
    for (double w : normal) norm2 += w * w;
    if (!(norm2 > 0.0)) return false;
    double diag2 = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        double s = box_.upper[i] - box_.lower[i];
        diag2 += s * s;
    }
    const double step = 1e-7 * std::sqrt(diag2 / norm2);
    std::vector<double> above(anchor.begin(), anchor.end());
    std::vector<double> below(anchor.begin(), anchor.end());
    for (std::size_t i = 0; i < dim(); ++i) {
        above[i] += step * normal[i];
        below[i] -= step * normal[i];
    }
    return cell_contains(leaf, above) && cell_contains(leaf, below);
}

LeafId Partition::locate(std::span<const double> x) const noexcept {
    if (!box_.contains(x)) return kOutside;
    std::size_t node = 0;
    while (nodes_[node].split >= 0) {
        const Split& s = splits_[static_cast<std::size_t>(nodes_[node].split)];
        bool lower;
        if (const auto* a = std::get_if<AxisSplit>(&s)) {
            lower = x[a->dimension] <= a->threshold;
        } else {
            lower = std::get<ObliqueSplit>(s).side_value(x) <= 0.0;
        }
        node = static_cast<std::size_t>(lower ? nodes_[node].lower : nodes_[node].upper);
    }
    return nodes_[node].leaf;
}

bool Partition::cell_contains(LeafId id, std::span<const double> x) const noexcept {
    if (id < 0 || static_cast<std::size_t>(id) >= cells_.size()) return false;
    if (!box_.contains(x)) return false;
    const Cell& c = cells_[static_cast<std::size_t>(id)];
    for (std::size_t i = 0; i < dim(); ++i) {
        if (x[i] > c.upper[i]) return false;
        if (x[i] < c.lower[i]) return false;
        if (x[i] == c.lower[i] && c.lower[i] != box_.lower[i]) return false;
    }
    for (const auto& h : c.halfspaces) {
        double s = h.offset;
        for (std::size_t i = 0; i < dim(); ++i) s += h.normal[i] * x[i];
        if (h.lower_side != (s <= 0.0)) return false;
    }
    return true;
}

namespace {

constexpr int kMaxNormalDraws = 20;
constexpr int kMaxReselects = 20;

void random_axis_cut(Partition& part, LeafId leaf, Rng& rng) {
    const std::size_t d = part.dim();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const std::size_t dim = uniform_index(rng, d);
        const double s = uniform01(rng);
        const Cell& c = part.leaf(leaf);
        const double lo = c.lower[dim];
        const double hi = c.upper[dim];
        const double thr = lo + s * (hi - lo);
        if (s > 0.0 && thr > lo && thr < hi) {
            part.split_axis(leaf, dim, s);
            return;
        }
    }
    throw ModelError("cell too small to split");
}

struct ProbeResult {
    LeafId leaf = kOutside;
    std::vector<std::size_t> rows;  // probe rows that fell in `leaf`
};

ProbeResult modal_leaf(const Partition& part, std::size_t probes, const Matrix& data, Rng& rng) {
    std::vector<std::size_t> drawn(probes);
    std::vector<LeafId> where(probes);
    std::vector<std::size_t> counts(part.leaf_count(), 0);
    for (std::size_t j = 0; j < probes; ++j) {
        drawn[j] = uniform_index(rng, data.rows());
        where[j] = part.locate(data.row(drawn[j]));
        if (where[j] != kOutside) ++counts[static_cast<std::size_t>(where[j])];
    }
    ProbeResult out;
    std::size_t best = 0;
    for (std::size_t id = 0; id < counts.size(); ++id) {
        if (counts[id] > best) {
            best = counts[id];
            out.leaf = static_cast<LeafId>(id);
        }
    }
    if (out.leaf != kOutside) {
        for (std::size_t j = 0; j < probes; ++j) {
            if (where[j] == out.leaf) out.rows.push_back(drawn[j]);
        }
    }
    return out;
}

void check_adaptive_args(const BoundingBox& box, std::size_t probes, const Matrix& data) {
    if (probes < 1) throw std::invalid_argument("probe count t must be >= 1");
    if (data.rows() < 1) throw std::invalid_argument("adaptive partition needs at least one training row");
    if (data.cols() != box.dim()) throw std::invalid_argument("data dimension does not match bounding box");
}

}  // namespace

Partition purely_random_partition(const BoundingBox& box, std::size_t splits, Rng& rng) {
    Partition part(box, PartitionMode::axis_parallel);
    for (std::size_t i = 0; i < splits; ++i) {
        auto leaf = static_cast<LeafId>(uniform_index(rng, part.leaf_count()));
        random_axis_cut(part, leaf, rng);
    }
    return part;
}

Partition adaptive_partition(const BoundingBox& box, std::size_t splits, std::size_t probes, const Matrix& data,
                             Rng& rng) {
    check_adaptive_args(box, probes, data);
    Partition part(box, PartitionMode::axis_parallel);
    for (std::size_t i = 0; i < splits; ++i) {
        LeafId leaf = modal_leaf(part, probes, data, rng).leaf;
        if (leaf == kOutside) {
            ++part.diagnostics().no_probe_in_box;
            leaf = static_cast<LeafId>(uniform_index(rng, part.leaf_count()));
        }
        random_axis_cut(part, leaf, rng);
    }
    return part;
}

Partition adaptive_oblique_partition(const BoundingBox& box, std::size_t splits, std::size_t probes,
                                     const Matrix& data, Rng& rng) {
    check_adaptive_args(box, probes, data);
    const std::size_t d = box.dim();
    Partition part(box, PartitionMode::oblique);
    for (std::size_t i = 0; i < splits; ++i) {
        bool done = false;
        for (int reselect = 0; reselect < kMaxReselects && !done; ++reselect) {
            ProbeResult probe = modal_leaf(part, probes, data, rng);
            LeafId leaf = probe.leaf;
            if (leaf == kOutside) {
                ++part.diagnostics().no_probe_in_box;
                leaf = static_cast<LeafId>(uniform_index(rng, part.leaf_count()));
            }
            std::vector<double> anchor(d, 0.0);
            if (!probe.rows.empty()) {
                for (auto r : probe.rows) {
                    auto x = data.row(r);
                    for (std::size_t k = 0; k < d; ++k) anchor[k] += x[k];
                }
                for (auto& a : anchor) a /= static_cast<double>(probe.rows.size());
            } else {
                ++part.diagnostics().centroid_fallbacks;
                const Cell& c = part.leaf(leaf);
                for (std::size_t k = 0; k < d; ++k) anchor[k] = 0.5 * (c.lower[k] + c.upper[k]);
            }
            for (int draw = 0; draw < kMaxNormalDraws; ++draw) {
                std::vector<double> normal(d);
                for (auto& w : normal) w = uniform(rng, -1.0, 1.0);
                if (part.oblique_split_is_proper(leaf, normal, anchor)) {
                    part.split_oblique(leaf, std::move(normal), anchor);
                    done = true;
                    break;
                }
                ++part.diagnostics().rejected_normals;
            }
            if (!done) ++part.diagnostics().skipped_splits;
        }
        if (!done) break;
    }
    return part;
}

}  // namespace brdf
