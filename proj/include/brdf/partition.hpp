#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "brdf/matrix.hpp"
#include "brdf/rng.hpp"

namespace brdf {

using LeafId = std::int32_t;
inline constexpr LeafId kOutside = -1;

struct BoundingBox {
    std::vector<double> lower;
    std::vector<double> upper;

    BoundingBox() = default;
    BoundingBox(std::vector<double> lo, std::vector<double> hi);

    std::size_t dim() const noexcept { return lower.size(); }
    double volume() const noexcept;
    bool contains(std::span<const double> x) const noexcept;

    bool operator==(const BoundingBox&) const = default;
};

/// Smallest axis-aligned box holding every row, widened by `margin` times the
/// range on each side. Constant columns are padded by max(1e-6, 1e-6*|v|).
BoundingBox bounding_box_of(const Matrix& data, double margin = 0.0);

enum class PartitionMode { axis_parallel, oblique };

struct AxisSplit {
    LeafId cell = 0;
    std::size_t dimension = 0;
    double proportion = 0.5;
    double threshold = 0.0;  // lower + proportion * (upper - lower) of the split cell
    LeafId lower_child = 0;
    LeafId upper_child = 0;
};

struct ObliqueSplit {
    LeafId cell = 0;
    std::vector<double> normal;
    double offset = 0.0;
    std::vector<double> anchor;
    LeafId lower_child = 0;
    LeafId upper_child = 0;

    double side_value(std::span<const double> x) const noexcept;
};

using Split = std::variant<AxisSplit, ObliqueSplit>;

struct Halfspace {
    std::vector<double> normal;
    double offset = 0.0;
    bool lower_side = true;  // true: <normal, x> + offset <= 0; false: > 0
};

/// A leaf cell. Axis cells carry their exact box; oblique cells carry the
/// bounding box plus the signed halfspaces on the root-to-leaf path.
struct Cell {
    LeafId id = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Halfspace> halfspaces;
};

struct PartitionDiagnostics {
    std::size_t centroid_fallbacks = 0;  // oblique split cell held no probe point
    std::size_t rejected_normals = 0;    // hyperplane left one child empty
    std::size_t skipped_splits = 0;      // 20 rejected normals in a row
    std::size_t no_probe_in_box = 0;     // every probe fell outside the box
};

/// Recursive partition of a bounding box. Splits are applied in order; the
/// lower / <= side keeps the parent's leaf id and owns boundary points, the
/// upper side gets the next free id.
class Partition {
public:
    Partition(BoundingBox box, PartitionMode mode);

    const BoundingBox& bounding_box() const noexcept { return box_; }
    PartitionMode mode() const noexcept { return mode_; }
    std::size_t dim() const noexcept { return box_.dim(); }
    std::size_t leaf_count() const noexcept { return cells_.size(); }
    std::size_t split_count() const noexcept { return splits_.size(); }
    const std::vector<Split>& splits() const noexcept { return splits_; }
    const std::vector<Cell>& leaves() const noexcept { return cells_; }
    const Cell& leaf(LeafId id) const { return cells_.at(static_cast<std::size_t>(id)); }
    const PartitionDiagnostics& diagnostics() const noexcept { return diagnostics_; }
    PartitionDiagnostics& diagnostics() noexcept { return diagnostics_; }

    /// Cut `leaf` along `dimension` so the lower child's length is
    /// `proportion` of the parent's. Axis mode only.
    const AxisSplit& split_axis(LeafId leaf, std::size_t dimension, double proportion);

    /// Cut `leaf` by the hyperplane <normal, x> - <normal, anchor> = 0. Oblique mode only.
    const ObliqueSplit& split_oblique(LeafId leaf, std::vector<double> normal, std::vector<double> anchor);

    /// Replays a stored oblique split with its recorded offset.
    const ObliqueSplit& split_oblique_exact(LeafId leaf, std::vector<double> normal, double offset,
                                            std::vector<double> anchor);

    /// True when both children of the proposed hyperplane through `anchor`
    /// contain points of the cell.
    bool oblique_split_is_proper(LeafId leaf, std::span<const double> normal,
                                 std::span<const double> anchor) const;

    /// Leaf containing x, or kOutside when x is outside the bounding box.
    LeafId locate(std::span<const double> x) const noexcept;

    /// Membership test from the leaf's own cell description (no tree walk).
    bool cell_contains(LeafId id, std::span<const double> x) const noexcept;

private:
    struct Node {
        std::int32_t split = -1;  // index into splits_, -1 for a leaf
        std::int32_t lower = -1;
        std::int32_t upper = -1;
        LeafId leaf = 0;
    };

    std::pair<std::int32_t, std::int32_t> grow(LeafId leaf, std::int32_t split_index);

    BoundingBox box_;
    PartitionMode mode_;
    std::vector<Split> splits_;
    std::vector<Cell> cells_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> leaf_node_;  // leaf id -> node index
    PartitionDiagnostics diagnostics_;
};

Partition purely_random_partition(const BoundingBox& box, std::size_t splits, Rng& rng);

/// Each split cell is the modal leaf of `probes` training rows drawn with
/// replacement (ties to the smallest id); dimension and proportion as in the
/// purely random rule.
Partition adaptive_partition(const BoundingBox& box, std::size_t splits, std::size_t probes,
                             const Matrix& data, Rng& rng);

/// Modal-leaf selection as above, then a hyperplane with normal drawn from
/// U[-1,1]^d through the centroid of the probes that landed in the leaf.
Partition adaptive_oblique_partition(const BoundingBox& box, std::size_t splits, std::size_t probes,
                                     const Matrix& data, Rng& rng);

}  // namespace brdf
