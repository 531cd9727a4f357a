#pragma once

// Test-only reference implementations, kept independent of the library's
// tree walk and fast paths.

#include <cmath>
#include <vector>

#include "brdf/partition.hpp"

namespace oracle {

// Membership from the leaf's own description: axis cells are half-open
// (lower, upper] except on the bounding box's lower face; oblique cells are
// the box intersected with their signed halfspaces.
inline bool leaf_contains(const brdf::Partition& part, const brdf::Cell& c, std::span<const double> x) {
    const auto& box = part.bounding_box();
    for (std::size_t i = 0; i < part.dim(); ++i) {
        if (x[i] < box.lower[i] || x[i] > box.upper[i]) return false;
    }
    if (part.mode() == brdf::PartitionMode::axis_parallel) {
        for (std::size_t i = 0; i < part.dim(); ++i) {
            const bool on_outer_face = c.lower[i] == box.lower[i];
            const bool above_lower = on_outer_face ? x[i] >= c.lower[i] : x[i] > c.lower[i];
            if (!above_lower || x[i] > c.upper[i]) return false;
        }
        return true;
    }
    for (const auto& h : c.halfspaces) {
        double v = h.offset;
        for (std::size_t i = 0; i < part.dim(); ++i) v += h.normal[i] * x[i];
        if (h.lower_side && !(v <= 0.0)) return false;
        if (!h.lower_side && !(v > 0.0)) return false;
    }
    return true;
}

// Every leaf whose predicate accepts x.
inline std::vector<brdf::LeafId> matching_leaves(const brdf::Partition& part, std::span<const double> x) {
    std::vector<brdf::LeafId> out;
    for (const auto& c : part.leaves()) {
        if (leaf_contains(part, c, x)) out.push_back(c.id);
    }
    return out;
}

inline double box_volume(const std::vector<double>& lo, const std::vector<double>& hi) {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

}  // namespace oracle
