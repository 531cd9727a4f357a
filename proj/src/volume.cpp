#include "brdf/volume.hpp"

#include <stdexcept>

#include "brdf/error.hpp"

namespace brdf {

VolumeTable exact_box_volumes(const Partition& part) {
    if (part.mode() != PartitionMode::axis_parallel) throw ModelError("exact volume unsupported for oblique");
    VolumeTable t;
    t.method = VolumeMethod::exact;
    t.box_volume = part.bounding_box().volume();
    t.volumes.reserve(part.leaf_count());
    for (const Cell& c : part.leaves()) {
        double v = 1.0;
        for (std::size_t i = 0; i < part.dim(); ++i) v *= c.upper[i] - c.lower[i];
        t.volumes.push_back(v);
    }
    return t;
}

VolumeTable monte_carlo_volumes(const Partition& part, std::size_t n_points, Rng& rng, kernels::Exec exec) {
    if (n_points < 1) throw std::invalid_argument("Monte Carlo volume needs at least one point");
    const BoundingBox& box = part.bounding_box();
    const std::size_t d = box.dim();

    // Points are drawn serially so the cloud depends only on the seed.
    Matrix cloud(n_points, d);
    for (std::size_t r = 0; r < n_points; ++r) {
        auto x = cloud.row(r);
        for (std::size_t i = 0; i < d; ++i) x[i] = uniform(rng, box.lower[i], box.upper[i]);
    }
    kernels::LeafCounts lc = kernels::count_leaves(part, cloud, exec);
    if (lc.outside != 0) throw std::logic_error("Monte Carlo point outside its own bounding box");

    VolumeTable t;
    t.method = VolumeMethod::monte_carlo;
    t.mc_points = n_points;
    t.box_volume = box.volume();
    t.hits = std::move(lc.counts);
    t.volumes.reserve(t.hits.size());
    for (auto h : t.hits) {
        t.volumes.push_back(t.box_volume * (static_cast<double>(h) / static_cast<double>(n_points)));
    }
    return t;
}

VolumeTable volumes_for(const Partition& part, std::size_t mc_points, Rng& rng, kernels::Exec exec) {
    if (part.mode() == PartitionMode::axis_parallel) return exact_box_volumes(part);
    return monte_carlo_volumes(part, mc_points, rng, exec);
}

}  // namespace brdf
