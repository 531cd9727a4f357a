#pragma once

#include <cstdint>
#include <vector>

#include "brdf/kernels.hpp"
#include "brdf/partition.hpp"
#include "brdf/rng.hpp"

namespace brdf {

enum class VolumeMethod { exact, monte_carlo };

inline constexpr std::size_t kDefaultMcPoints = 2000;

/// Per-leaf Lebesgue measure. Monte Carlo tables also keep the raw hit
/// counts, which sum to mc_points exactly.
struct VolumeTable {
    std::vector<double> volumes;
    std::vector<std::uint64_t> hits;  // empty for exact tables
    VolumeMethod method = VolumeMethod::exact;
    std::size_t mc_points = 0;
    double box_volume = 0.0;
};

VolumeTable exact_box_volumes(const Partition& part);

/// Uniform point cloud on the bounding box; volume_j = box_volume * hits_j / n_points.
VolumeTable monte_carlo_volumes(const Partition& part, std::size_t n_points, Rng& rng,
                                kernels::Exec exec = kernels::Exec::serial);

/// Exact volumes for axis partitions, Monte Carlo for oblique ones.
VolumeTable volumes_for(const Partition& part, std::size_t mc_points, Rng& rng,
                        kernels::Exec exec = kernels::Exec::serial);

}  // namespace brdf
