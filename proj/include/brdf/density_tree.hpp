#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "brdf/kernels.hpp"
#include "brdf/partition.hpp"
#include "brdf/volume.hpp"

namespace brdf {

/// Piecewise-constant density: count_j / (n_train * volume_j) on leaf j,
/// zero outside the bounding box and on zero-volume leaves.
class DensityTree {
public:
    DensityTree(Partition partition, VolumeTable volumes, std::vector<std::uint64_t> counts,
                std::uint64_t n_train, std::uint64_t n_outside);

    const Partition& partition() const noexcept { return partition_; }
    const VolumeTable& volumes() const noexcept { return volumes_; }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::uint64_t n_train() const noexcept { return n_train_; }
    std::uint64_t n_outside() const noexcept { return n_outside_; }
    double outside_fraction() const noexcept;

    double leaf_density(LeafId leaf) const noexcept;
    double eval(std::span<const double> x) const noexcept;
    double integrate() const noexcept;

    /// Leaves with training mass but zero (Monte Carlo) volume; their mass is lost.
    std::size_t massive_zero_volume_leaves() const noexcept;

private:
    Partition partition_;
    VolumeTable volumes_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_train_;
    std::uint64_t n_outside_;
};

DensityTree fit_tree(Partition partition, VolumeTable volumes, const Matrix& data,
                     kernels::Exec exec = kernels::Exec::serial);

/// Leaf density as computed everywhere in the library, so that cross-validation
/// shortcuts and refitted trees agree bit for bit.
inline double cell_density(std::uint64_t count, std::uint64_t n, double volume) noexcept {
    if (!(volume > 0.0) || n == 0) return 0.0;
    return static_cast<double>(count) / (static_cast<double>(n) * volume);
}

}  // namespace brdf
