#include "brdf/density_tree.hpp"

#include <stdexcept>

#include "brdf/error.hpp"

namespace brdf {

DensityTree::DensityTree(Partition partition, VolumeTable volumes, std::vector<std::uint64_t> counts,
                         std::uint64_t n_train, std::uint64_t n_outside)
    : partition_(std::move(partition)),
      volumes_(std::move(volumes)),
      counts_(std::move(counts)),
      n_train_(n_train),
      n_outside_(n_outside) {
    if (volumes_.volumes.size() != partition_.leaf_count() || counts_.size() != partition_.leaf_count()) {
        throw std::invalid_argument("partition, volume table and counts disagree on leaf count");
    }
    std::uint64_t in_box = 0;
    for (auto c : counts_) in_box += c;
    if (in_box + n_outside_ != n_train_) throw std::invalid_argument("counts do not add up to n_train");
}

double DensityTree::outside_fraction() const noexcept {
    return n_train_ == 0 ? 0.0 : static_cast<double>(n_outside_) / static_cast<double>(n_train_);
}

double DensityTree::leaf_density(LeafId leaf) const noexcept {
    if (leaf == kOutside) return 0.0;
    const auto j = static_cast<std::size_t>(leaf);
    return cell_density(counts_[j], n_train_, volumes_.volumes[j]);
}

double DensityTree::eval(std::span<const double> x) const noexcept { return leaf_density(partition_.locate(x)); }

double DensityTree::integrate() const noexcept {
    double total = 0.0;
    for (std::size_t j = 0; j < counts_.size(); ++j) {
        total += leaf_density(static_cast<LeafId>(j)) * volumes_.volumes[j];
    }
    return total;
}

std::size_t DensityTree::massive_zero_volume_leaves() const noexcept {
    std::size_t n = 0;
    for (std::size_t j = 0; j < counts_.size(); ++j) {
        if (counts_[j] > 0 && !(volumes_.volumes[j] > 0.0)) ++n;
    }
    return n;
}

DensityTree fit_tree(Partition partition, VolumeTable volumes, const Matrix& data, kernels::Exec exec) {
    if (data.rows() < 1) throw std::invalid_argument("fit_tree needs at least one row");
    if (data.cols() != partition.dim()) throw std::invalid_argument("data dimension does not match partition");
    kernels::LeafCounts lc = kernels::count_leaves(partition, data, exec);
    if (lc.outside == data.rows()) throw ModelError("no in-box training data");
    return DensityTree(std::move(partition), std::move(volumes), std::move(lc.counts), data.rows(), lc.outside);
}

}  // namespace brdf
