#include "brdf/kernels.hpp"

#include <omp.h>

namespace brdf::kernels {

void locate_rows_serial(const Partition& part, const Matrix& rows, std::span<LeafId> out) {
    for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = part.locate(rows.row(i));
}

void locate_rows_parallel(const Partition& part, const Matrix& rows, std::span<LeafId> out) {
    const auto n = static_cast<std::int64_t>(rows.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = part.locate(rows.row(static_cast<std::size_t>(i)));
    }
}

LeafCounts tally(std::span<const LeafId> leaf_of_row, std::size_t leaf_count) {
    LeafCounts lc{std::vector<std::uint64_t>(leaf_count, 0), 0};
    for (LeafId id : leaf_of_row) {
        if (id == kOutside) {
            ++lc.outside;
        } else {
            ++lc.counts[static_cast<std::size_t>(id)];
        }
    }
    return lc;
}

LeafCounts count_leaves_serial(const Partition& part, const Matrix& rows) {
    LeafCounts lc{std::vector<std::uint64_t>(part.leaf_count(), 0), 0};
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        LeafId id = part.locate(rows.row(i));
        if (id == kOutside) {
            ++lc.outside;
        } else {
            ++lc.counts[static_cast<std::size_t>(id)];
        }
    }
    return lc;
}

LeafCounts count_leaves_parallel(const Partition& part, const Matrix& rows) {
    const std::size_t leaves = part.leaf_count();
    const auto n = static_cast<std::int64_t>(rows.rows());
    LeafCounts total{std::vector<std::uint64_t>(leaves, 0), 0};
    // Integer histograms: the merge order cannot change the result.
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(leaves, 0);
        std::uint64_t outside = 0;
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            LeafId id = part.locate(rows.row(static_cast<std::size_t>(i)));
            if (id == kOutside) {
                ++outside;
            } else {
                ++local[static_cast<std::size_t>(id)];
            }
        }
#pragma omp critical(brdf_count_merge)
        {
            for (std::size_t j = 0; j < leaves; ++j) total.counts[j] += local[j];
            total.outside += outside;
        }
    }
    return total;
}

int default_workers() { return omp_get_max_threads(); }

void set_workers(int workers) {
    if (workers > 0) omp_set_num_threads(workers);
}

}  // namespace brdf::kernels
