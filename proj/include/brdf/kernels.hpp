#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "brdf/matrix.hpp"
#include "brdf/partition.hpp"

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; both must produce identical results for any thread count.
namespace brdf::kernels {

enum class Exec { serial, parallel };

struct LeafCounts {
    std::vector<std::uint64_t> counts;  // per leaf
    std::uint64_t outside = 0;          // rows outside the bounding box
};

void locate_rows_serial(const Partition& part, const Matrix& rows, std::span<LeafId> out);
void locate_rows_parallel(const Partition& part, const Matrix& rows, std::span<LeafId> out);

LeafCounts count_leaves_serial(const Partition& part, const Matrix& rows);
LeafCounts count_leaves_parallel(const Partition& part, const Matrix& rows);

inline void locate_rows(const Partition& part, const Matrix& rows, std::span<LeafId> out, Exec exec) {
    exec == Exec::serial ? locate_rows_serial(part, rows, out) : locate_rows_parallel(part, rows, out);
}

inline LeafCounts count_leaves(const Partition& part, const Matrix& rows, Exec exec) {
    return exec == Exec::serial ? count_leaves_serial(part, rows) : count_leaves_parallel(part, rows);
}

/// Histogram of precomputed leaf ids.
LeafCounts tally(std::span<const LeafId> leaf_of_row, std::size_t leaf_count);

/// Threads used by parallel kernels when no explicit count is set.
int default_workers();

/// Sets the OpenMP thread count for subsequent parallel kernels (0 keeps the runtime default).
void set_workers(int workers);

}  // namespace brdf::kernels
