#include <doctest.h>

#include <cmath>
#include <numeric>

#include "brdf/error.hpp"
#include "brdf/volume.hpp"
#include "oracles.hpp"

using namespace brdf;

namespace {
BoundingBox unit_box(std::size_t d) { return BoundingBox(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)); }
}

TEST_SUITE("volume") {

TEST_CASE("exact volumes of simple partitions") {
    Partition p0(unit_box(2), PartitionMode::axis_parallel);
    auto t0 = exact_box_volumes(p0);
    REQUIRE(t0.volumes.size() == 1);
    CHECK(t0.volumes[0] == 1.0);
    CHECK(t0.method == VolumeMethod::exact);
    CHECK(t0.mc_points == 0);

    Partition p1(unit_box(1), PartitionMode::axis_parallel);
    p1.split_axis(0, 0, 0.25);
    auto t1 = exact_box_volumes(p1);
    CHECK(t1.volumes[0] == 0.25);
    CHECK(t1.volumes[1] == 0.75);
}

TEST_CASE("exact volumes are conserved on deep partitions") {
    BoundingBox box({-2.0, 0.5, 10.0}, {3.0, 0.75, 40.0});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto part = purely_random_partition(box, 200, rng);
        auto t = exact_box_volumes(part);
        double sum = std::accumulate(t.volumes.begin(), t.volumes.end(), 0.0);
        CHECK(std::abs(sum - box.volume()) <= 1e-9 * box.volume());
        CHECK(t.box_volume == box.volume());
        for (double v : t.volumes) CHECK(v > 0.0);
    }
}

TEST_CASE("exact volumes reject oblique partitions") {
    Partition p(unit_box(2), PartitionMode::oblique);
    CHECK_THROWS_WITH_AS(exact_box_volumes(p), "exact volume unsupported for oblique", ModelError);
}

TEST_CASE("Monte Carlo on a single leaf returns the box volume") {
    BoundingBox box({0.0, 0.0}, {2.0, 3.0});
    Partition p(box, PartitionMode::axis_parallel);
    Rng rng(1);
    auto t = monte_carlo_volumes(p, 500, rng);
    CHECK(t.hits[0] == 500);
    CHECK(t.volumes[0] == 6.0);
    CHECK(t.method == VolumeMethod::monte_carlo);
    CHECK(t.mc_points == 500);
    CHECK_THROWS_AS(monte_carlo_volumes(p, 0, rng), std::invalid_argument);
}

TEST_CASE("Monte Carlo volumes lie within 4 binomial sd of exact volumes") {
    BoundingBox box({0.0, -1.0, 0.0}, {1.0, 1.0, 0.5});
    const std::size_t n = 100000;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng prng(seed), vrng(seed + 100);
        auto part = purely_random_partition(box, 20, prng);
        auto exact = exact_box_volumes(part);
        auto mc = monte_carlo_volumes(part, n, vrng);
        std::uint64_t hits = std::accumulate(mc.hits.begin(), mc.hits.end(), std::uint64_t{0});
        CHECK(hits == n);
        for (std::size_t j = 0; j < exact.volumes.size(); ++j) {
            const double v = exact.volumes[j] / box.volume();
            const double bound = 4.0 * std::sqrt(v * (1.0 - v) / static_cast<double>(n)) * box.volume();
            CHECK(std::abs(mc.volumes[j] - exact.volumes[j]) <= bound);
        }
    }
}

TEST_CASE("Monte Carlo halves of an oblique cut through the centre") {
    Partition p(unit_box(2), PartitionMode::oblique);
    p.split_oblique(0, {1.0, 0.0}, {0.5, 0.5});
    Rng rng(77);
    auto t = monte_carlo_volumes(p, kDefaultMcPoints, rng);
    CHECK(t.volumes[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(t.volumes[0] - 0.5) <= 0.05);
    CHECK(std::abs(t.volumes[1] - 0.5) <= 0.05);
    CHECK(t.hits[0] + t.hits[1] == kDefaultMcPoints);
}

TEST_CASE("Monte Carlo error shrinks as points double") {
    BoundingBox box({0.0, 0.0}, {1.0, 1.0});
    double mad_small = 0.0, mad_large = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng prng(seed);
        auto part = purely_random_partition(box, 15, prng);
        auto exact = exact_box_volumes(part);
        Rng v1(1000 + seed), v2(2000 + seed);
        auto small = monte_carlo_volumes(part, 2000, v1);
        auto large = monte_carlo_volumes(part, 4000, v2);
        for (std::size_t j = 0; j < exact.volumes.size(); ++j) {
            mad_small += std::abs(small.volumes[j] - exact.volumes[j]);
            mad_large += std::abs(large.volumes[j] - exact.volumes[j]);
        }
    }
    MESSAGE("MAD 2000 pts: " << mad_small << "  4000 pts: " << mad_large);
    CHECK(mad_large <= mad_small);
}

TEST_CASE("cells missed by the point cloud get zero volume") {
    Partition p(unit_box(1), PartitionMode::oblique);
    p.split_oblique(0, {1.0}, {1e-9});
    Rng rng(3);
    auto t = monte_carlo_volumes(p, 100, rng);
    CHECK(t.hits[0] == 0);
    CHECK(t.volumes[0] == 0.0);
    CHECK(t.volumes[1] == 1.0);
}

TEST_CASE("volumes_for picks exact or Monte Carlo by mode") {
    Rng rng(1);
    Partition axis(unit_box(2), PartitionMode::axis_parallel);
    CHECK(volumes_for(axis, 100, rng).method == VolumeMethod::exact);
    Partition ob(unit_box(2), PartitionMode::oblique);
    CHECK(volumes_for(ob, 100, rng).method == VolumeMethod::monte_carlo);
}

TEST_CASE("serial and parallel Monte Carlo agree") {
    Rng prng(8);
    auto part = purely_random_partition(unit_box(3), 40, prng);
    Rng a(5), b(5);
    auto s = monte_carlo_volumes(part, 20000, a, kernels::Exec::serial);
    auto p = monte_carlo_volumes(part, 20000, b, kernels::Exec::parallel);
    CHECK(s.hits == p.hits);
    CHECK(s.volumes == p.volumes);
}

}  // TEST_SUITE
