#include <doctest.h>

#include "brdf/datasets.hpp"
#include "brdf/forest.hpp"
#include "brdf/kernels.hpp"

using namespace brdf;
using kernels::Exec;

TEST_SUITE("kernels") {

TEST_CASE("locate and count agree across implementations") {
    Rng rng(1);
    auto data = sample_synthetic({SyntheticFamily::type1, 3}, 4000, rng);
    auto box = bounding_box_of(data);
    auto probes = sample_synthetic({SyntheticFamily::type2, 3}, 20000, rng);
    for (std::size_t r = 0; r < 500; ++r) probes(r, 0) += 1.0;  // some rows outside
    for (auto part : {adaptive_partition(box, 150, 20, data, rng), adaptive_oblique_partition(box, 150, 20, data, rng)}) {
        std::vector<LeafId> s(probes.rows()), p(probes.rows());
        for (int workers : {1, 2, 4, 8}) {
            kernels::set_workers(workers);
            kernels::locate_rows(part, probes, s, Exec::serial);
            kernels::locate_rows(part, probes, p, Exec::parallel);
            CHECK(s == p);
            auto cs = kernels::count_leaves(part, probes, Exec::serial);
            auto cp = kernels::count_leaves(part, probes, Exec::parallel);
            CHECK(cs.counts == cp.counts);
            CHECK(cs.outside == cp.outside);
            auto t = kernels::tally(s, part.leaf_count());
            CHECK(t.counts == cs.counts);
            CHECK(t.outside == cs.outside);
        }
        for (std::size_t r = 0; r < probes.rows(); ++r) REQUIRE(s[r] == part.locate(probes.row(r)));
    }
    kernels::set_workers(0);
}

TEST_CASE("forest batch evaluation agrees across implementations") {
    Rng rng(2);
    auto data = sample_synthetic({SyntheticFamily::type2, 2}, 1000, rng);
    ForestConfig cfg;
    cfg.trees = 5;
    cfg.candidates = 2;
    cfg.splits = 40;
    cfg.cv_folds = 5;
    cfg.mc_points = 500;
    cfg.mode = SplitMode::adaptive_oblique;
    auto forest = fit_forest(data, cfg);
    auto pts = sample_synthetic({SyntheticFamily::type1, 2}, 5000, rng);
    auto s = forest.eval_batch(pts, Exec::serial);
    auto p = forest.eval_batch(pts, Exec::parallel);
    CHECK(s == p);
    for (std::size_t r = 0; r < 100; ++r) CHECK(s[r] == forest.eval(pts.row(r)));
}

TEST_CASE("Monte Carlo volumes agree across implementations") {
    Rng rng(3);
    auto data = sample_synthetic({SyntheticFamily::type1, 2}, 1000, rng);
    auto part = adaptive_oblique_partition(bounding_box_of(data), 60, 20, data, rng);
    Rng a(9), b(9);
    auto vs = monte_carlo_volumes(part, 20000, a, Exec::serial);
    auto vp = monte_carlo_volumes(part, 20000, b, Exec::parallel);
    CHECK(vs.hits == vp.hits);
    CHECK(vs.volumes == vp.volumes);
}

}  // TEST_SUITE
