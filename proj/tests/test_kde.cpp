#include <doctest.h>

#include <cmath>

#include "brdf/datasets.hpp"
#include "brdf/kde.hpp"

using namespace brdf;

TEST_SUITE("kde") {

TEST_CASE("Scott factor") {
    CHECK(std::abs(scott_factor(100, 1) - 0.3981071705534972) <= 1e-15);
    CHECK(scott_factor(2000, 2) == doctest::Approx(std::pow(2000.0, -1.0 / 6.0)));
    Rng rng(1);
    auto x = sample_synthetic({SyntheticFamily::type1, 1}, 100, rng);
    CHECK(fit_kde(x).factor() == scott_factor(100, 1));
}

TEST_CASE("bandwidth is factor squared times the unbiased covariance") {
    Matrix x{{0.0, 1.0}, {1.0, 0.0}, {2.0, 3.0}, {4.0, 1.0}};
    KdeModel m(x, 0.5);
    // unbiased covariance of the rows above
    const double mx = 1.75, my = 1.25;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t r = 0; r < 4; ++r) {
        sxx += (x(r, 0) - mx) * (x(r, 0) - mx);
        syy += (x(r, 1) - my) * (x(r, 1) - my);
        sxy += (x(r, 0) - mx) * (x(r, 1) - my);
    }
    const auto& h = m.bandwidth();
    CHECK(h[0] == doctest::Approx(0.25 * sxx / 3.0).epsilon(1e-12));
    CHECK(h[3] == doctest::Approx(0.25 * syy / 3.0).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(0.25 * sxy / 3.0).epsilon(1e-12));
    CHECK(h[2] == h[1]);
    CHECK_FALSE(m.diagonal_fallback());
}

TEST_CASE("singular covariance falls back to the diagonal") {
    Matrix x;
    for (int r = 0; r < 50; ++r) x.append_row(std::vector<double>{r * 0.1, r * 0.2});
    KdeModel m(x);
    CHECK(m.diagonal_fallback());
    CHECK(m.bandwidth()[1] == 0.0);
    CHECK(std::isfinite(m.eval(std::vector<double>{1.0, 2.0})));
    CHECK(m.eval(std::vector<double>{1.0, 2.0}) > 0.0);
}

TEST_CASE("single point with fixed bandwidth") {
    const double h = 0.7;
    auto m = KdeModel::with_bandwidth(Matrix{{0.0}}, {h * h});
    CHECK(std::abs(m.eval(std::vector<double>{0.0}) - 0.3989422804014327 / h) <= 1e-15);
    CHECK(m.factor() == 1.0);
    CHECK_THROWS_AS(KdeModel::with_bandwidth(Matrix{{0.0}}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(KdeModel::with_bandwidth(Matrix{{0.0}}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("density integrates to one") {
    Rng rng(2);
    auto x1 = sample_synthetic({SyntheticFamily::type2, 1}, 200, rng);
    auto k1 = fit_kde(x1);
    double s = 0.0;
    const double a = -2.0, b = 3.0;
    const int cells = 20000;
    const double w = (b - a) / cells;
    for (int i = 0; i < cells; ++i) s += k1.eval(std::vector<double>{a + (i + 0.5) * w});
    CHECK(std::abs(s * w - 1.0) <= 1e-4);

    auto x2 = sample_synthetic({SyntheticFamily::type1, 2}, 100, rng);
    auto k2 = fit_kde(x2);
    const int g = 400;
    const double lo = -1.5, hi = 2.5, w2 = (hi - lo) / g;
    double s2 = 0.0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) s2 += k2.eval(std::vector<double>{lo + (i + 0.5) * w2, lo + (j + 0.5) * w2});
    CHECK(std::abs(s2 * w2 * w2 - 1.0) <= 1e-4);
}

TEST_CASE("symmetric data gives a symmetric density") {
    Matrix x{{-1.0}, {1.0}, {-0.3}, {0.3}};
    auto k = fit_kde(x);
    for (double a : {0.0, 0.2, 0.9, 2.5}) {
        CHECK(std::abs(k.eval(std::vector<double>{a}) - k.eval(std::vector<double>{-a})) <= 1e-15);
    }
}

TEST_CASE("translation invariance") {
    Rng rng(3);
    auto x = sample_synthetic({SyntheticFamily::type2, 2}, 80, rng);
    Matrix shifted = x;
    for (std::size_t r = 0; r < shifted.rows(); ++r) {
        shifted(r, 0) += 3.0;
        shifted(r, 1) -= 2.0;
    }
    auto a = fit_kde(x), b = fit_kde(shifted);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> p{uniform01(rng), uniform01(rng)};
        std::vector<double> q{p[0] + 3.0, p[1] - 2.0};
        CHECK(std::abs(a.eval(p) - b.eval(q)) <= 1e-12 * std::max(1.0, a.eval(p)));
    }
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(fit_kde(Matrix{{1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(KdeModel(Matrix{{1.0}, {2.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("serial and parallel batches agree") {
    Rng rng(4);
    auto x = sample_synthetic({SyntheticFamily::type1, 3}, 300, rng);
    auto pts = sample_synthetic({SyntheticFamily::type2, 3}, 500, rng);
    auto k = fit_kde(x);
    CHECK(k.eval_batch(pts, kernels::Exec::serial) == k.eval_batch(pts, kernels::Exec::parallel));
}

}  // TEST_SUITE
