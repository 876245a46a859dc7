#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "kmt/dist/catalog.hpp"
#include "kmt/dist/lattice_mixture.hpp"
#include "kmt/math/normal.hpp"

using kmt::dist::ConvolveOptions;
using kmt::dist::LatticeGaussianMixture;
using kmt::dist::convolve;

namespace {

std::vector<LatticeGaussianMixture> law_catalog() {
    std::vector<LatticeGaussianMixture> v;
    v.push_back(LatticeGaussianMixture::rademacher());
    v.push_back(LatticeGaussianMixture::gaussian(1.0));
    v.push_back(LatticeGaussianMixture::rademacher().smeared(1.0));
    v.push_back(LatticeGaussianMixture::from_positions(
        1.0, 0.0, std::vector<std::pair<double, double>>{{-2.0, 0.2}, {0.0, 0.5}, {2.0, 0.3}},
        0.25));
    v.push_back(LatticeGaussianMixture::from_positions(
        0.5, 0.0, std::vector<std::pair<double, double>>{{-1.5, 0.4}, {0.5, 0.4}, {2.0, 0.2}}));
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("dist");

TEST_CASE("make_lattice canonical Rademacher") {
    auto d = LatticeGaussianMixture::from_positions(
        2.0, -1.0, std::vector<std::pair<double, double>>{{-1.0, 0.5}, {1.0, 0.5}});
    CHECK(d.atoms().size() == 2);
    CHECK(d.mean() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.variance() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.purely_discrete());
    // same law described on a finer lattice canonicalizes identically
    auto d2 = LatticeGaussianMixture::from_positions(
        1.0, 0.0, std::vector<std::pair<double, double>>{{-1.0, 0.5}, {1.0, 0.5}});
    CHECK(d2.step() == doctest::Approx(2.0));
    CHECK(d2.position(d2.atoms().front().index) == doctest::Approx(-1.0));
}

TEST_CASE("make_lattice point mass and rejections") {
    auto p = LatticeGaussianMixture::point_mass(0.0);
    CHECK(p.variance() == 0.0);
    CHECK(p.mean() == 0.0);

    std::vector<std::pair<double, double>> off = {{0.5, 1.0}};
    CHECK_THROWS_AS(LatticeGaussianMixture::from_positions(1.0, 0.0, off),
                    std::invalid_argument);
    std::vector<std::pair<double, double>> bad_w = {{0.0, -0.2}, {1.0, 1.2}};
    CHECK_THROWS_AS(LatticeGaussianMixture::from_positions(1.0, 0.0, bad_w),
                    std::invalid_argument);
    std::vector<std::pair<double, double>> bad_sum = {{0.0, 0.4}, {1.0, 0.4}};
    CHECK_THROWS_AS(LatticeGaussianMixture::from_positions(1.0, 0.0, bad_sum),
                    std::invalid_argument);
    // duplicates merge
    std::vector<std::pair<double, double>> dup = {{0.0, 0.25}, {0.0, 0.25}, {1.0, 0.5}};
    auto d = LatticeGaussianMixture::from_positions(1.0, 0.0, dup);
    CHECK(d.atoms().size() == 2);
    CHECK(d.atoms()[0].weight == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("convolve Rademacher pair") {
    auto r = LatticeGaussianMixture::rademacher();
    auto c = convolve(r, r);
    REQUIRE(c.atoms().size() == 3);
    CHECK(c.position(c.atoms()[0].index) == doctest::Approx(-2.0));
    CHECK(c.atoms()[0].weight == doctest::Approx(0.25));
    CHECK(c.position(c.atoms()[1].index) == doctest::Approx(0.0));
    CHECK(c.atoms()[1].weight == doctest::Approx(0.5));
    CHECK(c.atoms()[2].weight == doctest::Approx(0.25));
    CHECK(c.gaussian_variance() == 0.0);
}

TEST_CASE("convolve attaches Gaussian smear and has identity element") {
    auto r = LatticeGaussianMixture::rademacher();
    auto g = LatticeGaussianMixture::gaussian(1.0);
    auto c = convolve(r, g);
    REQUIRE(c.atoms().size() == 2);
    CHECK(c.gaussian_variance() == doctest::Approx(1.0));
    CHECK(c.position(c.atoms()[0].index) == doctest::Approx(-1.0));
    CHECK(c.atoms()[0].weight == doctest::Approx(0.5));

    auto id = LatticeGaussianMixture::point_mass(0.0);
    auto same = convolve(r, id);
    REQUIRE(same.atoms().size() == 2);
    CHECK(same.position(same.atoms()[0].index) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(same.variance() == doctest::Approx(r.variance()).epsilon(1e-12));
}

TEST_CASE("convolve mean/variance additivity over the catalog") {
    auto laws = law_catalog();
    for (const auto& a : laws)
        for (const auto& b : laws) {
            auto c = convolve(a, b);
            const double s = a.scale() + b.scale();
            CHECK(std::fabs(c.mean() - a.mean() - b.mean()) <= 1e-10 * s);
            CHECK(std::fabs(c.variance() - a.variance() - b.variance()) <= 1e-10 * s * s);
        }
}

TEST_CASE("convolve rejects incommensurable lattices and huge grids") {
    auto a = LatticeGaussianMixture::from_positions(
        1.0, 0.0, std::vector<std::pair<double, double>>{{0.0, 0.5}, {1.0, 0.5}});
    auto b = LatticeGaussianMixture::from_positions(
        std::sqrt(2.0), 0.0,
        std::vector<std::pair<double, double>>{{0.0, 0.5}, {std::sqrt(2.0), 0.5}});
    CHECK_THROWS_AS(convolve(a, b), std::invalid_argument);

    ConvolveOptions tight;
    tight.atom_cap = 2;
    auto r = LatticeGaussianMixture::rademacher();
    CHECK_THROWS_WITH_AS(convolve(r, r, tight),
                         doctest::Contains("cap"), std::invalid_argument);
}

TEST_CASE("cdf basics and monotonicity") {
    auto r = LatticeGaussianMixture::rademacher();
    CHECK(r.cdf(0.0) == doctest::Approx(0.5));
    CHECK(r.cdf(-1.0) == doctest::Approx(0.5));
    CHECK(r.cdf(-1.0000001) == doctest::Approx(0.0));
    CHECK(r.cdf(1.0) == doctest::Approx(1.0));

    auto rg = convolve(r, LatticeGaussianMixture::gaussian(1.0));
    CHECK(rg.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-13));

    auto p = LatticeGaussianMixture::point_mass(0.0);
    CHECK(p.cdf(-0.1) == 0.0);
    CHECK(p.cdf(0.0) == 1.0);

    for (const auto& law : law_catalog()) {
        double prev = -0.1;
        for (int i = 0; i <= 1000; ++i) {
            const double x = -6.0 + 12.0 * i / 1000.0;
            const double f = law.cdf(x);
            CHECK(f >= prev - 1e-15);
            prev = f;
        }
    }
}

TEST_CASE("quantile generalized inverse contract") {
    auto r = LatticeGaussianMixture::rademacher();
    CHECK(r.quantile(0.3) == doctest::Approx(-1.0));
    CHECK(r.quantile(0.7) == doctest::Approx(1.0));
    CHECK(r.quantile(0.5) == doctest::Approx(-1.0));  // F(-1) = 0.5 >= 0.5

    auto g = LatticeGaussianMixture::gaussian(1.0);
    CHECK(g.quantile(kmt::math::normal_cdf(1.5)) == doctest::Approx(1.5).epsilon(1e-10));

    for (const auto& law : law_catalog()) {
        const double delta = 1e-6 * law.scale();
        for (int i = 1; i < 1000; ++i) {
            const double u = i / 1000.0;
            const double q = law.quantile(u);
            CHECK(law.cdf(q) >= u - 1e-9);
            if (!law.purely_discrete()) CHECK(law.cdf(q - delta) < u);
        }
    }
}

TEST_CASE("discrete push-forward reproduces atom weights") {
    auto law = LatticeGaussianMixture::from_positions(
        0.5, 0.0, std::vector<std::pair<double, double>>{{-1.5, 0.4}, {0.5, 0.4}, {2.0, 0.2}});
    const int K = 100000;
    std::vector<double> mass(law.atoms().size(), 0.0);
    for (int i = 1; i <= K; ++i) {
        const double u = (i - 0.5) / K;
        auto [x, idx] = law.quantile_with_index(u);
        (void)x;
        for (std::size_t k = 0; k < law.atoms().size(); ++k)
            if (law.atoms()[k].index == idx) mass[k] += 1.0 / K;
    }
    for (std::size_t k = 0; k < mass.size(); ++k)
        CHECK(std::fabs(mass[k] - law.atoms()[k].weight) <= 2.0 / K);
}

TEST_CASE("mgf closed forms") {
    auto r = LatticeGaussianMixture::rademacher();
    CHECK(r.mgf(0.5) == doctest::Approx(std::cosh(0.5)).epsilon(1e-14));
    CHECK(r.mgf(0.0) == doctest::Approx(1.0));
    auto g = LatticeGaussianMixture::gaussian(1.0);
    for (double t : {-1.5, -0.3, 0.0, 0.7, 2.0})
        CHECK(g.mgf(t) == doctest::Approx(std::exp(0.5 * t * t)).epsilon(1e-14));
    auto far = LatticeGaussianMixture::point_mass(1000.0);
    CHECK_THROWS_AS(far.mgf(10.0), std::runtime_error);
}

TEST_CASE("catalog json round trip validates lattices") {
    const char* text = R"([
      {"name":"rademacher","step":2.0,"origin":-1.0,
       "atoms":[[-1.0,0.5],[1.0,0.5]],"gaussian_variance":0.0},
      {"name":"smoothed","step":2.0,"origin":-1.0,
       "atoms":[[-1.0,0.5],[1.0,0.5]],"gaussian_variance":0.5}
    ])";
    auto cat = kmt::dist::parse_catalog(text);
    REQUIRE(cat.size() == 2);
    CHECK(cat[0].name == "rademacher");
    CHECK(cat[0].law.variance() == doctest::Approx(1.0));
    CHECK(cat[1].law.gaussian_variance() == doctest::Approx(0.5));

    auto round = kmt::dist::parse_catalog(kmt::dist::catalog_to_json(cat));
    CHECK(round[1].law.variance() == doctest::Approx(cat[1].law.variance()));

    const char* bad = R"([{"name":"x","step":1.0,"origin":0.0,
      "atoms":[[0.5,1.0]],"gaussian_variance":0.0}])";
    CHECK_THROWS_AS(kmt::dist::parse_catalog(bad), std::invalid_argument);
    const char* unknown = R"([{"name":"x","step":1.0,"origin":0.0,
      "atoms":[[0.0,1.0]],"gaussian_variance":0.0,"extra":1}])";
    CHECK_THROWS_AS(kmt::dist::parse_catalog(unknown), std::invalid_argument);
}

TEST_SUITE_END();
