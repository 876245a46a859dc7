#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "kmt/dist/sakhanenko.hpp"
#include "kmt/math/normal.hpp"

using kmt::dist::LatticeGaussianMixture;
using kmt::dist::sakhanenko_lambda;

namespace {

// Independent oracle for the standard normal: the tilted third absolute
// moment has the closed form
//   E|N|^3 e^{l|N|} = 2 e^{l^2/2} [ phi(l)(l^2+2) + Phi(l) l (l^2+3) ],
// so lambda* solves a scalar equation we can bisect directly.
double normal_lambda_star_oracle() {
    auto m3 = [](double l) {
        return 2.0 * std::exp(0.5 * l * l) *
               (kmt::math::normal_pdf(l) * (l * l + 2.0) +
                kmt::math::normal_cdf(l) * l * (l * l + 3.0));
    };
    double lo = 1e-8, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (mid * m3(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Rademacher oracle: lambda e^lambda = 1.
double rademacher_lambda_star_oracle() {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE_BEGIN("dist");

TEST_CASE("sakhanenko lambda for Rademacher hits the Lambert point") {
    auto rep = sakhanenko_lambda(LatticeGaussianMixture::rademacher(), 0.5);
    CHECK(rep.lambda_star == doctest::Approx(0.5671432904097838).epsilon(1e-8));
    CHECK(rep.lambda_star == doctest::Approx(rademacher_lambda_star_oracle()).epsilon(1e-8));
    CHECK(rep.third_abs_moment == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.variance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.verdict);
    auto rej = sakhanenko_lambda(LatticeGaussianMixture::rademacher(), 0.6);
    CHECK_FALSE(rej.verdict);
}

TEST_CASE("sakhanenko lambda for the standard normal matches the quadrature oracle") {
    auto rep = sakhanenko_lambda(LatticeGaussianMixture::gaussian(1.0));
    CHECK(rep.lambda_star > 0.3);
    CHECK(rep.lambda_star < 0.7);
    CHECK(rep.lambda_star == doctest::Approx(0.3289716527502211).epsilon(1e-6));
    CHECK(rep.lambda_star == doctest::Approx(normal_lambda_star_oracle()).epsilon(1e-6));
}

TEST_CASE("sakhanenko lambda scaling relation") {
    for (double c : {0.5, 2.0}) {
        auto base = sakhanenko_lambda(LatticeGaussianMixture::rademacher());
        auto scl = sakhanenko_lambda(LatticeGaussianMixture::rademacher().scaled(c));
        CHECK(scl.lambda_star * c == doctest::Approx(base.lambda_star).epsilon(1e-6));
        auto mix = LatticeGaussianMixture::rademacher().smeared(1.0);
        auto mbase = sakhanenko_lambda(mix);
        auto mscl = sakhanenko_lambda(mix.scaled(c));
        CHECK(mscl.lambda_star * c == doctest::Approx(mbase.lambda_star).epsilon(1e-6));
    }
    auto two = sakhanenko_lambda(LatticeGaussianMixture::rademacher().scaled(2.0));
    CHECK(two.lambda_star == doctest::Approx(0.2835716452).epsilon(1e-6));
}

TEST_CASE("sakhanenko lambda rejects bad inputs") {
    CHECK_THROWS_AS(sakhanenko_lambda(LatticeGaussianMixture::point_mass(0.0)),
                    std::invalid_argument);
    auto shifted = LatticeGaussianMixture::from_positions(
        1.0, 0.0, std::vector<std::pair<double, double>>{{0.0, 0.5}, {1.0, 0.5}});
    CHECK_THROWS_AS(sakhanenko_lambda(shifted), std::invalid_argument);
}

TEST_CASE("lemma a1 inequality") {
    auto r = LatticeGaussianMixture::rademacher();
    std::vector<double> grid = {0.1};
    auto c = kmt::dist::check_lemma_a1(r, 0.567, grid);
    CHECK(c.verdict);
    // cosh(0.1) <= exp(0.01)
    CHECK(c.worst_margin == doctest::Approx(std::exp(0.01) - std::cosh(0.1)).epsilon(1e-12));

    std::vector<double> zero = {0.0};
    auto z = kmt::dist::check_lemma_a1(r, 0.5, zero);
    CHECK(z.verdict);
    CHECK(z.worst_margin == doctest::Approx(0.0));

    CHECK_THROWS_WITH_AS(kmt::dist::check_lemma_a1(r, 1.0, grid),
                         doctest::Contains("lambda_star"), std::invalid_argument);
}

TEST_CASE("lemma a1 holds on a catalog at lambda_star with a 101-point grid") {
    std::vector<LatticeGaussianMixture> laws = {
        LatticeGaussianMixture::rademacher(),
        LatticeGaussianMixture::gaussian(1.0),
        LatticeGaussianMixture::rademacher().smeared(0.5),
        LatticeGaussianMixture::from_positions(
            1.0, 0.0,
            std::vector<std::pair<double, double>>{{-2.0, 0.25}, {0.0, 0.4}, {1.0, 0.15},
                                                   {2.0, 0.2}},
            0.0),
    };
    for (auto law : laws) {
        // centre the last law exactly
        if (std::fabs(law.mean()) > 1e-12) {
            std::vector<std::pair<double, double>> pw;
            for (const auto& a : law.atoms())
                pw.emplace_back(law.position(a.index) - law.mean(), a.weight);
            // mean-shifted points are usually off-lattice; use a finer lattice
            law = LatticeGaussianMixture::from_positions(law.step() / 20.0, -law.mean(),
                                                         pw, law.gaussian_variance());
        }
        auto rep = sakhanenko_lambda(law);
        std::vector<double> grid(101);
        for (int i = 0; i <= 100; ++i)
            grid[i] = -rep.lambda_star / 3.0 + i * (2.0 * rep.lambda_star / 3.0) / 100.0;
        auto c = kmt::dist::check_lemma_a1(law, rep.lambda_star * (1.0 - 1e-9), grid);
        CHECK(c.verdict);
    }
}

TEST_CASE("lemma a2 inequality") {
    // E exp(lambda|X|) for Rademacher is e^lambda, so c1 must be at least e.
    auto r = LatticeGaussianMixture::rademacher();
    auto c = kmt::dist::check_lemma_a2(r, 1.0, std::exp(1.0) + 1e-12);
    CHECK(c.verdict);
    auto g = kmt::dist::check_lemma_a2(LatticeGaussianMixture::gaussian(1.0), 0.5,
                                       kmt::dist::LatticeGaussianMixture::gaussian(1.0)
                                           .exp_abs_moment(0.5));
    CHECK(g.verdict);
    CHECK_THROWS_WITH_AS(kmt::dist::check_lemma_a2(r, 1.0, 2.0),
                         doctest::Contains("exceeds"), std::invalid_argument);
}

TEST_CASE("smoothness mu for mixtures") {
    std::vector<double> eps_grid = {0.25, 0.5};
    std::vector<double> h_grid = {-0.5, -0.25, 0.0, 0.25, 0.5};

    auto g = LatticeGaussianMixture::gaussian(4.0);
    const double mu_g = kmt::dist::smoothness_mu(g, eps_grid, h_grid);
    CHECK(mu_g > 0.0);
    CHECK(std::isfinite(mu_g));

    // Rademacher + N(0,1): integrand sqrt(cosh^2 h - sin^2 t)/cosh h * e^{-t^2/2};
    // value pinned by an independent quadrature oracle.
    auto rg = LatticeGaussianMixture::rademacher().smeared(1.0);
    std::vector<double> eps_only = {0.5};
    const double mu = kmt::dist::smoothness_mu(rg, eps_only, h_grid);
    CHECK(mu == doctest::Approx(1.0546231745807675).epsilon(1e-6));

    CHECK_THROWS_AS(
        kmt::dist::smoothness_mu(LatticeGaussianMixture::rademacher(), eps_grid, h_grid),
        std::invalid_argument);
}

TEST_SUITE_END();
