#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "support/bessel_oracle.hpp"
#include "topoimg/specfun.hpp"
#include "topoimg/types.hpp"

using namespace topoimg;
using testsupport::oracle_j;
using testsupport::oracle_y;
using Catch::Approx;

namespace {
double rel_diff(double a, double ref) {
    const double scale = std::max(std::abs(ref), 1e-300);
    return std::abs(a - ref) / scale;
}
}  // namespace

TEST_CASE("bessel_j matches the series oracle at pinned points", "[specfun]") {
    CHECK(specfun::bessel_j(0, 1e-12) == Approx(1.0).margin(1e-9));
    CHECK(specfun::bessel_j(0, 1.0) == Approx(oracle_j(0, 1.0)).epsilon(1e-12));
    CHECK(specfun::bessel_j(0, 1.0) == Approx(0.7651976866).margin(5e-11));
    CHECK(specfun::bessel_j(1, 1.0) == Approx(0.4400505857).margin(5e-11));
}

TEST_CASE("bessel_y matches the series oracle at pinned points", "[specfun]") {
    CHECK(specfun::bessel_y(0, 1.0) == Approx(0.0882569642).margin(5e-11));
    CHECK(specfun::bessel_y(1, 1.0) == Approx(-0.7812128213).margin(5e-11));

    const double z = testsupport::oracle_y0_first_zero();
    CHECK(z == Approx(0.8935769663).margin(1e-9));
    CHECK(std::abs(specfun::bessel_y(0, z)) <= 1e-9);
}

TEST_CASE("hankel composes J and Y with exact conjugate symmetry", "[specfun]") {
    const std::complex<double> h1 = specfun::hankel(1, 0, 1.0);
    CHECK(h1.real() == Approx(0.7651976866).margin(5e-11));
    CHECK(h1.imag() == Approx(0.0882569642).margin(5e-11));

    const std::complex<double> h2 = specfun::hankel(2, 0, 1.0);
    CHECK(h2 == std::conj(h1));  // exact, same J/Y values

    // Backward-recurrence oracle pin for a moderate order.
    const std::complex<double> h14 = specfun::hankel(1, 14, 5.0);
    CHECK(rel_diff(h14.real(), oracle_j(14, 5.0)) <= 1e-10);
    CHECK(rel_diff(h14.imag(), oracle_y(14, 5.0)) <= 1e-10);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> xs(0.05, 60.0);
    std::uniform_int_distribution<int> ns(0, 20);
    for (int i = 0; i < 500; ++i) {
        const int n = ns(rng);
        const double x = xs(rng);
        CHECK(specfun::hankel(2, n, x) == std::conj(specfun::hankel(1, n, x)));
    }
}

TEST_CASE("domain errors on bad order or argument", "[specfun]") {
    CHECK_THROWS_AS(specfun::bessel_j(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel_j(0, -1.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel_j(-1, 1.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel_j(65, 1.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel_y(70, 2.0), std::domain_error);
    CHECK_THROWS_AS(specfun::hankel(3, 0, 1.0), std::domain_error);
}

TEST_CASE("Wronskian J_{n+1} Y_n - J_n Y_{n+1} = 2/(pi x)", "[specfun]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xs(0.05, 60.0);
    std::uniform_int_distribution<int> ns(0, 20);
    for (int i = 0; i < 2000; ++i) {
        const int n = ns(rng);
        const double x = xs(rng);
        const double w = specfun::bessel_j(n + 1, x) * specfun::bessel_y(n, x) -
                         specfun::bessel_j(n, x) * specfun::bessel_y(n + 1, x);
        const double expected = 2.0 / (kPi * x);
        CHECK(rel_diff(w, expected) <= 1e-9);
    }
}

TEST_CASE("three-term recurrence consistency for J and Y", "[specfun]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> xs(0.05, 60.0);
    std::uniform_int_distribution<int> ns(1, 19);
    for (int i = 0; i < 1000; ++i) {
        const int n = ns(rng);
        const double x = xs(rng);

        const double lj = specfun::bessel_j(n - 1, x) + specfun::bessel_j(n + 1, x);
        const double rj = (2.0 * n / x) * specfun::bessel_j(n, x);
        const double scale_j =
            std::max({std::abs(lj), std::abs(rj), std::abs(specfun::bessel_j(n, x))});
        CHECK(std::abs(lj - rj) <= 1e-9 * std::max(scale_j, 1e-300));

        const double ly = specfun::bessel_y(n - 1, x) + specfun::bessel_y(n + 1, x);
        const double ry = (2.0 * n / x) * specfun::bessel_y(n, x);
        const double scale_y =
            std::max({std::abs(ly), std::abs(ry), std::abs(specfun::bessel_y(n, x))});
        CHECK(std::abs(ly - ry) <= 1e-9 * scale_y);
    }
}

TEST_CASE("array evaluation agrees with scalar calls", "[specfun]") {
    for (double x : {0.3, 2.7, 9.5, 33.0}) {
        const auto j = specfun::bessel_j_array(20, x);
        const auto y = specfun::bessel_y_array(20, x);
        const auto h = specfun::hankel1_array(20, x);
        for (int n = 0; n <= 20; ++n) {
            CHECK(j[n] == specfun::bessel_j(n, x));
            CHECK(y[n] == specfun::bessel_y(n, x));
            CHECK(h[n] == std::complex<double>(j[n], y[n]));
        }
    }
}

TEST_CASE("large arguments stay accurate through the production range", "[specfun]") {
    // Adjoint kernels reach x ~ kappa * distance ~ 150 at the highest
    // frequencies; stress well past that.
    double worst = 0.0;
    for (int n = 0; n <= 2; ++n) {
        for (int i = 0; i < 200; ++i) {
            const double x = 60.0 + (500.0 - 60.0) * i / 199.0;
            worst = std::max(worst, rel_diff(specfun::bessel_j(n, x),
                                             testsupport::oracle_j(n, x)));
            worst = std::max(worst, rel_diff(specfun::bessel_y(n, x),
                                             testsupport::oracle_y(n, x)));
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("dense oracle sweep over n <= 20, x in [0.05, 60]", "[specfun]") {
    // Same log-grid shape the acceptance criterion uses, at a reduced
    // point count so the unit suite stays fast.
    const int points = 120;
    double worst = 0.0;
    for (int n = 0; n <= 20; n += 4) {
        for (int i = 0; i < points; ++i) {
            const double x = 0.05 * std::pow(60.0 / 0.05, double(i) / (points - 1));
            worst = std::max(worst, rel_diff(specfun::bessel_j(n, x), oracle_j(n, x)));
            worst = std::max(worst, rel_diff(specfun::bessel_y(n, x), oracle_y(n, x)));
        }
    }
    CHECK(worst <= 1e-10);
}
