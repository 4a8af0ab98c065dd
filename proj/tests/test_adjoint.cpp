#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "topoimg/adjoint.hpp"
#include "topoimg/types.hpp"

using namespace topoimg;
using Catch::Approx;

namespace {

ResidualSet2D single_receiver_2d(Complex r, double kappa) {
    ResidualSet2D rs;
    rs.points = {{0.0, 0.0}};
    rs.residuals = {r};
    rs.kappa = kappa;
    return rs;
}

// Finite-difference curl curl of W(x) = g(|x - x0|) c k via
// curlcurl W = grad(dW_z/dz) - (Lap W_z) k for a z-directed field.
CVec3 fd_curlcurl_gk(double kappa, const Vec3& x0, Complex c, const Vec3& x, double h) {
    auto wz = [&](const Vec3& p) {
        const double r = (p - x0).norm();
        return c * std::exp(Complex(0.0, -kappa * r)) / (4.0 * kPi * r);
    };
    auto dz = [&](const Vec3& p) {
        return (wz({p.x, p.y, p.z + h}) - wz({p.x, p.y, p.z - h})) / (2.0 * h);
    };
    const Complex gx = (dz({x.x + h, x.y, x.z}) - dz({x.x - h, x.y, x.z})) / (2.0 * h);
    const Complex gy = (dz({x.x, x.y + h, x.z}) - dz({x.x, x.y - h, x.z})) / (2.0 * h);
    const Complex gz = (dz({x.x, x.y, x.z + h}) - dz({x.x, x.y, x.z - h})) / (2.0 * h);
    const Complex lap = (wz({x.x + h, x.y, x.z}) + wz({x.x - h, x.y, x.z}) +
                         wz({x.x, x.y + h, x.z}) + wz({x.x, x.y - h, x.z}) +
                         wz({x.x, x.y, x.z + h}) + wz({x.x, x.y, x.z - h}) - 6.0 * wz(x)) /
                        (h * h);
    return {gx, gy, gz - lap};
}

}  // namespace

TEST_CASE("zero residuals give a zero adjoint", "[adjoint]") {
    ResidualSet2D rs;
    rs.kappa = 50.0;
    for (int j = 0; j < 5; ++j) {
        rs.points.push_back({0.7 * std::cos(j), 0.7 * std::sin(j)});
        rs.residuals.push_back({0.0, 0.0});
    }
    CHECK(adjoint_2d(rs, {0.01, 0.02}) == Complex(0.0, 0.0));

    ResidualSet3D rs3;
    rs3.kappa = 60.0;
    rs3.points = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    rs3.residuals = {{0.0, 0.0}, {0.0, 0.0}};
    const CVec3 v = adjoint_3d(rs3, {0.0, 0.0, 0.05});
    CHECK(v.norm() == 0.0);
}

TEST_CASE("2D single-receiver value matches the series oracle pin", "[adjoint]") {
    const ResidualSet2D rs = single_receiver_2d({1.0, 0.0}, 1.0);
    const Complex v = adjoint_2d(rs, {1.0, 0.0});
    CHECK(v.real() == Approx(0.0220642411).margin(1e-9));
    CHECK(v.imag() == Approx(0.1912994217).margin(1e-9));
}

TEST_CASE("adjoint is linear in the residuals", "[adjoint]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    ResidualSet2D a, b;
    a.kappa = b.kappa = 83.0;
    for (int j = 0; j < 9; ++j) {
        const Vec2 p{0.72 * std::cos(0.7 * j), 0.72 * std::sin(0.7 * j)};
        a.points.push_back(p);
        b.points.push_back(p);
        a.residuals.push_back({u(rng), u(rng)});
        b.residuals.push_back({u(rng), u(rng)});
    }
    const Complex alpha{0.3, -0.7}, beta{-1.2, 0.4};
    ResidualSet2D mix = a;
    for (int j = 0; j < 9; ++j) mix.residuals[j] = alpha * a.residuals[j] + beta * b.residuals[j];

    const Vec2 x{0.03, -0.04};
    const Complex lhs = adjoint_2d(mix, x);
    const Complex rhs = alpha * adjoint_2d(a, x) + beta * adjoint_2d(b, x);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(rhs));

    // Doubling every residual doubles the output exactly.
    ResidualSet2D twice = a;
    for (auto& r : twice.residuals) r *= 2.0;
    CHECK(adjoint_2d(twice, x) == 2.0 * adjoint_2d(a, x));

    ResidualSet3D a3, b3;
    a3.kappa = b3.kappa = 70.0;
    for (int j = 0; j < 7; ++j) {
        const Vec3 p{1.796 * std::cos(0.5 * j), 1.796 * std::sin(0.5 * j), 0.0};
        a3.points.push_back(p);
        b3.points.push_back(p);
        a3.residuals.push_back({u(rng), u(rng)});
        b3.residuals.push_back({u(rng), u(rng)});
    }
    ResidualSet3D mix3 = a3;
    for (int j = 0; j < 7; ++j) {
        mix3.residuals[j] = alpha * a3.residuals[j] + beta * b3.residuals[j];
    }
    const Vec3 x3{0.02, 0.05, -0.03};
    const CVec3 l3 = adjoint_3d(mix3, x3);
    const CVec3 r3 = alpha * adjoint_3d(a3, x3) + beta * adjoint_3d(b3, x3);
    CHECK((l3 - r3).norm() <= 1e-13 * r3.norm());
}

TEST_CASE("2D adjoint satisfies Helmholtz away from receivers", "[adjoint]") {
    ResidualSet2D rs;
    rs.kappa = wavenumber(4e9);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int j = 0; j < 12; ++j) {
        rs.points.push_back({0.72 * std::cos(0.5 * j + 1.0), 0.72 * std::sin(0.5 * j + 1.0)});
        rs.residuals.push_back({u(rng), u(rng)});
    }
    const double h = 1e-4 * (2.0 * kPi / rs.kappa);
    for (const Vec2 x : {Vec2{0.02, 0.01}, Vec2{-0.06, 0.04}}) {
        const Complex c = adjoint_2d(rs, x);
        const Complex lap =
            (adjoint_2d(rs, {x.x + h, x.y}) + adjoint_2d(rs, {x.x - h, x.y}) +
             adjoint_2d(rs, {x.x, x.y + h}) + adjoint_2d(rs, {x.x, x.y - h}) - 4.0 * c) /
            (h * h);
        CHECK(std::abs(lap + rs.kappa * rs.kappa * c) / (rs.kappa * rs.kappa * std::abs(c)) <=
              1e-4);
    }
}

TEST_CASE("3D adjoint: on-axis closed form and FD curl-curl oracle", "[adjoint]") {
    // Single receiver at the origin, unit residual, kappa = 1, x on the z axis:
    // V = (i/4) g(1) (2i + 2) k with g(r) = e^{-ir}/(4 pi r).
    ResidualSet3D rs;
    rs.kappa = 1.0;
    rs.points = {{0.0, 0.0, 0.0}};
    rs.residuals = {{1.0, 0.0}};
    const CVec3 v = adjoint_3d(rs, {0.0, 0.0, 1.0});
    const Complex g1 = std::exp(Complex(0.0, -1.0)) / (4.0 * kPi);
    const Complex expect = Complex(0.0, 0.25) * g1 * Complex(2.0, 2.0);
    CHECK(std::abs(v.x) <= 1e-15);
    CHECK(std::abs(v.y) <= 1e-15);
    CHECK(std::abs(v.z - expect) <= 1e-12 * std::abs(expect));

    // Generic point: compare against the finite-difference curl curl.
    const Vec3 x{0.4, -0.3, 0.8};
    const CVec3 vg = adjoint_3d(rs, x);
    const CVec3 fd = fd_curlcurl_gk(1.0, {0.0, 0.0, 0.0}, Complex(1.0, 0.0), x, 1e-5);
    const CVec3 expected = Complex(0.0, 0.25) * fd;  // (i/(4 kappa^2)), kappa = 1
    CHECK((vg - expected).norm() <= 1e-4 * expected.norm());
}

TEST_CASE("3D adjoint is divergence-free away from sources", "[adjoint]") {
    ResidualSet3D rs;
    rs.kappa = wavenumber(4e9);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int j = 0; j < 9; ++j) {
        rs.points.push_back({1.796 * std::cos(0.6 * j), 1.796 * std::sin(0.6 * j), 0.0});
        rs.residuals.push_back({u(rng), u(rng)});
    }
    const double h = 1e-6;
    const Vec3 x{0.03, -0.02, 0.04};
    const Complex div =
        (adjoint_3d(rs, {x.x + h, x.y, x.z}).x - adjoint_3d(rs, {x.x - h, x.y, x.z}).x +
         adjoint_3d(rs, {x.x, x.y + h, x.z}).y - adjoint_3d(rs, {x.x, x.y - h, x.z}).y +
         adjoint_3d(rs, {x.x, x.y, x.z + h}).z - adjoint_3d(rs, {x.x, x.y, x.z - h}).z) /
        (2.0 * h);
    CHECK(std::abs(div) <= 1e-6 * adjoint_3d(rs, x).norm() * rs.kappa);
}

TEST_CASE("mirror symmetry for receivers in the z=0 plane", "[adjoint]") {
    ResidualSet3D rs;
    rs.kappa = 40.0;
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int j = 0; j < 11; ++j) {
        rs.points.push_back({1.8 * std::cos(0.55 * j), 1.8 * std::sin(0.55 * j), 0.0});
        rs.residuals.push_back({u(rng), u(rng)});
    }
    const Vec3 x{0.04, -0.07, 0.05};
    const CVec3 v = adjoint_3d(rs, x);
    const CVec3 vm = adjoint_3d(rs, {x.x, x.y, -x.z});
    // A z-dipole layout reflected in its own plane: horizontal components
    // flip, vertical survives.
    CHECK(std::abs(vm.x + v.x) <= 1e-13 * v.norm());
    CHECK(std::abs(vm.y + v.y) <= 1e-13 * v.norm());
    CHECK(std::abs(vm.z - v.z) <= 1e-13 * v.norm());
}

TEST_CASE("2D far field carries the incoming-conjugate phase", "[adjoint]") {
    const double kappa = 30.0;
    const ResidualSet2D rs = single_receiver_2d({1.0, 0.0}, kappa);

    // V ~ e^{-i kappa rho}/sqrt(rho): the unwrapped phase slope is -kappa.
    double prev_phase = 0.0, total = 0.0;
    const double rho0 = 5.0, drho = 0.01;
    const int steps = 200;
    for (int i = 0; i <= steps; ++i) {
        const double rho = rho0 + i * drho;
        const double phase = std::arg(adjoint_2d(rs, {rho, 0.0}));
        if (i > 0) {
            double d = phase - prev_phase;
            while (d > kPi) d -= 2.0 * kPi;
            while (d < -kPi) d += 2.0 * kPi;
            total += d;
        }
        prev_phase = phase;
    }
    const double slope = total / (steps * drho);
    CHECK(slope == Approx(-kappa).epsilon(0.01));
}

TEST_CASE("exclusion ball rejects on-receiver evaluation", "[adjoint]") {
    ResidualSet2D rs = single_receiver_2d({1.0, 0.0}, 10.0);
    CHECK_THROWS_AS(adjoint_2d(rs, {1e-9, 0.0}), NumericalError);

    ResidualSet3D rs3;
    rs3.kappa = 10.0;
    rs3.points = {{0.5, 0.0, 0.0}};
    rs3.residuals = {{1.0, 0.0}};
    CHECK_THROWS_AS(adjoint_3d(rs3, {0.5, 0.0, 1e-9}), NumericalError);

    ResidualSet2D bad = rs;
    bad.residuals.push_back({1.0, 0.0});
    CHECK_THROWS_AS(adjoint_2d(bad, {0.3, 0.0}), InputError);
}
