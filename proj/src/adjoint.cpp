#include "topoimg/adjoint.hpp"

#include <cmath>
#include <string>

#include "topoimg/specfun.hpp"

namespace topoimg {

namespace {

const Complex kI{0.0, 1.0};

void check_sizes(size_t points, size_t residuals) {
    if (points != residuals) {
        throw InputError("residual set: " + std::to_string(residuals) + " residuals for " +
                         std::to_string(points) + " receiver points");
    }
}

}  // namespace

Complex adjoint_2d(const ResidualSet2D& rs, const Vec2& x) {
    check_sizes(rs.points.size(), rs.residuals.size());
    Complex sum{0.0, 0.0};
    for (size_t j = 0; j < rs.points.size(); ++j) {
        const double r = (x - rs.points[j]).norm();
        if (r < rs.exclusion_radius) {
            throw NumericalError("adjoint_2d: evaluation inside receiver exclusion ball");
        }
        sum += rs.residuals[j] * (kI * 0.25) * specfun::hankel(2, 0, rs.kappa * r);
    }
    return sum;
}

CVec3 dyadic_kernel(double kappa, int sign, const Vec3& s, const CVec3& m) {
    const double r = s.norm();
    const Vec3 u = s * (1.0 / r);
    const Complex a = kI * (double)sign * kappa;
    const Complex g = std::exp(a * r) / (4.0 * kPi * r);
    const Complex g1 = (a - 1.0 / r) * g;
    const Complex g2 = (-kappa * kappa - 2.0 * a / r + 2.0 / (r * r)) * g;

    const Complex radial = (g2 - g1 / r) * (u.x * m.x + u.y * m.y + u.z * m.z);
    const Complex iso = g2 + g1 / r;
    const double k2 = kappa * kappa;
    return {(radial * u.x - iso * m.x) / k2, (radial * u.y - iso * m.y) / k2,
            (radial * u.z - iso * m.z) / k2};
}

CVec3 adjoint_3d(const ResidualSet3D& rs, const Vec3& x) {
    check_sizes(rs.points.size(), rs.residuals.size());
    if (!rs.dipoles.empty() && rs.dipoles.size() != rs.points.size()) {
        throw InputError("residual set: dipole count must match receiver count");
    }
    const Vec3 k_hat{0.0, 0.0, 1.0};
    CVec3 sum;
    for (size_t j = 0; j < rs.points.size(); ++j) {
        const Vec3 s = x - rs.points[j];
        if (s.norm() < rs.exclusion_radius) {
            throw NumericalError("adjoint_3d: evaluation inside receiver exclusion ball");
        }
        const Vec3& d = rs.dipoles.empty() ? k_hat : rs.dipoles[j];
        sum = sum + rs.residuals[j] * dyadic_kernel(rs.kappa, -1, s, d);
    }
    return (kI * 0.25) * sum;
}

}  // namespace topoimg
