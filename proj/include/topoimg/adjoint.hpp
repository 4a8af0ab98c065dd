#ifndef TOPOIMG_ADJOINT_HPP
#define TOPOIMG_ADJOINT_HPP

#include <vector>

#include "topoimg/types.hpp"

namespace topoimg {

// Receiver points weighted by measurement residuals r_j = inc_j - meas_j.
// The adjoint field radiates from these points with the conjugate (incoming)
// kernel; everything here is pure evaluation.
struct ResidualSet2D {
    std::vector<Vec2> points;
    std::vector<Complex> residuals;
    double kappa = 0.0;
    double exclusion_radius = 1e-6;
};

struct ResidualSet3D {
    std::vector<Vec3> points;
    std::vector<Complex> residuals;  // k-components of inc - meas
    // Source dipole direction per receiver; defaults to k when empty
    // (the reciprocity-swapped pipeline uses the former emitter u_phi).
    std::vector<Vec3> dipoles;
    double kappa = 0.0;
    double exclusion_radius = 1e-6;
};

// V(x) = sum_j r_j (i/4) H2_0(kappa |x - x_j|).
Complex adjoint_2d(const ResidualSet2D& rs, const Vec2& x);

// V(x) = sum_j r_j (i/(4 kappa^2)) curl curl [ g(|x - x_j|) d_j ],
// g(r) = e^{-i kappa r}/(4 pi r), expanded to the closed dyadic form.
CVec3 adjoint_3d(const ResidualSet3D& rs, const Vec3& x);

// curl curl (g(|s|) m) / kappa^2 with g(r) = e^{sign i kappa r}/(4 pi r).
// sign = +1 is the outgoing kernel (Born forward), -1 the adjoint kernel.
CVec3 dyadic_kernel(double kappa, int sign, const Vec3& s, const CVec3& m);
inline CVec3 dyadic_kernel(double kappa, int sign, const Vec3& s, const Vec3& m) {
    return dyadic_kernel(kappa, sign, s, CVec3(m));
}

}  // namespace topoimg

#endif
