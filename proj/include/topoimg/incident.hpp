#ifndef TOPOIMG_INCIDENT_HPP
#define TOPOIMG_INCIDENT_HPP

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "topoimg/geometry.hpp"
#include "topoimg/types.hpp"

namespace topoimg {

// Emitter-centered Hankel expansion
//   U(x) = a0 H1_0(k rho) + sum_n (a_n cos n theta + b_n sin n theta) H1_n(k rho)
// with theta signed, zero pointing from the emitter toward the origin.
struct HankelSeriesModel {
    Vec2 emitter;
    double kappa = 0.0;
    std::vector<Complex> a;  // a[0..n_modes]
    std::vector<Complex> b;  // b[0] unused, b[1..n_modes]

    int n_modes() const { return (int)a.size() - 1; }
    Complex eval(const Vec2& x) const;
};

struct PlaneWaveModel2D {
    Vec2 direction;  // unit propagation direction
    Complex amplitude{1.0, 0.0};
    double kappa = 0.0;

    Complex eval(const Vec2& x) const;
};

struct IsotropicModel {
    Vec2 emitter;
    double kappa = 0.0;
    Complex scale{1.0, 0.0};

    Complex eval(const Vec2& x) const;
};

// Calibrated 3D plane wave: unit amplitude, zero phase at the origin,
// polarization orthogonal to the propagation direction.
struct PlaneWaveModel3D {
    Vec3 propagation;  // unit vector; -u_r of the emitter for this database
    Vec3 polarization;
    double kappa = 0.0;

    CVec3 eval(const Vec3& x) const;
};

using IncidentModel2D = std::variant<HankelSeriesModel, PlaneWaveModel2D, IsotropicModel>;

Complex eval_incident_2d(const IncidentModel2D& model, const Vec2& x);
CVec3 eval_incident_3d(const PlaneWaveModel3D& model, const Vec3& x);

// Signed emitter-centered polar angle used by the series model.
double emitter_polar_angle(const Vec2& emitter, const Vec2& x);

struct HankelFit {
    HankelSeriesModel model;
    double residual_norm = 0.0;
    double condition = 0.0;
};

// Least squares over the complex span of the Hankel basis, solved by QR on
// the real/imaginary stacked system. Needs >= 2*n_modes+1 samples.
HankelFit fit_hankel_series(const std::vector<std::pair<Vec2, Complex>>& samples,
                            const Vec2& emitter, double kappa, int n_modes);

// Anchored single-value models built from the front-receiver measurement.
IsotropicModel isotropic_from_front(const Layout2D& layout, double emitter_azimuth_deg,
                                    double kappa, Complex front_incident);
PlaneWaveModel2D plane2d_from_front(const Layout2D& layout, double emitter_azimuth_deg,
                                    double kappa, Complex front_incident);
PlaneWaveModel3D plane3d_for_emitter(const Layout3D& layout, int p, int q, double kappa,
                                     bool parallel_pol);

// One-line text record for fitted models (fit-incident output).
std::string model_to_text(const HankelSeriesModel& m);
HankelSeriesModel model_from_text(const std::string& line);

}  // namespace topoimg

#endif
