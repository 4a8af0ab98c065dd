#ifndef TOPOIMG_ORACLE_HPP
#define TOPOIMG_ORACLE_HPP

#include <vector>

#include "topoimg/dataset.hpp"
#include "topoimg/geometry.hpp"
#include "topoimg/incident.hpp"
#include "topoimg/material.hpp"
#include "topoimg/types.hpp"

namespace topoimg {

struct DiskScatterer {
    Vec2 center;
    double radius = 0.0;
    MaterialSpec material;
};

// Desk-scale single-scattering stand-in for a small 3D inclusion: an
// induced dipole proportional to the incident field, re-radiated through
// the outgoing dyadic kernel.
struct BornPointScatterer3D {
    Vec3 location;
    Complex amplitude{0.0, 0.0};  // |amplitude| <= 0.1 keeps the Born regime
};

// Separation-of-variables solution for a circular cylinder. Coefficients
// indexed n in [-n_max, n_max]; incident (a), scattered (b), interior (c).
struct MieSolution {
    int n_max = 0;
    double kappa = 0.0;
    double kappa_d = 0.0;  // interior wavenumber, dielectric case
    MaterialKind kind = MaterialKind::Dielectric;
    std::vector<Complex> a_inc, b_scat, c_int;  // size 2*n_max+1, offset n_max

    Complex a(int n) const { return a_inc[n + n_max]; }
    Complex b(int n) const { return b_scat[n + n_max]; }
    Complex c(int n) const { return c_int[n + n_max]; }
};

MieSolution mie_solve(const DiskScatterer& disk, const IncidentModel2D& incident, double kappa);

// Exterior: scattered part sum b_n H1_n(kappa rho) e^{in phi}.
// Interior: total field sum c_n J_n(kappa_d rho) e^{in phi}.
// Throws within 1e-12 of the boundary (ambiguous side).
Complex scattered_field(const MieSolution& sol, const DiskScatterer& disk, const Vec2& x);

// Max boundary-condition residuals sampled at n_angles points, derivatives
// taken analytically from the modal series. Dirichlet: {max |total|, 0}.
// Dielectric: {max value jump, max normal-derivative jump}.
struct BoundaryResidual {
    double value = 0.0;
    double derivative = 0.0;
};
BoundaryResidual boundary_residual(const MieSolution& sol, const DiskScatterer& disk,
                                   int n_angles = 360);

enum class SynthIncident { Isotropic, Plane };

// Synthetic 2D dataset: exact single-disk Mie; multiple disks superpose
// single scattering (flagged approximate in metadata). Optional circular
// Gaussian noise, relative to the per-frequency RMS residual, seeded.
Dataset synth_dataset_2d(const std::vector<DiskScatterer>& disks, const Layout2D& layout,
                         const FrequencySweep& sweep, SynthIncident incident_kind,
                         double noise_rel, unsigned long long seed);

Dataset synth_dataset_3d(const std::vector<BornPointScatterer3D>& scatterers,
                         const Layout3D& layout, const FrequencySweep& sweep,
                         Polarization pol);

// (1/2) sum_j |predicted_j - measured_j|^2 over the record's rows, row order.
double misfit(const ExperimentRecord& record, const std::vector<Complex>& predicted);

}  // namespace topoimg

#endif
