#ifndef TOPOIMG_TOPOFIELD_HPP
#define TOPOIMG_TOPOFIELD_HPP

#include <vector>

#include "topoimg/adjoint.hpp"
#include "topoimg/dataset.hpp"
#include "topoimg/grid.hpp"
#include "topoimg/material.hpp"
#include "topoimg/types.hpp"

namespace topoimg {

// Pointwise indicator kernels from already-evaluated incident (u) and
// adjoint (v) field values.
//
// 2D: conducting Re(u conj(v)); dielectric -kappa^2 (eps-1) Re(u conj(v)),
// the prefactor that matches the misfit expansion measured against the
// analytic disk oracle (scatterers then show up as minima in both cases).
// 3D: -3 Re(kappa^2 (eps-1)/(eps+2) u . conj(v)).
double td_point_2d(Complex u, Complex v, const MaterialSpec& mat, double kappa);
double td_point_3d(const CVec3& u, const CVec3& v, const MaterialSpec& mat, double kappa);
double te_point(Complex u, Complex v);
double te_point(const CVec3& u, const CVec3& v);

// Nodewise arithmetic mean over same-frequency fields.
ScalarGrid combine_emitters(const std::vector<ScalarGrid>& fields);

// Weighted multi-frequency sum: each TD summand scaled by 1/|grid min|
// (min must be strictly negative), each TE summand by 1/grid max (max
// strictly positive). Throws NumericalError naming the offending frequency.
ScalarGrid combine_frequencies(const std::vector<ScalarGrid>& fields, FieldKind kind);

// f(eps) of the asymptotic expansion: pi eps^2 (2D dielectric),
// (4/3) pi eps^3 (3D), -2 pi / ln(kappa eps) (2D conducting, kappa eps < 1).
double asymptotic_factor(double eps, int dim, MaterialKind kind, double kappa);

enum class IncidentChoice { Isotropic, Plane, Hankel };
enum class DegeneratePolicy { Strict, Skip };

struct EvalConfig {
    InspectionGrid grid;
    MaterialSpec material;
    FieldKind kind = FieldKind::TD;
    IncidentChoice incident = IncidentChoice::Isotropic;
    int hankel_modes = 14;
    std::vector<int> emitters;     // empty = all emitters in the layout
    std::vector<int> frequencies;  // empty = all sweep entries
    bool reciprocity = false;      // 3D TE via the emitter/receiver swap
    int threads = 1;               // 0 = hardware concurrency
    DegeneratePolicy degenerate = DegeneratePolicy::Strict;
};

struct EvalResult {
    ScalarGrid combined;
    std::vector<int> skipped_frequencies;
    std::vector<double> normalizers;  // per retained frequency, in subset order
};

// Full pipeline: residual sets and incident models per (emitter, frequency),
// pointwise indicator at every node, emitter average, then the weighted
// multi-frequency combination. Deterministic and independent of the thread
// count (fixed per-node summation order).
EvalResult evaluate_grid(const Dataset& dataset, const EvalConfig& cfg);

}  // namespace topoimg

#endif
