#include "topoimg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "topoimg/adjoint.hpp"
#include "topoimg/specfun.hpp"
#include "topoimg/textio.hpp"

namespace topoimg {

namespace {

const Complex kI{0.0, 1.0};

// Incident modal coefficients about the disk center: U = sum A_n J_n(k rho) e^{i n phi}.
std::vector<Complex> incident_coefficients(const IncidentModel2D& incident, const Vec2& center,
                                           double kappa, int n_max) {
    std::vector<Complex> A(2 * n_max + 1);
    if (const auto* pw = std::get_if<PlaneWaveModel2D>(&incident)) {
        // Jacobi-Anger about the shifted origin.
        const double theta_d = std::atan2(pw->direction.y, pw->direction.x);
        const Complex base = pw->amplitude * std::exp(kI * (kappa * pw->direction.dot(center)));
        for (int n = -n_max; n <= n_max; ++n) {
            A[n + n_max] = base * std::pow(kI, n) * std::exp(-kI * (double)n * theta_d);
        }
        return A;
    }
    if (const auto* iso = std::get_if<IsotropicModel>(&incident)) {
        // Graf addition theorem; valid while the evaluation stays closer to
        // the center than the source does.
        const Vec2 rel = iso->emitter - center;
        const double rho_e = rel.norm();
        const double phi_e = std::atan2(rel.y, rel.x);
        const auto h = specfun::hankel1_array(n_max, kappa * rho_e);
        for (int n = -n_max; n <= n_max; ++n) {
            const int m = std::abs(n);
            const Complex hn = (n >= 0 || m % 2 == 0) ? h[m] : -h[m];
            A[n + n_max] = iso->scale * hn * std::exp(-kI * (double)n * phi_e);
        }
        return A;
    }
    throw InputError("mie_solve: incident model must be a plane or isotropic wave");
}

// d/dx C_n(x) = C_{n-1}(x) - (n/x) C_n(x); arrays must extend to order n.
template <typename T>
T cyl_derivative(const std::vector<T>& c, int n, double x) {
    if (n == 0) {
        // C_0' = -C_1
        return -c[1];
    }
    return c[n - 1] - ((double)n / x) * c[n];
}

}  // namespace

MieSolution mie_solve(const DiskScatterer& disk, const IncidentModel2D& incident, double kappa) {
    if (!(disk.radius > 0.0)) throw InputError("mie_solve: disk radius must be positive");
    const bool dielectric = disk.material.kind == MaterialKind::Dielectric;
    const double eps = disk.material.epsilon;
    if (dielectric && !(eps > 0.0)) throw InputError("mie_solve: dielectric needs epsilon > 0");
    const double kappa_d = dielectric ? kappa * std::sqrt(eps) : 0.0;
    const double ka = kappa * disk.radius;

    int n_max = std::max(4, (int)std::ceil(ka) + 16);
    const int n_cap = specfun::kMaxOrder - 1;
    if (n_max > n_cap) n_max = n_cap;

    MieSolution sol;
    sol.kappa = kappa;
    sol.kappa_d = kappa_d;
    sol.kind = disk.material.kind;

    // Extend the truncation until the last scattered coefficient is
    // negligible against the largest one.
    for (;; n_max += 5) {
        if (n_max > n_cap) throw NumericalError("mie_solve: non-convergent truncation");
        const auto h = specfun::hankel1_array(n_max + 1, ka);
        std::vector<Complex> jk(n_max + 2);
        for (int n = 0; n <= n_max + 1; ++n) jk[n] = h[n].real();
        std::vector<Complex> jd;
        if (dielectric) {
            const auto jdr = specfun::bessel_j_array(n_max + 1, kappa_d * disk.radius);
            jd.assign(jdr.begin(), jdr.end());
        }

        sol.n_max = n_max;
        sol.a_inc = incident_coefficients(incident, disk.center, kappa, n_max);
        sol.b_scat.assign(2 * n_max + 1, Complex(0, 0));
        sol.c_int.assign(2 * n_max + 1, Complex(0, 0));

        for (int n = -n_max; n <= n_max; ++n) {
            const int m = std::abs(n);
            const Complex A = sol.a_inc[n + n_max];
            if (!dielectric) {
                sol.b_scat[n + n_max] = -A * jk[m] / h[m];
                continue;
            }
            // Continuity of value and normal derivative at rho = a:
            //   A J_m(ka) + b H1_m(ka)          = c J_m(kd a)
            //   k (A J_m'(ka) + b H1_m'(ka))    = kd c J_m'(kd a)
            const Complex Jm = jk[m], Hm = h[m], Jdm = jd[m];
            const Complex Jmp = cyl_derivative(jk, m, ka);
            const Complex Hmp = cyl_derivative(h, m, ka);
            const Complex Jdmp = cyl_derivative(jd, m, kappa_d * disk.radius);
            const Complex det = -Hm * kappa_d * Jdmp + Jdm * kappa * Hmp;
            if (std::abs(det) == 0.0) throw NumericalError("mie_solve: singular modal system");
            const Complex rb = (kappa_d * Jdmp * Jm - Jdm * kappa * Jmp) / det;  // b/A
            const Complex rc = (kappa * Hmp * Jm - Hm * kappa * Jmp) / det;      // c/A
            sol.b_scat[n + n_max] = A * rb;
            sol.c_int[n + n_max] = A * rc;
        }

        double bmax = 0.0;
        for (const Complex& b : sol.b_scat) bmax = std::max(bmax, std::abs(b));
        const double tail = std::max(std::abs(sol.b(n_max)), std::abs(sol.b(-n_max)));
        if (bmax == 0.0 || tail <= 1e-14 * bmax) break;
    }
    return sol;
}

Complex scattered_field(const MieSolution& sol, const DiskScatterer& disk, const Vec2& x) {
    const Vec2 r = x - disk.center;
    const double rho = r.norm();
    if (std::abs(rho - disk.radius) < 1e-12) {
        throw InputError("scattered_field: point on the disk boundary (ambiguous side)");
    }
    const double phi = std::atan2(r.y, r.x);
    const int N = sol.n_max;
    Complex sum{0.0, 0.0};
    if (rho > disk.radius) {
        const auto h = specfun::hankel1_array(N, sol.kappa * rho);
        for (int n = -N; n <= N; ++n) {
            const int m = std::abs(n);
            const Complex hn = (n >= 0 || m % 2 == 0) ? h[m] : -h[m];
            sum += sol.b(n) * hn * std::exp(kI * (double)n * phi);
        }
    } else {
        if (sol.kind == MaterialKind::Conducting) return Complex(0.0, 0.0);
        const auto j = specfun::bessel_j_array(N, sol.kappa_d * rho);
        for (int n = -N; n <= N; ++n) {
            const int m = std::abs(n);
            const double jn = (n >= 0 || m % 2 == 0) ? j[m] : -j[m];
            sum += sol.c(n) * jn * std::exp(kI * (double)n * phi);
        }
    }
    return sum;
}

BoundaryResidual boundary_residual(const MieSolution& sol, const DiskScatterer& disk,
                                   int n_angles) {
    const int N = sol.n_max;
    const double a = disk.radius;
    const double ka = sol.kappa * a;
    const auto h = specfun::hankel1_array(N + 1, ka);
    std::vector<Complex> jk(N + 2);
    for (int n = 0; n <= N + 1; ++n) jk[n] = h[n].real();
    std::vector<Complex> jd;
    if (sol.kind == MaterialKind::Dielectric) {
        const auto jdr = specfun::bessel_j_array(N + 1, sol.kappa_d * a);
        jd.assign(jdr.begin(), jdr.end());
    }

    auto reflect = [](const std::vector<Complex>& c, int n) {
        const int m = std::abs(n);
        return (n >= 0 || m % 2 == 0) ? c[m] : -c[m];
    };

    BoundaryResidual res;
    for (int i = 0; i < n_angles; ++i) {
        const double phi = 2.0 * kPi * i / n_angles;
        Complex ext{0.0, 0.0}, inside{0.0, 0.0}, ext_d{0.0, 0.0}, in_d{0.0, 0.0};
        for (int n = -N; n <= N; ++n) {
            const Complex e = std::exp(kI * (double)n * phi);
            const int m = std::abs(n);
            const Complex sgn = (n >= 0 || m % 2 == 0) ? 1.0 : -1.0;
            const Complex A = sol.a(n);
            const Complex B = sol.b(n);
            ext += (A * reflect(jk, n) + B * reflect(h, n)) * e;
            ext_d += sol.kappa * sgn * (A * cyl_derivative(jk, m, ka) + B * cyl_derivative(h, m, ka)) * e;
            if (sol.kind == MaterialKind::Dielectric) {
                const Complex C = sol.c(n);
                inside += C * reflect(jd, n) * e;
                in_d += sol.kappa_d * sgn * C * cyl_derivative(jd, m, sol.kappa_d * a) * e;
            }
        }
        if (sol.kind == MaterialKind::Conducting) {
            res.value = std::max(res.value, std::abs(ext));
        } else {
            res.value = std::max(res.value, std::abs(ext - inside));
            res.derivative = std::max(res.derivative, std::abs(ext_d - in_d));
        }
    }
    return res;
}

namespace {

// Deterministic standard normal pairs (Box-Muller on the raw engine), kept
// independent of the standard library's distribution implementations.
struct GaussianStream {
    std::uint64_t state;
    explicit GaussianStream(unsigned long long seed) : state(seed ? seed : 0x9E3779B97F4A7C15ull) {}

    double uniform01() {
        // splitmix64
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        return ((z >> 11) + 0.5) * 0x1.0p-53;
    }

    Complex complex_normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }
};

}  // namespace

Dataset synth_dataset_2d(const std::vector<DiskScatterer>& disks, const Layout2D& layout,
                         const FrequencySweep& sweep, SynthIncident incident_kind,
                         double noise_rel, unsigned long long seed) {
    layout.validate();
    sweep.validate();

    Dataset d;
    d.dim = 2;
    d.layout2d = layout;
    d.sweep = sweep;
    d.convention = TimeConvention::NegIOmegaT;
    d.metadata["generator"] = "mie-2d";
    d.metadata["incident"] = incident_kind == SynthIncident::Isotropic ? "isotropic" : "plane";
    d.metadata["noise_rel"] = fmt_double(noise_rel);
    d.metadata["seed"] = std::to_string(seed);
    if (disks.size() > 1) d.metadata["multi_disk"] = "single-scattering-superposition";

    // No disk may touch an antenna.
    for (const auto& disk : disks) {
        for (double az : layout.emitter_azimuths_deg) {
            if ((emitter_position_2d(layout, az) - disk.center).norm() <= disk.radius + 1e-9) {
                throw InputError("synth_dataset_2d: disk intersects an emitter");
            }
            for (int j = 1; j <= layout.receiver_count(); ++j) {
                if ((receiver_position_2d(layout, az, j) - disk.center).norm() <=
                    disk.radius + 1e-9) {
                    throw InputError("synth_dataset_2d: disk intersects a receiver");
                }
            }
        }
    }

    for (int k = 0; k < sweep.count(); ++k) {
        const double kappa = sweep.kappa(k);
        for (int e = 0; e < layout.emitter_count(); ++e) {
            const double az = layout.emitter_azimuths_deg[e];
            const Vec2 epos = emitter_position_2d(layout, az);

            IncidentModel2D model;
            if (incident_kind == SynthIncident::Isotropic) {
                model = IsotropicModel{epos, kappa, Complex(1.0, 0.0)};
            } else {
                Vec2 dir = epos * (-1.0 / epos.norm());
                model = PlaneWaveModel2D{dir, Complex(1.0, 0.0), kappa};
            }

            std::vector<MieSolution> sols;
            sols.reserve(disks.size());
            for (const auto& disk : disks) sols.push_back(mie_solve(disk, model, kappa));

            ExperimentRecord rec;
            rec.key = {e, k, Polarization::None};
            for (int j = 1; j <= layout.receiver_count(); ++j) {
                const Vec2 xr = receiver_position_2d(layout, az, j);
                const Complex inc = eval_incident_2d(model, xr);
                Complex tot = inc;
                for (size_t s = 0; s < disks.size(); ++s) {
                    tot += scattered_field(sols[s], disks[s], xr);
                }
                rec.rows.push_back({j, inc, tot});
            }
            d.records[rec.key] = rec;
        }
    }

    if (noise_rel > 0.0) {
        GaussianStream g(seed);
        for (int k = 0; k < sweep.count(); ++k) {
            double sum_sq = 0.0;
            long count = 0;
            for (const auto& [key, rec] : d.records) {
                if (key.freq_id != k) continue;
                for (const auto& row : rec.rows) {
                    sum_sq += std::norm(row.total - row.incident);
                    ++count;
                }
            }
            const double sigma = noise_rel * std::sqrt(sum_sq / std::max(count, 1L));
            for (auto& [key, rec] : d.records) {
                if (key.freq_id != k) continue;
                for (auto& row : rec.rows) {
                    row.total += sigma * g.complex_normal() * std::sqrt(0.5);
                }
            }
        }
    }
    return d;
}

Dataset synth_dataset_3d(const std::vector<BornPointScatterer3D>& scatterers,
                         const Layout3D& layout, const FrequencySweep& sweep,
                         Polarization pol) {
    if (pol != Polarization::PP) {
        throw InputError("synth_dataset_3d: only the PP polarization is supported");
    }
    layout.validate();
    sweep.validate();
    for (const auto& s : scatterers) {
        if (std::abs(s.amplitude) > 0.1) {
            throw InputError("synth_dataset_3d: |amplitude| must stay <= 0.1 (Born regime)");
        }
        if (s.location.norm() >= layout.sphere_radius) {
            throw InputError("synth_dataset_3d: scatterer outside the antenna sphere");
        }
    }

    Dataset d;
    d.dim = 3;
    d.layout3d = layout;
    d.sweep = sweep;
    d.convention = TimeConvention::NegIOmegaT;
    d.metadata["generator"] = "born-3d";

    const Vec3 k_hat{0.0, 0.0, 1.0};
    for (int k = 0; k < sweep.count(); ++k) {
        const double kappa = sweep.kappa(k);
        for (int p = 1; p <= layout.azimuth_count(); ++p) {
            for (int q = 1; q <= layout.altitude_count(); ++q) {
                const EmitterGeometry3D geo = positions_3d(layout, p, q);
                const PlaneWaveModel3D u = plane3d_for_emitter(layout, p, q, kappa, true);

                ExperimentRecord rec;
                rec.key = {layout.emitter_flat_id(p, q), k, Polarization::PP};
                for (int j = 1; j <= layout.receiver_count(); ++j) {
                    const Vec3& xr = geo.receivers[j - 1];
                    const Complex inc_k = u.eval(xr).dot(k_hat);
                    Complex tot_k = inc_k;
                    for (const auto& s : scatterers) {
                        const CVec3 moment = u.eval(s.location) * s.amplitude;
                        tot_k += dyadic_kernel(kappa, +1, xr - s.location, moment).dot(k_hat);
                    }
                    rec.rows.push_back({j, inc_k, tot_k});
                }
                d.records[rec.key] = rec;
            }
        }
    }
    return d;
}

double misfit(const ExperimentRecord& record, const std::vector<Complex>& predicted) {
    if (predicted.size() != record.rows.size()) {
        throw InputError("misfit: predicted length " + std::to_string(predicted.size()) +
                         " != record rows " + std::to_string(record.rows.size()));
    }
    double sum = 0.0;
    for (size_t j = 0; j < predicted.size(); ++j) {
        sum += std::norm(predicted[j] - record.rows[j].total);
    }
    return 0.5 * sum;
}

}  // namespace topoimg
