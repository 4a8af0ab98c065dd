#include "topoimg/incident.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

#include "topoimg/specfun.hpp"
#include "topoimg/textio.hpp"

namespace topoimg {

namespace {

constexpr double kSingularRadius = 1e-12;
const Complex kI{0.0, 1.0};

}  // namespace

double emitter_polar_angle(const Vec2& emitter, const Vec2& x) {
    // theta = 0 along the ray emitter -> origin; the arccos form in use for
    // this geometry is blind to the transverse sign, so extend it with atan2.
    Vec2 toward{-emitter.x, -emitter.y};
    const double n = toward.norm();
    if (n < kSingularRadius) {
        toward = {1.0, 0.0};
    } else {
        toward = toward * (1.0 / n);
    }
    const Vec2 transverse{-toward.y, toward.x};
    const Vec2 r = x - emitter;
    return std::atan2(r.dot(transverse), r.dot(toward));
}

Complex HankelSeriesModel::eval(const Vec2& x) const {
    const Vec2 r = x - emitter;
    const double rho = r.norm();
    if (rho < kSingularRadius) {
        throw NumericalError("incident series evaluated at the emitter singularity");
    }
    const double theta = emitter_polar_angle(emitter, x);
    const auto h = specfun::hankel1_array(n_modes(), kappa * rho);
    Complex sum = a[0] * h[0];
    for (int n = 1; n <= n_modes(); ++n) {
        sum += (a[n] * std::cos(n * theta) + b[n] * std::sin(n * theta)) * h[n];
    }
    return sum;
}

Complex PlaneWaveModel2D::eval(const Vec2& x) const {
    return amplitude * std::exp(kI * (kappa * direction.dot(x)));
}

Complex IsotropicModel::eval(const Vec2& x) const {
    const double rho = (x - emitter).norm();
    if (rho < kSingularRadius) {
        throw NumericalError("isotropic incident model evaluated at the emitter singularity");
    }
    return scale * specfun::hankel(1, 0, kappa * rho);
}

CVec3 PlaneWaveModel3D::eval(const Vec3& x) const {
    const Complex phase = std::exp(kI * (kappa * propagation.dot(x)));
    return CVec3(polarization) * phase;
}

Complex eval_incident_2d(const IncidentModel2D& model, const Vec2& x) {
    return std::visit([&](const auto& m) { return m.eval(x); }, model);
}

CVec3 eval_incident_3d(const PlaneWaveModel3D& model, const Vec3& x) { return model.eval(x); }

HankelFit fit_hankel_series(const std::vector<std::pair<Vec2, Complex>>& samples,
                            const Vec2& emitter, double kappa, int n_modes) {
    if (n_modes < 0 || n_modes > specfun::kMaxOrder) {
        throw InputError("fit_hankel_series: n_modes out of range");
    }
    const int m = (int)samples.size();
    const int q = 2 * n_modes + 1;  // complex unknowns
    if (m < q) {
        throw InputError("fit_hankel_series: need at least " + std::to_string(q) +
                         " samples, got " + std::to_string(m));
    }
    int distinct = 0;
    for (int i = 0; i < m; ++i) {
        bool seen = false;
        for (int j = 0; j < i && !seen; ++j) {
            seen = (samples[i].first - samples[j].first).norm() < 1e-12;
        }
        if (!seen) ++distinct;
    }

    // Complex basis values per sample.
    Eigen::MatrixXcd psi(m, q);
    Eigen::VectorXcd rhs_c(m);
    for (int j = 0; j < m; ++j) {
        const Vec2& x = samples[j].first;
        const double rho = (x - emitter).norm();
        if (rho < kSingularRadius) {
            throw InputError("fit_hankel_series: sample coincides with the emitter");
        }
        const double theta = emitter_polar_angle(emitter, x);
        const auto h = specfun::hankel1_array(n_modes, kappa * rho);
        psi(j, 0) = h[0];
        for (int n = 1; n <= n_modes; ++n) {
            psi(j, 2 * n - 1) = h[n] * std::cos(n * theta);
            psi(j, 2 * n) = h[n] * std::sin(n * theta);
        }
        rhs_c(j) = samples[j].second;
    }

    // Real/imaginary stacked system: unknowns (Re c_q, Im c_q).
    Eigen::MatrixXd A(2 * m, 2 * q);
    Eigen::VectorXd rhs(2 * m);
    for (int j = 0; j < m; ++j) {
        for (int c = 0; c < q; ++c) {
            const Complex p = psi(j, c);
            A(2 * j, 2 * c) = p.real();
            A(2 * j, 2 * c + 1) = -p.imag();
            A(2 * j + 1, 2 * c) = p.imag();
            A(2 * j + 1, 2 * c + 1) = p.real();
        }
        rhs(2 * j) = rhs_c(j).real();
        rhs(2 * j + 1) = rhs_c(j).imag();
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const auto& R = qr.matrixR();
    const double r_max = std::abs(R(0, 0));
    const double r_min = std::abs(R(2 * q - 1, 2 * q - 1));
    const double condition = (r_min > 0.0) ? r_max / r_min : std::numeric_limits<double>::infinity();
    // The full-span basis runs at the edge of double precision (the arc the
    // receivers subtend limits the usable mode count), so a pivot-ratio
    // threshold cannot separate fine from degenerate. Structural deficiency
    // (fewer distinct points than unknowns, or an exactly dead pivot) can.
    if (distinct < q || !(r_min > 0.0) || !std::isfinite(r_max)) {
        throw NumericalError("fit_hankel_series: rank-deficient design matrix (" +
                             std::to_string(distinct) + " distinct points for " +
                             std::to_string(q) + " complex unknowns, condition estimate " +
                             std::to_string(condition) + ")");
    }
    const Eigen::VectorXd z = qr.solve(rhs);

    HankelFit fit;
    fit.model.emitter = emitter;
    fit.model.kappa = kappa;
    fit.model.a.resize(n_modes + 1);
    fit.model.b.assign(n_modes + 1, Complex(0.0, 0.0));
    fit.model.a[0] = Complex(z(0), z(1));
    for (int n = 1; n <= n_modes; ++n) {
        fit.model.a[n] = Complex(z(2 * (2 * n - 1)), z(2 * (2 * n - 1) + 1));
        fit.model.b[n] = Complex(z(2 * (2 * n)), z(2 * (2 * n) + 1));
    }
    fit.residual_norm = (A * z - rhs).norm();
    fit.condition = condition;
    return fit;
}

IsotropicModel isotropic_from_front(const Layout2D& layout, double emitter_azimuth_deg,
                                    double kappa, Complex front_incident) {
    const Vec2 e = emitter_position_2d(layout, emitter_azimuth_deg);
    const Vec2 xf = receiver_position_2d(layout, emitter_azimuth_deg,
                                         front_receiver_index(layout));
    const Complex denom = specfun::hankel(1, 0, kappa * (xf - e).norm());
    return {e, kappa, front_incident / denom};
}

PlaneWaveModel2D plane2d_from_front(const Layout2D& layout, double emitter_azimuth_deg,
                                    double kappa, Complex front_incident) {
    const Vec2 e = emitter_position_2d(layout, emitter_azimuth_deg);
    const Vec2 xf = receiver_position_2d(layout, emitter_azimuth_deg,
                                         front_receiver_index(layout));
    Vec2 d = xf - e;
    d = d * (1.0 / d.norm());
    PlaneWaveModel2D m;
    m.direction = d;
    m.kappa = kappa;
    m.amplitude = front_incident / std::exp(kI * (kappa * d.dot(xf)));
    return m;
}

PlaneWaveModel3D plane3d_for_emitter(const Layout3D& layout, int p, int q, double kappa,
                                     bool parallel_pol) {
    const double theta = layout.emitter_azimuths_deg.at(p - 1);
    const double phi = layout.emitter_altitudes_deg.at(q - 1);
    const SphericalFrame f = spherical_frame(theta, phi);
    PlaneWaveModel3D m;
    m.propagation = f.u_r * -1.0;  // from the emitter toward the origin
    m.polarization = parallel_pol ? f.u_phi : f.u_theta;
    m.kappa = kappa;
    return m;
}

std::string model_to_text(const HankelSeriesModel& m) {
    std::string s = "emitter " + fmt_double(m.emitter.x) + ' ' + fmt_double(m.emitter.y) +
                    " kappa " + fmt_double(m.kappa) + " modes " + std::to_string(m.n_modes()) +
                    " coef";
    auto push = [&](Complex c) {
        s += ' ';
        s += fmt_double(c.real());
        s += ' ';
        s += fmt_double(c.imag());
    };
    push(m.a[0]);
    for (int n = 1; n <= m.n_modes(); ++n) {
        push(m.a[n]);
        push(m.b[n]);
    }
    return s;
}

HankelSeriesModel model_from_text(const std::string& line) {
    const auto f = split_fields(line);
    if (f.size() < 8 || f[0] != "emitter" || f[3] != "kappa" || f[5] != "modes" ||
        f[7] != "coef") {
        throw InputError("bad incident-model record: " + line);
    }
    HankelSeriesModel m;
    m.emitter = {parse_double(f[1]), parse_double(f[2])};
    m.kappa = parse_double(f[4]);
    const int n_modes = (int)parse_long(f[6]);
    const size_t need = 8 + 2 * (2 * (size_t)n_modes + 1);
    if (f.size() != need) throw InputError("bad incident-model coefficient count");
    m.a.resize(n_modes + 1);
    m.b.assign(n_modes + 1, Complex(0.0, 0.0));
    size_t i = 8;
    m.a[0] = Complex(parse_double(f[i]), parse_double(f[i + 1]));
    i += 2;
    for (int n = 1; n <= n_modes; ++n) {
        m.a[n] = Complex(parse_double(f[i]), parse_double(f[i + 1]));
        m.b[n] = Complex(parse_double(f[i + 2]), parse_double(f[i + 3]));
        i += 4;
    }
    return m;
}

}  // namespace topoimg
