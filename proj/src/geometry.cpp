#include "topoimg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace topoimg {

namespace {

double normalize_deg(double a) {
    double r = std::fmod(a, 360.0);
    if (r < 0.0) r += 360.0;
    return r;
}

int find_angle(const std::vector<double>& list, double value_deg, double tol_deg,
               const char* what) {
    for (int i = 0; i < (int)list.size(); ++i) {
        if (std::abs(list[i] - value_deg) <= tol_deg) return i;
    }
    throw InputError(std::string("unknown ") + what + " angle " + std::to_string(value_deg));
}

}  // namespace

Layout2D Layout2D::fresnel() {
    Layout2D l;
    for (int i = 0; i < 36; ++i) l.emitter_azimuths_deg.push_back(10.0 * i);
    for (int i = 0; i < 49; ++i) l.receiver_offsets_deg.push_back(60.0 + 5.0 * i);
    return l;
}

void Layout2D::validate() const {
    if (emitter_radius <= 0.0 || receiver_radius <= 0.0) {
        throw InputError("Layout2D: radii must be positive");
    }
    if (emitter_azimuths_deg.empty() || receiver_offsets_deg.empty()) {
        throw InputError("Layout2D: empty antenna lists");
    }
    for (double o : receiver_offsets_deg) {
        if (!(o > 0.0 && o < 360.0)) {
            throw InputError("Layout2D: receiver offset outside (0,360): " + std::to_string(o));
        }
    }
}

Layout3D Layout3D::fresnel() {
    Layout3D l;
    for (int p = 1; p <= 9; ++p) l.emitter_azimuths_deg.push_back(40.0 * p);
    for (int q = 1; q <= 9; ++q) l.emitter_altitudes_deg.push_back(18.0 * q);
    for (int j = 0; j < 27; ++j) l.receiver_offsets_deg.push_back(50.0 + 10.0 * j);
    return l;
}

int Layout3D::emitter_flat_id(int p, int q) const {
    if (p < 1 || p > azimuth_count() || q < 1 || q > altitude_count()) {
        throw InputError("Layout3D: emitter index (p,q) out of range");
    }
    return (p - 1) * altitude_count() + (q - 1);
}

void Layout3D::emitter_pq(int flat_id, int& p, int& q) const {
    if (flat_id < 0 || flat_id >= emitter_count()) {
        throw InputError("Layout3D: emitter id out of range");
    }
    p = flat_id / altitude_count() + 1;
    q = flat_id % altitude_count() + 1;
}

void Layout3D::validate() const {
    if (sphere_radius <= 0.0) throw InputError("Layout3D: radius must be positive");
    if (emitter_azimuths_deg.empty() || emitter_altitudes_deg.empty() ||
        receiver_offsets_deg.empty()) {
        throw InputError("Layout3D: empty antenna lists");
    }
}

FrequencySweep FrequencySweep::from_ghz(const std::vector<double>& ghz) {
    FrequencySweep s;
    for (double g : ghz) s.values_hz.push_back(g * 1e9);
    s.validate();
    return s;
}

void FrequencySweep::validate() const {
    if (values_hz.empty()) throw InputError("FrequencySweep: empty");
    for (size_t i = 0; i < values_hz.size(); ++i) {
        if (!(values_hz[i] > 0.0)) throw InputError("FrequencySweep: non-positive frequency");
        if (i > 0 && !(values_hz[i] > values_hz[i - 1])) {
            throw InputError("FrequencySweep: not strictly increasing");
        }
    }
}

Vec2 emitter_position_2d(const Layout2D& layout, double azimuth_deg) {
    find_angle(layout.emitter_azimuths_deg, azimuth_deg, 1e-9, "emitter");
    const double a = deg2rad(azimuth_deg);
    return {layout.emitter_radius * std::cos(a), layout.emitter_radius * std::sin(a)};
}

Vec2 receiver_position_2d(const Layout2D& layout, double emitter_azimuth_deg, int offset_index) {
    if (offset_index < 1 || offset_index > layout.receiver_count()) {
        throw InputError("receiver offset index out of range: " + std::to_string(offset_index));
    }
    const double a = deg2rad(emitter_azimuth_deg + layout.receiver_offsets_deg[offset_index - 1]);
    return {layout.receiver_radius * std::cos(a), layout.receiver_radius * std::sin(a)};
}

int front_receiver_index(const Layout2D& layout) {
    int best = 1;
    double best_gap = 1e300;
    for (int i = 0; i < layout.receiver_count(); ++i) {
        const double gap = std::abs(layout.receiver_offsets_deg[i] - 180.0);
        if (gap < best_gap) {
            best_gap = gap;
            best = i + 1;
        }
    }
    return best;
}

SphericalFrame spherical_frame(double theta_deg, double phi_deg) {
    const double t = deg2rad(normalize_deg(theta_deg));
    const double p = deg2rad(phi_deg);
    const double ct = std::cos(t), st = std::sin(t);
    const double cp = std::cos(p), sp = std::sin(p);
    SphericalFrame f;
    f.u_r = {ct * sp, st * sp, cp};
    f.u_theta = {-st, ct, 0.0};
    f.u_phi = {ct * cp, st * cp, -sp};
    return f;
}

EmitterGeometry3D positions_3d(const Layout3D& layout, int p, int q) {
    if (p < 1 || p > layout.azimuth_count() || q < 1 || q > layout.altitude_count()) {
        throw InputError("positions_3d: emitter index out of range");
    }
    const double theta_e = layout.emitter_azimuths_deg[p - 1];
    const double phi_e = layout.emitter_altitudes_deg[q - 1];
    const SphericalFrame fe = spherical_frame(theta_e, phi_e);

    EmitterGeometry3D g;
    g.emitter = fe.u_r * layout.sphere_radius;
    g.pol_pp = fe.u_phi;
    g.pol_tp = fe.u_theta;
    g.receivers.reserve(layout.receiver_count());
    for (int j = 1; j <= layout.receiver_count(); ++j) {
        const SphericalFrame fr =
            spherical_frame(theta_e + layout.receiver_offsets_deg[j - 1],
                            layout.receiver_altitude_deg);
        g.receivers.push_back(fr.u_r * layout.sphere_radius);
    }
    return g;
}

double receiver_azimuth_3d(const Layout3D& layout, int p, int j) {
    if (p < 1 || p > layout.azimuth_count() || j < 1 || j > layout.receiver_count()) {
        throw InputError("receiver_azimuth_3d: index out of range");
    }
    return normalize_deg(layout.emitter_azimuths_deg[p - 1] + layout.receiver_offsets_deg[j - 1]);
}

}  // namespace topoimg
