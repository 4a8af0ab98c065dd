#ifndef TOPOIMG_GEOMETRY_HPP
#define TOPOIMG_GEOMETRY_HPP

#include <vector>

#include "topoimg/types.hpp"

namespace topoimg {

// Circular 2D acquisition: emitters on one circle, receivers on another,
// receiver offsets measured from the emitter azimuth. Angles in degrees so
// file round-trips stay exact; converted to radians only at trig calls.
struct Layout2D {
    double emitter_radius = 0.76;
    double receiver_radius = 0.72;
    std::vector<double> emitter_azimuths_deg;
    std::vector<double> receiver_offsets_deg;

    static Layout2D fresnel();

    int emitter_count() const { return (int)emitter_azimuths_deg.size(); }
    int receiver_count() const { return (int)receiver_offsets_deg.size(); }
    void validate() const;
    bool operator==(const Layout2D&) const = default;
};

// Spherical 3D acquisition: emitters on a sphere indexed by (azimuth p,
// altitude q), receivers on the equator at fixed offsets from the emitter
// azimuth. Receiver polarization is the constant vector -k.
struct Layout3D {
    double sphere_radius = 1.796;
    std::vector<double> emitter_azimuths_deg;   // theta^E_p
    std::vector<double> emitter_altitudes_deg;  // phi^E_q
    std::vector<double> receiver_offsets_deg;   // theta^R relative to theta^E
    double receiver_altitude_deg = 90.0;

    static Layout3D fresnel();

    int azimuth_count() const { return (int)emitter_azimuths_deg.size(); }
    int altitude_count() const { return (int)emitter_altitudes_deg.size(); }
    int emitter_count() const { return azimuth_count() * altitude_count(); }
    int receiver_count() const { return (int)receiver_offsets_deg.size(); }

    // Flat emitter id for (p, q), both 1-based: (p-1)*altitude_count + (q-1).
    int emitter_flat_id(int p, int q) const;
    void emitter_pq(int flat_id, int& p, int& q) const;
    void validate() const;
    bool operator==(const Layout3D&) const = default;
};

struct FrequencySweep {
    std::vector<double> values_hz;

    static FrequencySweep from_ghz(const std::vector<double>& ghz);

    int count() const { return (int)values_hz.size(); }
    double hz(int k) const { return values_hz.at(k); }
    double kappa(int k) const { return wavenumber(values_hz.at(k)); }
    void validate() const;
    bool operator==(const FrequencySweep&) const = default;
};

struct SphericalFrame {
    Vec3 u_r, u_theta, u_phi;
};

struct EmitterGeometry3D {
    Vec3 emitter;
    std::vector<Vec3> receivers;
    Vec3 pol_pp;  // u_phi at the emitter angles
    Vec3 pol_tp;  // u_theta at the emitter angles
};

Vec2 emitter_position_2d(const Layout2D& layout, double azimuth_deg);
// offset_index is 1-based per the acquisition convention.
Vec2 receiver_position_2d(const Layout2D& layout, double emitter_azimuth_deg, int offset_index);
// Index of the receiver offset closest to 180 degrees (front of emitter).
int front_receiver_index(const Layout2D& layout);

SphericalFrame spherical_frame(double theta_deg, double phi_deg);
EmitterGeometry3D positions_3d(const Layout3D& layout, int p, int q);
// Absolute azimuth (degrees, reduced to [0,360)) of receiver j for azimuth index p.
double receiver_azimuth_3d(const Layout3D& layout, int p, int j);

}  // namespace topoimg

#endif
