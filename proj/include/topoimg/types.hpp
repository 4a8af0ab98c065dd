#ifndef TOPOIMG_TYPES_HPP
#define TOPOIMG_TYPES_HPP

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace topoimg {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// Vacuum constants (SI).
constexpr double kMu0 = 4.0 * kPi * 1e-7;
constexpr double kEps0 = 8.8541878128e-12;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }

// Wavenumber in vacuum for frequency nu [Hz].
inline double wavenumber(double nu_hz) {
    return 2.0 * kPi * nu_hz * std::sqrt(kMu0 * kEps0);
}

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

struct CVec3 {
    Complex x{0.0, 0.0}, y{0.0, 0.0}, z{0.0, 0.0};

    CVec3() = default;
    CVec3(Complex cx, Complex cy, Complex cz) : x(cx), y(cy), z(cz) {}
    explicit CVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

    CVec3 operator+(const CVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    CVec3 operator-(const CVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    CVec3 operator*(Complex s) const { return {x * s, y * s, z * s}; }

    // Bilinear dot product (no conjugation).
    Complex dot(const CVec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Complex dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    CVec3 conj() const { return {std::conj(x), std::conj(y), std::conj(z)}; }
    double squared_norm() const { return std::norm(x) + std::norm(y) + std::norm(z); }
    double norm() const { return std::sqrt(squared_norm()); }
};

inline CVec3 operator*(Complex s, const CVec3& v) { return v * s; }

// Input/usage problems: bad flags, malformed files, out-of-range indices.
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: rank deficiency, non-convergent series, zero normalizers.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace topoimg

#endif
