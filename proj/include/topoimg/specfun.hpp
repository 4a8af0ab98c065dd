#ifndef TOPOIMG_SPECFUN_HPP
#define TOPOIMG_SPECFUN_HPP

#include <complex>
#include <vector>

namespace topoimg {
namespace specfun {

// Highest supported cylinder-function order. The incident-wave fit needs
// 14, Mie truncations stay well below this for the experiment scales.
constexpr int kMaxOrder = 64;

// Cylindrical Bessel functions of integer order n in [0, kMaxOrder] for
// real x > 0. Throws std::domain_error outside that domain.
double bessel_j(int n, double x);
double bessel_y(int n, double x);

// Hankel function H^kind_n(x), kind 1 or 2. For real x the two kinds are
// complex conjugates of each other, exactly as computed.
std::complex<double> hankel(int kind, int n, double x);

// Batch evaluation of orders 0..n_max in one recurrence sweep. Cheaper
// than n_max+1 scalar calls inside series loops (fit, Mie).
std::vector<double> bessel_j_array(int n_max, double x);
std::vector<double> bessel_y_array(int n_max, double x);
std::vector<std::complex<double>> hankel1_array(int n_max, double x);

}  // namespace specfun
}  // namespace topoimg

#endif
