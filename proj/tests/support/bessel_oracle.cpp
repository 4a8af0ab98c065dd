#include "support/bessel_oracle.hpp"

#include <quadmath.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace testsupport {

namespace {

using F128 = __float128;

const F128 kPiQ = M_PIq;
// Euler-Mascheroni constant to quad precision.
const F128 kGammaQ = 0.577215664901532860606512090082402431Q;

struct QC {
    F128 re = 0.0Q, im = 0.0Q;
};

QC qc_mul(QC a, QC b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
QC qc_add(QC a, QC b) { return {a.re + b.re, a.im + b.im}; }
QC qc_scale(QC a, F128 s) { return {a.re * s, a.im * s}; }
F128 qc_abs(QC a) { return sqrtq(a.re * a.re + a.im * a.im); }

struct Quad01 {
    F128 j0, j1, y0, y1;
};

Quad01 series_kernels(F128 x) {
    const F128 q = x * x / 4.0Q;
    F128 j0 = 1.0Q, j1s = 1.0Q, sy0 = 0.0Q, sy1 = 1.0Q;
    F128 u = 1.0Q, v = 1.0Q, hk = 0.0Q, sign = 1.0Q;
    for (int k = 1; k < 400; ++k) {
        u *= q / (F128(k) * F128(k));
        v *= q / (F128(k) * F128(k + 1));
        hk += 1.0Q / F128(k);
        sign = -sign;
        j0 += sign * u;
        j1s += sign * v;
        sy0 += -sign * u * hk;
        sy1 += sign * v * (2.0Q * hk + 1.0Q / F128(k + 1));
        if (u < 1e-40Q && k > 6) break;
    }
    const F128 lg = logq(x / 2.0Q) + kGammaQ;
    Quad01 r;
    r.j0 = j0;
    r.j1 = (x / 2.0Q) * j1s;
    r.y0 = (2.0Q / kPiQ) * (lg * r.j0 + sy0);
    r.y1 = (2.0Q / kPiQ) * (lg * r.j1 - 1.0Q / x - (x / 4.0Q) * sy1);
    return r;
}

// H1_nu(x) ~ sqrt(2/(pi x)) e^{i(x - nu pi/2 - pi/4)} sum_k i^k a_k(nu)/x^k,
// a_k(nu) = prod_{m=1..k} (4 nu^2 - (2m-1)^2) / (k! 8^k). Truncated at the
// smallest term; below x = 20 that term is too large and the series branch
// is used instead.
Quad01 asymptotic_kernels(F128 x) {
    Quad01 out;
    const F128 amp = sqrtq(2.0Q / (kPiQ * x));
    for (int nu = 0; nu <= 1; ++nu) {
        const F128 mu = 4.0Q * F128(nu) * F128(nu);
        QC sum{1.0Q, 0.0Q};
        QC term{1.0Q, 0.0Q};
        F128 prev_mag = 1.0Q;
        for (int k = 1; k < 200; ++k) {
            const F128 tk = 2.0Q * F128(k) - 1.0Q;
            const F128 factor = (mu - tk * tk) / (8.0Q * F128(k) * x);
            term = qc_mul(term, QC{0.0Q, factor});  // multiply by i*factor
            const F128 mag = qc_abs(term);
            if (mag > prev_mag) break;  // divergent tail reached
            sum = qc_add(sum, term);
            prev_mag = mag;
            if (mag < 1e-38Q) break;
        }
        const F128 omega = x - F128(nu) * kPiQ / 2.0Q - kPiQ / 4.0Q;
        const QC phase{cosq(omega), sinq(omega)};
        const QC h1 = qc_scale(qc_mul(phase, sum), amp);
        if (nu == 0) {
            out.j0 = h1.re;
            out.y0 = h1.im;
        } else {
            out.j1 = h1.re;
            out.y1 = h1.im;
        }
    }
    return out;
}

Quad01 kernels(F128 x) { return (x <= 20.0Q) ? series_kernels(x) : asymptotic_kernels(x); }

// Miller backward recurrence for J_0..n_max, normalized by the identity
// J_0 + 2 J_2 + 2 J_4 + ... = 1.
std::vector<F128> miller_j(int n_max, F128 x) {
    const int xi = (int)ceilq(x);
    const int start = (n_max > xi ? n_max : xi) + 90 +
                      (int)ceilq(16.0Q * cbrtq(x < 1.0Q ? 1.0Q : x));
    std::vector<F128> vals(n_max + 1, 0.0Q);
    F128 fp = 0.0Q, f = 1e-300Q, norm = 0.0Q;
    for (int k = start; k >= 0; --k) {
        const F128 fm = (2.0Q * F128(k + 1) / x) * f - fp;
        fp = f;
        f = fm;
        if (k <= n_max) vals[k] = f;
        if (k > 0 && k % 2 == 0) norm += 2.0Q * f;
        if (k == 0) norm += f;
        if (fabsq(f) > 1e3800Q) {
            f *= 1e-3800Q;
            fp *= 1e-3800Q;
            norm *= 1e-3800Q;
            for (auto& v : vals) v *= 1e-3800Q;
        }
    }
    for (auto& v : vals) v /= norm;
    return vals;
}

}  // namespace

double oracle_j(int n, double x) {
    if (!(x > 0.0) || n < 0) throw std::domain_error("oracle_j domain");
    const F128 xq = x;
    if (n == 0) return (double)kernels(xq).j0;
    if (n == 1) return (double)kernels(xq).j1;
    return (double)miller_j(n, xq)[n];
}

double oracle_y(int n, double x) {
    if (!(x > 0.0) || n < 0) throw std::domain_error("oracle_y domain");
    const F128 xq = x;
    const Quad01 k01 = kernels(xq);
    if (n == 0) return (double)k01.y0;
    if (n == 1) return (double)k01.y1;
    F128 ym = k01.y0, y = k01.y1;
    for (int k = 1; k < n; ++k) {
        const F128 yp = (2.0Q * F128(k) / xq) * y - ym;
        ym = y;
        y = yp;
    }
    return (double)y;
}

double oracle_y0_first_zero() {
    double lo = 0.5, hi = 1.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (oracle_y(0, lo) * oracle_y(0, mid) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace testsupport
