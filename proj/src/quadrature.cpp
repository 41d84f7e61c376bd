#include "dinf/quadrature.hpp"

#include "dinf/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace dinf {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

double sample(const ScalarFn& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) throw NumericalError("non-finite integrand sample at x = " + std::to_string(x));
    return y;
}

Integral kronrod15(const ScalarFn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = sample(f, c);
    double k = kWgk[7] * fc;
    double g = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        const double s = sample(f, c - dx) + sample(f, c + dx);
        k += kWgk[i] * s;
        if (i % 2 == 1) g += kWg[i / 2] * s;
    }
    return {k * h, std::abs((k - g) * h)};
}

Integral adapt(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol, int depth) {
    const Integral whole = kronrod15(f, a, b);
    const double m = 0.5 * (a + b);
    if (whole.error <= std::max(abs_tol, rel_tol * std::abs(whole.value)) || depth >= 60 || m <= a || m >= b)
        return whole;
    const Integral left = adapt(f, a, m, 0.5 * abs_tol, rel_tol, depth + 1);
    const Integral right = adapt(f, m, b, 0.5 * abs_tol, rel_tol, depth + 1);
    return {left.value + right.value, left.error + right.error};
}

}  // namespace

Integral gauss_kronrod(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol) {
    if (a == b) return {};
    return adapt(f, a, b, abs_tol, rel_tol, 0);
}

Integral integrate_from_peak(const ScalarFn& f, double length, double w, double abs_tol, double rel_tol) {
    Integral total;
    if (length <= 0.0) return total;
    w = std::min(w, length);
    double lo = 0.0;
    double hi = w;
    int panels = 0;
    while (lo < length) {
        const Integral part = gauss_kronrod(f, lo, hi, abs_tol / 64.0, rel_tol);
        total.value += part.value;
        total.error += part.error;
        ++panels;
        lo = hi;
        hi = panels == 1 ? 2.0 * w : std::min(length, 2.0 * hi);
        hi = std::min(hi, length);
    }
    return total;
}

QuadratureResult improper_integral(const ScalarFn& f, double first_width, const ImproperOptions& opts) {
    QuadratureResult res;
    double lo = 0.0;
    double hi = first_width;
    double prev_increment = -1.0;
    int small_run = 0;
    int grow_run = 0;
    for (int k = 0; k <= opts.max_doublings; ++k) {
        if (!std::isfinite(hi)) break;
        const double seg_tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(res.value)) / 64.0;
        const Integral part = gauss_kronrod(f, lo, hi, seg_tol, 1e-13);
        const double inc = part.value;
        res.value += inc;
        res.abs_error_estimate += part.error;
        res.truncation_radius = hi;
        if (!std::isfinite(res.value)) {
            res.divergent = true;
            return res;
        }
        const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(res.value));
        small_run = std::abs(inc) < 0.5 * tol ? small_run + 1 : 0;
        if (small_run >= 2) {
            res.converged = true;
            res.abs_error_estimate += std::abs(inc);
            return res;
        }
        if (prev_increment >= 0.0 && inc > 0.0 && inc >= prev_increment * (1.0 - 1e-9))
            ++grow_run;
        else
            grow_run = 0;
        if (grow_run >= opts.divergence_run) {
            res.divergent = true;
            return res;
        }
        prev_increment = std::abs(inc);
        lo = hi;
        hi = 2.0 * hi;
    }
    return res;
}

}  // namespace dinf
