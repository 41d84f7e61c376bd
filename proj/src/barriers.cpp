#include "dinf/barriers.hpp"

#include "dinf/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dinf {

double A0Spec::log_a0(double r) const { return log_a0_fn(r); }
double A0Spec::a0(double r) const { return std::exp(log_a0_fn(r)); }

A0Spec build_a0(const CoefficientBundle& B, const ModelManifold& M, const SampleGrid& grid) {
    (void)M;
    const LogRadialFn log_abar = minorant_of(B, grid);
    const double la_R0 = log_abar(B.R0);
    double min_a = std::numeric_limits<double>::infinity();
    for (double r : grid.radii_between(grid.r_min, B.R0))
        for (double th : grid.thetas()) min_a = std::min(min_a, B.a(r, th));
    if (!(min_a > 0.0)) throw PreconditionError("build_a0: a is not positive on the closed ball B_R0");
    A0Spec s;
    s.R0 = B.R0;
    s.C_bar = std::min(1.0, std::exp(std::log(min_a) - la_R0));
    s.log_abar = log_abar;
    const double log_cbar = std::log(s.C_bar);
    const double R0 = B.R0;
    s.log_a0_fn = [log_abar, log_cbar, R0, la_R0](double r) {
        return -log_cbar - (r < R0 ? la_R0 : log_abar(r));
    };
    return s;
}

A0Spec a0_from_log(LogRadialFn log_a0) {
    A0Spec s;
    s.R0 = 0.0;
    s.C_bar = 1.0;
    s.log_a0_fn = std::move(log_a0);
    return s;
}

namespace {

// psi^{1-m}(s) int_0^s a0 psi^{m-1}, continued from its value g0 at r0 < s.
double advance_flux(const ModelManifold& M, const A0Spec& a0, double r0, double g0, double s) {
    const int k = M.dim - 1;
    if (s <= r0) return g0;
    const double carried = r0 > 0.0 ? g0 * std::exp(-k * M.profile.log_ratio(r0, s - r0)) : 0.0;
    const double len = s - r0;
    const double w = std::min(len, 1.0 / (k * M.profile.ratio1(s)));
    const double scale = a0.a0(s) * w;
    const Integral add = integrate_from_peak(
        [&](double u) {
            const double t = s - u;
            if (t <= 0.0) return 0.0;
            return std::exp(a0.log_a0(t) + k * M.profile.log_ratio(s, -u));
        },
        len, w, 1e-15 * scale, 1e-13);
    return carried + add.value;
}

// int_r^inf a0 S over t in the variable log(t/r), S = I psi^{m-1}.
QuadratureResult tail_of_a0_S(const ModelManifold& M, const A0Spec& a0, double r, double rel_tol) {
    auto log_integrand = [&](double t) {
        const QuadratureResult S = scaled_tail(M, t);
        if (!S.converged) throw NumericalError("barrier: tail integral of psi^{1-m} did not converge");
        return a0.log_a0(t) + std::log(S.value);
    };
    const double eps = 1e-4;
    const double slope = std::abs(log_integrand(r * (1 + eps)) - log_integrand(r)) / (r * eps);
    const double width = std::min(1.0, 1.0 / std::max(r * slope, 1e-300));
    ImproperOptions opts;
    opts.abs_tol = 0.0;
    opts.rel_tol = rel_tol;
    QuadratureResult q = improper_integral(
        [&](double s) {
            const double t = r * std::exp(s);
            if (!std::isfinite(t)) return 0.0;
            return t * std::exp(log_integrand(t));
        },
        width, opts);
    if (!q.converged) throw NumericalError("barrier: tail of a0 * I psi^{m-1} did not converge");
    return q;
}

double integrate_flux(const ModelManifold& M, const A0Spec& a0, double r0, double g0, double a, double b) {
    const Integral seg = gauss_kronrod([&](double s) { return advance_flux(M, a0, r0, g0, s); }, a, b, 0.0, 1e-12);
    return seg.value;
}

std::vector<double> barrier_grid(const BarrierOptions& o) {
    if (!(o.r_min > 0.0) || !(o.r_max > o.r_min)) throw PreconditionError("barrier grid: need 0 < r_min < r_max");
    const int n = std::max(1, static_cast<int>(std::ceil(std::log10(o.r_max / o.r_min) * o.per_decade)));
    std::vector<double> r(n + 2);
    r[0] = 0.0;
    for (int i = 0; i <= n; ++i) r[i + 1] = o.r_min * std::pow(o.r_max / o.r_min, static_cast<double>(i) / n);
    r[1] = o.r_min;
    r.back() = o.r_max;
    return r;
}

}  // namespace

HResult compute_H(const ModelManifold& M, const A0Spec& a0, double tol, double rho0, int max_doublings) {
    const int k = M.dim - 1;
    HResult out;
    auto S = [&](double t) {
        const QuadratureResult q = scaled_tail(M, t);
        if (!q.converged) throw PreconditionError("compute_H: tail integral of psi^{1-m} diverges");
        return q.value;
    };
    auto a0S = [&](double t) { return a0.a0(t) * S(t); };

    // flux G and Q = int_0^rho a0 S, advanced over [0, rho0] on a doubling ladder
    double lo = rho0 * std::pow(2.0, -20);
    double G = gauss_kronrod([&](double t) { return std::exp(a0.log_a0(t) + k * M.profile.log_ratio(lo, t - lo)); },
                             0.0, lo, 0.0, 1e-13)
                   .value;
    double Q = gauss_kronrod(a0S, 0.0, lo, 0.0, 1e-12).value;
    while (lo < rho0) {
        const double hi = std::min(2.0 * lo, rho0);
        G = advance_flux(M, a0, lo, G, hi);
        Q += gauss_kronrod(a0S, lo, hi, 0.0, 1e-12).value;
        lo = hi;
    }

    double rho = rho0;
    int small = 0;
    for (int d = 0; d <= max_doublings; ++d) {
        const double bracket = S(rho) * G - Q;
        out.rho.push_back(rho);
        out.bracket.push_back(bracket);
        const std::size_t n = out.bracket.size();
        if (n >= 2) small = std::abs(out.bracket[n - 1] - out.bracket[n - 2]) < tol ? small + 1 : 0;
        if (small >= 3) {
            out.value = std::max({out.bracket[n - 1], out.bracket[n - 2], out.bracket[n - 3]});
            return out;
        }
        const double next = 2.0 * rho;
        G = advance_flux(M, a0, rho, G, next);
        Q += gauss_kronrod(a0S, rho, next, 0.0, 1e-12).value;
        rho = next;
    }
    throw NumericalError("compute_H: bracket did not stabilize within " + std::to_string(max_doublings) +
                         " doublings");
}

void VerificationRecord::fail(std::string check, double r, double theta, double value) {
    passed = false;
    violations.push_back({std::move(check), r, theta, value});
}

double RadialBarrier::flux_at(double x) const {
    if (x <= 0.0) return 0.0;
    const auto it = std::upper_bound(r.begin(), r.end(), x);
    const std::size_t i = static_cast<std::size_t>(std::distance(r.begin(), it)) - 1;
    return advance_flux(M, a0, r[i], -dV[i], x);
}

double RadialBarrier::value_at(double x) const {
    if (x < 0.0 || x > r.back() * (1 + 1e-12)) throw PreconditionError("value_at: radius outside the barrier grid");
    const auto it = std::upper_bound(r.begin(), r.end(), x);
    const std::size_t i = static_cast<std::size_t>(std::distance(r.begin(), it)) - 1;
    if (x == r[i]) return V[i];
    return V[i] - integrate_flux(M, a0, r[i], -dV[i], r[i], x);
}

double RadialBarrier::laplacian(std::size_t i) const {
    if (r[i] == 0.0) return M.dim * d2V(i);
    return (d2V_drift[i] + (M.dim - 1) * M.profile.ratio1(r[i]) * dV[i]) + d2V_source[i];
}

RadialBarrier build_V(const ModelManifold& M, const A0Spec& a0, const BarrierOptions& opts) {
    const int k = M.dim - 1;
    RadialBarrier b;
    b.M = M;
    b.a0 = a0;
    b.r = barrier_grid(opts);
    const std::size_t n = b.r.size();
    std::vector<double> G(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) G[i] = advance_flux(M, a0, b.r[i - 1], G[i - 1], b.r[i]);

    b.V.assign(n, 0.0);
    const double rN = b.r.back();
    const QuadratureResult SN = scaled_tail(M, rN);
    if (!SN.converged) throw NumericalError("build_V: tail integral of psi^{1-m} did not converge");
    b.V[n - 1] = G[n - 1] * SN.value + tail_of_a0_S(M, a0, rN, 1e-12).value;
    for (std::size_t i = n - 1; i-- > 0;)
        b.V[i] = b.V[i + 1] + integrate_flux(M, a0, b.r[i], G[i], b.r[i], b.r[i + 1]);

    b.dV.resize(n);
    b.d2V_drift.resize(n);
    b.d2V_source.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.dV[i] = -G[i];
        b.d2V_source[i] = -a0.a0(b.r[i]);
        b.d2V_drift[i] = b.r[i] == 0.0 ? k * a0.a0(0.0) / M.dim : k * M.profile.ratio1(b.r[i]) * G[i];
    }
    b.H = compute_H(M, a0, opts.tol).value;
    return b;
}

RadialBarrier build_V(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid,
                      const BarrierOptions& opts) {
    return build_V(M, build_a0(B, M, grid), opts);
}

VerificationRecord verify_V(const RadialBarrier& b, const CoefficientBundle& B, const SampleGrid& grid,
                            const VerifyOptions& opts) {
    VerificationRecord rec;
    const auto thetas = grid.thetas();
    const std::size_t n = b.r.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = b.r[i];
        if (!(b.V[i] > 0.0)) rec.fail("V_positive", r, 0.0, b.V[i]);
        if (r > 0.0 && !(b.dV[i] < 0.0)) rec.fail("Vprime_negative", r, 0.0, b.dV[i]);
        if (i > 0 && !(b.V[i] < b.V[i - 1])) rec.fail("V_decreasing", r, 0.0, b.V[i] - b.V[i - 1]);
        const double lap = b.laplacian(i);
        for (double th : thetas) {
            const double res = B.a(r, th) * lap;
            rec.max_residual = std::max(rec.max_residual, res + 1.0);
            if (res > -1.0 + opts.residual_tol) rec.fail("supersolution", r, th, res);
        }
        if (i > 0 && i + 1 < n) {
            const double D = (b.M.dim - 1) * b.M.profile.ratio1(r);
            const double h = 1e-2 * std::min({r, 1.0 / D, 1.0});
            const double fd = (b.value_at(r + h) - b.value_at(r - h)) / (2.0 * h);
            const double mismatch = std::abs(fd - b.dV[i]) / std::abs(b.dV[i]);
            rec.max_derivative_mismatch = std::max(rec.max_derivative_mismatch, mismatch);
            if (!(mismatch <= opts.derivative_tol)) rec.fail("Vprime_numeric", r, 0.0, mismatch);
        }
    }
    if (!(b.V.back() <= opts.vanish_tol)) rec.fail("V_vanishes", b.r.back(), 0.0, b.V.back());
    if (!(b.H <= opts.H_tol)) rec.fail("H_nonpositive", 0.0, 0.0, b.H);
    const double cross = std::abs(b.V.front() + b.H);
    if (!(cross <= 1e-6 * std::max(1.0, std::abs(b.H)))) rec.fail("V0_equals_minus_H", 0.0, 0.0, cross);
    rec.notes.push_back("H=" + fmt_double(b.H) + " V(0)=" + fmt_double(b.V.front()));
    return rec;
}

double sphere_laplacian_dist2(int m, double d) {
    if (m == 2) return 2.0;
    const double dcot = d < 1e-8 ? 1.0 - d * d / 3.0 : d / std::tan(d);
    return 2.0 + 2.0 * (m - 2) * dcot;
}

double ConeBarrier::value(double r, double dist) const { return C_hat * radial->value_at(r) + dist * dist; }

double ConeBarrier::m_delta_R(double delta, double R) const {
    return std::min(delta * delta, C_hat * radial->value_at(R));
}

ConeBarrier build_cone_barrier(const RadialBarrier& barrier, SpherePoint theta0, double C0, double R_hat) {
    if (!(C0 > 0.0)) throw PreconditionError("cone barrier: C0 must be positive");
    if (barrier.M.dim > 3) throw PreconditionError("cone barrier: implemented for m = 2, 3");
    ConeBarrier c;
    c.radial = &barrier;
    c.theta0 = theta0;
    c.C = 2.0 * (barrier.M.dim - 1);
    c.C0 = C0;
    c.C_hat = c.C / C0 + 1.0;
    c.R_hat = R_hat > 0.0 ? R_hat : 2.0 * std::max(barrier.a0.R0, 0.5);
    c.delta_hat = std::numbers::pi / 2.0;
    if (!(c.R_hat < barrier.r_max())) throw PreconditionError("cone barrier: R_hat beyond the barrier grid");
    if (barrier.a0.log_abar) {
        const double lc0 = std::log(C0);
        for (double r : barrier.r) {
            if (r < barrier.a0.R0) continue;
            const double bound = 2.0 * barrier.M.profile.log_psi(r) - lc0;
            if (barrier.a0.log_abar(r) > bound + 1e-12 * std::max(1.0, std::abs(bound)))
                throw PreconditionError("cone barrier: condition a_bar <= psi^2/C0 fails at r=" + fmt_double(r));
        }
    }
    return c;
}

namespace {

// Point at geodesic distance d from p0 in direction phi, returned as the coefficient angle
// (longitude for m = 2, colatitude for m = 3).
double coefficient_angle(int m, const SpherePoint& p0, double d, double phi) {
    if (m == 2) return p0.longitude + d * (phi == 0.0 ? 1.0 : std::cos(phi));
    const double c = std::cos(p0.colatitude) * std::cos(d) + std::sin(p0.colatitude) * std::sin(d) * std::cos(phi);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

VerificationRecord verify_cone_barrier(const ConeBarrier& cone, const CoefficientBundle& B,
                                       const ConeVerifyOptions& opts) {
    VerificationRecord rec;
    const RadialBarrier& b = *cone.radial;
    const int m = b.M.dim;
    const double delta = opts.delta > 0.0 ? opts.delta : cone.delta_hat;
    const double R = opts.R > 0.0 ? opts.R : cone.R_hat;
    if (delta > cone.delta_hat)
        rec.fail("aperture", 0.0, delta, delta - cone.delta_hat);
    if (R < cone.R_hat) rec.fail("inner_radius", R, 0.0, cone.R_hat - R);

    // m = 2: directions +-1 around theta0; m = 3: azimuths around theta0
    std::vector<double> phis;
    if (m == 2)
        phis = {0.0, std::numbers::pi};
    else
        for (int q = 0; q < opts.n_azimuth; ++q) phis.push_back(2.0 * std::numbers::pi * q / opts.n_azimuth);

    const double m_dR = cone.m_delta_R(delta, R);
    double prev_axis = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.r.size(); ++i) {
        const double r = b.r[i];
        if (r <= cone.R_hat || i + 1 == b.r.size()) continue;
        const double ang_w = std::exp(-2.0 * b.M.profile.log_psi(r));
        const double radial = cone.C_hat * b.laplacian(i);
        for (int j = 0; j < opts.n_angle; ++j) {
            const double d = delta * j / opts.n_angle;
            for (double phi : phis) {
                const double th = coefficient_angle(m, cone.theta0, d, phi);
                const double res = B.a(r, th) * (radial + ang_w * sphere_laplacian_dist2(m, d));
                rec.max_residual = std::max(rec.max_residual, res + 1.0);
                if (res > -1.0 + opts.tol) rec.fail("supersolution", r, th, res);
                if (j == 0) break;
            }
        }
        const double axis = cone.C_hat * b.V[i];
        if (!(axis > 0.0)) rec.fail("h_positive", r, 0.0, axis);
        if (!(axis < prev_axis)) rec.fail("axis_decreasing", r, 0.0, axis - prev_axis);
        prev_axis = axis;
        if (r >= R) {
            const double lateral = cone.C_hat * b.V[i] + delta * delta;
            if (lateral < m_dR - opts.tol) rec.fail("lateral_boundary", r, delta, lateral);
        }
    }
    const double VR = b.value_at(R);
    for (int j = 0; j <= opts.n_angle; ++j) {
        const double d = delta * j / opts.n_angle;
        const double h = cone.C_hat * VR + d * d;
        if (h < m_dR - opts.tol) rec.fail("inner_boundary", R, d, h);
    }
    if (!(m_dR > 0.0)) rec.fail("m_delta_R_positive", R, delta, m_dR);
    rec.notes.push_back("C=" + fmt_double(cone.C) + " C_hat=" + fmt_double(cone.C_hat) +
                        " m_delta_R=" + fmt_double(m_dR));
    return rec;
}

std::string barrier_csv(const RadialBarrier& b, const CoefficientBundle& B, const SampleGrid& grid) {
    CsvWriter w({"r", "V", "Vprime", "residual"});
    const auto thetas = grid.thetas();
    for (std::size_t i = 0; i < b.r.size(); ++i) {
        double worst = -std::numeric_limits<double>::infinity();
        for (double th : thetas) worst = std::max(worst, B.a(b.r[i], th) * b.laplacian(i) + 1.0);
        w.row(std::vector<double>{b.r[i], b.V[i], b.dV[i], worst});
    }
    return w.str();
}

std::string violations_csv(const VerificationRecord& rec) {
    CsvWriter w({"check", "r", "theta", "value"});
    for (const auto& v : rec.violations) w.row({v.check, fmt_double(v.r), fmt_double(v.theta), fmt_double(v.value)});
    return w.str();
}

}  // namespace dinf
