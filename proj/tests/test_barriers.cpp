#include "doctest.h"

#include "dinf/barriers.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace dinf;

namespace {

const FieldFn zero = [](double, double) { return 0.0; };

FieldFn constant(double v) {
    return [v](double, double) { return v; };
}

LogRadialFn const_log(double v) {
    return [v](double) { return std::log(v); };
}

// P(s) = int_0^s e^{-t} sinh^2 t dt
double P_hyp(double s) {
    return 0.25 * (std::expm1(s) + 2.0 * std::expm1(-s) - std::expm1(-3.0 * s) / 3.0);
}

double V_hyp_oracle(double r) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([](double u) { return u > 300.0 ? 0.0 : P_hyp(u) / std::pow(std::sinh(u), 2); }, r,
                       std::numeric_limits<double>::infinity());
}

BarrierOptions opts_to(double r_max) {
    BarrierOptions o;
    o.r_max = r_max;
    return o;
}

}  // namespace

TEST_CASE("build_a0 examples") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    auto s = build_a0(B, M, g);
    CHECK(s.C_bar == 1.0);
    for (double r : {0.0, 0.5, 3.0}) CHECK(s.a0(r) == doctest::Approx(1.0));

    B = make_bundle(constant(2.0), zero, zero, const_log(2.0), 1.0, 1.0, g);
    s = build_a0(B, M, g);
    CHECK(s.C_bar == doctest::Approx(1.0));
    CHECK(s.a0(5.0) == doctest::Approx(0.5));

    B = make_bundle([](double r, double) { return 1.0 + r * r; }, zero, zero,
                    [](double r) { return 2.0 * std::log(r); }, 1.0, 1.0, g);
    s = build_a0(B, M, g);
    CHECK(s.C_bar == doctest::Approx(1.0));
    CHECK(s.a0(0.3) == doctest::Approx(1.0));
    CHECK(s.a0(4.0) == doctest::Approx(1.0 / 16.0));

    B = make_bundle([](double r, double) { return r < 0.5 ? 0.25 : 1.0; }, zero, zero, const_log(1.0), 1.0, 1.0, g);
    s = build_a0(B, M, g);
    CHECK(s.C_bar == doctest::Approx(0.25));
    CHECK(s.a0(7.0) == doctest::Approx(4.0));

    B = make_bundle([](double r, double) { return r < 0.5 ? 0.0 : 1.0; }, zero, zero, const_log(1.0), 1.0, 1.0, g);
    CHECK_THROWS_AS(build_a0(B, M, g), PreconditionError);
}

TEST_CASE("H closed form on hyperbolic m=3 with a0 = e^-r") {
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    const auto a0 = a0_from_log([](double t) { return -t; });
    const HResult h = compute_H(H3, a0, 1e-11);
    CHECK(h.value == doctest::Approx(-1.0 / 3.0).epsilon(1e-8));
    for (double b : h.bracket) CHECK(b >= h.value - 1e-10);
}

TEST_CASE("H for exp_power m=2 with a0 = 1 is non-positive") {
    const ModelManifold X2(2, Profile::exp_power(3.0, 1.0));
    const auto a0 = a0_from_log([](double) { return 0.0; });
    const HResult h = compute_H(X2, a0, 1e-10);
    CHECK(h.value < 0.0);
    // the bracket decreases towards H
    for (std::size_t i = 1; i < h.bracket.size(); ++i) CHECK(h.bracket[i] <= h.bracket[i - 1] + 1e-12);
}

TEST_CASE("V against an independent quadrature oracle") {
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    const auto a0 = a0_from_log([](double t) { return -t; });
    const RadialBarrier b = build_V(H3, a0, opts_to(30.0));
    CHECK(b.value_at(1.0) == doctest::Approx(V_hyp_oracle(1.0)).epsilon(1e-9));
    CHECK(b.value_at(3.7) == doctest::Approx(V_hyp_oracle(3.7)).epsilon(1e-9));
    CHECK(b.V.front() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(b.H == doctest::Approx(-1.0 / 3.0).epsilon(1e-8));
    // V' = -P / sinh^2
    CHECK(b.dV[b.r.size() / 2] ==
          doctest::Approx(-P_hyp(b.r[b.r.size() / 2]) / std::pow(std::sinh(b.r[b.r.size() / 2]), 2)).epsilon(1e-10));
}

TEST_CASE("V at the pole: V'(0)=0 and V''(0)=-a0(0)/m") {
    for (int m : {2, 3}) {
        const ModelManifold M(m, Profile::hyperbolic(1.0));
        const auto a0 = a0_from_log([](double t) { return -t; });
        const RadialBarrier b = build_V(M, a0, opts_to(40.0));
        CHECK(b.dV[0] == 0.0);
        CHECK(b.d2V(0) == doctest::Approx(-1.0 / m));
        // first node r = 1e-3: V' ~ V''(0) r
        CHECK(b.dV[1] / b.r[1] == doctest::Approx(-1.0 / m).epsilon(1e-2));
        CHECK(b.laplacian(0) == doctest::Approx(-1.0));
    }
}

TEST_CASE("acceptance bundle: exp_power alpha=3, a=1") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(1e3));
    const auto rec = verify_V(b, B, g);
    for (const auto& v : rec.violations) MESSAGE(v.check << " r=" << v.r << " value=" << v.value);
    CHECK(rec.passed);
    CHECK(b.H <= 1e-8);
    CHECK(b.V.back() <= 1e-3);
    // V ~ 1/(3 r) far out
    CHECK(b.V.back() == doctest::Approx(1.0 / 3e3).epsilon(1e-2));

    const ConeBarrier cone = build_cone_barrier(b, {0.0, 0.4}, 1.0);
    CHECK(cone.C_hat == 3.0);
    CHECK(cone.R_hat == 2.0);
    const auto crec = verify_cone_barrier(cone, B);
    CHECK(crec.passed);
    CHECK(cone.m_delta_R(0.5, 4.0) == doctest::Approx(std::min(0.25, 3.0 * b.value_at(4.0))));
}

TEST_CASE("acceptance bundle: hyperbolic m=2, a=cosh^2, a_bar=sinh^2") {
    SampleGrid g;
    const ModelManifold M(2, Profile::hyperbolic(1.0));
    auto B = make_bundle([](double r, double) { return std::pow(std::cosh(r), 2); }, zero, zero,
                         [M](double r) { return 2.0 * M.profile.log_psi(r); }, 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(64.0));
    CHECK(b.a0.C_bar == doctest::Approx(1.0 / std::pow(std::sinh(1.0), 2)));
    const auto rec = verify_V(b, B, g);
    for (const auto& v : rec.violations) MESSAGE(v.check << " r=" << v.r << " value=" << v.value);
    CHECK(rec.passed);
    const ConeBarrier cone = build_cone_barrier(b, {0.0, 2.0}, 1.0);
    const auto crec = verify_cone_barrier(cone, B);
    for (const auto& v : crec.violations) MESSAGE(v.check << " r=" << v.r << " value=" << v.value);
    CHECK(crec.passed);
}

TEST_CASE("negated V is not a supersolution") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    RadialBarrier b = build_V(M, a0_from_log([](double) { return 0.0; }), opts_to(20.0));
    for (std::size_t i = 0; i < b.r.size(); ++i) {
        b.V[i] = -b.V[i];
        b.dV[i] = -b.dV[i];
        b.d2V_drift[i] = -b.d2V_drift[i];
        b.d2V_source[i] = -b.d2V_source[i];
    }
    const auto rec = verify_V(b, B, g);
    CHECK_FALSE(rec.passed);
    std::size_t super = 0;
    for (const auto& v : rec.violations) super += v.check == "supersolution";
    CHECK(super == b.r.size() * g.thetas().size());
}

TEST_CASE("doubling a keeps V a supersolution") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(100.0));
    auto B2 = make_bundle(constant(2.0), zero, zero, const_log(2.0), 1.0, 1.0, g);
    VerifyOptions vo;
    vo.vanish_tol = 1e-2;
    const auto rec = verify_V(b, B2, g, vo);
    CHECK(rec.passed);
    CHECK(rec.max_residual <= -1.0 + 1e-9);
}

TEST_CASE("larger a_bar gives a smaller V") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B1 = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    auto B2 = make_bundle([](double r, double) { return 1.0 + r; }, zero, zero,
                          [](double r) { return std::log(1.0 + r); }, 1.0, 1.0, g);
    const RadialBarrier b1 = build_V(M, build_a0(B1, M, g), opts_to(30.0));
    const RadialBarrier b2 = build_V(M, build_a0(B2, M, g), opts_to(30.0));
    REQUIRE(b1.r == b2.r);
    for (std::size_t i = 0; i < b1.r.size(); ++i) CHECK(b2.V[i] <= b1.V[i]);
}

TEST_CASE("V' matches centered differences of V at second order") {
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    const RadialBarrier b = build_V(M, a0_from_log([](double) { return 0.0; }), opts_to(50.0));
    for (double r : {0.3, 1.7, 6.0, 20.0}) {
        const double D = M.profile.ratio1(r);
        const double h = 0.2 * std::min(r, 1.0 / D);
        auto err = [&](double hh) {
            const double fd = (b.value_at(r + hh) - b.value_at(r - hh)) / (2 * hh);
            return std::abs(fd + b.flux_at(r));
        };
        CAPTURE(r);
        CHECK(std::log2(err(h) / err(h / 2)) >= 1.8);
    }
}

TEST_CASE("cone barrier constants and aperture") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(100.0));
    auto cone = build_cone_barrier(b, {0.0, 1.0}, 1.0);
    CHECK(cone.C == 2.0);
    CHECK(cone.C_hat == 3.0);
    CHECK(cone.delta_hat == doctest::Approx(std::numbers::pi / 2));
    CHECK(build_cone_barrier(b, {0.0, 1.0}, 0.5).C_hat == 5.0);

    ConeVerifyOptions wide;
    wide.delta = 2.5;
    const auto rec = verify_cone_barrier(cone, B, wide);
    CHECK_FALSE(rec.passed);
    CHECK(rec.violations.front().check == "aperture");

    // h on the axis tends to zero
    CHECK(cone.value(100.0, 0.0) < cone.value(10.0, 0.0));
    CHECK(cone.value(100.0, 0.0) == doctest::Approx(1e-2).epsilon(1e-2));

    // a_bar above psi^2/C0 is rejected
    CHECK_THROWS_AS(build_cone_barrier(b, {0.0, 1.0}, 100.0), PreconditionError);
}

TEST_CASE("cone verification is invariant under rotation of theta0") {
    SampleGrid g;
    const ModelManifold M(2, Profile::hyperbolic(1.0));
    auto B = make_bundle([](double r, double) { return std::pow(std::cosh(r), 2); }, zero, zero,
                         [M](double r) { return 2.0 * M.profile.log_psi(r); }, 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(40.0));
    ConeVerifyOptions wide;
    wide.delta = 2.0;
    const auto r1 = verify_cone_barrier(build_cone_barrier(b, {0.0, 0.3}, 1.0), B, wide);
    const auto r2 = verify_cone_barrier(build_cone_barrier(b, {0.0, 0.3 + 2.1}, 1.0), B, wide);
    CHECK(r1.passed == r2.passed);
    REQUIRE(r1.violations.size() == r2.violations.size());
    for (std::size_t i = 0; i < r1.violations.size(); ++i) {
        CHECK(r1.violations[i].check == r2.violations[i].check);
        CHECK(r1.violations[i].r == r2.violations[i].r);
    }
    CHECK(r1.max_residual == doctest::Approx(r2.max_residual).epsilon(1e-12));
}

TEST_CASE("cone barrier in dimension 3") {
    CHECK(sphere_laplacian_dist2(3, 0.0) == doctest::Approx(4.0));
    CHECK(sphere_laplacian_dist2(3, std::numbers::pi / 2) == doctest::Approx(2.0));
    SampleGrid g;
    g.dim = 3;
    const ModelManifold M(3, Profile::hyperbolic(1.0));
    auto B = make_bundle([](double r, double) { return std::pow(std::cosh(r), 2); }, zero, zero,
                         [M](double r) { return 2.0 * M.profile.log_psi(r); }, 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(40.0));
    CHECK(verify_V(b, B, g).passed);
    const auto cone = build_cone_barrier(b, {0.7, 0.0}, 1.0);
    CHECK(cone.C_hat == 5.0);
    CHECK(verify_cone_barrier(cone, B).passed);
}

TEST_CASE("barrier csv") {
    SampleGrid g;
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(constant(1.0), zero, zero, const_log(1.0), 1.0, 1.0, g);
    const RadialBarrier b = build_V(M, B, g, opts_to(10.0));
    const std::string csv = barrier_csv(b, B, g);
    CHECK(csv.rfind("r,V,Vprime,residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(b.r.size() + 1));
}
