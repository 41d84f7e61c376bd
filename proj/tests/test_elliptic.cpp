#include "doctest.h"

#include "dinf/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace dinf;

namespace {

const FieldFn zero = [](double, double) { return 0.0; };

FieldFn constant(double v) {
    return [v](double, double) { return v; };
}

CoefficientBundle bundle(FieldFn a, FieldFn c, FieldFn f) {
    SampleGrid g;
    return make_bundle(std::move(a), std::move(c), std::move(f), [](double) { return 0.0; }, 1.0, 1.0, g);
}

double max_error(const DiscreteField& u, const std::function<double(double, double)>& exact) {
    double e = 0.0;
    for (int k = 0; k < u.grid.Nr; ++k)
        for (int l = 0; l < u.grid.Ntheta; ++l)
            e = std::max(e, std::abs(u.at(k, l) - exact(u.grid.r(k), u.grid.theta(l))));
    return e;
}

double sup_diff(const DiscreteField& u, const DiscreteField& v) {
    double e = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) e = std::max(e, std::abs(u.values[i] - v.values[i]));
    return e;
}

}  // namespace

TEST_CASE("grid geometry") {
    const auto g = PolarGrid::with_spacing(8.0, 0.125, 64);
    CHECK(g.Nr == 64);
    CHECK(g.r(g.Nr - 1) == doctest::Approx(8.0 - 0.0625));
    CHECK(g.antipode(3) == 35);
    CHECK(g.antipode(40) == 8);
    CHECK_THROWS_AS(PolarGrid::make(1.0, 8, 31), PreconditionError);
    CHECK_THROWS_AS(PolarGrid::with_spacing(1.0, 0.3, 32), PreconditionError);
    const auto g3 = PolarGrid::make(1.0, 8, 16, 3);
    CHECK(g3.antipode(0) == 15);
    CHECK(g3.theta(0) == doctest::Approx(std::numbers::pi / 32));
}

TEST_CASE("constants are exact") {
    const ModelManifold M(2, Profile::hyperbolic(1.0));
    const auto g = PolarGrid::make(4.0, 32, 32);
    auto u = solve_ball(assemble(M, bundle(constant(1.0), zero, zero), g, [](double) { return 3.0; }));
    for (double v : u.values) CHECK(std::abs(v - 3.0) <= 1e-10);

    u = solve_ball(assemble(M, bundle(constant(1.0), constant(-1.0), constant(-5.0)), g, [](double) { return 5.0; }));
    for (double v : u.values) CHECK(std::abs(v - 5.0) <= 1e-10);

    const ModelManifold M3(3, Profile::exp_power(3.0, 1.0));
    const auto g3 = PolarGrid::make(8.0, 64, 16, 3);
    u = solve_ball(assemble(M3, bundle([](double r, double t) { return 1.0 + r + std::cos(t); }, constant(-2.0),
                                       constant(-4.0)),
                            g3, [](double) { return 2.0; }));
    for (double v : u.values) CHECK(std::abs(v - 2.0) <= 1e-10);
}

TEST_CASE("row sums vanish with c = 0") {
    const ModelManifold M(2, Profile::hyperbolic(1.0));
    const auto g = PolarGrid::make(8.0, 16, 16);
    const auto op = discretize(M, constant(1.5), zero, g);
    const Eigen::VectorXd s = row_sums(op.L);
    for (int k = 0; k + 1 < g.Nr; ++k)
        for (int l = 0; l < g.Ntheta; ++l) CHECK(std::abs(s[g.index(k, l)]) <= 1e-9 * op.L.coeff(g.index(k, l), g.index(k, l)) * -1.0 + 1e-9);
    for (int l = 0; l < g.Ntheta; ++l)
        CHECK(s[g.index(g.Nr - 1, l)] + op.boundary_weight[l] == doctest::Approx(0.0).epsilon(1e-9).scale(1e3));
}

TEST_CASE("M-matrix on hyperbolic 64x64") {
    const ModelManifold M(2, Profile::hyperbolic(1.0));
    const auto sys = assemble(M, bundle(constant(1.0), zero, zero), PolarGrid::make(8.0, 64, 64),
                              [](double t) { return std::cos(t); });
    const auto rep = check_m_matrix(sys.A);
    CHECK(rep.ok);
    CHECK(rep.sign_violations == 0);
    CHECK(rep.dominance_violations == 0);
    CHECK(rep.strictly_dominant_rows == 64);

    const ModelManifold E(2, Profile::exp_power(3.0, 1.0));
    CHECK(check_m_matrix(assemble(E, bundle(constant(1.0), zero, zero), PolarGrid::make(16.0, 128, 64),
                                  [](double t) { return std::cos(t); })
                             .A)
              .ok);
}

TEST_CASE("preconditions") {
    const ModelManifold M(2, Profile::euclidean());
    const auto g = PolarGrid::make(1.0, 8, 8);
    const AngularFn one = [](double) { return 1.0; };
    CHECK_THROWS_AS(assemble(M, bundle(constant(1.0), constant(0.5), zero), g, one), PreconditionError);
    CHECK_THROWS_AS(assemble(M, bundle(constant(-1.0), zero, zero), g, one), PreconditionError);
    CHECK_THROWS_AS(assemble(ModelManifold(3, Profile::euclidean()), bundle(constant(1.0), zero, zero), g, one),
                    PreconditionError);
}

TEST_CASE("euclidean disk r cos theta, second order") {
    const ModelManifold M(2, Profile::euclidean());
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        const auto u = solve_ball(assemble(M, bundle(constant(1.0), zero, zero), PolarGrid::make(1.0, n, n),
                                           [](double t) { return std::cos(t); }));
        err.push_back(max_error(u, [](double r, double t) { return r * std::cos(t); }));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double p = std::log2(err[i - 1] / err[i]);
        CHECK(p >= 1.8);
        CHECK(p <= 2.2);
    }
    CHECK(err.back() < 1e-4);
}

TEST_CASE("m=3 ball: axisymmetric harmonic r cos(phi)") {
    const ModelManifold M(3, Profile::euclidean());
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const auto u = solve_ball(assemble(M, bundle(constant(1.0), zero, zero), PolarGrid::make(1.0, n, n, 3),
                                           [](double t) { return std::cos(t); }));
        err.push_back(max_error(u, [](double r, double t) { return r * std::cos(t); }));
    }
    CHECK(std::log2(err[1] / err[2]) >= 1.8);
    CHECK(err.back() < 1e-3);
}

TEST_CASE("discrete maximum principle and comparison") {
    const ModelManifold M(2, Profile::hyperbolic(1.0));
    const auto g = PolarGrid::make(8.0, 64, 64);
    const AngularFn gamma = [](double t) { return std::cos(3.0 * t) + 0.5 * std::sin(t); };
    double gmin = 1e300, gmax = -1e300;
    for (int l = 0; l < g.Ntheta; ++l) {
        gmin = std::min(gmin, gamma(g.theta(l)));
        gmax = std::max(gmax, gamma(g.theta(l)));
    }
    for (auto c : {zero, constant(-1.0), FieldFn([](double r, double) { return -r; })}) {
        const auto u = solve_ball(assemble(M, bundle(constant(1.0), c, zero), g, gamma));
        for (double v : u.values) {
            CHECK(v <= std::max(gmax, 0.0) + 1e-10);
            CHECK(v >= std::min(gmin, 0.0) - 1e-10);
        }
    }
}

TEST_CASE("rotation equivariance") {
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    const auto g = PolarGrid::make(4.0, 32, 32);
    const AngularFn gamma = [](double t) { return std::exp(std::sin(t)) + std::cos(2.0 * t); };
    const int shift = 5;
    const double ts = shift * g.dtheta();
    const auto B = bundle(constant(1.0), constant(-0.5), constant(0.25));
    const auto u = solve_ball(assemble(M, B, g, gamma));
    const auto v = solve_ball(assemble(M, B, g, [&](double t) { return gamma(t - ts); }));
    double e = 0.0;
    for (int k = 0; k < g.Nr; ++k)
        for (int l = 0; l < g.Ntheta; ++l) e = std::max(e, std::abs(v.at(k, (l + shift) % g.Ntheta) - u.at(k, l)));
    CHECK(e <= 1e-10);
}

TEST_CASE("fourier oracle") {
    const RadialCoefficients harmonic{[](double) { return 1.0; }, [](double) { return 0.0; },
                                      [](double) { return 0.0; }};
    const ModelManifold E(2, Profile::euclidean());
    const auto g = PolarGrid::make(1.0, 16, 16);
    auto o = fourier_oracle(E, harmonic, [](double t) { return std::cos(t); }, 4, g);
    CHECK(max_error(o, [](double r, double t) { return r * std::cos(t); }) <= 1e-9);

    const ModelManifold H(2, Profile::hyperbolic(1.0));
    const auto gh = PolarGrid::make(4.0, 32, 32);
    o = fourier_oracle(H, harmonic, [](double) { return 2.0; }, 2, gh);
    const auto u = solve_ball(assemble(H, bundle(constant(1.0), zero, zero), gh, [](double) { return 2.0; }));
    CHECK(sup_diff(o, u) <= 1e-8);

    // k = 0 with a source: u = r^2/4 - 1/4 solves Lap u = 1 with u(1) = 0
    const RadialCoefficients src{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 1.0; }};
    o = fourier_oracle(E, src, [](double) { return 0.0; }, 0, g);
    CHECK(max_error(o, [](double r, double) { return 0.25 * (r * r - 1.0); }) <= 1e-9);

    CHECK_THROWS_AS(fourier_oracle(ModelManifold(3, Profile::euclidean()), harmonic, [](double) { return 1.0; }, 0,
                                   PolarGrid::make(1.0, 8, 8, 3)),
                    PreconditionError);
}

TEST_CASE("solver vs oracle: hyperbolic, c = -1, cos 2 theta, j = 8") {
    const ModelManifold H(2, Profile::hyperbolic(1.0));
    const RadialCoefficients co{[](double) { return 1.0; }, [](double) { return -1.0; }, [](double) { return 0.0; }};
    const AngularFn gamma = [](double t) { return std::cos(2.0 * t); };
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        const auto g = PolarGrid::make(8.0, n, n);
        const auto u = solve_ball(assemble(H, bundle(constant(1.0), constant(-1.0), zero), g, gamma));
        err.push_back(sup_diff(u, fourier_oracle(H, co, gamma, 4, g)));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double p = std::log2(err[i - 1] / err[i]);
        MESSAGE("order " << p << " err " << err[i]);
        CHECK(p >= 1.8);
        CHECK(p <= 2.2);
    }
    CHECK(err.back() <= 5e-4);
}

TEST_CASE("exhaustion with constant data") {
    const ModelManifold M(2, Profile::exp_power(3.0, 1.0));
    ExhaustionOptions o;
    o.Ntheta = 16;
    o.threads = 2;
    const auto rep = exhaustion_solve(M, bundle(constant(1.0), zero, zero), [](double) { return 4.0; }, {2, 4, 8}, o);
    REQUIRE(rep.differences.size() == 2);
    for (double d : rep.differences) CHECK(d <= 1e-10);
    for (double p : rep.profile.value) CHECK(p <= 1e-10);
    CHECK(rep.bound_checked);
    CHECK(rep.bound_ok);
    CHECK(rep.core_radius == 1.0);
    CHECK_THROWS_AS(exhaustion_solve(M, bundle(constant(1.0), zero, zero), [](double) { return 4.0; }, {4, 2}, o),
                    PreconditionError);
}

TEST_CASE("uniqueness probe with zero bump and comparison bound") {
    const ModelManifold H(2, Profile::hyperbolic(1.0));
    ExhaustionOptions o;
    o.Ntheta = 32;
    const AngularFn gamma = [](double t) { return std::cos(t); };
    auto curve = uniqueness_probe(H, bundle(constant(1.0), constant(-1.0), zero), gamma, [](double) { return 0.0; },
                                  {2, 4, 8}, o);
    for (double d : curve.difference) CHECK(d == 0.0);
    const AngularFn bump = [](double t) {
        const double d = angular_distance(t, 0.0);
        return d < 0.5 ? std::cos(std::numbers::pi * d) * std::cos(std::numbers::pi * d) : 0.0;
    };
    curve = uniqueness_probe(H, bundle(constant(1.0), constant(-1.0), zero), gamma, bump, {2, 4, 8}, o);
    for (double d : curve.difference) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0 + 1e-10);
    }
}

TEST_CASE("field csv") {
    const auto g = PolarGrid::make(1.0, 2, 4);
    DiscreteField u{g, std::vector<double>(8, 0.5)};
    const std::string s = field_csv(u);
    CHECK(s.rfind("r,theta,value\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 9);
}
