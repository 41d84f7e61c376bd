#include "doctest.h"

#include "dinf/hypotheses.hpp"

#include <cmath>
#include <numbers>

using namespace dinf;

namespace {

const FieldFn one = [](double, double) { return 1.0; };
const FieldFn zero = [](double, double) { return 0.0; };

LogRadialFn const_log(double v) {
    return [v](double) { return std::log(v); };
}

}  // namespace

TEST_CASE("tail integral examples") {
    const ModelManifold E2(2, Profile::euclidean());
    const ModelManifold E3(3, Profile::euclidean());
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    CHECK(tail_integral(E2, 1.0, 1e-10).divergent);

    auto r = tail_integral(E3, 1.0, 1e-10);
    REQUIRE(r.converged);
    CHECK(std::abs(r.value - 1.0) <= 1e-9);

    r = tail_integral(H3, 1.0, 1e-10);
    REQUIRE(r.converged);
    CHECK(std::abs(r.value - (1.0 / std::tanh(1.0) - 1.0)) <= 1e-9);

    CHECK_THROWS_AS(tail_integral(E3, 0.0, 1e-10), PreconditionError);
}

TEST_CASE("tail integral closed forms at several radii") {
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    const ModelManifold E3(3, Profile::euclidean());
    for (double r : {0.05, 0.5, 2.0, 10.0}) {
        CHECK(std::abs(tail_integral(E3, r, 1e-12).value - 1.0 / r) <= 1e-9 * std::max(1.0, 1.0 / r));
        CHECK(std::abs(tail_integral(H3, r, 1e-12).value - (1.0 / std::tanh(r) - 1.0)) <=
              1e-9 * std::max(1.0, 1.0 / r));
    }
    // scaled form stays finite where psi overflows: I psi^{m-1} ~ 1/(alpha r^{alpha-1})
    const ModelManifold X2(2, Profile::exp_power(3.0, 1.0));
    const auto s = scaled_tail(X2, 500.0);
    REQUIRE(s.converged);
    CHECK(s.value == doctest::Approx(1.0 / (3.0 * 500.0 * 500.0)).epsilon(1e-4));
}

TEST_CASE("tail integral is decreasing in r") {
    for (const ModelManifold& M : {ModelManifold(3, Profile::euclidean()), ModelManifold(3, Profile::hyperbolic(1.0)),
                                   ModelManifold(2, Profile::exp_power(3.0, 1.0)),
                                   ModelManifold(2, Profile::log_power(3.0, std::exp(3.0)))}) {
        double prev = INFINITY, prev_err = 0.0;
        for (double r = 0.1; r <= 20.0; r *= 1.3) {
            const auto q = tail_integral(M, r, 1e-10);
            REQUIRE(q.converged);
            CHECK(q.value <= prev + q.abs_error_estimate + prev_err);
            prev = q.value;
            prev_err = q.abs_error_estimate;
        }
    }
}

TEST_CASE("double integral examples") {
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    CHECK(double_integral(H3, const_log(1.0), 1e-8).divergent);
    auto r = double_integral(H3, [](double s) { return s; }, 1e-8);
    CHECK(r.converged);
    // integrand (coth r - 1) sinh^2 r e^{-r} = (1 - e^{-2r}) e^{-r} / 2
    const double exact = 0.5 * (std::exp(-1.0) - std::exp(-3.0) / 3.0);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-7));

    const ModelManifold X2(2, Profile::exp_power(3.0, 1.0));
    r = double_integral(X2, const_log(1.0), 1e-8);
    CHECK(r.converged);
    CHECK_FALSE(r.divergent);

    CHECK_THROWS_AS(double_integral(ModelManifold(2, Profile::euclidean()), const_log(1.0), 1e-8),
                    PreconditionError);
}

TEST_CASE("check_hp1 examples") {
    SampleGrid g;
    g.dim = 3;
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    auto B = make_bundle(one, zero, zero, const_log(1.0), 1.0, 1.0, g);
    auto rep = check_hp1(H3, B, g, 1e-8);
    CHECK(rep.hp1_i == Verdict::Pass);
    CHECK(rep.hp1_ii_double == Verdict::Fail);
    CHECK(rep.joint == Verdict::Fail);

    g.dim = 2;
    const ModelManifold X2(2, Profile::exp_power(3.0, 1.0));
    B = make_bundle(one, zero, zero, const_log(1.0), 1.0, 1.0, g);
    rep = check_hp1(X2, B, g, 1e-8);
    CHECK(rep.hp1_i == Verdict::Pass);
    CHECK(rep.hp1_ii_curvature == Verdict::Pass);
    CHECK(rep.hp1_ii_first == Verdict::Pass);
    CHECK(rep.hp1_ii_double == Verdict::Pass);
    CHECK(rep.joint == Verdict::Pass);

    g.dim = 3;
    const ModelManifold E3(3, Profile::euclidean());
    B = make_bundle([](double r, double) { return r * r; }, zero, zero, [](double r) { return 2 * std::log(r); },
                    1.0, 1.0, g);
    rep = check_hp1(E3, B, g, 1e-8);
    CHECK(rep.hp1_ii_double == Verdict::Fail);
}

TEST_CASE("check_hp1 flags a coefficient below its minorant") {
    SampleGrid g;
    const ModelManifold X2(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle([](double r, double t) { return r > 5.0 && std::cos(t) > 0.9 ? 0.5 : 1.0; }, zero, zero,
                         const_log(1.0), 1.0, 1.0, g);
    CHECK(check_hp1(X2, B, g, 1e-8).hp1_i == Verdict::Fail);
}

TEST_CASE("check_e13 examples") {
    SampleGrid g;
    auto B = make_bundle(one, zero, zero, [](double r) { return r; }, 2.0, 1.0, g);
    CHECK(check_e13(ModelManifold(2, Profile::hyperbolic(1.0)), B, g) == Verdict::Pass);
    B = make_bundle(one, zero, zero, [](double r) { return 3 * std::log(r); }, 1.0, 1.0, g);
    CHECK(check_e13(ModelManifold(2, Profile::euclidean()), B, g) == Verdict::Fail);
    B = make_bundle(one, zero, zero, const_log(1.0), 1.0, 1.0, g);
    CHECK(check_e13(ModelManifold(2, Profile::exp_power(3.0, 1.0)), B, g) == Verdict::Pass);
}

TEST_CASE("joint feasibility examples") {
    SampleGrid g;
    g.dim = 3;
    const ModelManifold E3(3, Profile::euclidean());
    auto B = make_bundle([](double r, double) { return r * r; }, zero, zero, [](double r) { return 2 * std::log(r); },
                         1.0, 1.0, g);
    auto rep = joint_feasibility(E3, B, g, 1e-8);
    CHECK(rep.joint == Verdict::Fail);
    CHECK(rep.e13 == Verdict::Pass);
    bool cites = false;
    for (const auto& n : rep.notes) cites = cites || n.find("harmonic") != std::string::npos;
    CHECK(cites);

    g.dim = 2;
    B = make_bundle(one, zero, zero, const_log(1.0), 1.0, 1.0, g);
    CHECK(joint_feasibility(ModelManifold(2, Profile::exp_power(3.0, 1.0)), B, g, 1e-8).joint == Verdict::Pass);

    g.dim = 3;
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    auto log_abar = [H3](double r) { return std::min(r, 2.0 * H3.profile.log_psi(r)); };
    B = make_bundle([log_abar](double r, double) { return std::exp(log_abar(r)); }, zero, zero, log_abar, 1.0, 1.0,
                    g);
    CHECK(joint_feasibility(H3, B, g, 1e-8).joint == Verdict::Pass);
}

TEST_CASE("criterion e70 examples") {
    CHECK(criterion_e70(3.0, const_log(1.0), 1e-8) == Verdict::Pass);
    CHECK(criterion_e70(2.0, const_log(1.0), 1e-8) == Verdict::Fail);
    CHECK(criterion_e70(1.0, [](double r) { return 2 * std::log(r); }, 1e-8) == Verdict::Pass);
    QuadratureResult q;
    criterion_e70(3.0, const_log(1.0), 1e-10, &q);
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("green bound") {
    const ModelManifold E3(3, Profile::euclidean());
    CHECK(green_bound(E3, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(green_bound(E3, 2.0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(green_bound(ModelManifold(3, Profile::hyperbolic(1.0)), 1.0) ==
          doctest::Approx(1.0 / std::tanh(1.0) - 1.0).epsilon(1e-9));
    CHECK_THROWS_AS(green_bound(ModelManifold(2, Profile::euclidean()), 1.0), PreconditionError);
}

TEST_CASE("hypothesis verdicts are stable under tolerance halving") {
    SampleGrid g;
    g.dim = 3;
    const ModelManifold H3(3, Profile::hyperbolic(1.0));
    auto B = make_bundle(one, zero, zero, const_log(1.0), 1.0, 1.0, g);
    CHECK(check_hp1(H3, B, g, 1e-8).joint == check_hp1(H3, B, g, 5e-9).joint);
    CHECK(criterion_e70(2.0, const_log(1.0), 1e-8) == criterion_e70(2.0, const_log(1.0), 5e-9));
}

TEST_CASE("verdict csv") {
    SampleGrid g;
    const ModelManifold X2(2, Profile::exp_power(3.0, 1.0));
    auto B = make_bundle(one, zero, zero, const_log(1.0), 1.0, 1.0, g);
    const auto rows = verdict_csv_rows(X2, joint_feasibility(X2, B, g, 1e-8));
    CHECK(verdict_csv_header() == "check,profile,m,params,verdict,value,error_estimate");
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.front().rfind("hp1_i,exp_power,2,", 0) == 0);
}
