#include "dinf/hypotheses.hpp"

#include "dinf/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace dinf {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Skipped: return "skipped";
    }
    return "skipped";
}

std::vector<double> SampleGrid::radii() const {
    const int n = std::max(1, static_cast<int>(std::ceil(std::log10(r_max / r_min) * per_decade)));
    std::vector<double> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = r_min * std::pow(r_max / r_min, static_cast<double>(i) / n);
    out.front() = r_min;
    out.back() = r_max;
    return out;
}

std::vector<double> SampleGrid::radii_between(double lo, double hi) const {
    std::vector<double> out{lo};
    for (double r : radii())
        if (r > lo && r < hi) out.push_back(r);
    if (hi > lo) out.push_back(hi);
    return out;
}

std::vector<double> SampleGrid::thetas() const {
    std::vector<double> out(n_theta);
    for (int l = 0; l < n_theta; ++l)
        out[l] = dim == 2 ? 2.0 * std::numbers::pi * l / n_theta : std::numbers::pi * (l + 0.5) / n_theta;
    return out;
}

CoefficientBundle make_bundle(FieldFn a, FieldFn c, FieldFn f, LogRadialFn log_a_minorant, double R0,
                              double C0, const SampleGrid& grid) {
    if (!(R0 > 0.0)) throw PreconditionError("R0 must be positive");
    if (!(C0 > 0.0)) throw PreconditionError("C0 must be positive");
    CoefficientBundle B{std::move(a), std::move(c), std::move(f), std::move(log_a_minorant), R0, C0, 0.0, 0.0};
    const auto thetas = grid.thetas();
    for (double r : grid.radii()) {
        for (double th : thetas) {
            B.norm_c = std::max(B.norm_c, std::abs(B.c(r, th)));
            B.norm_f = std::max(B.norm_f, std::abs(B.f(r, th)));
        }
    }
    if (!std::isfinite(B.norm_c) || !std::isfinite(B.norm_f))
        throw PreconditionError("c and f must be bounded");
    return B;
}

double log_minorant(const CoefficientBundle& B, const SampleGrid& grid, double r) {
    if (B.log_a_minorant) return B.log_a_minorant(r);
    double lo = std::numeric_limits<double>::infinity();
    for (double th : grid.thetas()) lo = std::min(lo, B.a(r, th));
    return std::log(lo);
}

LogRadialFn minorant_of(const CoefficientBundle& B, const SampleGrid& grid) {
    if (B.log_a_minorant) return B.log_a_minorant;
    return [B, grid](double r) { return log_minorant(B, grid, r); };
}

namespace {

// int_0^inf exp(s - k log(psi(r e^s)/psi(r))) ds, the tail in the variable s = log(xi/r).
// Doubling s instead of xi reaches radii where logarithmic tails have settled.
QuadratureResult log_variable_tail(const ModelManifold& M, double r, const ImproperOptions& opts) {
    const int k = M.dim - 1;
    const double width = std::min(1.0 / (k * M.profile.ratio1(r) * r), 1.0);
    return improper_integral(
        [&](double s) {
            const double u = r * std::expm1(s);
            if (!std::isfinite(u)) return 0.0;
            return std::exp(s - k * M.profile.log_ratio(r, u));
        },
        width, opts);
}

}  // namespace

QuadratureResult scaled_tail(const ModelManifold& M, double r, double rel_tol) {
    if (!(r > 0.0)) throw PreconditionError("tail integral: r must be positive");
    ImproperOptions opts;
    opts.abs_tol = 0.0;
    opts.rel_tol = rel_tol;
    QuadratureResult s = log_variable_tail(M, r, opts);
    s.value *= r;
    s.abs_error_estimate *= r;
    s.truncation_radius = r * std::exp(s.truncation_radius);
    return s;
}

QuadratureResult tail_integral(const ModelManifold& M, double r, double tol) {
    if (!(r > 0.0)) throw PreconditionError("tail integral: r must be positive");
    const double log_w = (M.dim - 1) * M.profile.log_psi(r);
    ImproperOptions opts;
    opts.abs_tol = tol * std::exp(std::min(0.0, log_w)) / r;
    opts.rel_tol = 1e-13;
    QuadratureResult s = log_variable_tail(M, r, opts);
    const double scale = r * std::exp(-log_w);
    s.value *= scale;
    s.abs_error_estimate *= scale;
    s.truncation_radius = r * std::exp(s.truncation_radius);
    return s;
}

QuadratureResult double_integral(const ModelManifold& M, const LogRadialFn& log_a_minorant, double tol) {
    std::map<double, double> memo;
    auto inner = [&](double r) {
        auto it = memo.find(r);
        if (it != memo.end()) return it->second;
        const QuadratureResult s = scaled_tail(M, r);
        if (!s.converged) throw PreconditionError("double integral: inner tail integral divergent");
        memo.emplace(r, s.value);
        return s.value;
    };
    ImproperOptions opts;
    opts.abs_tol = tol;
    QuadratureResult res = improper_integral(
        [&](double u) {
            const double r = 1.0 + u;
            return inner(r) * std::exp(-log_a_minorant(r));
        },
        1.0, opts);
    res.truncation_radius += 1.0;
    return res;
}

namespace {

Verdict joint_of(const HypothesisReport& rep) {
    for (Verdict v : {rep.hp1_i, rep.hp1_ii_curvature, rep.hp1_ii_first, rep.hp1_ii_double, rep.e13})
        if (v == Verdict::Fail) return Verdict::Fail;
    return Verdict::Pass;
}

}  // namespace

HypothesisReport check_hp1(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid,
                           double tol) {
    HypothesisReport rep;

    if (!B.log_a_minorant) {
        rep.hp1_i = Verdict::Pass;
        rep.notes.push_back("a_bar taken as the sampled radial infimum of a");
    } else {
        rep.hp1_i = Verdict::Pass;
        const auto thetas = grid.thetas();
        for (double r : grid.radii_between(B.R0, grid.r_max)) {
            const double la = B.log_a_minorant(r);
            for (double th : thetas) {
                const double a = B.a(r, th);
                if (!(a > 0.0) || std::log(a) < la - 1e-12 * std::max(1.0, std::abs(la))) {
                    rep.hp1_i = Verdict::Fail;
                    rep.notes.push_back("a < a_bar at r=" + fmt_double(r) + " theta=" + fmt_double(th));
                    break;
                }
            }
            if (rep.hp1_i == Verdict::Fail) break;
        }
    }

    rep.hp1_ii_curvature = Verdict::Pass;
    rep.notes.push_back("model manifold: K_omega = -psi''/psi holds with equality");

    rep.hp1_ii_first_integral = tail_integral(M, 1.0, tol);
    rep.hp1_ii_first = rep.hp1_ii_first_integral.converged ? Verdict::Pass : Verdict::Fail;

    if (rep.hp1_ii_first == Verdict::Pass) {
        rep.hp1_ii_double_integral = double_integral(M, minorant_of(B, grid), tol);
        rep.hp1_ii_double = rep.hp1_ii_double_integral.converged ? Verdict::Pass : Verdict::Fail;
    } else {
        rep.hp1_ii_double = Verdict::Fail;
        rep.notes.push_back("double integral not evaluated: inner tail integral divergent");
    }
    rep.joint = joint_of(rep);
    return rep;
}

Verdict check_e13(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid) {
    const LogRadialFn la = minorant_of(B, grid);
    const double log_c0 = std::log(B.C0);
    for (double r : grid.radii_between(B.R0, grid.r_max)) {
        const double bound = 2.0 * M.profile.log_psi(r) - log_c0;
        if (la(r) > bound + 1e-12 * std::max(1.0, std::abs(bound))) return Verdict::Fail;
    }
    return Verdict::Pass;
}

HypothesisReport joint_feasibility(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid,
                                   double tol) {
    HypothesisReport rep = check_hp1(M, B, grid, tol);
    rep.e13 = check_e13(M, B, grid);
    rep.joint = joint_of(rep);
    if (rep.joint == Verdict::Fail && M.profile.kind() == ProfileKind::Euclidean) {
        if (M.dim == 2)
            rep.notes.push_back("euclidean m=2: the tail integral of dr/r diverges (parabolic manifold)");
        else
            rep.notes.push_back(
                "euclidean: a_bar <= r^2/C0 gives I(r) r^(m-1)/a_bar >= C0/((m-2) r), so the double integral "
                "is minorized by a divergent harmonic integral");
    }
    return rep;
}

Verdict criterion_e70(double alpha, const LogRadialFn& log_a_minorant, double tol, QuadratureResult* detail) {
    if (!(alpha > 0.0)) throw PreconditionError("criterion_e70: alpha must be positive");
    ImproperOptions opts;
    opts.abs_tol = tol;
    const QuadratureResult res = improper_integral(
        [&](double u) {
            const double r = 1.0 + u;
            return std::exp(-(alpha - 1.0) * std::log(r) - log_a_minorant(r));
        },
        1.0, opts);
    if (detail) *detail = res;
    return res.converged ? Verdict::Pass : Verdict::Fail;
}

double green_bound(const ModelManifold& M, double r, double tol) {
    const QuadratureResult res = tail_integral(M, r, tol);
    if (!res.converged) throw PreconditionError("green_bound: tail integral divergent (parabolic manifold)");
    return res.value;
}

std::string verdict_csv_header() { return "check,profile,m,params,verdict,value,error_estimate"; }

std::vector<std::string> verdict_csv_rows(const ModelManifold& M, const HypothesisReport& rep) {
    const std::string prefix =
        M.profile.name() + "," + std::to_string(M.dim) + "," + fmt_params(M.profile.params()) + ",";
    auto plain = [&](const std::string& check, Verdict v) { return check + "," + prefix + to_string(v) + ",,"; };
    auto quad = [&](const std::string& check, Verdict v, const QuadratureResult& q) {
        if (v == Verdict::Skipped || (!q.converged && !q.divergent && q.truncation_radius == 0.0))
            return plain(check, v);
        return check + "," + prefix + to_string(v) + "," + fmt_double(q.value) + "," +
               fmt_double(q.abs_error_estimate);
    };
    return {plain("hp1_i", rep.hp1_i),
            plain("hp1_ii_curvature", rep.hp1_ii_curvature),
            quad("hp1_ii_first_integral", rep.hp1_ii_first, rep.hp1_ii_first_integral),
            quad("hp1_ii_double_integral", rep.hp1_ii_double, rep.hp1_ii_double_integral),
            plain("e13", rep.e13),
            plain("joint", rep.joint)};
}

}  // namespace dinf
