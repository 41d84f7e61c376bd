#pragma once

#include "dinf/geometry.hpp"
#include "dinf/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dinf {

/// Coefficient field on the model manifold in polar coordinates (r, theta).
/// For m = 3 theta is the colatitude (axisymmetric data).
using FieldFn = std::function<double(double r, double theta)>;
/// Logarithm of a positive radial function.
using LogRadialFn = std::function<double(double r)>;

enum class Verdict { Pass, Fail, Skipped };

std::string to_string(Verdict v);

/// Radii and angles on which pointwise hypotheses are checked.
struct SampleGrid {
    double r_min = 1e-3;
    double r_max = 1e3;
    int per_decade = 40;
    int n_theta = 32;
    int dim = 2;

    std::vector<double> radii() const;
    /// Radii restricted to [lo, hi] (both endpoints included).
    std::vector<double> radii_between(double lo, double hi) const;
    std::vector<double> thetas() const;
};

struct CoefficientBundle {
    FieldFn a;
    FieldFn c;
    FieldFn f;
    /// log of the radial minorant a_bar on [R0, inf). Empty: the sampled
    /// radial infimum of a over theta is used.
    LogRadialFn log_a_minorant;
    double R0 = 1.0;
    double C0 = 1.0;
    double norm_c = 0.0;
    double norm_f = 0.0;
};

/// Builds a bundle and caches sup-norms of c and f over `grid`.
CoefficientBundle make_bundle(FieldFn a, FieldFn c, FieldFn f, LogRadialFn log_a_minorant, double R0,
                              double C0, const SampleGrid& grid);

/// log a_bar(r), falling back to the sampled infimum of a over theta.
double log_minorant(const CoefficientBundle& B, const SampleGrid& grid, double r);
LogRadialFn minorant_of(const CoefficientBundle& B, const SampleGrid& grid);

struct HypothesisReport {
    Verdict hp1_i = Verdict::Skipped;
    /// Curvature comparison; holds with equality on model manifolds.
    Verdict hp1_ii_curvature = Verdict::Skipped;
    QuadratureResult hp1_ii_first_integral;
    Verdict hp1_ii_first = Verdict::Skipped;
    QuadratureResult hp1_ii_double_integral;
    Verdict hp1_ii_double = Verdict::Skipped;
    Verdict e13 = Verdict::Skipped;
    Verdict joint = Verdict::Skipped;
    std::vector<std::string> notes;
};

/// I(r) = int_r^inf psi^{1-m}.
QuadratureResult tail_integral(const ModelManifold& M, double r, double tol);
/// I(r) * psi^{m-1}(r), evaluated without forming either factor.
QuadratureResult scaled_tail(const ModelManifold& M, double r, double rel_tol = 1e-11);
/// J = int_1^inf I(r) psi^{m-1}(r) / a_bar(r) dr.
QuadratureResult double_integral(const ModelManifold& M, const LogRadialFn& log_a_minorant, double tol);

HypothesisReport check_hp1(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid,
                           double tol);
/// a_bar(r) <= psi^2(r) / C0 on the grid radii in [R0, r_max].
Verdict check_e13(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid);
HypothesisReport joint_feasibility(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid,
                                   double tol);

/// int_1^inf dr / (r^{alpha-1} a_bar(r)) < inf
Verdict criterion_e70(double alpha, const LogRadialFn& log_a_minorant, double tol,
                      QuadratureResult* detail = nullptr);

/// Green-function majorant I(r) with the constant normalized to 1.
double green_bound(const ModelManifold& M, double r, double tol = 1e-12);

/// CSV rows `check,profile,m,params,verdict,value,error_estimate` for a report.
std::vector<std::string> verdict_csv_rows(const ModelManifold& M, const HypothesisReport& report);
std::string verdict_csv_header();

}  // namespace dinf
