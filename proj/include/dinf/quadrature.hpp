#pragma once

#include <functional>

namespace dinf {

using ScalarFn = std::function<double(double)>;

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

/// Result of an improper integral over [0, inf) evaluated by truncation doubling.
struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    bool converged = false;
    bool divergent = false;
    /// Truncation point reached (in the integration variable).
    double truncation_radius = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Accepts an interval when
/// |K15 - G7| <= max(abs_tol_local, rel_tol * |K15|). Throws NumericalError
/// on a non-finite integrand sample.
Integral gauss_kronrod(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol = 1e-13);

/// Integrates f over [0, length] with panels [0,w], [w,2w], [2w,4w], ...
/// Suited to integrands concentrated near 0 on a scale ~ w.
Integral integrate_from_peak(const ScalarFn& f, double length, double w, double abs_tol,
                             double rel_tol = 1e-13);

struct ImproperOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    /// Consecutive non-decreasing increments that declare divergence.
    int divergence_run = 8;
    int max_doublings = 1000;
};

/// Integral of f over [0, inf). Segments [0,U1], [U1,2U1], [2U1,4U1], ... are
/// added until two consecutive increments fall below tol/2 (converged), or
/// `divergence_run` consecutive increments fail to decrease (divergent).
QuadratureResult improper_integral(const ScalarFn& f, double first_width, const ImproperOptions& opts);

}  // namespace dinf
