#pragma once

#include "dinf/geometry.hpp"
#include "dinf/hypotheses.hpp"

#include <string>
#include <vector>

namespace dinf {

/// a0(r) = 1 / (C_bar * a_bar(max(r, R0))), so that a >= 1/a0 everywhere.
struct A0Spec {
    double R0 = 1.0;
    double C_bar = 1.0;
    /// Minorant a_bar; empty when a0 was given directly.
    LogRadialFn log_abar;
    LogRadialFn log_a0_fn;

    double log_a0(double r) const;
    double a0(double r) const;
};

A0Spec build_a0(const CoefficientBundle& B, const ModelManifold& M, const SampleGrid& grid);
/// Uses an explicit a0 (log form), e.g. for closed-form oracles.
A0Spec a0_from_log(LogRadialFn log_a0);

struct HResult {
    double value = 0.0;
    /// Bracket values on the doubling sequence rho = rho0 * 2^k.
    std::vector<double> rho;
    std::vector<double> bracket;
};

/// H = limsup of I(rho) int_0^rho a0 psi^{m-1} - int_0^rho I a0 psi^{m-1} on a doubling sequence.
/// Returns the largest bracket among the last three once their increments are below tol.
HResult compute_H(const ModelManifold& M, const A0Spec& a0, double tol, double rho0 = 16.0,
                  int max_doublings = 60);

struct Violation {
    std::string check;
    double r = 0.0;
    double theta = 0.0;
    double value = 0.0;
};

struct VerificationRecord {
    bool passed = true;
    std::vector<Violation> violations;
    double max_residual = -1e300;
    double max_derivative_mismatch = 0.0;
    std::vector<std::string> notes;

    void fail(std::string check, double r, double theta, double value);
};

/// Tabulated radial supersolution of a Lap V = -1, positive and vanishing at infinity.
struct RadialBarrier {
    ModelManifold M;
    A0Spec a0;
    double H = 0.0;
    /// r[0] = 0, then geometric nodes up to r_max.
    std::vector<double> r;
    std::vector<double> V;
    std::vector<double> dV;
    /// V'' split as (m-1) psi'/psi (-V') plus -a0, kept apart so that the
    /// drift cancellation in Lap V is exact in floating point.
    std::vector<double> d2V_drift;
    std::vector<double> d2V_source;

    double d2V(std::size_t i) const { return d2V_drift[i] + d2V_source[i]; }

    double r_max() const { return r.back(); }
    /// V at an arbitrary radius in [0, r_max], by quadrature of V' from the nearest node below.
    double value_at(double x) const;
    /// -V'(x) = psi^{1-m}(x) int_0^x a0 psi^{m-1}.
    double flux_at(double x) const;
    /// V'' + (m-1) psi'/psi V' at node i (limit -a0(0) at the pole).
    double laplacian(std::size_t i) const;
};

struct BarrierOptions {
    double r_min = 1e-3;
    double r_max = 1e3;
    int per_decade = 40;
    double tol = 1e-10;
};

RadialBarrier build_V(const ModelManifold& M, const A0Spec& a0, const BarrierOptions& opts);
RadialBarrier build_V(const ModelManifold& M, const CoefficientBundle& B, const SampleGrid& grid,
                      const BarrierOptions& opts);

struct VerifyOptions {
    double residual_tol = 1e-6;
    double vanish_tol = 1e-3;
    double H_tol = 1e-8;
    /// Allowed relative mismatch between V' and centered differences of V.
    double derivative_tol = 1e-4;
};

VerificationRecord verify_V(const RadialBarrier& barrier, const CoefficientBundle& B, const SampleGrid& grid,
                            const VerifyOptions& opts = {});

/// h(r, theta) = C_hat V(r) + dist^2(theta, theta0) on the cone {r > R_hat, dist < delta_hat}.
struct ConeBarrier {
    const RadialBarrier* radial = nullptr;
    SpherePoint theta0{};
    /// Constant of the angular estimate Lap_S dist^2 <= C.
    double C = 2.0;
    double C0 = 1.0;
    double C_hat = 3.0;
    double R_hat = 2.0;
    double delta_hat = 1.0;

    int dim() const { return radial->M.dim; }
    double value(double r, double dist) const;
    double m_delta_R(double delta, double R) const;
};

/// For m = 2 only theta0.longitude is used; for m = 3 both coordinates.
ConeBarrier build_cone_barrier(const RadialBarrier& barrier, SpherePoint theta0, double C0, double R_hat = 0.0);

struct ConeVerifyOptions {
    double tol = 1e-6;
    /// Aperture of the verification cone (defaults to delta_hat).
    double delta = 0.0;
    /// Inner radius R >= R_hat of the boundary check (defaults to R_hat).
    double R = 0.0;
    int n_angle = 16;
    int n_azimuth = 12;
};

VerificationRecord verify_cone_barrier(const ConeBarrier& cone, const CoefficientBundle& B,
                                       const ConeVerifyOptions& opts = {});

/// Lap_{S^{m-1}} of dist^2 at geodesic distance d (m = 2: 2; m = 3: 2 + 2 d cot d).
double sphere_laplacian_dist2(int m, double d);

std::string barrier_csv(const RadialBarrier& barrier, const CoefficientBundle& B, const SampleGrid& grid);
std::string violations_csv(const VerificationRecord& rec);

}  // namespace dinf
