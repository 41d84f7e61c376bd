#pragma once

#include "dinf/elliptic.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace dinf {

/// Time-dependent boundary data gamma~(theta, t).
using SpaceTimeFn = std::function<double(double theta, double t)>;

/// zeta_j: 1 on [0, j/2], quintic smoothstep down to 0 at j - dr.
struct Cutoff {
    double j = 1.0;
    double dr = 0.0;

    double operator()(double r) const;
};

/// u_{0,j} = zeta u0 + (1 - zeta) gamma~(theta, 0) on the grid.
std::vector<double> blend_initial(const FieldFn& u0, const SpaceTimeFn& gamma, const Cutoff& zeta,
                                  const PolarGrid& grid);

struct SpaceTimeField {
    PolarGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> snapshots;
};

/// Theta-scheme for du/dt = L u + f with the ghost-eliminated operator L.
/// theta_s = 1/2 is Crank-Nicolson, theta_s = 1 implicit Euler.
class ThetaStepper {
public:
    ThetaStepper(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid, double dt,
                 double theta_s);

    /// Advances u from t to t + dt; throws NumericalError if the residual exceeds 1e-10.
    std::vector<double> step(const std::vector<double>& u, const SpaceTimeFn& gamma, double t) const;

    const PolarGrid& grid() const { return op_.grid; }
    double dt() const { return dt_; }
    double theta_s() const { return theta_; }
    double last_residual() const { return last_residual_; }

private:
    DiscreteOperator op_;
    std::vector<double> f_;
    double dt_;
    double theta_;
    Eigen::SparseMatrix<double> implicit_;
    Eigen::SparseMatrix<double> explicit_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    mutable double last_residual_ = 0.0;
};

/// One step as a free function (factorizes each call).
std::vector<double> step_theta_scheme(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid,
                                      const std::vector<double>& u, const SpaceTimeFn& gamma, double t, double dt,
                                      double theta_s = 0.5);

struct ParabolicOptions {
    double dr = 0.125;
    int Ntheta = 64;
    double dt = 1e-3;
    double T = 1.0;
    double theta_s = 0.5;
    /// Store every stride-th snapshot (the final time is always stored).
    int stride = 1;
    int threads = 1;
    double bound_tol = 1e-8;
};

struct CauchyRun {
    double j = 0.0;
    SpaceTimeField field;
    /// r -> sup over theta and all time steps of |u - gamma~|.
    Profile1D profile;
    double sup_norm = 0.0;
    /// sup_theta |u_{0,j}(r_last, theta) - gamma~(theta, 0)|.
    double compatibility = 0.0;
};

struct CauchyReport {
    std::vector<double> schedule;
    double core_radius = 0.0;
    /// K_T = C e^{beta T}, beta = 1 + |c|, C = max(|f|, |gamma~|, |u0|).
    double K_T = 0.0;
    bool bound_ok = true;
    /// sup over time steps and the core ball of |u_{j_{i+1}} - u_{j_i}|.
    std::vector<double> differences;
    /// sup_theta |u0(r_max, theta) - gamma~(theta, 0)| on the largest grid.
    double compatibility = 0.0;
    std::vector<CauchyRun> runs;
};

CauchyReport solve_cauchy_exhaustion(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0,
                                     const SpaceTimeFn& gamma, const std::vector<double>& schedule,
                                     const ParabolicOptions& opts);

/// r -> sup over theta and stored times of |u - gamma~|.
Profile1D attainment_profile_t(const SpaceTimeField& u, const SpaceTimeFn& gamma);

/// Space-time envelope K C_hat V(r) e^{alpha T} + 3 eps from the comparison constants
/// (alpha >= |c|, K from the interior and lateral conditions, lambda from the initial slice).
struct ParabolicEnvelope {
    double eps = 0.0;
    double delta = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
    double K = 0.0;
    double K_T = 0.0;
    double m_eps = 0.0;
    Profile1D envelope;
};

ParabolicEnvelope parabolic_envelope(const ConeBarrier& cone, const SpaceTimeFn& gamma, double T, double eps,
                                     double K_T, double norm_c, double norm_f, const std::vector<double>& radii);

/// sup |gamma~(theta, t) - gamma~(theta0, t0)| over dist < delta, t in [t0 - delta, t0].
double gamma_t_oscillation(const SpaceTimeFn& gamma, double delta, double T, int dim, int samples = 180,
                           int time_samples = 21);

struct UniquenessCurveT {
    std::vector<double> j;
    std::vector<double> difference;
    /// eps e^{|c| T}, eps the sup of the bump.
    double comparison_bound = 0.0;
    bool comparison_ok = true;
};

/// Runs each j twice, with gamma~ and gamma~ + bump on the lateral boundary (t > 0), and
/// records sup over [0, T] and B_{j/4} of the difference.
UniquenessCurveT uniqueness_probe_t(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0,
                                    const SpaceTimeFn& gamma, const AngularFn& bump,
                                    const std::vector<double>& schedule, const ParabolicOptions& opts);

struct HullProbe {
    bool passed = false;
    double dt = 0.0;
    int halvings = 0;
    /// Largest hull violation for each attempted dt.
    std::vector<double> attempts_dt;
    std::vector<double> violations;
};

/// For f = 0, c <= 0: halves dt until every snapshot lies in the hull of the
/// initial data, the boundary data and 0.
HullProbe hull_probe(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid, const FieldFn& u0,
                     const SpaceTimeFn& gamma, double T, double dt, double theta_s, int max_halvings = 16);

/// Method-of-lines oracle for one angular mode (m = 2): the radial system
/// y_t = a (y'' + psi'/psi y' - k^2 y / psi^2) + c y (+ f for k = 0), y(j, t) = g(t),
/// on a grid refined by an odd factor so that its cell centers contain those of `grid`.
/// Time is integrated by the matrix exponential of the system augmented with g and g',
/// exact when g is linear on each substep. Returns y at the cell centers of `grid` for
/// each requested time.
struct ModeOracleOptions {
    int refine = 3;
    double max_substep = 1e-3;
};

std::vector<std::vector<double>> mode_oracle_t(const ModelManifold& M, const RadialCoefficients& coeffs, int k,
                                               const std::function<double(double)>& g,
                                               const std::function<double(double)>& y0, const PolarGrid& grid,
                                               const std::vector<double>& times, const ModeOracleOptions& opts = {});

struct LongtimeReport {
    std::vector<double> t;
    /// sup |u(t) - u_inf| with u_inf the elliptic solution for the limiting data.
    std::vector<double> distance;
};

/// Experiment: gamma~ -> gamma_inf as t grows; tracks the distance to the steady state.
LongtimeReport experiment_longtime(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0,
                                   const SpaceTimeFn& gamma, const AngularFn& gamma_inf, double j,
                                   const ParabolicOptions& opts);

std::string spacetime_csv(const SpaceTimeField& u, int stride = 1);

}  // namespace dinf
