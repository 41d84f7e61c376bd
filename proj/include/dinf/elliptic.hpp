#pragma once

#include "dinf/barriers.hpp"
#include "dinf/geometry.hpp"
#include "dinf/hypotheses.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace dinf {

/// Boundary data on S^{m-1}: longitude for m = 2, colatitude for m = 3.
using AngularFn = std::function<double(double theta)>;

/// Cell-centered polar grid on the geodesic ball B_j: r_k = (k + 1/2) dr with
/// Nr dr = j, so the boundary face sits at r = j.
/// m = 2: theta_l = l 2pi/Ntheta (periodic, Ntheta even).
/// m = 3: colatitude cells phi_l = (l + 1/2) pi/Ntheta (axisymmetric).
struct PolarGrid {
    double j = 1.0;
    int Nr = 1;
    int Ntheta = 2;
    int dim = 2;

    static PolarGrid make(double j, int Nr, int Ntheta, int dim = 2);
    /// Grid with spacing dr on B_j; j/dr must be an integer.
    static PolarGrid with_spacing(double j, double dr, int Ntheta, int dim = 2);

    double dr() const { return j / Nr; }
    double dtheta() const;
    double r(int k) const { return (k + 0.5) * dr(); }
    double theta(int l) const;
    std::size_t index(int k, int l) const { return static_cast<std::size_t>(k) * Ntheta + l; }
    std::size_t size() const { return static_cast<std::size_t>(Nr) * Ntheta; }
    /// Angle index of the antipode used by the pole closure.
    int antipode(int l) const;
};

struct DiscreteField {
    PolarGrid grid;
    std::vector<double> values;

    double at(int k, int l) const { return values[grid.index(k, l)]; }
    double sup_norm() const;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discretization of a[d_rr + (m-1) psi'/psi d_r + psi^{-2} Lap_S] + c on a PolarGrid
/// with the outer ghost eliminated: L u + boundary_weight .* gamma.
///
/// The radial stencil uses sigma = max(1, |rho|), rho = D dr / 2, as the
/// diffusion weight: centered where |rho| <= 1, upwind beyond, so every
/// off-diagonal entry is non-negative.
struct DiscreteOperator {
    PolarGrid grid;
    SparseMatrix L;
    /// Per outer-ring node (index l), the coefficient of gamma(theta_l).
    std::vector<double> boundary_weight;
};

DiscreteOperator discretize(const ModelManifold& M, const FieldFn& a, const FieldFn& c, const PolarGrid& grid);

struct LinearSystem {
    PolarGrid grid;
    SparseMatrix A;
    Eigen::VectorXd b;
};

/// -(a Lap + c) u = -f with u = gamma at r = j.
LinearSystem assemble(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid,
                      const AngularFn& gamma);

struct MMatrixReport {
    bool ok = true;
    int sign_violations = 0;
    int dominance_violations = 0;
    int strictly_dominant_rows = 0;
    double min_diagonal = 0.0;
};

/// Off-diagonals <= 0, positive diagonal, weak row dominance with at least one strict row.
MMatrixReport check_m_matrix(const SparseMatrix& A);

/// Row sums of A (zero on interior rows when c = 0).
Eigen::VectorXd row_sums(const SparseMatrix& A);

struct SolveInfo {
    double relative_residual = 0.0;
};

/// Sparse LU; throws NumericalError if the relative residual exceeds 1e-10.
DiscreteField solve_ball(const LinearSystem& sys, SolveInfo* info = nullptr);

/// r -> sup_theta |u(r, theta) - gamma(theta)| on the grid radii.
struct Profile1D {
    std::vector<double> r;
    std::vector<double> value;
};

Profile1D attainment_profile(const DiscreteField& u, const AngularFn& gamma);

struct ExhaustionOptions {
    double dr = 0.125;
    int Ntheta = 64;
    int threads = 1;
    double bound_tol = 1e-8;
    /// H of the radial barrier, for the a-priori bound when f != 0.
    double H = 0.0;
    bool have_H = false;
};

struct ExhaustionReport {
    std::vector<double> schedule;
    double core_radius = 0.0;
    /// sup over the core ball of |u_{j_{i+1}} - u_{j_i}|.
    std::vector<double> differences;
    std::vector<double> sup_norms;
    double bound = 0.0;
    bool bound_ok = true;
    bool bound_checked = false;
    Profile1D profile;
    std::vector<DiscreteField> solutions;
};

ExhaustionReport exhaustion_solve(const ModelManifold& M, const CoefficientBundle& B, const AngularFn& gamma,
                                  const std::vector<double>& schedule, const ExhaustionOptions& opts);

/// sup over nodes with r < radius of |u - v| (shared cell centers, same dr and Ntheta).
double core_difference(const DiscreteField& u, const DiscreteField& v, double radius);

/// Envelope |u - gamma(theta0)| <= K C_hat V(r) + eps along the cone axis, with K from
/// the comparison argument (K >= (|gamma| + C_tilde)/m_{delta,R_hat} and K >= |c|(|gamma|+1) + |f|).
struct ConeEnvelope {
    double eps = 0.0;
    double delta = 0.0;
    double K = 0.0;
    double m_delta = 0.0;
    Profile1D envelope;
};

ConeEnvelope cone_envelope(const ConeBarrier& cone, const AngularFn& gamma, double eps, double C_tilde,
                           double norm_c, double norm_f, const std::vector<double>& radii);

/// sup_theta |gamma(theta) - gamma(theta0)| over dist < delta, maximized over theta0 (sampled).
double gamma_oscillation(const AngularFn& gamma, double delta, int dim, int samples = 720);

struct UniquenessCurve {
    std::vector<double> j;
    std::vector<double> difference;
};

/// Solves with gamma and gamma + bump on each B_j and records sup |difference| on B_{j/4}.
UniquenessCurve uniqueness_probe(const ModelManifold& M, const CoefficientBundle& B, const AngularFn& gamma,
                                 const AngularFn& bump, const std::vector<double>& schedule,
                                 const ExhaustionOptions& opts);

/// Per-mode ODE solution for radial a, c, f (m = 2), sampled on the cell centers of `grid`.
struct RadialCoefficients {
    std::function<double(double)> a;
    std::function<double(double)> c;
    std::function<double(double)> f;
};

DiscreteField fourier_oracle(const ModelManifold& M, const RadialCoefficients& coeffs, const AngularFn& gamma,
                             int max_mode, const PolarGrid& grid);

std::string field_csv(const DiscreteField& u);

}  // namespace dinf
