#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>

namespace dinf {

/// Thrown when an operation is called outside its domain (r <= 0, bad parameters, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical kernel breaks down (non-finite samples, solver failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProfileKind { Euclidean, Hyperbolic, ExpPower, LogPower };

/// Warping function psi of a model metric dr^2 + psi(r)^2 dtheta^2.
///
/// Every profile is class A: psi(0) = 0, psi'(0) = 1, psi > 0 on (0, inf).
/// exp_power and log_power follow their asymptotic formulas exactly for
/// r >= r0 and are r * q(r) with q a cubic below r0, C^2-matched at r0.
///
/// Growth is handled in log space: log_psi, the ratios psi'/psi and
/// psi''/psi, and log_ratio are finite on the whole range even where
/// psi itself overflows.
class Profile {
public:
    static Profile euclidean();
    static Profile hyperbolic(double alpha);
    static Profile exp_power(double alpha, double r0);
    static Profile log_power(double beta, double r1);

    ProfileKind kind() const { return kind_; }
    std::string name() const;
    /// Parameters by catalog key (alpha, r0, beta, r1).
    std::map<std::string, double> params() const;

    double log_psi(double r) const;
    double psi(double r) const;
    double deriv1(double r) const;
    double deriv2(double r) const;
    /// psi'(r) / psi(r), r > 0.
    double ratio1(double r) const;
    /// psi''(r) / psi(r), r > 0.
    double ratio2(double r) const;
    /// log(psi(r + u) / psi(r)) for u >= -r, accurate for |u| << r.
    double log_ratio(double r, double u) const;

    /// Matching radius below which the cubic splice is used (0 if none).
    double splice_radius() const { return r0_; }

private:
    Profile() = default;
    void build_splice();

    bool spliced(double r) const { return r0_ > 0.0 && r < r0_; }
    // asymptotic branch
    double asym_log_psi(double r) const;
    double asym_ratio1(double r) const;
    double asym_ratio2(double r) const;
    double asym_log_ratio(double r, double u) const;

    ProfileKind kind_ = ProfileKind::Euclidean;
    double alpha_ = 1.0;
    double beta_ = 0.0;
    double r0_ = 0.0;
    // q(r) = 1 + q_[0] r + q_[1] r^2 + q_[2] r^3 on [0, r0)
    std::array<double, 3> q_{};
};

/// Builds a profile from its catalog name and parameters.
/// Recognized names: euclidean, hyperbolic(alpha), exp_power(alpha, r0),
/// log_power(beta, r1).
Profile profile_catalog(const std::string& name, const std::map<std::string, double>& params);

struct ModelManifold {
    int dim = 2;
    Profile profile = Profile::euclidean();

    ModelManifold() = default;
    ModelManifold(int m, Profile p);
};

/// Coefficients of the polar Laplacian d_rr + drift d_r + angular_weight * Lap_S.
struct LaplaceCoeffs {
    double drift;
    double angular_weight;
};

double radial_sectional_curvature(const ModelManifold& M, double r);
LaplaceCoeffs laplace_coeffs(const ModelManifold& M, double r);

/// Area of the unit sphere S^{m-1} in R^m.
double unit_sphere_area(int m);
double sphere_area(const ModelManifold& M, double R);
double log_sphere_area(const ModelManifold& M, double R);

/// Point on S^2 in (colatitude, longitude).
struct SpherePoint {
    double colatitude;
    double longitude;
};

/// Great-circle distance on the unit circle.
double angular_distance(double theta, double theta0);
/// Great-circle distance on the unit 2-sphere.
double angular_distance(const SpherePoint& p, const SpherePoint& q);

}  // namespace dinf
