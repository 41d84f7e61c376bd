#include "dinf/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

namespace dinf {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

}  // namespace

Profile Profile::euclidean() { return Profile{}; }

Profile Profile::hyperbolic(double alpha) {
    require(alpha > 0.0 && std::isfinite(alpha), "hyperbolic: alpha must be positive");
    Profile p;
    p.kind_ = ProfileKind::Hyperbolic;
    p.alpha_ = alpha;
    return p;
}

Profile Profile::exp_power(double alpha, double r0) {
    require(alpha > 0.0 && std::isfinite(alpha), "exp_power: alpha must be positive");
    require(r0 > 0.0 && std::isfinite(r0), "exp_power: matching radius r0 must be positive");
    Profile p;
    p.kind_ = ProfileKind::ExpPower;
    p.alpha_ = alpha;
    p.r0_ = r0;
    p.build_splice();
    return p;
}

Profile Profile::log_power(double beta, double r1) {
    require(beta > 1.0 && std::isfinite(beta), "log_power: beta must exceed 1");
    require(r1 > 1.0 && std::isfinite(r1), "log_power: matching radius r1 must exceed 1");
    Profile p;
    p.kind_ = ProfileKind::LogPower;
    p.beta_ = beta;
    p.r0_ = r1;
    p.build_splice();
    return p;
}

void Profile::build_splice() {
    const double r0 = r0_;
    const double psi0 = std::exp(asym_log_psi(r0));
    const double psi1 = asym_ratio1(r0) * psi0;
    const double psi2 = asym_ratio2(r0) * psi0;
    // psi = r q  =>  q = psi/r, q' = (psi' - q)/r, q'' = (psi'' - 2 q')/r
    const double q0 = psi0 / r0;
    const double q1 = (psi1 - q0) / r0;
    const double q2 = (psi2 - 2.0 * q1) / r0;

    Eigen::Matrix3d A;
    A << r0, r0 * r0, r0 * r0 * r0,
         1.0, 2.0 * r0, 3.0 * r0 * r0,
         0.0, 2.0, 6.0 * r0;
    const Eigen::Vector3d rhs(q0 - 1.0, q1, q2);
    const Eigen::Vector3d sol = A.fullPivLu().solve(rhs);
    q_ = {sol[0], sol[1], sol[2]};

    constexpr int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
        const double r = r0 * i / samples;
        const double q = 1.0 + r * (q_[0] + r * (q_[1] + r * q_[2]));
        require(q > 0.0, name() + ": cubic splice is not positive on [0, r0]; choose another matching radius");
    }
}

std::string Profile::name() const {
    switch (kind_) {
        case ProfileKind::Euclidean: return "euclidean";
        case ProfileKind::Hyperbolic: return "hyperbolic";
        case ProfileKind::ExpPower: return "exp_power";
        case ProfileKind::LogPower: return "log_power";
    }
    return "unknown";
}

std::map<std::string, double> Profile::params() const {
    switch (kind_) {
        case ProfileKind::Euclidean: return {};
        case ProfileKind::Hyperbolic: return {{"alpha", alpha_}};
        case ProfileKind::ExpPower: return {{"alpha", alpha_}, {"r0", r0_}};
        case ProfileKind::LogPower: return {{"beta", beta_}, {"r1", r0_}};
    }
    return {};
}

double Profile::asym_log_psi(double r) const {
    switch (kind_) {
        case ProfileKind::Euclidean: return std::log(r);
        case ProfileKind::Hyperbolic:
            return alpha_ * r + std::log(-std::expm1(-2.0 * alpha_ * r)) - std::log(2.0 * alpha_);
        case ProfileKind::ExpPower: return std::pow(r, alpha_);
        case ProfileKind::LogPower: return std::log(r) + beta_ * std::log(std::log(r));
    }
    return 0.0;
}

double Profile::asym_ratio1(double r) const {
    switch (kind_) {
        case ProfileKind::Euclidean: return 1.0 / r;
        case ProfileKind::Hyperbolic: return alpha_ / std::tanh(alpha_ * r);
        case ProfileKind::ExpPower: return alpha_ * std::pow(r, alpha_ - 1.0);
        case ProfileKind::LogPower: return (1.0 + beta_ / std::log(r)) / r;
    }
    return 0.0;
}

double Profile::asym_ratio2(double r) const {
    switch (kind_) {
        case ProfileKind::Euclidean: return 0.0;
        case ProfileKind::Hyperbolic: return alpha_ * alpha_;
        case ProfileKind::ExpPower:
            return alpha_ * (alpha_ - 1.0) * std::pow(r, alpha_ - 2.0) +
                   alpha_ * alpha_ * std::pow(r, 2.0 * alpha_ - 2.0);
        case ProfileKind::LogPower: {
            const double L = std::log(r);
            return (beta_ / L + beta_ * (beta_ - 1.0) / (L * L)) / (r * r);
        }
    }
    return 0.0;
}

double Profile::asym_log_ratio(double r, double u) const {
    const double x = u / r;
    switch (kind_) {
        case ProfileKind::Euclidean: return std::log1p(x);
        case ProfileKind::Hyperbolic:
            return alpha_ * u + std::log(-std::expm1(-2.0 * alpha_ * (r + u))) -
                   std::log(-std::expm1(-2.0 * alpha_ * r));
        case ProfileKind::ExpPower:
            return std::pow(r, alpha_) * std::expm1(alpha_ * std::log1p(x));
        case ProfileKind::LogPower: {
            const double l = std::log1p(x);
            return l + beta_ * std::log1p(l / std::log(r));
        }
    }
    return 0.0;
}

double Profile::log_psi(double r) const {
    if (r <= 0.0) return -std::numeric_limits<double>::infinity();
    if (spliced(r)) {
        const double q = 1.0 + r * (q_[0] + r * (q_[1] + r * q_[2]));
        return std::log(r) + std::log(q);
    }
    return asym_log_psi(r);
}

double Profile::psi(double r) const {
    if (r <= 0.0) return 0.0;
    if (kind_ == ProfileKind::Euclidean) return r;
    if (kind_ == ProfileKind::Hyperbolic) return std::sinh(alpha_ * r) / alpha_;
    return std::exp(log_psi(r));
}

double Profile::ratio1(double r) const {
    if (spliced(r)) {
        const double q = 1.0 + r * (q_[0] + r * (q_[1] + r * q_[2]));
        const double dq = q_[0] + r * (2.0 * q_[1] + 3.0 * r * q_[2]);
        return 1.0 / r + dq / q;
    }
    return asym_ratio1(r);
}

double Profile::ratio2(double r) const {
    if (spliced(r)) {
        const double q = 1.0 + r * (q_[0] + r * (q_[1] + r * q_[2]));
        const double dq = q_[0] + r * (2.0 * q_[1] + 3.0 * r * q_[2]);
        const double d2q = 2.0 * q_[1] + 6.0 * r * q_[2];
        return (2.0 * dq + r * d2q) / (r * q);
    }
    return asym_ratio2(r);
}

double Profile::deriv1(double r) const {
    if (r <= 0.0) return 1.0;
    if (spliced(r)) {
        const double q = 1.0 + r * (q_[0] + r * (q_[1] + r * q_[2]));
        const double dq = q_[0] + r * (2.0 * q_[1] + 3.0 * r * q_[2]);
        return q + r * dq;
    }
    if (kind_ == ProfileKind::Hyperbolic) return std::cosh(alpha_ * r);
    return ratio1(r) * psi(r);
}

double Profile::deriv2(double r) const {
    if (r <= 0.0) return r0_ > 0.0 ? 2.0 * q_[0] : 0.0;
    if (spliced(r)) {
        const double dq = q_[0] + r * (2.0 * q_[1] + 3.0 * r * q_[2]);
        const double d2q = 2.0 * q_[1] + 6.0 * r * q_[2];
        return 2.0 * dq + r * d2q;
    }
    return ratio2(r) * psi(r);
}

double Profile::log_ratio(double r, double u) const {
    if (u == 0.0) return 0.0;
    if (!spliced(r) && !spliced(r + u)) return asym_log_ratio(r, u);
    return log_psi(r + u) - log_psi(r);
}

Profile profile_catalog(const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    auto only = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : params) {
            bool known = false;
            for (const char* a : allowed) known = known || key == a;
            require(known, "profile '" + name + "' does not take parameter '" + key + "'");
        }
    };
    if (name == "euclidean") {
        only({});
        return Profile::euclidean();
    }
    if (name == "hyperbolic") {
        only({"alpha"});
        return Profile::hyperbolic(get("alpha", 1.0));
    }
    if (name == "exp_power") {
        only({"alpha", "r0"});
        return Profile::exp_power(get("alpha", 3.0), get("r0", 1.0));
    }
    if (name == "log_power") {
        only({"beta", "r1"});
        const double beta = get("beta", 3.0);
        return Profile::log_power(beta, get("r1", std::exp(beta)));
    }
    throw PreconditionError("unknown profile '" + name +
                            "' (catalog: euclidean, hyperbolic, exp_power, log_power)");
}

ModelManifold::ModelManifold(int m, Profile p) : dim(m), profile(std::move(p)) {
    require(m >= 2, "model manifold dimension must be at least 2");
}

double radial_sectional_curvature(const ModelManifold& M, double r) {
    require(r > 0.0, "radial_sectional_curvature: r must be positive");
    return -M.profile.ratio2(r);
}

LaplaceCoeffs laplace_coeffs(const ModelManifold& M, double r) {
    require(r > 0.0, "laplace_coeffs: r must be positive");
    return {(M.dim - 1) * M.profile.ratio1(r), std::exp(-2.0 * M.profile.log_psi(r))};
}

double unit_sphere_area(int m) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

double log_sphere_area(const ModelManifold& M, double R) {
    require(R > 0.0, "sphere_area: R must be positive");
    return std::log(unit_sphere_area(M.dim)) + (M.dim - 1) * M.profile.log_psi(R);
}

double sphere_area(const ModelManifold& M, double R) {
    require(R > 0.0, "sphere_area: R must be positive");
    return unit_sphere_area(M.dim) * std::pow(M.profile.psi(R), M.dim - 1);
}

double angular_distance(double theta, double theta0) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double d = std::fmod(std::abs(theta - theta0), two_pi);
    return std::min(d, two_pi - d);
}

double angular_distance(const SpherePoint& p, const SpherePoint& q) {
    const Eigen::Vector3d a(std::sin(p.colatitude) * std::cos(p.longitude),
                            std::sin(p.colatitude) * std::sin(p.longitude), std::cos(p.colatitude));
    const Eigen::Vector3d b(std::sin(q.colatitude) * std::cos(q.longitude),
                            std::sin(q.colatitude) * std::sin(q.longitude), std::cos(q.colatitude));
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace dinf
