#pragma once

#include "dinf/geometry.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dinf {

/// All problems found while reading a config, one message per entry.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Variables an expression may depend on.
enum Var : unsigned { VarR = 1u, VarTheta = 2u, VarT = 4u };

/// One catalog entry with its parameters (defaults filled in).
struct ExprTerm {
    std::string name;
    std::map<std::string, double> params;
};

/// Product of catalog terms, written `name(k=v, ...) * name(...)`.
///
/// Catalog:
///   constant(value)                      value
///   power(scale, exponent, shift)        scale (r + shift)^exponent
///   exponential(scale, rate)             scale e^{rate r}
///   psi_power(scale, exponent, shift)    scale psi(r)^exponent + shift
///   cos_mode(amplitude, k, phase)        amplitude cos(k theta + phase)
///   sin_mode(amplitude, k, phase)        amplitude sin(k theta + phase)
///   gaussian_bump(center, width, height) height e^{-d^2 / (2 width^2)}, d = dist(theta, center)
///   arc_bump(center, half_width, height) height cos^2(pi d / (2 half_width)) on d < half_width
///   ramp(rate, cap)                      min(rate t, cap)
///   exp_decay(scale, rate)               scale e^{-rate t}
struct Expr {
    std::vector<ExprTerm> terms;

    bool empty() const { return terms.empty(); }
    unsigned vars() const;
    std::string canonical() const;

    double eval(const Profile& psi, double r, double theta, double t = 0.0) const;
    /// log of a positive radial expression, evaluated without overflow.
    double log_eval(const Profile& psi, double r) const;
};

/// Throws ConfigError naming the catalog on unknown names or parameters.
Expr parse_expr(const std::string& text);
std::string expr_catalog_names();

struct RunConfig {
    // [manifold]
    std::string profile = "hyperbolic";
    std::map<std::string, double> profile_params;
    int dim = 2;
    // [coefficients]
    Expr a = parse_expr("constant(value=1)");
    Expr c = parse_expr("constant(value=0)");
    Expr f = parse_expr("constant(value=0)");
    /// Radial minorant; empty means the sampled infimum of a.
    Expr a_bar;
    double R0 = 1.0;
    double C0 = 1.0;
    // [boundary]
    Expr gamma = parse_expr("cos_mode(k=1)");
    /// Time-dependent data; empty means gamma held constant in time.
    Expr gamma_t;
    Expr u0 = parse_expr("constant(value=0)");
    Expr bump = parse_expr("arc_bump(center=0, half_width=0.5)");
    // [numerics]
    double j = 8.0;
    double dr = 0.125;
    int Ntheta = 64;
    std::vector<double> schedule{8.0, 16.0, 32.0, 64.0};
    std::vector<int> levels{32, 64, 128};
    int modes = 8;
    double dt = 1e-3;
    double T = 1.0;
    std::string scheme = "cn";
    int stride = 10;
    double tol = 1e-10;
    double r_max = 1e3;
    int per_decade = 40;
    int n_theta = 16;
    double eps = 0.05;
    double theta0 = 0.0;
    bool assert_attainment = false;
    // [output]
    std::string out_dir = "out";

    ModelManifold manifold() const;
};

/// Parses the documented `[section]` / `key = value` format; collects every error.
RunConfig parse_config(const std::string& text);
/// Canonical text: every key, fixed order, full-precision numbers.
std::string serialize_config(const RunConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dinf
