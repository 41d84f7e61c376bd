#include "dinf/parabolic.hpp"

#include "dinf/csv.hpp"
#include "dinf/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace dinf {

double Cutoff::operator()(double r) const {
    const double lo = 0.5 * j;
    const double hi = j - dr;
    if (r <= lo) return 1.0;
    if (r >= hi) return 0.0;
    const double x = (r - lo) / (hi - lo);
    return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

std::vector<double> blend_initial(const FieldFn& u0, const SpaceTimeFn& gamma, const Cutoff& zeta,
                                  const PolarGrid& g) {
    std::vector<double> out(g.size());
    for (int k = 0; k < g.Nr; ++k) {
        const double r = g.r(k);
        const double z = zeta(r);
        for (int l = 0; l < g.Ntheta; ++l) {
            const double th = g.theta(l);
            // evaluate only the active branch: u0 may be undefined where zeta vanishes
            double v = 0.0;
            if (z > 0.0) v += z * u0(r, th);
            if (z < 1.0) v += (1.0 - z) * gamma(th, 0.0);
            out[g.index(k, l)] = v;
        }
    }
    return out;
}

ThetaStepper::ThetaStepper(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid, double dt,
                           double theta_s)
    : op_(discretize(M, B.a, B.c, grid)), dt_(dt), theta_(theta_s) {
    if (!(theta_s >= 0.5 && theta_s <= 1.0)) throw PreconditionError("theta scheme: theta_s must lie in [1/2, 1]");
    if (!(dt > 0.0)) throw PreconditionError("theta scheme: dt must be positive");
    f_.resize(grid.size());
    for (int k = 0; k < grid.Nr; ++k)
        for (int l = 0; l < grid.Ntheta; ++l) f_[grid.index(k, l)] = B.f(grid.r(k), grid.theta(l));
    const Eigen::SparseMatrix<double> L = op_.L;
    Eigen::SparseMatrix<double> I(L.rows(), L.cols());
    I.setIdentity();
    implicit_ = I - (theta_ * dt_) * L;
    explicit_ = I + ((1.0 - theta_) * dt_) * L;
    implicit_.makeCompressed();
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->analyzePattern(implicit_);
    lu_->factorize(implicit_);
    if (lu_->info() != Eigen::Success) throw NumericalError("theta scheme: sparse LU factorization failed");
}

std::vector<double> ThetaStepper::step(const std::vector<double>& u, const SpaceTimeFn& gamma, double t) const {
    const PolarGrid& g = op_.grid;
    const Eigen::Map<const Eigen::VectorXd> un(u.data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::Map<const Eigen::VectorXd> f(f_.data(), static_cast<Eigen::Index>(f_.size()));
    Eigen::VectorXd rhs = explicit_ * un + dt_ * f;
    for (int l = 0; l < g.Ntheta; ++l) {
        const double th = g.theta(l);
        const double gb = theta_ * gamma(th, t + dt_) + (1.0 - theta_) * gamma(th, t);
        rhs[g.index(g.Nr - 1, l)] += dt_ * op_.boundary_weight[l] * gb;
    }
    Eigen::VectorXd x = lu_->solve(rhs);
    const double bn = std::max(rhs.norm(), 1e-300);
    double rel = (implicit_ * x - rhs).norm() / bn;
    if (rel > 1e-10) {
        x += lu_->solve(rhs - implicit_ * x);
        rel = (implicit_ * x - rhs).norm() / bn;
    }
    last_residual_ = rel;
    if (!(rel <= 1e-10) || !x.allFinite())
        throw NumericalError("theta scheme: relative residual " + fmt_double(rel) + " exceeds 1e-10");
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> step_theta_scheme(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid,
                                      const std::vector<double>& u, const SpaceTimeFn& gamma, double t, double dt,
                                      double theta_s) {
    return ThetaStepper(M, B, grid, dt, theta_s).step(u, gamma, t);
}

namespace {

int step_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw PreconditionError("parabolic: T and dt must be positive");
    const double n = T / dt;
    const long N = std::lround(n);
    if (N < 1 || std::abs(n - N) > 1e-9 * n) throw PreconditionError("parabolic: T/dt must be an integer");
    return static_cast<int>(N);
}

void accumulate_profile(std::vector<double>& prof, const PolarGrid& g, const std::vector<double>& u,
                        const SpaceTimeFn& gamma, double t) {
    std::vector<double> gam(g.Ntheta);
    for (int l = 0; l < g.Ntheta; ++l) gam[l] = gamma(g.theta(l), t);
    for (int k = 0; k < g.Nr; ++k)
        for (int l = 0; l < g.Ntheta; ++l) prof[k] = std::max(prof[k], std::abs(u[g.index(k, l)] - gam[l]));
}

double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

void check_schedule(const std::vector<double>& schedule) {
    if (schedule.empty()) throw PreconditionError("exhaustion: empty schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1])) throw PreconditionError("exhaustion: schedule must be increasing");
}

int rings_below(const PolarGrid& g, double radius) {
    int n = 0;
    while (n < g.Nr && g.r(n) < radius) ++n;
    return n;
}

// One time loop on B_j; keeps the first `core_rings` rings of every step.
struct LoopResult {
    CauchyRun run;
    std::vector<std::vector<double>> core;
};

LoopResult time_loop(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0, const SpaceTimeFn& gamma,
                     double j, int core_rings, const ParabolicOptions& opts) {
    const int N = step_count(opts.T, opts.dt);
    const PolarGrid g = PolarGrid::with_spacing(j, opts.dr, opts.Ntheta, M.dim);
    const ThetaStepper stepper(M, B, g, opts.dt, opts.theta_s);
    const int stride = std::max(1, opts.stride);
    LoopResult out;
    CauchyRun& run = out.run;
    run.j = j;
    run.field.grid = g;
    std::vector<double> u = blend_initial(u0, gamma, Cutoff{j, g.dr()}, g);
    for (int l = 0; l < g.Ntheta; ++l)
        run.compatibility = std::max(run.compatibility, std::abs(u[g.index(g.Nr - 1, l)] - gamma(g.theta(l), 0.0)));
    std::vector<double> prof(g.Nr, 0.0);
    const std::size_t core_size = static_cast<std::size_t>(std::min(core_rings, g.Nr)) * g.Ntheta;
    auto record = [&](int n, double t) {
        accumulate_profile(prof, g, u, gamma, t);
        run.sup_norm = std::max(run.sup_norm, sup_abs(u));
        if (core_size > 0) out.core.emplace_back(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(core_size));
        if (n % stride == 0 || n == N) {
            run.field.times.push_back(t);
            run.field.snapshots.push_back(u);
        }
    };
    record(0, 0.0);
    for (int n = 0; n < N; ++n) {
        const double t = n * opts.dt;
        u = stepper.step(u, gamma, t);
        record(n + 1, (n + 1) * opts.dt);
    }
    for (int k = 0; k < g.Nr; ++k) {
        run.profile.r.push_back(g.r(k));
        run.profile.value.push_back(prof[k]);
    }
    return out;
}

double norm_on_grid(const SpaceTimeFn& gamma, const PolarGrid& g, double T, int time_samples = 64) {
    double s = 0.0;
    for (int n = 0; n <= time_samples; ++n)
        for (int l = 0; l < g.Ntheta; ++l) s = std::max(s, std::abs(gamma(g.theta(l), T * n / time_samples)));
    return s;
}

}  // namespace

CauchyReport solve_cauchy_exhaustion(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0,
                                     const SpaceTimeFn& gamma, const std::vector<double>& schedule,
                                     const ParabolicOptions& opts) {
    check_schedule(schedule);
    step_count(opts.T, opts.dt);
    CauchyReport rep;
    rep.schedule = schedule;
    rep.core_radius = schedule.front() / 2.0;
    const PolarGrid g0 = PolarGrid::with_spacing(schedule.front(), opts.dr, opts.Ntheta, M.dim);
    const int core_rings = rings_below(g0, rep.core_radius);

    std::vector<LoopResult> loops(schedule.size());
    parallel_for(schedule.size(), opts.threads,
                 [&](std::size_t i) { loops[i] = time_loop(M, B, u0, gamma, schedule[i], core_rings, opts); });

    const PolarGrid gl = loops.back().run.field.grid;
    double norm_u0 = 0.0;
    for (int k = 0; k < gl.Nr; ++k)
        for (int l = 0; l < gl.Ntheta; ++l) norm_u0 = std::max(norm_u0, std::abs(u0(gl.r(k), gl.theta(l))));
    const double C = std::max({B.norm_f, norm_on_grid(gamma, gl, opts.T), norm_u0});
    rep.K_T = C * std::exp((1.0 + B.norm_c) * opts.T);
    for (int l = 0; l < gl.Ntheta; ++l)
        rep.compatibility = std::max(rep.compatibility,
                                     std::abs(u0(gl.r(gl.Nr - 1), gl.theta(l)) - gamma(gl.theta(l), 0.0)));

    for (std::size_t i = 0; i < loops.size(); ++i) {
        if (loops[i].run.sup_norm > rep.K_T + opts.bound_tol) rep.bound_ok = false;
        if (i > 0) {
            double d = 0.0;
            const auto& a = loops[i].core;
            const auto& b = loops[i - 1].core;
            for (std::size_t n = 0; n < a.size(); ++n)
                for (std::size_t q = 0; q < a[n].size(); ++q) d = std::max(d, std::abs(a[n][q] - b[n][q]));
            rep.differences.push_back(d);
        }
        rep.runs.push_back(std::move(loops[i].run));
    }
    return rep;
}

Profile1D attainment_profile_t(const SpaceTimeField& u, const SpaceTimeFn& gamma) {
    const PolarGrid& g = u.grid;
    std::vector<double> prof(g.Nr, 0.0);
    for (std::size_t n = 0; n < u.snapshots.size(); ++n) accumulate_profile(prof, g, u.snapshots[n], gamma, u.times[n]);
    Profile1D p;
    for (int k = 0; k < g.Nr; ++k) {
        p.r.push_back(g.r(k));
        p.value.push_back(prof[k]);
    }
    return p;
}

double gamma_t_oscillation(const SpaceTimeFn& gamma, double delta, double T, int dim, int samples,
                           int time_samples) {
    double worst = 0.0;
    const int sub = 12;
    const double period = dim == 2 ? 2.0 * std::numbers::pi : std::numbers::pi;
    for (int n = 0; n <= time_samples; ++n) {
        const double t0 = T * n / time_samples;
        for (int i = 0; i < samples; ++i) {
            const double th0 = dim == 2 ? period * i / samples : period * (i + 0.5) / samples;
            const double g0 = gamma(th0, t0);
            for (int p = 0; p <= sub; ++p) {
                const double t = std::max(0.0, t0 - delta * p / sub);
                for (int q = -sub; q <= sub; ++q) {
                    double th = th0 + delta * q / sub;
                    if (dim == 3) th = std::clamp(th, 0.0, std::numbers::pi);
                    worst = std::max(worst, std::abs(gamma(th, t) - g0));
                }
            }
        }
    }
    return worst;
}

ParabolicEnvelope parabolic_envelope(const ConeBarrier& cone, const SpaceTimeFn& gamma, double T, double eps,
                                     double K_T, double norm_c, double norm_f, const std::vector<double>& radii) {
    ParabolicEnvelope e;
    e.eps = eps;
    e.K_T = K_T;
    const int m = cone.dim();
    double lo = 0.0, hi = cone.delta_hat;
    if (gamma_t_oscillation(gamma, hi, T, m) < eps) {
        lo = hi;
    } else {
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gamma_t_oscillation(gamma, mid, T, m) < eps ? lo : hi) = mid;
        }
    }
    if (!(lo > 0.0)) throw NumericalError("parabolic_envelope: no delta makes the oscillation of gamma below eps");
    e.delta = lo;
    double norm_gamma = 0.0;
    for (int n = 0; n <= 64; ++n)
        for (int i = 0; i < 360; ++i)
            norm_gamma = std::max(
                norm_gamma, std::abs(gamma((m == 2 ? 2.0 : 1.0) * std::numbers::pi * i / 360, T * n / 64)));
    e.alpha = norm_c;
    e.lambda = (norm_gamma + K_T) / (e.delta * e.delta);
    e.m_eps = cone.m_delta_R(e.delta, cone.R_hat);
    const double K_interior =
        2.0 * e.lambda * T + 2.0 * norm_f + norm_c * (norm_gamma + e.lambda * T * T + 3.0);
    e.K = std::max(K_interior, (norm_gamma + K_T) / e.m_eps);
    for (double r : radii) {
        if (r <= cone.R_hat || r > cone.radial->r_max()) continue;
        e.envelope.r.push_back(r);
        e.envelope.value.push_back(e.K * cone.C_hat * cone.radial->value_at(r) * std::exp(e.alpha * T) + 3.0 * eps);
    }
    return e;
}

UniquenessCurveT uniqueness_probe_t(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0,
                                    const SpaceTimeFn& gamma, const AngularFn& bump,
                                    const std::vector<double>& schedule, const ParabolicOptions& opts) {
    check_schedule(schedule);
    const SpaceTimeFn bumped = [&](double th, double t) { return gamma(th, t) + (t > 0.0 ? bump(th) : 0.0); };
    const std::size_t n = schedule.size();
    std::vector<LoopResult> base(n), pert(n);
    parallel_for(2 * n, opts.threads, [&](std::size_t i) {
        const double j = schedule[i % n];
        const PolarGrid g = PolarGrid::with_spacing(j, opts.dr, opts.Ntheta, M.dim);
        const int rings = rings_below(g, j / 4.0);
        if (i < n)
            base[i] = time_loop(M, B, u0, gamma, j, rings, opts);
        else
            pert[i - n] = time_loop(M, B, u0, bumped, j, rings, opts);
    });
    UniquenessCurveT out;
    const PolarGrid g0 = PolarGrid::with_spacing(schedule.front(), opts.dr, opts.Ntheta, M.dim);
    double eps = 0.0;
    for (int l = 0; l < g0.Ntheta; ++l) eps = std::max(eps, std::abs(bump(g0.theta(l))));
    out.comparison_bound = eps * std::exp(B.norm_c * opts.T);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t s = 0; s < base[i].core.size(); ++s)
            for (std::size_t q = 0; q < base[i].core[s].size(); ++q)
                d = std::max(d, std::abs(base[i].core[s][q] - pert[i].core[s][q]));
        out.j.push_back(schedule[i]);
        out.difference.push_back(d);
        if (d > out.comparison_bound + 1e-10) out.comparison_ok = false;
    }
    return out;
}

HullProbe hull_probe(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& grid, const FieldFn& u0,
                     const SpaceTimeFn& gamma, double T, double dt, double theta_s, int max_halvings) {
    if (B.norm_f != 0.0) throw PreconditionError("hull_probe: requires f = 0");
    for (int k = 0; k < grid.Nr; ++k)
        for (int l = 0; l < grid.Ntheta; ++l)
            if (B.c(grid.r(k), grid.theta(l)) > 0.0) throw PreconditionError("hull_probe: requires c <= 0");
    HullProbe probe;
    const std::vector<double> init = blend_initial(u0, gamma, Cutoff{grid.j, grid.dr()}, grid);
    for (int h = 0; h <= max_halvings; ++h) {
        const int N = step_count(T, dt);
        double lo = 0.0, hi = 0.0;
        for (double v : init) lo = std::min(lo, v), hi = std::max(hi, v);
        for (int n = 0; n <= N; ++n)
            for (int l = 0; l < grid.Ntheta; ++l) {
                const double gv = gamma(grid.theta(l), n * dt);
                lo = std::min(lo, gv);
                hi = std::max(hi, gv);
            }
        const ThetaStepper stepper(M, B, grid, dt, theta_s);
        std::vector<double> u = init;
        double worst = 0.0;
        for (int n = 0; n < N; ++n) {
            u = stepper.step(u, gamma, n * dt);
            for (double v : u) worst = std::max({worst, v - hi, lo - v});
        }
        probe.attempts_dt.push_back(dt);
        probe.violations.push_back(worst);
        if (worst <= 1e-10) {
            probe.passed = true;
            probe.dt = dt;
            probe.halvings = h;
            return probe;
        }
        dt *= 0.5;
    }
    probe.dt = dt * 2.0;
    probe.halvings = max_halvings;
    return probe;
}

std::vector<std::vector<double>> mode_oracle_t(const ModelManifold& M, const RadialCoefficients& co, int k,
                                               const std::function<double(double)>& g,
                                               const std::function<double(double)>& y0, const PolarGrid& grid,
                                               const std::vector<double>& times, const ModeOracleOptions& opts) {
    if (M.dim != 2 || grid.dim != 2) throw PreconditionError("mode_oracle_t: m = 2 only");
    if (k < 0) throw PreconditionError("mode_oracle_t: mode must be non-negative");
    if (opts.refine < 1 || opts.refine % 2 == 0) throw PreconditionError("mode_oracle_t: refine must be odd");
    if (!(opts.max_substep > 0.0)) throw PreconditionError("mode_oracle_t: max_substep must be positive");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
            throw PreconditionError("mode_oracle_t: times must be non-negative and sorted");

    // state [y; G; G'; 1]: y' = J y + b G + f, G' = G', G'' = 0
    const int N = grid.Nr * opts.refine;
    const int n = N + 3;
    const double h = grid.j / N;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const double parity = k % 2 == 0 ? 1.0 : -1.0;
    for (int i = 0; i < N; ++i) {
        const double r = (i + 0.5) * h;
        const double av = co.a(r);
        const double D = M.profile.ratio1(r);
        const double w = std::exp(-2.0 * M.profile.log_psi(r));
        const double up = av * (1.0 / (h * h) + D / (2.0 * h));
        const double dn = av * (1.0 / (h * h) - D / (2.0 * h));
        A(i, i) += -2.0 * av / (h * h) - av * k * k * w + co.c(r);
        if (i + 1 < N) {
            A(i, i + 1) += up;
        } else {
            A(i, i) -= up;
            A(i, N) = 2.0 * up;
        }
        if (i > 0)
            A(i, i - 1) += dn;
        else
            A(i, i) += parity * dn;
        if (k == 0) A(i, N + 2) = co.f(r);
    }
    A(N, N + 1) = 1.0;

    std::map<double, Eigen::MatrixXd> propagators;
    auto propagator = [&](double dt) -> const Eigen::MatrixXd& {
        auto it = propagators.find(dt);
        if (it == propagators.end()) it = propagators.emplace(dt, Eigen::MatrixXd((A * dt).exp())).first;
        return it->second;
    };

    Eigen::VectorXd y(N);
    for (int i = 0; i < N; ++i) y[i] = y0((i + 0.5) * h);
    std::vector<std::vector<double>> out;
    auto observe = [&] {
        std::vector<double> v(grid.Nr);
        for (int kk = 0; kk < grid.Nr; ++kk) v[kk] = y[kk * opts.refine + opts.refine / 2];
        out.push_back(std::move(v));
    };
    double t = 0.0;
    for (double target : times) {
        const double span = target - t;
        const int steps = span > 0.0 ? static_cast<int>(std::ceil(span / opts.max_substep - 1e-9)) : 0;
        for (int s = 0; s < steps; ++s) {
            const double t0 = t + span * s / steps;
            const double t1 = t + span * (s + 1) / steps;
            const double dt = span / steps;
            Eigen::VectorXd z(n);
            z.head(N) = y;
            z[N] = g(t0);
            z[N + 1] = (g(t1) - g(t0)) / dt;
            z[N + 2] = 1.0;
            y = (propagator(dt) * z).head(N);
        }
        t = target;
        observe();
    }
    return out;
}

LongtimeReport experiment_longtime(const ModelManifold& M, const CoefficientBundle& B, const FieldFn& u0,
                                   const SpaceTimeFn& gamma, const AngularFn& gamma_inf, double j,
                                   const ParabolicOptions& opts) {
    CoefficientBundle steady = B;
    const FieldFn f = B.f;
    steady.f = [f](double r, double th) { return -f(r, th); };
    const PolarGrid g = PolarGrid::with_spacing(j, opts.dr, opts.Ntheta, M.dim);
    const DiscreteField u_inf = solve_ball(assemble(M, steady, g, gamma_inf));

    const int N = step_count(opts.T, opts.dt);
    const ThetaStepper stepper(M, B, g, opts.dt, opts.theta_s);
    std::vector<double> u = blend_initial(u0, gamma, Cutoff{j, g.dr()}, g);
    LongtimeReport rep;
    auto record = [&](double t) {
        double d = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - u_inf.values[i]));
        rep.t.push_back(t);
        rep.distance.push_back(d);
    };
    const int stride = std::max(1, opts.stride);
    record(0.0);
    for (int n = 0; n < N; ++n) {
        u = stepper.step(u, gamma, n * opts.dt);
        if ((n + 1) % stride == 0 || n + 1 == N) record((n + 1) * opts.dt);
    }
    return rep;
}

std::string spacetime_csv(const SpaceTimeField& u, int stride) {
    CsvWriter w({"t", "r", "theta", "value"});
    const PolarGrid& g = u.grid;
    stride = std::max(1, stride);
    for (std::size_t n = 0; n < u.snapshots.size(); ++n) {
        if (n % stride != 0 && n + 1 != u.snapshots.size()) continue;
        for (int k = 0; k < g.Nr; ++k)
            for (int l = 0; l < g.Ntheta; ++l)
                w.row(std::vector<double>{u.times[n], g.r(k), g.theta(l), u.snapshots[n][g.index(k, l)]});
    }
    return w.str();
}

}  // namespace dinf
