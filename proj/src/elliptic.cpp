#include "dinf/elliptic.hpp"

#include "dinf/csv.hpp"
#include "dinf/parallel.hpp"

#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dinf {

PolarGrid PolarGrid::make(double j, int Nr, int Ntheta, int dim) {
    if (!(j > 0.0)) throw PreconditionError("PolarGrid: ball radius must be positive");
    if (Nr < 2) throw PreconditionError("PolarGrid: need at least two radial cells");
    if (dim != 2 && dim != 3) throw PreconditionError("PolarGrid: dimension must be 2 or 3");
    if (dim == 2 && (Ntheta < 4 || Ntheta % 2 != 0))
        throw PreconditionError("PolarGrid: Ntheta must be even (pole closure pairs theta with theta + pi)");
    if (dim == 3 && Ntheta < 2) throw PreconditionError("PolarGrid: need at least two colatitude cells");
    return PolarGrid{j, Nr, Ntheta, dim};
}

PolarGrid PolarGrid::with_spacing(double j, double dr, int Ntheta, int dim) {
    const double n = j / dr;
    const long Nr = std::lround(n);
    if (std::abs(n - Nr) > 1e-9 * n) throw PreconditionError("PolarGrid: j/dr must be an integer");
    return make(j, static_cast<int>(Nr), Ntheta, dim);
}

double PolarGrid::dtheta() const { return dim == 2 ? 2.0 * std::numbers::pi / Ntheta : std::numbers::pi / Ntheta; }

double PolarGrid::theta(int l) const { return dim == 2 ? l * dtheta() : (l + 0.5) * dtheta(); }

int PolarGrid::antipode(int l) const { return dim == 2 ? (l + Ntheta / 2) % Ntheta : Ntheta - 1 - l; }

double DiscreteField::sup_norm() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
}

DiscreteOperator discretize(const ModelManifold& M, const FieldFn& a, const FieldFn& c, const PolarGrid& g) {
    if (M.dim != g.dim) throw PreconditionError("discretize: grid and manifold dimensions differ");
    const int k_m = M.dim - 1;
    const double dr = g.dr();
    const double dth = g.dtheta();
    DiscreteOperator op;
    op.grid = g;
    op.boundary_weight.assign(g.Ntheta, 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 5);

    for (int k = 0; k < g.Nr; ++k) {
        const double r = g.r(k);
        const double D = k_m * M.profile.ratio1(r);
        const double rho = 0.5 * D * dr;
        const double sigma = std::max(1.0, std::abs(rho));
        const double cp = sigma / (dr * dr) + D / (2.0 * dr);
        const double cm = sigma / (dr * dr) - D / (2.0 * dr);
        const double ang = std::exp(-2.0 * M.profile.log_psi(r));
        for (int l = 0; l < g.Ntheta; ++l) {
            const double th = g.theta(l);
            const double av = a(r, th);
            const double cv = c(r, th);
            if (!(av > 0.0)) throw PreconditionError("assemble: a must be positive (r=" + fmt_double(r) + ")");
            if (!std::isfinite(cv)) throw PreconditionError("assemble: c must be finite");
            const std::size_t row = g.index(k, l);
            double diag = cv;

            // radial neighbours
            if (k + 1 < g.Nr) {
                trip.emplace_back(row, g.index(k + 1, l), av * cp);
                diag -= av * cp;
            } else {
                // ghost u_{Nr} = 2 gamma - u_{Nr-1}
                op.boundary_weight[l] = 2.0 * av * cp;
                diag -= 2.0 * av * cp;
            }
            const std::size_t down = k > 0 ? g.index(k - 1, l) : g.index(0, g.antipode(l));
            if (av * cm != 0.0) trip.emplace_back(row, down, av * cm);
            diag -= av * cm;

            // angular neighbours
            if (g.dim == 2) {
                const double w = av * ang / (dth * dth);
                trip.emplace_back(row, g.index(k, (l + 1) % g.Ntheta), w);
                trip.emplace_back(row, g.index(k, (l + g.Ntheta - 1) % g.Ntheta), w);
                diag -= 2.0 * w;
            } else {
                const double s = std::sin(th) * dth * dth;
                const double sp = std::sin((l + 1) * dth);
                const double sm = std::sin(l * dth);
                if (l + 1 < g.Ntheta) {
                    const double w = av * ang * sp / s;
                    trip.emplace_back(row, g.index(k, l + 1), w);
                    diag -= w;
                }
                if (l > 0) {
                    const double w = av * ang * sm / s;
                    trip.emplace_back(row, g.index(k, l - 1), w);
                    diag -= w;
                }
            }
            trip.emplace_back(row, row, diag);
        }
    }
    op.L.resize(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    op.L.setFromTriplets(trip.begin(), trip.end());
    op.L.makeCompressed();
    return op;
}

LinearSystem assemble(const ModelManifold& M, const CoefficientBundle& B, const PolarGrid& g,
                      const AngularFn& gamma) {
    for (int k = 0; k < g.Nr; ++k)
        for (int l = 0; l < g.Ntheta; ++l)
            if (B.c(g.r(k), g.theta(l)) > 0.0)
                throw PreconditionError("assemble: c must be non-positive (r=" + fmt_double(g.r(k)) + ")");
    DiscreteOperator op = discretize(M, B.a, B.c, g);
    LinearSystem sys;
    sys.grid = g;
    sys.A = -op.L;
    sys.b.resize(static_cast<Eigen::Index>(g.size()));
    for (int k = 0; k < g.Nr; ++k)
        for (int l = 0; l < g.Ntheta; ++l) sys.b[g.index(k, l)] = -B.f(g.r(k), g.theta(l));
    for (int l = 0; l < g.Ntheta; ++l) sys.b[g.index(g.Nr - 1, l)] += op.boundary_weight[l] * gamma(g.theta(l));
    return sys;
}

MMatrixReport check_m_matrix(const SparseMatrix& A) {
    MMatrixReport rep;
    rep.min_diagonal = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < A.outerSize(); ++i) {
        double diag = 0.0, off = 0.0;
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
            if (it.col() == i) {
                diag += it.value();
            } else {
                if (it.value() > 0.0) ++rep.sign_violations;
                off += std::abs(it.value());
            }
        }
        rep.min_diagonal = std::min(rep.min_diagonal, diag);
        const double slack = 1e-12 * std::max(diag, off);
        if (diag < off - slack) ++rep.dominance_violations;
        if (diag > off + slack) ++rep.strictly_dominant_rows;
    }
    rep.ok = rep.sign_violations == 0 && rep.dominance_violations == 0 && rep.strictly_dominant_rows > 0 &&
             rep.min_diagonal > 0.0;
    return rep;
}

Eigen::VectorXd row_sums(const SparseMatrix& A) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(A.rows());
    for (Eigen::Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) s[i] += it.value();
    return s;
}

DiscreteField solve_ball(const LinearSystem& sys, SolveInfo* info) {
    const Eigen::SparseMatrix<double> A = sys.A;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw NumericalError("solve_ball: sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(sys.b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("solve_ball: sparse LU solve failed");
    const double bn = sys.b.norm();
    double rel = (A * x - sys.b).norm() / (bn > 0.0 ? bn : 1.0);
    if (rel > 1e-10) {
        // one step of iterative refinement
        x += lu.solve(sys.b - A * x);
        rel = (A * x - sys.b).norm() / (bn > 0.0 ? bn : 1.0);
    }
    if (info) info->relative_residual = rel;
    if (!(rel <= 1e-10)) throw NumericalError("solve_ball: relative residual " + fmt_double(rel) + " exceeds 1e-10");
    return DiscreteField{sys.grid, std::vector<double>(x.data(), x.data() + x.size())};
}

Profile1D attainment_profile(const DiscreteField& u, const AngularFn& gamma) {
    const PolarGrid& g = u.grid;
    Profile1D p;
    std::vector<double> gam(g.Ntheta);
    for (int l = 0; l < g.Ntheta; ++l) gam[l] = gamma(g.theta(l));
    for (int k = 0; k < g.Nr; ++k) {
        double s = 0.0;
        for (int l = 0; l < g.Ntheta; ++l) s = std::max(s, std::abs(u.at(k, l) - gam[l]));
        p.r.push_back(g.r(k));
        p.value.push_back(s);
    }
    return p;
}

double core_difference(const DiscreteField& u, const DiscreteField& v, double radius) {
    if (u.grid.Ntheta != v.grid.Ntheta || std::abs(u.grid.dr() - v.grid.dr()) > 1e-12 * u.grid.dr())
        throw PreconditionError("core_difference: grids do not nest (dr and Ntheta must agree)");
    double s = 0.0;
    const int n = std::min(u.grid.Nr, v.grid.Nr);
    for (int k = 0; k < n && u.grid.r(k) < radius; ++k)
        for (int l = 0; l < u.grid.Ntheta; ++l) s = std::max(s, std::abs(u.at(k, l) - v.at(k, l)));
    return s;
}

namespace {

std::vector<DiscreteField> solve_schedule(const ModelManifold& M, const CoefficientBundle& B, const AngularFn& gamma,
                                          const std::vector<double>& schedule, const ExhaustionOptions& opts) {
    std::vector<DiscreteField> out(schedule.size());
    parallel_for(schedule.size(), opts.threads, [&](std::size_t i) {
        const PolarGrid g = PolarGrid::with_spacing(schedule[i], opts.dr, opts.Ntheta, M.dim);
        out[i] = solve_ball(assemble(M, B, g, gamma));
    });
    return out;
}

void check_schedule(const std::vector<double>& schedule) {
    if (schedule.empty()) throw PreconditionError("exhaustion: empty schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1])) throw PreconditionError("exhaustion: schedule must be increasing");
}

}  // namespace

ExhaustionReport exhaustion_solve(const ModelManifold& M, const CoefficientBundle& B, const AngularFn& gamma,
                                  const std::vector<double>& schedule, const ExhaustionOptions& opts) {
    check_schedule(schedule);
    ExhaustionReport rep;
    rep.schedule = schedule;
    rep.core_radius = schedule.front() / 2.0;
    rep.solutions = solve_schedule(M, B, gamma, schedule, opts);

    const PolarGrid& g0 = rep.solutions.front().grid;
    double norm_gamma = 0.0;
    for (int l = 0; l < g0.Ntheta; ++l) norm_gamma = std::max(norm_gamma, std::abs(gamma(g0.theta(l))));
    if (B.norm_f == 0.0) {
        rep.bound = norm_gamma;
        rep.bound_checked = true;
    } else if (opts.have_H) {
        rep.bound = std::max(B.norm_f, norm_gamma) * (1.0 - opts.H);
        rep.bound_checked = true;
    }
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
        rep.sup_norms.push_back(rep.solutions[i].sup_norm());
        if (rep.bound_checked && rep.sup_norms.back() > rep.bound + opts.bound_tol) rep.bound_ok = false;
        if (i > 0) rep.differences.push_back(core_difference(rep.solutions[i], rep.solutions[i - 1], rep.core_radius));
    }
    rep.profile = attainment_profile(rep.solutions.back(), gamma);
    return rep;
}

double gamma_oscillation(const AngularFn& gamma, double delta, int dim, int samples) {
    double worst = 0.0;
    const int sub = 24;
    for (int i = 0; i < samples; ++i) {
        if (dim == 2) {
            const double t0 = 2.0 * std::numbers::pi * i / samples;
            const double g0 = gamma(t0);
            for (int q = -sub; q <= sub; ++q) worst = std::max(worst, std::abs(gamma(t0 + delta * q / sub) - g0));
        } else {
            // axisymmetric data: the colatitude moves by at most the geodesic distance
            const double t0 = std::numbers::pi * (i + 0.5) / samples;
            const double g0 = gamma(t0);
            for (int q = -sub; q <= sub; ++q) {
                const double t = std::clamp(t0 + delta * q / sub, 0.0, std::numbers::pi);
                worst = std::max(worst, std::abs(gamma(t) - g0));
            }
        }
    }
    return worst;
}

ConeEnvelope cone_envelope(const ConeBarrier& cone, const AngularFn& gamma, double eps, double C_tilde,
                           double norm_c, double norm_f, const std::vector<double>& radii) {
    ConeEnvelope e;
    e.eps = eps;
    const int m = cone.dim();
    // largest delta <= delta_hat with oscillation below eps, by bisection on a halving ladder
    double lo = 0.0, hi = cone.delta_hat;
    if (gamma_oscillation(gamma, hi, m) < eps) {
        lo = hi;
    } else {
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gamma_oscillation(gamma, mid, m) < eps ? lo : hi) = mid;
        }
    }
    if (!(lo > 0.0)) throw NumericalError("cone_envelope: no aperture makes the oscillation of gamma below eps");
    e.delta = lo;
    double norm_gamma = 0.0;
    for (int i = 0; i < 720; ++i)
        norm_gamma = std::max(norm_gamma, std::abs(gamma((m == 2 ? 2.0 : 1.0) * std::numbers::pi * i / 720)));
    e.m_delta = cone.m_delta_R(e.delta, cone.R_hat);
    e.K = std::max((norm_gamma + C_tilde) / e.m_delta, norm_c * (norm_gamma + 1.0) + norm_f);
    for (double r : radii) {
        if (r <= cone.R_hat || r > cone.radial->r_max()) continue;
        e.envelope.r.push_back(r);
        e.envelope.value.push_back(e.K * cone.C_hat * cone.radial->value_at(r) + eps);
    }
    return e;
}

UniquenessCurve uniqueness_probe(const ModelManifold& M, const CoefficientBundle& B, const AngularFn& gamma,
                                 const AngularFn& bump, const std::vector<double>& schedule,
                                 const ExhaustionOptions& opts) {
    check_schedule(schedule);
    const AngularFn bumped = [&](double t) { return gamma(t) + bump(t); };
    const auto base = solve_schedule(M, B, gamma, schedule, opts);
    const auto pert = solve_schedule(M, B, bumped, schedule, opts);
    UniquenessCurve out;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        out.j.push_back(schedule[i]);
        out.difference.push_back(core_difference(base[i], pert[i], schedule[i] / 4.0));
    }
    return out;
}

DiscreteField fourier_oracle(const ModelManifold& M, const RadialCoefficients& co, const AngularFn& gamma,
                             int max_mode, const PolarGrid& grid) {
    namespace odeint = boost::numeric::odeint;
    if (M.dim != 2 || grid.dim != 2) throw PreconditionError("fourier_oracle: m = 2 only");
    if (max_mode < 0) throw PreconditionError("fourier_oracle: max_mode must be non-negative");
    using State = std::array<double, 2>;
    const double j = grid.j;
    const double rs = 1e-5 * j;

    // Fourier coefficients of gamma by the trapezoidal rule (exact for band-limited data)
    const int nq = std::max(256, 8 * max_mode + 8);
    std::vector<double> ca(max_mode + 1, 0.0), sa(max_mode + 1, 0.0);
    for (int q = 0; q < nq; ++q) {
        const double t = 2.0 * std::numbers::pi * q / nq;
        const double gv = gamma(t);
        for (int k = 0; k <= max_mode; ++k) {
            ca[k] += gv * std::cos(k * t) * 2.0 / nq;
            sa[k] += gv * std::sin(k * t) * 2.0 / nq;
        }
    }
    ca[0] *= 0.5;

    std::vector<double> times{rs};
    for (int k = 0; k < grid.Nr; ++k) times.push_back(grid.r(k));
    times.push_back(j);

    auto solve_mode = [&](int k, bool forced, State x0) {
        std::vector<double> vals;
        auto rhs = [&](const State& x, State& dx, double r) {
            const double av = co.a(r);
            const double D = M.profile.ratio1(r);
            const double w = std::exp(-2.0 * M.profile.log_psi(r));
            dx[0] = x[1];
            dx[1] = -D * x[1] + (k * k * w - co.c(r) / av) * x[0] + (forced ? co.f(r) / av : 0.0);
        };
        auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
        odeint::integrate_times(stepper, rhs, x0, times.begin(), times.end(), rs * 1e-2,
                                [&](const State& x, double) { vals.push_back(x[0]); });
        return vals;  // vals[0] at rs, vals[1..Nr] at cell centers, vals.back() at j
    };

    std::vector<double> u(grid.size(), 0.0);
    auto add_mode = [&](int k, const std::vector<double>& radial, double coef_cos, double coef_sin) {
        for (int kk = 0; kk < grid.Nr; ++kk)
            for (int l = 0; l < grid.Ntheta; ++l) {
                const double t = grid.theta(l);
                u[grid.index(kk, l)] +=
                    radial[kk + 1] * (coef_cos * std::cos(k * t) + (k > 0 ? coef_sin * std::sin(k * t) : 0.0));
            }
    };

    // k = 0: regular homogeneous solution plus regular particular solution
    const double q0 = co.c(0.0) / co.a(0.0), p0 = co.f(0.0) / co.a(0.0);
    const auto y0 = solve_mode(0, false, State{1.0 - q0 * rs * rs / 4.0, -q0 * rs / 2.0});
    const auto yp = solve_mode(0, true, State{p0 * rs * rs / 4.0, p0 * rs / 2.0});
    const double alpha = (ca[0] - yp.back()) / y0.back();
    std::vector<double> r0(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) r0[i] = yp[i] + alpha * y0[i];
    add_mode(0, r0, 1.0, 0.0);

    for (int k = 1; k <= max_mode; ++k) {
        if (std::abs(ca[k]) < 1e-15 && std::abs(sa[k]) < 1e-15) continue;
        auto y = solve_mode(k, false, State{std::pow(rs, k), k * std::pow(rs, k - 1)});
        const double yj = y.back();
        for (double& v : y) v /= yj;
        add_mode(k, y, ca[k], sa[k]);
    }
    return DiscreteField{grid, u};
}

std::string field_csv(const DiscreteField& u) {
    CsvWriter w({"r", "theta", "value"});
    for (int k = 0; k < u.grid.Nr; ++k)
        for (int l = 0; l < u.grid.Ntheta; ++l) w.row(std::vector<double>{u.grid.r(k), u.grid.theta(l), u.at(k, l)});
    return w.str();
}

}  // namespace dinf
