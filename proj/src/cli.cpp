#include "dinf/cli.hpp"

#include "dinf/barriers.hpp"
#include "dinf/csv.hpp"
#include "dinf/elliptic.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

namespace dinf {

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s = {"check",          "barrier",           "solve-elliptic",
                                               "solve-parabolic", "oracle-compare",    "reproduce-examples",
                                               "experiment-longtime"};
    return s;
}

SampleGrid sample_grid_from_config(const RunConfig& cfg) {
    SampleGrid g;
    g.r_max = cfg.r_max;
    g.per_decade = cfg.per_decade;
    g.n_theta = cfg.n_theta;
    g.dim = cfg.dim;
    return g;
}

CoefficientBundle bundle_from_config(const RunConfig& cfg, const ModelManifold& M, const SampleGrid& grid) {
    const Profile psi = M.profile;
    auto field = [psi](const Expr& e) -> FieldFn { return [e, psi](double r, double th) { return e.eval(psi, r, th); }; };
    LogRadialFn log_abar;
    if (!cfg.a_bar.empty()) log_abar = [e = cfg.a_bar, psi](double r) { return e.log_eval(psi, r); };
    return make_bundle(field(cfg.a), field(cfg.c), field(cfg.f), log_abar, cfg.R0, cfg.C0, grid);
}

AngularFn gamma_from_config(const RunConfig& cfg, const ModelManifold& M) {
    return [e = cfg.gamma, psi = M.profile](double th) { return e.eval(psi, 0.0, th); };
}

SpaceTimeFn gamma_t_from_config(const RunConfig& cfg, const ModelManifold& M) {
    const Expr e = cfg.gamma_t.empty() ? cfg.gamma : cfg.gamma_t;
    return [e, psi = M.profile](double th, double t) { return e.eval(psi, 0.0, th, t); };
}

bool decreasing_above_floor(const std::vector<double>& v, double floor) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]) && std::max(v[i], v[i - 1]) > floor) return false;
    return true;
}

std::vector<double> profile_tail(const Profile1D& p, double r_from) {
    std::vector<double> out;
    for (std::size_t i = 0; i < p.r.size(); ++i)
        if (p.r[i] >= r_from) out.push_back(p.value[i]);
    return out;
}

bool VerdictTable::matches_expected() const {
    for (const auto& row : rows)
        if (row.joint != row.expected) return false;
    return !rows.empty();
}

std::string VerdictTable::csv() const {
    CsvWriter w({"example", "profile", "m", "params", "a_bar", "hp1", "e13", "joint", "expected"});
    for (const auto& r : rows)
        w.row(std::vector<std::string>{std::to_string(r.id), r.profile, std::to_string(r.m), r.params, r.a_bar,
                                       to_string(r.hp1), to_string(r.e13), to_string(r.joint),
                                       to_string(r.expected)});
    return w.str();
}

VerdictTable reproduce_examples(double tol) {
    struct Spec {
        std::string profile;
        std::map<std::string, double> params;
        int m;
        std::string a;
        std::string a_bar;
        Verdict expected;
    };
    const std::vector<Spec> specs = {
        {"exp_power", {{"alpha", 3.0}}, 2, "constant(value=1)", "constant(value=1)", Verdict::Pass},
        {"exp_power", {{"alpha", 1.5}}, 2, "power(shift=1)", "power()", Verdict::Pass},
        {"hyperbolic", {{"alpha", 1.0}}, 2, "psi_power(shift=1)", "psi_power()", Verdict::Pass},
        {"log_power", {{"beta", 3.0}}, 2, "psi_power(shift=1)", "psi_power()", Verdict::Pass},
        {"euclidean", {}, 3, "power(exponent=2)", "power(exponent=2)", Verdict::Fail},
    };
    VerdictTable table;
    int id = 0;
    for (const auto& s : specs) {
        RunConfig cfg;
        cfg.profile = s.profile;
        cfg.profile_params = s.params;
        cfg.dim = s.m;
        cfg.a = parse_expr(s.a);
        cfg.a_bar = parse_expr(s.a_bar);
        cfg.C0 = 1.0;
        const ModelManifold M = cfg.manifold();
        const SampleGrid grid = sample_grid_from_config(cfg);
        const HypothesisReport rep = joint_feasibility(M, bundle_from_config(cfg, M, grid), grid, tol);
        VerdictRow row;
        row.id = ++id;
        row.profile = s.profile;
        row.m = s.m;
        row.params = fmt_params(M.profile.params());
        row.a_bar = cfg.a_bar.canonical();
        row.hp1 = Verdict::Pass;
        for (Verdict v : {rep.hp1_i, rep.hp1_ii_curvature, rep.hp1_ii_first, rep.hp1_ii_double})
            if (v == Verdict::Fail) row.hp1 = Verdict::Fail;
        row.e13 = rep.e13;
        row.joint = rep.joint;
        row.expected = s.expected;
        table.rows.push_back(row);
    }
    return table;
}

namespace {

class Session {
public:
    Session(const RunConfig& cfg, const RunOptions& opts, std::ostream& out)
        : cfg_(cfg), opts_(opts), out_(out), dir_(opts.out_dir.empty() ? cfg.out_dir : opts.out_dir) {
        const char* nc = std::getenv("AD_NO_COLOR");
        color_ = opts.color && !(nc && *nc);
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& text) {
        const std::filesystem::path p = dir_ / name;
        std::ofstream f(p, std::ios::binary);
        f << text;
        if (!f) throw std::ios_base::failure("cannot write " + p.string());
        artifacts_.push_back(name);
    }

    void check(const std::string& what, bool ok, const std::string& detail = "") {
        if (!ok) failed_ = true;
        const std::string tag = ok ? "PASS" : "FAIL";
        const std::string styled = color_ ? (ok ? "\033[32m" : "\033[31m") + tag + "\033[0m" : tag;
        out_ << styled << "  " << what << (detail.empty() ? "" : "  (" + detail + ")") << "\n";
    }

    void note(const std::string& s) { out_ << "  " << s << "\n"; }
    bool failed() const { return failed_; }
    const std::vector<std::string>& artifacts() const { return artifacts_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    const RunConfig& cfg_;
    const RunOptions& opts_;
    std::ostream& out_;
    std::filesystem::path dir_;
    bool color_ = true;
    bool failed_ = false;
    std::vector<std::string> artifacts_;
};

std::string exhaustion_csv(const ExhaustionReport& rep) {
    CsvWriter w({"j", "sup_norm", "core_difference"});
    for (std::size_t i = 0; i < rep.schedule.size(); ++i)
        w.row(std::vector<std::string>{fmt_double(rep.schedule[i]), fmt_double(rep.sup_norms[i]),
                                       i == 0 ? "" : fmt_double(rep.differences[i - 1])});
    return w.str();
}

std::string profile_csv(const Profile1D& p) {
    CsvWriter w({"r", "value"});
    for (std::size_t i = 0; i < p.r.size(); ++i) w.row(std::vector<double>{p.r[i], p.value[i]});
    return w.str();
}

double sup_gamma(const AngularFn& gamma, const PolarGrid& g) {
    double s = 0.0;
    for (int l = 0; l < g.Ntheta; ++l) s = std::max(s, std::abs(gamma(g.theta(l))));
    return s;
}

SpherePoint axis(const RunConfig& cfg) {
    return cfg.dim == 2 ? SpherePoint{std::numbers::pi / 2.0, cfg.theta0} : SpherePoint{cfg.theta0, 0.0};
}

void cmd_check(Session& s, const RunConfig& cfg) {
    const ModelManifold M = cfg.manifold();
    const SampleGrid grid = sample_grid_from_config(cfg);
    const HypothesisReport rep = joint_feasibility(M, bundle_from_config(cfg, M, grid), grid, cfg.tol);
    std::string csv = verdict_csv_header() + "\n";
    for (const auto& row : verdict_csv_rows(M, rep)) csv += row + "\n";
    s.write("verdicts.csv", csv);
    s.note("joint verdict: " + to_string(rep.joint));
    for (const auto& n : rep.notes) s.note(n);
}

void cmd_barrier(Session& s, const RunConfig& cfg) {
    const ModelManifold M = cfg.manifold();
    const SampleGrid grid = sample_grid_from_config(cfg);
    const CoefficientBundle B = bundle_from_config(cfg, M, grid);
    BarrierOptions bo;
    bo.r_max = cfg.r_max;
    bo.per_decade = cfg.per_decade;
    bo.tol = cfg.tol;
    const RadialBarrier V = build_V(M, B, grid, bo);
    const VerificationRecord rec = verify_V(V, B, grid);
    s.write("barrier.csv", barrier_csv(V, B, grid));
    s.write("violations.csv", violations_csv(rec));
    s.note("H = " + fmt_double(V.H) + ", V(0) = " + fmt_double(V.V.front()) + ", V(r_max) = " + fmt_double(V.V.back()));
    s.check("radial barrier V", rec.passed, std::to_string(rec.violations.size()) + " violations");
    const ConeBarrier cone = build_cone_barrier(V, axis(cfg), cfg.C0);
    const VerificationRecord crec = verify_cone_barrier(cone, B);
    s.write("cone_violations.csv", violations_csv(crec));
    s.note("cone: C_hat = " + fmt_double(cone.C_hat) + ", R_hat = " + fmt_double(cone.R_hat) +
           ", delta_hat = " + fmt_double(cone.delta_hat));
    s.check("cone barrier h", crec.passed, std::to_string(crec.violations.size()) + " violations");
}

void cmd_solve_elliptic(Session& s, const RunConfig& cfg, const std::vector<double>& schedule, int threads) {
    const ModelManifold M = cfg.manifold();
    const SampleGrid grid = sample_grid_from_config(cfg);
    const CoefficientBundle B = bundle_from_config(cfg, M, grid);
    const AngularFn gamma = gamma_from_config(cfg, M);
    ExhaustionOptions eo;
    eo.dr = cfg.dr;
    eo.Ntheta = cfg.Ntheta;
    eo.threads = threads;
    std::unique_ptr<RadialBarrier> V;
    if (B.norm_f != 0.0 || cfg.assert_attainment) {
        BarrierOptions bo;
        bo.r_max = cfg.r_max;
        bo.per_decade = cfg.per_decade;
        bo.tol = cfg.tol;
        V = std::make_unique<RadialBarrier>(build_V(M, B, grid, bo));
        eo.H = V->H;
        eo.have_H = true;
    }
    const ExhaustionReport rep = exhaustion_solve(M, B, gamma, schedule, eo);
    s.write("field.csv", field_csv(rep.solutions.back()));
    s.write("exhaustion.csv", exhaustion_csv(rep));
    s.write("profile.csv", profile_csv(rep.profile));
    if (rep.bound_checked) s.check("a-priori bound |u_j| <= " + fmt_double(rep.bound), rep.bound_ok);

    if (B.norm_f == 0.0) {
        bool hull = true;
        for (const auto& u : rep.solutions) {
            double lo = 0.0, hi = 0.0;
            for (int l = 0; l < u.grid.Ntheta; ++l) {
                lo = std::min(lo, gamma(u.grid.theta(l)));
                hi = std::max(hi, gamma(u.grid.theta(l)));
            }
            for (double v : u.values) hull = hull && v <= hi + 1e-10 && v >= lo - 1e-10;
        }
        s.check("discrete maximum principle", hull);
    }
    if (cfg.assert_attainment) {
        const HypothesisReport hyp = joint_feasibility(M, B, grid, 1e-8);
        s.check("bundle admissible", hyp.joint == Verdict::Pass);
        const double floor = 1e-10 * std::max(1.0, sup_gamma(gamma, rep.solutions.back().grid));
        s.check("core differences decreasing", decreasing_above_floor(rep.differences, floor));
        const double jmax = schedule.back();
        s.check("attainment profile decreasing on the outer half",
                decreasing_above_floor(profile_tail(rep.profile, jmax / 2.0), floor));
        const ConeBarrier cone = build_cone_barrier(*V, axis(cfg), cfg.C0);
        const ConeEnvelope env = cone_envelope(cone, gamma, cfg.eps, rep.bound_checked ? rep.bound : 0.0, B.norm_c,
                                               B.norm_f, rep.profile.r);
        s.write("envelope.csv", profile_csv(env.envelope));
        bool under = true;
        for (std::size_t i = 0; i < env.envelope.r.size(); ++i) {
            const auto it = std::find(rep.profile.r.begin(), rep.profile.r.end(), env.envelope.r[i]);
            if (it != rep.profile.r.end() && env.envelope.r[i] >= jmax / 2.0)
                under = under && rep.profile.value[it - rep.profile.r.begin()] <= env.envelope.value[i];
        }
        s.check("profile under the cone envelope on the outer half", under);
    }
}

void cmd_solve_parabolic(Session& s, const RunConfig& cfg, const std::vector<double>& schedule, int threads) {
    const ModelManifold M = cfg.manifold();
    const SampleGrid grid = sample_grid_from_config(cfg);
    const CoefficientBundle B = bundle_from_config(cfg, M, grid);
    const SpaceTimeFn gamma = gamma_t_from_config(cfg, M);
    const FieldFn u0 = [e = cfg.u0, psi = M.profile](double r, double th) { return e.eval(psi, r, th); };
    ParabolicOptions po;
    po.dr = cfg.dr;
    po.Ntheta = cfg.Ntheta;
    po.dt = cfg.dt;
    po.T = cfg.T;
    po.theta_s = cfg.scheme == "ie" ? 1.0 : 0.5;
    po.stride = cfg.stride;
    po.threads = threads;
    const CauchyReport rep = solve_cauchy_exhaustion(M, B, u0, gamma, schedule, po);
    s.write("spacetime.csv", spacetime_csv(rep.runs.back().field));
    s.write("profile_t.csv", profile_csv(rep.runs.back().profile));
    CsvWriter w({"j", "sup_norm", "core_difference", "K_T"});
    for (std::size_t i = 0; i < rep.runs.size(); ++i)
        w.row(std::vector<std::string>{fmt_double(rep.runs[i].j), fmt_double(rep.runs[i].sup_norm),
                                       i == 0 ? "" : fmt_double(rep.differences[i - 1]), fmt_double(rep.K_T)});
    s.write("exhaustion_t.csv", w.str());
    s.note("compatibility sup|u0 - gamma(., 0)| at the outer radius: " + fmt_double(rep.compatibility));
    s.check("bound |u_j| <= K_T = " + fmt_double(rep.K_T), rep.bound_ok);
    if (cfg.assert_attainment) {
        s.check("compatibility below 1e-3", rep.compatibility <= 1e-3);
        s.check("space-time profile decreasing on the outer half",
                decreasing_above_floor(profile_tail(rep.runs.back().profile, schedule.back() / 2.0), 1e-10));
    }
}

void cmd_oracle_compare(Session& s, const RunConfig& cfg) {
    const ModelManifold M = cfg.manifold();
    if (M.dim != 2) throw PreconditionError("oracle-compare: m = 2 only");
    for (const Expr* e : {&cfg.a, &cfg.c, &cfg.f})
        if (e->vars() & VarTheta) throw PreconditionError("oracle-compare: coefficients must be radial");
    const SampleGrid grid = sample_grid_from_config(cfg);
    const CoefficientBundle B = bundle_from_config(cfg, M, grid);
    const AngularFn gamma = gamma_from_config(cfg, M);
    const Profile psi = M.profile;
    const RadialCoefficients co{[e = cfg.a, psi](double r) { return e.eval(psi, r, 0.0); },
                                [e = cfg.c, psi](double r) { return e.eval(psi, r, 0.0); },
                                [e = cfg.f, psi](double r) { return e.eval(psi, r, 0.0); }};
    CsvWriter w({"Nr", "Ntheta", "sup_difference", "order"});
    std::vector<double> errs;
    for (int n : cfg.levels) {
        const PolarGrid g = PolarGrid::make(cfg.j, n, n);
        const DiscreteField u = solve_ball(assemble(M, B, g, gamma));
        const DiscreteField o = fourier_oracle(M, co, gamma, cfg.modes, g);
        double e = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) e = std::max(e, std::abs(u.values[i] - o.values[i]));
        const std::string order = errs.empty() ? "" : fmt_double(std::log2(errs.back() / e));
        errs.push_back(e);
        w.row(std::vector<std::string>{std::to_string(n), std::to_string(n), fmt_double(e), order});
    }
    s.write("oracle.csv", w.str());
    s.check("solver/oracle difference decreasing under refinement", decreasing_above_floor(errs, 0.0));
}

void cmd_reproduce(Session& s, const RunConfig& cfg) {
    const VerdictTable t = reproduce_examples(std::max(cfg.tol, 1e-8));
    s.write("examples.csv", t.csv());
    for (const auto& r : t.rows)
        s.note(std::to_string(r.id) + " " + r.profile + " m=" + std::to_string(r.m) + " a_bar=" + r.a_bar +
               ": joint " + to_string(r.joint));
    s.check("example table matches the analytic classification", t.matches_expected());
}

void cmd_longtime(Session& s, const RunConfig& cfg) {
    if (cfg.gamma_t.empty()) throw PreconditionError("experiment-longtime: boundary.gamma_t is required");
    const ModelManifold M = cfg.manifold();
    const SampleGrid grid = sample_grid_from_config(cfg);
    const CoefficientBundle B = bundle_from_config(cfg, M, grid);
    const FieldFn u0 = [e = cfg.u0, psi = M.profile](double r, double th) { return e.eval(psi, r, th); };
    ParabolicOptions po;
    po.dr = cfg.dr;
    po.Ntheta = cfg.Ntheta;
    po.dt = cfg.dt;
    po.T = cfg.T;
    po.theta_s = cfg.scheme == "ie" ? 1.0 : 0.5;
    po.stride = cfg.stride;
    const LongtimeReport rep =
        experiment_longtime(M, B, u0, gamma_t_from_config(cfg, M), gamma_from_config(cfg, M), cfg.j, po);
    CsvWriter w({"t", "distance_to_steady_state"});
    for (std::size_t i = 0; i < rep.t.size(); ++i) w.row(std::vector<double>{rep.t[i], rep.distance[i]});
    s.write("longtime.csv", w.str());
    s.note("final distance to the steady state: " + fmt_double(rep.distance.back()));
}

std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg_in, const RunOptions& opts, std::ostream& out,
        std::ostream& err) {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
        err << "unknown subcommand '" << subcommand << "'\n";
        return ExitUsage;
    }
    RunConfig cfg = cfg_in;
    if (opts.tol) cfg.tol = *opts.tol;
    if (opts.schedule) cfg.schedule = *opts.schedule;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    int threads = opts.threads;
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const auto t0 = std::chrono::steady_clock::now();
    int code = ExitOk;
    std::string error;
    std::unique_ptr<Session> s;
    try {
        s = std::make_unique<Session>(cfg, opts, out);
        const std::string canonical = serialize_config(cfg);
        s->write("config.conf", canonical);
        if (subcommand == "check") cmd_check(*s, cfg);
        if (subcommand == "barrier") cmd_barrier(*s, cfg);
        if (subcommand == "solve-elliptic") cmd_solve_elliptic(*s, cfg, cfg.schedule, threads);
        if (subcommand == "solve-parabolic") cmd_solve_parabolic(*s, cfg, cfg.schedule, threads);
        if (subcommand == "oracle-compare") cmd_oracle_compare(*s, cfg);
        if (subcommand == "reproduce-examples") cmd_reproduce(*s, cfg);
        if (subcommand == "experiment-longtime") cmd_longtime(*s, cfg);
        if (s->failed()) code = ExitAssertion;
    } catch (const ConfigError& e) {
        code = ExitUsage;
        error = e.what();
    } catch (const PreconditionError& e) {
        code = ExitPrecondition;
        error = std::string("precondition error: ") + e.what();
    } catch (const NumericalError& e) {
        code = ExitNumerical;
        error = std::string("numerical error: ") + e.what();
    } catch (const std::ios_base::failure& e) {
        code = ExitIo;
        error = std::string("i/o error: ") + e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        code = ExitIo;
        error = std::string("i/o error: ") + e.what();
    }
    if (!error.empty()) err << error << "\n";
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    if (s) {
        std::ostringstream m;
        m << "subcommand = " << subcommand << "\n"
          << "config_path = " << opts.config_path << "\n"
          << "config_hash = fnv1a64:" << hex64(fnv1a64(serialize_config(cfg))) << "\n"
          << "version = dinf 1.0.0\n"
          << "eigen = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n"
          << "boost = " << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << "." << BOOST_VERSION % 100
          << "\n"
          << "compiler = " << __VERSION__ << "\n"
          << "threads = " << threads << "\n"
          << "wall_ms = " << ms << "\n"
          << "exit_code = " << code << "\n";
        if (!error.empty()) m << "error = " << error << "\n";
        std::string arts;
        for (const auto& a : s->artifacts()) arts += (arts.empty() ? "" : ",") + a;
        m << "artifacts = " << arts << "\n";
        std::ofstream f(s->dir() / "manifest.txt", std::ios::binary);
        f << m.str();
        if (!f && code == ExitOk) code = ExitIo;
    }
    return code;
}

}  // namespace dinf
