#include "dinf/config.hpp"

#include "dinf/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>

namespace dinf {

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
          std::string s = "invalid configuration:";
          for (const auto& e : errors) s += "\n  " + e;
          return s;
      }()),
      errors_(std::move(errors)) {}

namespace {

struct CatalogEntry {
    const char* name;
    std::vector<std::pair<std::string, double>> defaults;
    unsigned vars;
};

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"constant", {{"value", 1.0}}, 0u},
        {"power", {{"scale", 1.0}, {"exponent", 1.0}, {"shift", 0.0}}, VarR},
        {"exponential", {{"scale", 1.0}, {"rate", 1.0}}, VarR},
        {"psi_power", {{"scale", 1.0}, {"exponent", 2.0}, {"shift", 0.0}}, VarR},
        {"cos_mode", {{"amplitude", 1.0}, {"k", 1.0}, {"phase", 0.0}}, VarTheta},
        {"sin_mode", {{"amplitude", 1.0}, {"k", 1.0}, {"phase", 0.0}}, VarTheta},
        {"gaussian_bump", {{"center", 0.0}, {"width", 0.25}, {"height", 1.0}}, VarTheta},
        {"arc_bump", {{"center", 0.0}, {"half_width", 0.5}, {"height", 1.0}}, VarTheta},
        {"ramp", {{"rate", 1.0}, {"cap", 1.0}}, VarT},
        {"exp_decay", {{"scale", 1.0}, {"rate", 1.0}}, VarT},
    };
    return entries;
}

const CatalogEntry* find_entry(const std::string& name) {
    for (const auto& e : catalog())
        if (name == e.name) return &e;
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

// Shortest decimal that reads back to the same double.
std::string fmt_short(double x) {
    char buf[40];
    for (int p = 1; p <= 17; ++p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return fmt_double(x);
}

double term_value(const ExprTerm& term, const Profile& psi, double r, double theta, double t) {
    const auto& p = term.params;
    const std::string& n = term.name;
    if (n == "constant") return p.at("value");
    if (n == "power") return p.at("scale") * std::pow(r + p.at("shift"), p.at("exponent"));
    if (n == "exponential") return p.at("scale") * std::exp(p.at("rate") * r);
    if (n == "psi_power") {
        const double base = r > 0.0 ? std::exp(p.at("exponent") * psi.log_psi(r)) : 0.0;
        return p.at("scale") * base + p.at("shift");
    }
    if (n == "cos_mode") return p.at("amplitude") * std::cos(p.at("k") * theta + p.at("phase"));
    if (n == "sin_mode") return p.at("amplitude") * std::sin(p.at("k") * theta + p.at("phase"));
    if (n == "gaussian_bump") {
        const double d = angular_distance(theta, p.at("center"));
        const double w = p.at("width");
        return p.at("height") * std::exp(-d * d / (2.0 * w * w));
    }
    if (n == "arc_bump") {
        const double d = angular_distance(theta, p.at("center"));
        const double hw = p.at("half_width");
        if (d >= hw) return 0.0;
        const double c = std::cos(0.5 * std::numbers::pi * d / hw);
        return p.at("height") * c * c;
    }
    if (n == "ramp") return std::min(p.at("rate") * t, p.at("cap"));
    if (n == "exp_decay") return p.at("scale") * std::exp(-p.at("rate") * t);
    throw PreconditionError("expression: unknown term '" + n + "'");
}

double term_log(const ExprTerm& term, const Profile& psi, double r) {
    const auto& p = term.params;
    const std::string& n = term.name;
    auto need_positive = [&](double v) {
        if (!(v > 0.0)) throw PreconditionError("expression '" + n + "' is not positive at r=" + fmt_double(r));
        return std::log(v);
    };
    if (n == "constant") return need_positive(p.at("value"));
    if (n == "power") return need_positive(p.at("scale")) + p.at("exponent") * need_positive(r + p.at("shift"));
    if (n == "exponential") return need_positive(p.at("scale")) + p.at("rate") * r;
    if (n == "psi_power") {
        const double shift = p.at("shift");
        if (!(r > 0.0)) return need_positive(shift);
        const double L = need_positive(p.at("scale")) + p.at("exponent") * psi.log_psi(r);
        if (shift == 0.0) return L;
        if (shift > 0.0) {
            const double ls = std::log(shift);
            return std::max(L, ls) + std::log1p(std::exp(-std::abs(L - ls)));
        }
        return need_positive(std::exp(L) + shift);
    }
    throw PreconditionError("expression term '" + n + "' is not radial");
}

}  // namespace

unsigned Expr::vars() const {
    unsigned v = 0;
    for (const auto& t : terms) v |= find_entry(t.name)->vars;
    return v;
}

std::string Expr::canonical() const {
    std::string s;
    for (const auto& t : terms) {
        if (!s.empty()) s += " * ";
        s += t.name + "(";
        bool first = true;
        for (const auto& [k, v] : find_entry(t.name)->defaults) {
            if (!first) s += ", ";
            first = false;
            s += k + "=" + fmt_short(t.params.at(k));
        }
        s += ")";
    }
    return s;
}

double Expr::eval(const Profile& psi, double r, double theta, double t) const {
    double v = 1.0;
    for (const auto& term : terms) v *= term_value(term, psi, r, theta, t);
    return v;
}

double Expr::log_eval(const Profile& psi, double r) const {
    double s = 0.0;
    for (const auto& term : terms) s += term_log(term, psi, r);
    return s;
}

std::string expr_catalog_names() {
    std::string s;
    for (const auto& e : catalog()) s += (s.empty() ? "" : ", ") + std::string(e.name);
    return s;
}

Expr parse_expr(const std::string& text) {
    std::vector<std::string> errors;
    Expr expr;
    std::vector<std::string> parts;
    {
        int depth = 0;
        std::string cur;
        for (char ch : text) {
            if (ch == '(') ++depth;
            if (ch == ')') --depth;
            if (ch == '*' && depth == 0) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        parts.push_back(cur);
    }
    for (const auto& raw : parts) {
        const std::string part = trim(raw);
        const auto open = part.find('(');
        const std::string name = trim(part.substr(0, open));
        const CatalogEntry* entry = find_entry(name);
        if (!entry) {
            errors.push_back("unknown expression '" + name + "' (catalog: " + expr_catalog_names() + ")");
            continue;
        }
        ExprTerm term{name, {}};
        for (const auto& [k, v] : entry->defaults) term.params[k] = v;
        if (open != std::string::npos) {
            if (part.back() != ')') {
                errors.push_back("expression '" + part + "': missing ')'");
                continue;
            }
            std::stringstream args(part.substr(open + 1, part.size() - open - 2));
            std::string arg;
            while (std::getline(args, arg, ',')) {
                if (trim(arg).empty()) continue;
                const auto eq = arg.find('=');
                const std::string key = trim(arg.substr(0, eq));
                double value = 0.0;
                if (eq == std::string::npos || !parse_number(arg.substr(eq + 1), value)) {
                    errors.push_back("expression '" + name + "': argument '" + trim(arg) + "' is not key=number");
                } else if (!term.params.count(key)) {
                    std::string allowed;
                    for (const auto& d : entry->defaults) allowed += (allowed.empty() ? "" : ", ") + d.first;
                    errors.push_back("expression '" + name + "' has no parameter '" + key + "' (takes: " + allowed +
                                     ")");
                } else {
                    term.params[key] = value;
                }
            }
        }
        expr.terms.push_back(std::move(term));
    }
    if (!errors.empty()) throw ConfigError(errors);
    return expr;
}

ModelManifold RunConfig::manifold() const { return ModelManifold(dim, profile_catalog(profile, profile_params)); }

namespace {

enum class Kind { String, Number, Integer, Boolean, Expression, OptExpression, NumberList, IntList, Params };

struct Key {
    const char* section;
    const char* name;
    Kind kind;
};

const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        {"manifold", "profile", Kind::String},
        {"manifold", "params", Kind::Params},
        {"manifold", "dim", Kind::Integer},
        {"coefficients", "a", Kind::Expression},
        {"coefficients", "c", Kind::Expression},
        {"coefficients", "f", Kind::Expression},
        {"coefficients", "a_bar", Kind::OptExpression},
        {"coefficients", "R0", Kind::Number},
        {"coefficients", "C0", Kind::Number},
        {"boundary", "gamma", Kind::Expression},
        {"boundary", "gamma_t", Kind::OptExpression},
        {"boundary", "u0", Kind::Expression},
        {"boundary", "bump", Kind::Expression},
        {"numerics", "j", Kind::Number},
        {"numerics", "dr", Kind::Number},
        {"numerics", "Ntheta", Kind::Integer},
        {"numerics", "schedule", Kind::NumberList},
        {"numerics", "levels", Kind::IntList},
        {"numerics", "modes", Kind::Integer},
        {"numerics", "dt", Kind::Number},
        {"numerics", "T", Kind::Number},
        {"numerics", "scheme", Kind::String},
        {"numerics", "stride", Kind::Integer},
        {"numerics", "tol", Kind::Number},
        {"numerics", "r_max", Kind::Number},
        {"numerics", "per_decade", Kind::Integer},
        {"numerics", "n_theta", Kind::Integer},
        {"numerics", "eps", Kind::Number},
        {"numerics", "theta0", Kind::Number},
        {"numerics", "assert_attainment", Kind::Boolean},
        {"output", "dir", Kind::String},
    };
    return k;
}

std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + fmt_short(x);
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::vector<std::string> errors;
    std::map<std::string, bool> seen;
    std::string section;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;

    auto where = [&](const std::string& key) { return "line " + std::to_string(lineno) + ": " + key; };

    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& k : keys()) known = known || section == k.section;
            if (!known)
                errors.push_back("line " + std::to_string(lineno) + ": unknown section [" + section +
                                 "] (sections: manifold, coefficients, boundary, numerics, output)");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Key* key = nullptr;
        for (const auto& k : keys())
            if (section == k.section && name == k.name) key = &k;
        if (!key) {
            errors.push_back(where(section.empty() ? name : section + "." + name) + ": unknown key");
            continue;
        }
        const std::string full = section + "." + name;
        if (seen[full]) errors.push_back(where(full) + ": duplicate key");
        seen[full] = true;

        const bool is_string = value.size() >= 2 && value.front() == '"' && value.back() == '"';
        const std::string str = is_string ? value.substr(1, value.size() - 2) : "";
        auto need_string = [&] {
            if (!is_string) errors.push_back(where(full) + ": expected a quoted string");
            return is_string;
        };
        auto number = [&](double& out) {
            double v = 0.0;
            if (is_string || !parse_number(value, v))
                errors.push_back(where(full) + ": expected a number, got " + value);
            else
                out = v;
        };
        auto integer = [&](int& out) {
            double v = 0.0;
            if (is_string || !parse_number(value, v) || v != std::floor(v) || std::abs(v) > 1e9)
                errors.push_back(where(full) + ": expected an integer, got " + value);
            else
                out = static_cast<int>(v);
        };
        auto expression = [&](Expr& out, bool optional) {
            if (!need_string()) return;
            if (optional && trim(str).empty()) {
                out = Expr{};
                return;
            }
            try {
                out = parse_expr(str);
            } catch (const ConfigError& e) {
                for (const auto& msg : e.errors()) errors.push_back(where(full) + ": " + msg);
            }
        };

        switch (key->kind) {
            case Kind::String:
                if (need_string()) {
                    if (name == "profile") cfg.profile = str;
                    if (name == "scheme") cfg.scheme = str;
                    if (name == "dir") cfg.out_dir = str;
                }
                break;
            case Kind::Params: {
                if (!need_string()) break;
                cfg.profile_params.clear();
                std::stringstream ps(str);
                std::string item;
                while (std::getline(ps, item, ',')) {
                    if (trim(item).empty()) continue;
                    const auto e = item.find('=');
                    double v = 0.0;
                    if (e == std::string::npos || !parse_number(item.substr(e + 1), v))
                        errors.push_back(where(full) + ": '" + trim(item) + "' is not key=number");
                    else
                        cfg.profile_params[trim(item.substr(0, e))] = v;
                }
                break;
            }
            case Kind::Number:
                if (name == "R0") number(cfg.R0);
                if (name == "C0") number(cfg.C0);
                if (name == "j") number(cfg.j);
                if (name == "dr") number(cfg.dr);
                if (name == "dt") number(cfg.dt);
                if (name == "T") number(cfg.T);
                if (name == "tol") number(cfg.tol);
                if (name == "r_max") number(cfg.r_max);
                if (name == "eps") number(cfg.eps);
                if (name == "theta0") number(cfg.theta0);
                break;
            case Kind::Integer:
                if (name == "dim") integer(cfg.dim);
                if (name == "Ntheta") integer(cfg.Ntheta);
                if (name == "modes") integer(cfg.modes);
                if (name == "stride") integer(cfg.stride);
                if (name == "per_decade") integer(cfg.per_decade);
                if (name == "n_theta") integer(cfg.n_theta);
                break;
            case Kind::Boolean:
                if (value == "true" || value == "false")
                    cfg.assert_attainment = value == "true";
                else
                    errors.push_back(where(full) + ": expected true or false, got " + value);
                break;
            case Kind::Expression:
            case Kind::OptExpression: {
                const bool opt = key->kind == Kind::OptExpression;
                if (name == "a") expression(cfg.a, opt);
                if (name == "c") expression(cfg.c, opt);
                if (name == "f") expression(cfg.f, opt);
                if (name == "a_bar") expression(cfg.a_bar, opt);
                if (name == "gamma") expression(cfg.gamma, opt);
                if (name == "gamma_t") expression(cfg.gamma_t, opt);
                if (name == "u0") expression(cfg.u0, opt);
                if (name == "bump") expression(cfg.bump, opt);
                break;
            }
            case Kind::NumberList:
            case Kind::IntList: {
                if (!need_string()) break;
                std::vector<double> vals;
                std::stringstream ls(str);
                std::string item;
                bool ok = true;
                while (std::getline(ls, item, ',')) {
                    double v = 0.0;
                    if (!parse_number(item, v)) ok = false;
                    vals.push_back(v);
                }
                if (!ok || vals.empty()) {
                    errors.push_back(where(full) + ": expected a comma-separated list of numbers");
                    break;
                }
                if (key->kind == Kind::NumberList) {
                    cfg.schedule = vals;
                } else {
                    cfg.levels.clear();
                    for (double v : vals) {
                        if (v != std::floor(v)) errors.push_back(where(full) + ": levels must be integers");
                        cfg.levels.push_back(static_cast<int>(v));
                    }
                }
                break;
            }
        }
    }

    // semantic checks
    try {
        (void)profile_catalog(cfg.profile, cfg.profile_params);
    } catch (const PreconditionError& e) {
        errors.push_back("manifold.profile: " + std::string(e.what()));
    }
    if (cfg.dim != 2 && cfg.dim != 3) errors.push_back("manifold.dim: must be 2 or 3");
    auto vars_within = [&](const Expr& e, unsigned allowed, const std::string& key, const std::string& what) {
        if (!e.empty() && (e.vars() & ~allowed))
            errors.push_back(key + ": expression " + e.canonical() + " may only depend on " + what);
    };
    vars_within(cfg.a, VarR | VarTheta, "coefficients.a", "r and theta");
    vars_within(cfg.c, VarR | VarTheta, "coefficients.c", "r and theta");
    vars_within(cfg.f, VarR | VarTheta, "coefficients.f", "r and theta");
    vars_within(cfg.a_bar, VarR, "coefficients.a_bar", "r");
    vars_within(cfg.gamma, VarTheta, "boundary.gamma", "theta");
    vars_within(cfg.gamma_t, VarTheta | VarT, "boundary.gamma_t", "theta and t");
    vars_within(cfg.u0, VarR | VarTheta, "boundary.u0", "r and theta");
    vars_within(cfg.bump, VarTheta, "boundary.bump", "theta");
    if (!(cfg.R0 > 0.0)) errors.push_back("coefficients.R0: must be positive");
    if (!(cfg.C0 > 0.0)) errors.push_back("coefficients.C0: must be positive");
    if (!(cfg.j > 0.0)) errors.push_back("numerics.j: must be positive");
    if (!(cfg.dr > 0.0)) errors.push_back("numerics.dr: must be positive");
    if (cfg.Ntheta < 2) errors.push_back("numerics.Ntheta: must be at least 2");
    if (!(cfg.dt > 0.0)) errors.push_back("numerics.dt: must be positive");
    if (!(cfg.T > 0.0)) errors.push_back("numerics.T: must be positive");
    if (cfg.scheme != "cn" && cfg.scheme != "ie") errors.push_back("numerics.scheme: must be \"cn\" or \"ie\"");
    if (cfg.stride < 1) errors.push_back("numerics.stride: must be at least 1");
    if (!(cfg.tol > 0.0)) errors.push_back("numerics.tol: must be positive");
    if (!(cfg.r_max > 1.0)) errors.push_back("numerics.r_max: must exceed 1");
    if (cfg.per_decade < 1) errors.push_back("numerics.per_decade: must be at least 1");
    if (cfg.n_theta < 1) errors.push_back("numerics.n_theta: must be at least 1");
    if (cfg.modes < 0) errors.push_back("numerics.modes: must be non-negative");
    if (!(cfg.eps > 0.0)) errors.push_back("numerics.eps: must be positive");
    for (std::size_t i = 0; i < cfg.schedule.size(); ++i)
        if (!(cfg.schedule[i] > 0.0) || (i > 0 && !(cfg.schedule[i] > cfg.schedule[i - 1])))
            errors.push_back("numerics.schedule: radii must be positive and increasing");
    for (int n : cfg.levels)
        if (n < 4) errors.push_back("numerics.levels: grid levels must be at least 4");

    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::string params;
    for (const auto& [k, v] : cfg.profile_params) params += (params.empty() ? "" : ", ") + k + "=" + fmt_short(v);
    std::ostringstream o;
    o << "[manifold]\n"
      << "profile = " << quote(cfg.profile) << "\n"
      << "params = " << quote(params) << "\n"
      << "dim = " << cfg.dim << "\n\n"
      << "[coefficients]\n"
      << "a = " << quote(cfg.a.canonical()) << "\n"
      << "c = " << quote(cfg.c.canonical()) << "\n"
      << "f = " << quote(cfg.f.canonical()) << "\n"
      << "a_bar = " << quote(cfg.a_bar.canonical()) << "\n"
      << "R0 = " << fmt_short(cfg.R0) << "\n"
      << "C0 = " << fmt_short(cfg.C0) << "\n\n"
      << "[boundary]\n"
      << "gamma = " << quote(cfg.gamma.canonical()) << "\n"
      << "gamma_t = " << quote(cfg.gamma_t.canonical()) << "\n"
      << "u0 = " << quote(cfg.u0.canonical()) << "\n"
      << "bump = " << quote(cfg.bump.canonical()) << "\n\n"
      << "[numerics]\n"
      << "j = " << fmt_short(cfg.j) << "\n"
      << "dr = " << fmt_short(cfg.dr) << "\n"
      << "Ntheta = " << cfg.Ntheta << "\n"
      << "schedule = " << quote(join_numbers(cfg.schedule)) << "\n"
      << "levels = " << quote(join_ints(cfg.levels)) << "\n"
      << "modes = " << cfg.modes << "\n"
      << "dt = " << fmt_short(cfg.dt) << "\n"
      << "T = " << fmt_short(cfg.T) << "\n"
      << "scheme = " << quote(cfg.scheme) << "\n"
      << "stride = " << cfg.stride << "\n"
      << "tol = " << fmt_short(cfg.tol) << "\n"
      << "r_max = " << fmt_short(cfg.r_max) << "\n"
      << "per_decade = " << cfg.per_decade << "\n"
      << "n_theta = " << cfg.n_theta << "\n"
      << "eps = " << fmt_short(cfg.eps) << "\n"
      << "theta0 = " << fmt_short(cfg.theta0) << "\n"
      << "assert_attainment = " << (cfg.assert_attainment ? "true" : "false") << "\n\n"
      << "[output]\n"
      << "dir = " << quote(cfg.out_dir) << "\n";
    return o.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace dinf
