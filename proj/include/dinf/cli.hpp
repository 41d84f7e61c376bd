#pragma once

#include "dinf/config.hpp"
#include "dinf/hypotheses.hpp"
#include "dinf/parabolic.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dinf {

enum ExitCode : int {
    ExitOk = 0,
    ExitAssertion = 1,
    ExitUsage = 2,
    ExitPrecondition = 3,
    ExitNumerical = 4,
    ExitIo = 5,
};

const std::vector<std::string>& subcommands();

struct RunOptions {
    /// Overrides the config's output directory when non-empty.
    std::string out_dir;
    std::optional<double> tol;
    std::optional<std::vector<double>> schedule;
    /// 0 = hardware concurrency. Never affects outputs.
    int threads = 1;
    bool color = true;
    std::string config_path;
};

/// Runs one subcommand; writes CSVs, the canonical config and manifest.txt into the output directory.
int run(const std::string& subcommand, const RunConfig& cfg, const RunOptions& opts, std::ostream& out,
        std::ostream& err);

/// Coefficients, data and sampling derived from a config.
CoefficientBundle bundle_from_config(const RunConfig& cfg, const ModelManifold& M, const SampleGrid& grid);
SampleGrid sample_grid_from_config(const RunConfig& cfg);
AngularFn gamma_from_config(const RunConfig& cfg, const ModelManifold& M);
SpaceTimeFn gamma_t_from_config(const RunConfig& cfg, const ModelManifold& M);

struct VerdictRow {
    int id = 0;
    std::string profile;
    int m = 2;
    std::string params;
    std::string a_bar;
    Verdict hp1 = Verdict::Skipped;
    Verdict e13 = Verdict::Skipped;
    Verdict joint = Verdict::Skipped;
    Verdict expected = Verdict::Skipped;
};

struct VerdictTable {
    std::vector<VerdictRow> rows;

    bool matches_expected() const;
    std::string csv() const;
};

/// The five-row example corpus: four admissible bundles and the euclidean control.
VerdictTable reproduce_examples(double tol = 1e-8);

/// Consecutive values decrease strictly, except pairs that both sit at or below `floor`.
bool decreasing_above_floor(const std::vector<double>& v, double floor);

/// Field of a profile restricted to r >= r_from.
std::vector<double> profile_tail(const Profile1D& p, double r_from);

}  // namespace dinf
