#include "dinf/cli.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Dirichlet problems at infinity on model manifolds"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir, schedule_text;
    double tol = 0.0;
    int threads = 1;
    for (const auto& name : dinf::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file");
        sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
        sub->add_option("--tol", tol, "quadrature tolerance (overrides numerics.tol)");
        sub->add_option("--schedule", schedule_text, "comma-separated ball radii (overrides numerics.schedule)");
        sub->add_option("--threads", threads, "worker threads, 0 = auto (outputs do not depend on it)")
            ->check(CLI::NonNegativeNumber);
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    dinf::RunConfig cfg;
    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) {
                std::cerr << "cannot read config " << config_path << "\n";
                return dinf::ExitIo;
            }
            std::stringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        } else if (cmd != "reproduce-examples") {
            std::cerr << cmd << ": --config is required\n";
            return dinf::ExitUsage;
        }
        cfg = dinf::parse_config(text);
    } catch (const dinf::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return dinf::ExitUsage;
    }

    dinf::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    opts.config_path = config_path;
    if (tol > 0.0) opts.tol = tol;
    if (!schedule_text.empty()) {
        std::vector<double> s;
        std::stringstream ss(schedule_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                s.push_back(std::stod(item));
            } catch (const std::exception&) {
                std::cerr << "--schedule: '" << item << "' is not a number\n";
                return dinf::ExitUsage;
            }
        }
        opts.schedule = s;
    }
    return dinf::run(cmd, cfg, opts, std::cout, std::cerr);
}
