// qlm: scenario runner for quasilinear measurement dynamics.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qlm/cli/commands.hpp"
#include "qlm/io/expr.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Quasilinear measurement dynamics of a two-level system"};
    app.require_subcommand(1);

    std::string config, out, csv, alpha_text = "pi/2";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::size_t resolution = 181;
    bool log_axis = false, svg = false;

    auto* simulate = app.add_subcommand("simulate", "integrate one scenario; writes trajectory.csv and report.json");
    simulate->add_option("--config", config, "scenario file")->required();
    simulate->add_option("--out", out, "output directory")->required();
    simulate->add_option("--seed", seed, "seed for lambda: sample");

    auto* sweep = app.add_subcommand("sweep", "run the scenario's sweep grid; writes results.csv");
    sweep->add_option("--config", config, "scenario file with a sweep section")->required();
    sweep->add_option("--out", out, "output directory")->required();

    auto* sample = app.add_subcommand("sample", "Born-rule ensemble; writes ensemble.csv and outcomes.csv");
    sample->add_option("--config", config, "scenario file with lambda: sample")->required();
    sample->add_option("--out", out, "output directory")->required();
    sample->add_option("--runs", runs, "ensemble size (default: runs field, else 100000)");
    sample->add_option("--seed", seed, "seed (default: seed field)");

    auto* sg = app.add_subcommand("sg", "Stern-Gerlach run in L; writes trajectory_L.csv and analytic_L.csv");
    sg->add_option("--config", config, "scenario file with a stern_gerlach section")->required();
    sg->add_option("--out", out, "output directory")->required();
    sg->add_option("--seed", seed, "seed for lambda: sample");

    auto* ps = app.add_subcommand("param-space", "admissible (theta, Theta) cross-section at fixed alpha");
    ps->add_option("--alpha", alpha_text, "polar angle of the observable, e.g. pi/3");
    ps->add_option("--resolution", resolution, "samples per axis (>= 2)");
    ps->add_option("--out", out, "output directory")->required();
    ps->add_flag("--svg", svg, "also write cross_section.svg");

    auto* plot = app.add_subcommand("plot", "render a trajectory CSV as SVG");
    plot->add_option("csv", csv, "trajectory CSV")->required();
    plot->add_option("--out", out, "SVG file")->required();
    plot->add_flag("--log-axis", log_axis, "logarithmic abscissa");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qlm::cli::exit_input;
    }

    if (*simulate) return qlm::cli::cmd_simulate(config, out, seed, std::cerr);
    if (*sweep) return qlm::cli::cmd_sweep(config, out, std::cerr);
    if (*sample) return qlm::cli::cmd_sample(config, out, runs, seed, std::cerr);
    if (*sg) return qlm::cli::cmd_sg(config, out, seed, std::cerr);
    if (*ps) {
        double alpha = 0.0;
        try {
            alpha = qlm::io::evaluate(alpha_text);
        } catch (const qlm::io::ExprError& e) {
            std::cerr << "error: --alpha: " << e.what() << '\n';
            return qlm::cli::exit_input;
        }
        return qlm::cli::cmd_param_space(alpha, resolution, out, svg, std::cerr);
    }
    return qlm::cli::cmd_plot(csv, out, log_axis, std::cerr);
}
