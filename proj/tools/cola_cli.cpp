#include "cola/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace cola::cli;

    CLI::App app{"Cost-of-living index computations over scenario files"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    double base_time = 0;
    std::string reference = "cost";
    auto* base_flag = app.add_option("--base-time", base_time, "Base time t_a (default: the file's base_time)");
    app.add_option("--scenario", opt.scenario_path, "Scenario file");
    app.add_option("--output", opt.output_path, "Output path (default: standard output)");
    app.add_option("--tolerance", opt.tolerance, "Solver tolerance")->default_val(opt.tolerance);
    app.add_option("--steps", opt.steps, "RK4 steps (per unit time for cost flows)")->default_val(opt.steps);

    auto* index = app.add_subcommand("index", "Write the index table as CSV");
    index->add_option("--reference", reference, "cost: propagate a base cost (default); utility: hold utility fixed")
        ->check(CLI::IsMember({"cost", "utility"}));

    app.add_subcommand("validate", "Check scenario assumptions");

    auto* transport = app.add_subcommand("transport", "One-dimensional parallel transport");
    std::string connection = "zero";
    double from = 0, to = 0, initial = 1;
    transport->add_option("--connection", connection, "zero | const:k | linear:k")->required();
    transport->add_option("--from", from, "Start point p")->required();
    transport->add_option("--to", to, "End point q")->required();
    transport->add_option("--initial", initial, "Initial value x")->default_val(initial);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return input_error;
    }
    if (*base_flag)
        opt.base_time = base_time;
    opt.reference = reference == "utility" ? Reference::Utility : Reference::Cost;

    if (*transport)
        return cmd_transport(connection, from, to, initial, opt.steps, std::cout, std::cerr);
    if (opt.scenario_path.empty()) {
        std::cerr << "error: --scenario is required\n";
        return input_error;
    }
    if (*index)
        return cmd_index(opt, std::cout, std::cerr);
    return cmd_validate(opt, std::cout, std::cerr);
}
