#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "khj/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Solver for stationary nonlocal Hamilton-Jacobi equations on metric networks "
                 "with Kirchhoff junction conditions"};
    app.require_subcommand(1);

    std::string path;

    auto* validate = app.add_subcommand("validate", "check a problem file against the model assumptions");
    validate->add_option("file", path, "problem JSON file")->required();

    khj::SolveOptions opts;
    auto* solve = app.add_subcommand("solve", "solve a problem and write the report");
    solve->add_option("file", path, "problem JSON file")->required();
    solve->add_option("--mode", opts.mode, "junction | network | viscous")
        ->check(CLI::IsMember({"junction", "network", "viscous"}));
    solve->add_option("--out", opts.report_path, "report JSON output path");
    solve->add_option("--csv", opts.csv_path, "solution CSV output path");

    std::string param, sweep_csv;
    std::vector<std::string> values;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep (long-format CSV)");
    sweep->add_option("file", path, "problem JSON file")->required();
    sweep->add_option("--param", param, "h | eps | eta | sigma")->required();
    sweep->add_option("--values", values, "comma separated values (fractions like 1/100 allowed)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", sweep_csv, "CSV output path");

    std::string solution_csv, fl_out;
    auto* flcheck = app.add_subcommand("flcheck", "flux-limiter checks of a stored solution");
    flcheck->add_option("file", path, "problem JSON file")->required();
    flcheck->add_option("--solution", solution_csv, "solution CSV")->required();
    flcheck->add_option("--out", fl_out, "report JSON output path");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed())
        return khj::cmd_validate(path, std::cout);
    if (solve->parsed())
        return khj::cmd_solve(path, opts, std::cout);
    if (sweep->parsed())
        return khj::cmd_sweep(path, param, values, sweep_csv, std::cout);
    if (flcheck->parsed())
        return khj::cmd_flcheck(path, solution_csv, fl_out, std::cout);
    return 2;
}
