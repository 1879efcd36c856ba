#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "khj/commands.hpp"
#include "khj/problem_io.hpp"

namespace py = pybind11;

namespace {

nlohmann::json parse(const std::string& text) {
    return nlohmann::json::parse(text);
}

std::string validate_text(const std::string& problem_json) {
    auto rep = khj::validate_problem_json(parse(problem_json));
    nlohmann::json out;
    out["ok"] = rep.ok();
    auto arr = nlohmann::json::array();
    for (const auto& v : rep.violations)
        arr.push_back({{"where", v.where}, {"what", v.what}});
    out["violations"] = arr;
    return out.dump();
}

std::string solve_text(const std::string& problem_json, const std::string& mode) {
    return khj::run_solve(parse(problem_json), mode).dump();
}

std::string sweep_text(const std::string& problem_json, const std::string& param,
                       const std::vector<std::string>& values) {
    return khj::run_sweep(parse(problem_json), param, values);
}

std::string flcheck_text(const std::string& problem_json, const std::string& solution_csv) {
    return khj::run_flcheck(parse(problem_json), solution_csv).dump();
}

std::string solution_csv_text(const std::string& report_json) {
    // rebuild the CSV from a solve report's solution rows
    auto j = parse(report_json);
    std::ostringstream os;
    os << "edge,arc,value\n";
    os.precision(17);
    for (const auto& row : j.at("solution"))
        os << row.at("edge").get<std::string>() << ',' << row.at("arc").get<double>() << ','
           << row.at("value").get<double>() << '\n';
    return os.str();
}

} // namespace

PYBIND11_MODULE(_khj, m) {
    m.doc() = "Nonlocal Hamilton-Jacobi solver on metric networks with Kirchhoff conditions";
    m.def("validate", &validate_text, py::arg("problem_json"),
          "Validate a problem description; returns a JSON report string.");
    m.def("solve", &solve_text, py::arg("problem_json"), py::arg("mode") = "junction",
          "Solve a problem (mode: junction | network | viscous); returns the report JSON.");
    m.def("sweep", &sweep_text, py::arg("problem_json"), py::arg("param"), py::arg("values"),
          "Parameter sweep; returns long-format CSV text.");
    m.def("flcheck", &flcheck_text, py::arg("problem_json"), py::arg("solution_csv"),
          "Flux-limiter checks of a stored solution; returns the report JSON.");
    m.def("solution_csv", &solution_csv_text, py::arg("report_json"),
          "Extract the solution rows of a solve report as CSV text.");
}
