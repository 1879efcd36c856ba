#ifndef KHJ_PROBLEM_IO_HPP
#define KHJ_PROBLEM_IO_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "khj/problem.hpp"

namespace khj {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schema-level checks plus model assumption sampling (network invariants,
// kernel envelope and x-Lipschitz bounds, Hamiltonian assumption sampler).
ValidationReport validate_problem_json(const nlohmann::json& j);

// Builds the model; throws IoError with the first violation when invalid.
NetProblem problem_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);
NetProblem load_problem(const std::string& path);

// Solution CSV with header edge,arc,value; rows sorted by (edge id, arc).
void write_solution_csv(std::ostream& os, const GridFunction& u);
void write_solution_csv_file(const std::string& path, const GridFunction& u);
// Reads a CSV back onto the problem's grids; throws IoError on grid mismatch.
GridFunction read_solution_csv(std::istream& is, const NetProblem& p);
GridFunction read_solution_csv_file(const std::string& path, const NetProblem& p);

nlohmann::json solution_to_json(const GridFunction& u);

} // namespace khj

#endif
