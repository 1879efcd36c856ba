#ifndef KHJ_COMMANDS_HPP
#define KHJ_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace khj {

// Command implementations shared by the CLI and the python bindings. Exit
// codes: 0 success, 1 solver/validation failure, 2 usage error.

int cmd_validate(const std::string& path, std::ostream& out);

struct SolveOptions {
    std::string mode = "junction"; // junction | network | viscous
    std::string report_path;       // --out
    std::string csv_path;          // --csv
};
int cmd_solve(const std::string& path, const SolveOptions& opts, std::ostream& out);
// in-process variant returning the report
nlohmann::json run_solve(const nlohmann::json& problem_json, const std::string& mode);

int cmd_sweep(const std::string& path, const std::string& param,
              const std::vector<std::string>& values, const std::string& out_csv,
              std::ostream& out);
std::string run_sweep(const nlohmann::json& problem_json, const std::string& param,
                      const std::vector<std::string>& values);

int cmd_flcheck(const std::string& path, const std::string& solution_csv,
                const std::string& report_path, std::ostream& out);
nlohmann::json run_flcheck(const nlohmann::json& problem_json, const std::string& solution_csv);

} // namespace khj

#endif
