#ifndef KHJ_EDGE_SOLVER_HPP
#define KHJ_EDGE_SOLVER_HPP

#include <optional>
#include <vector>

#include "khj/nonlocal.hpp"

namespace khj {

struct IterationError : std::runtime_error {
    IterationError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

// Censored Dirichlet problem on a single edge:
//   (lambda + lambda_add(x)) u - (mu(x) + eps) u'' - I_self u + H(x, u') = f
// with both endpoint values prescribed. Coupling to other edges enters only
// through f (frozen exterior sources) and lambda_add (exterior tail masses),
// so the solve never touches other edges' unknowns.
struct EdgeProblem {
    const NonlocalOperator* op = nullptr; // self rows (edge, edge) are read
    std::size_t edge = 0;
    EdgeFields fields;
    double tail_value = 0.0;
    double head_value = 0.0;
};

struct EdgeSolveResult {
    std::vector<double> values; // nodes 0..n
    std::vector<double> residual_history;
    int sweeps = 0;
    bool newton_used = false;
    double final_residual = 0.0;
    double linf_bound = 0.0; // discrete comparison bound checked on exit
};

// Damped nonlinear Jacobi (the contraction the construction relies on), with
// a semismooth Newton accelerator that falls back to Jacobi whenever a step
// fails to decrease the residual. The residual max-norm is nonincreasing
// across sweeps on both paths.
EdgeSolveResult solve_censored(const EdgeProblem& p, const SolverConfig& cfg,
                               const std::vector<double>* warm_start = nullptr);

// Max-norm of the problem residual at interior nodes for given nodal values.
double edge_residual_norm(const EdgeProblem& p, const std::vector<double>& values);

// Discrete Hoelder seminorm of u along an edge.
double measure_modulus(const GridFunction& u, std::size_t edge, double gamma);

} // namespace khj

#endif
