#ifndef KHJ_JUNCTION_SOLVER_HPP
#define KHJ_JUNCTION_SOLVER_HPP

#include <memory>
#include <optional>

#include "khj/edge_solver.hpp"
#include "khj/problem.hpp"

namespace khj {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractionReport {
    double lambda_star = 0.0; // max over coupled edges of lambda_i / (lambda + lambda_i)
    std::vector<double> increments;
    std::vector<double> ratios; // ratios of consecutive increments, sweeps >= 2
    double measured_factor = 0.0;
    int coupled_sweeps = 0;
    int censored_edges = 0;
    int coupled_edges = 0;
    bool certified = false; // measured <= 1.05 * lambda_star
    bool measured_any = false;
};

struct KirchhoffState {
    double theta_lo = 0.0, theta_hi = 0.0;
    std::vector<std::pair<double, double>> evaluations; // (theta, F(theta))
    double theta_star = 0.0;
    double f_abs = 0.0;
    int sign_changes = 1;                 // detected in the initial bracket scan
    std::vector<double> all_roots_lo;     // left ends of every sign-change interval
    bool stagnated = false;
};

enum class StarSolveMode {
    branch_iteration,     // the constructive contraction scheme, full report
    certify_then_newton,  // a few certifying sweeps, then monolithic Newton
    newton                // monolithic Newton only (no contraction report)
};

// Dirichlet solves on a network with every vertex value prescribed. Owns the
// nonlocal weight matrices, which are reused across theta evaluations.
class DirichletEngine {
public:
    DirichletEngine(const NetProblem& p, double eta, double eps);

    GridFunction solve(const std::vector<double>& vertex_values, StarSolveMode mode,
                       ContractionReport* report = nullptr, const GridFunction* warm = nullptr,
                       int certify_sweeps = 12) const;

    const NonlocalOperator& op() const { return op_; }
    double lambda_star() const; // over coupled edges, from the operator's tail masses
    double eps() const { return eps_; }
    double eta() const { return eta_; }
    double full_residual_norm(const GridFunction& u) const;

    DirichletEngine(const DirichletEngine&) = delete;
    DirichletEngine& operator=(const DirichletEngine&) = delete;

private:
    const NetProblem* p_;
    double eta_, eps_;
    double tol_fp_; // tightened so slope stencils keep |F| noise below tol_K
    KernelFamily kernels_; // problem kernels with the engine's truncation
    NonlocalOperator op_;
    std::vector<std::vector<double>> f_nodes_, mu_nodes_;
    std::vector<bool> coupled_;

    GridFunction affine_start(const std::vector<double>& vertex_values) const;
    void branch_iteration(GridFunction& u, ContractionReport* report, int max_sweeps,
                          bool to_convergence) const;
    void newton_finish(GridFunction& u) const;
    EdgeFields edge_fields(std::size_t e, bool frozen_coupling,
                           const GridFunction* frozen) const;
};

struct KirchhoffSolve {
    double theta = 0.0;
    GridFunction u;
    KirchhoffState state;
    ContractionReport contraction;
    double kirchhoff_abs = 0.0;
};

struct ContinuationStep {
    double eps = 0.0, eta = 0.0, theta = 0.0;
    double cauchy_diff = -1.0; // sup difference to the previous step on Gamma^delta
    double lipschitz = 0.0;    // monitor on Gamma^delta
    double f_abs = 0.0;
};

struct ContinuationResult {
    GridFunction u;
    double theta = 0.0;
    std::vector<ContinuationStep> history;
    bool monitor_alarm = false;
    double gamma_delta = 0.0;
};

// Star-junction pipeline. The problem must have exactly one interior vertex
// with every edge incident to it.
class StarSolver {
public:
    explicit StarSolver(const NetProblem& p);

    std::pair<GridFunction, ContractionReport>
    solve_dirichlet(double theta, StarSolveMode mode = StarSolveMode::branch_iteration,
                    const GridFunction* warm = nullptr) const;

    double kirchhoff_residual(const GridFunction& u) const;
    std::pair<double, double> bracket_theta() const;
    KirchhoffSolve solve_kirchhoff() const;
    ContinuationResult continuation() const;

    const NetProblem& problem() const { return *p_; }
    const DirichletEngine& engine() const { return *engine_; }
    std::size_t junction() const { return junction_; }

private:
    const NetProblem* p_;
    std::size_t junction_;
    std::unique_ptr<DirichletEngine> engine_;

    KirchhoffSolve solve_kirchhoff_with(const DirichletEngine& eng,
                                        const GridFunction* warm, double theta_hint,
                                        bool have_hint) const;
    friend class NetworkSolverAccess;
};

// the displayed largeness formula for theta+ (no solves): abar |p| +
// lambda^{-1}((2 abar)^{1-sigma}(1-sigma)^{-1} Lambda N |p| + C_H(1+|p|)),
// raised to abar |p| + max |h_i| when that is larger
double bracket_theta_seed(const NetProblem& p);

// free-function forms of the star pipeline
std::pair<GridFunction, ContractionReport>
solve_dirichlet_star(const NetProblem& p, double theta,
                     StarSolveMode mode = StarSolveMode::branch_iteration);
double kirchhoff_residual(const GridFunction& u, const NetProblem& p);
std::pair<double, double> bracket_theta(const NetProblem& p);
KirchhoffSolve solve_kirchhoff(const NetProblem& p);
ContinuationResult continuation(const NetProblem& p);

// coarse sign-change scan used to look for multiple roots of F
std::vector<std::pair<double, double>>
scan_sign_changes(const std::function<double(double)>& f, double lo, double hi, int samples);

} // namespace khj

#endif
