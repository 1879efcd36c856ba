#ifndef KHJ_NETWORK_SOLVER_HPP
#define KHJ_NETWORK_SOLVER_HPP

#include "khj/junction_solver.hpp"

namespace khj {

// Sign checks of the residual map on the faces of the box [-theta+, theta+]^Ni:
// F_j must be positive where theta_j = +theta+ and negative where theta_j = -theta+.
struct MirandaCertificate {
    double theta_plus = 0.0;
    struct FaceSample {
        std::size_t vertex = 0; // index into interior vertex list
        int side = +1;
        std::vector<double> thetas;
        double F_j = 0.0;
        bool ok = false;
    };
    std::vector<FaceSample> samples;
    bool pass = false;
    std::string failure;
};

struct NetworkSolve {
    std::vector<double> thetas; // per interior vertex, in interior_vertices() order
    GridFunction u;
    MirandaCertificate certificate;
    std::vector<double> residuals; // F_j at the accepted iterate
    double residual_norm = 0.0;
    std::vector<std::pair<std::vector<double>, double>> trace; // (Theta, ||F||_inf)
    bool converged = false;
    int evaluations = 0;
    std::vector<double> candidate_roots; // distinct coordinate sign-change alarms
    // viscous-mode extras
    double second_diff_bound = 0.0;
};

// Multi-vertex pipeline: Dirichlet solves parameterized by the vector of
// interior-vertex values, residual map F_j, Miranda box certification, and a
// damped quasi-Newton search with a coordinate-bisection fallback.
class NetworkSolver {
public:
    explicit NetworkSolver(const NetProblem& p);
    NetworkSolver(const NetProblem& p, double eps_override);

    std::size_t n_interior() const { return interior_.size(); }
    const std::vector<std::size_t>& interior() const { return interior_; }

    std::vector<double> residual_map(const std::vector<double>& thetas) const;
    GridFunction dirichlet_solution(const std::vector<double>& thetas) const;
    // residual vector of an existing solution (inward derivatives against B)
    std::vector<double> residuals(const GridFunction& u) const { return residuals_of(u); }

    double default_theta_plus() const;
    MirandaCertificate certify_box(double theta_plus) const;

    NetworkSolve solve() const;
    const DirichletEngine& engine() const { return *engine_; }

private:
    const NetProblem* p_;
    std::vector<std::size_t> interior_;
    std::unique_ptr<DirichletEngine> engine_;
    mutable GridFunction warm_;
    mutable bool have_warm_ = false;
    mutable int evals_ = 0;

    std::vector<double> residuals_of(const GridFunction& u) const;
    NetworkSolve search(double theta_plus, const MirandaCertificate& cert) const;
};

// Strictly elliptic variant: requires min_E min_x mu_E > 0, runs without
// vanishing viscosity, and additionally reports the classical-matching
// diagnostics (Kirchhoff residuals and a uniform second-difference bound).
NetworkSolve solve_viscous_network(const NetProblem& p);

NetworkSolve solve_network(const NetProblem& p);

} // namespace khj

#endif
