#ifndef KHJ_VERIFY_HPP
#define KHJ_VERIFY_HPP

#include "khj/problem.hpp"

namespace khj {

// Composite barrier around a Dirichlet-star solution: ramps L(x - x^{1+alpha})
// anchored at the junction value theta and the boundary data h_i, capped at
// +-C0.
struct Barrier {
    double L = 0.0;
    double delta = 0.0;
    double alpha = 0.5;
    double C0 = 0.0;
    bool lower_available = true; // the lower ramp needs ellipticity
    double delta_eps = 0.0;      // lower-ramp width (depends on eps)
    double L_eps = 0.0;
};

struct BarrierPair {
    GridFunction upper; // psi^+
    GridFunction lower; // psi^- (equals -C0 arms when lower_available is false)
    Barrier constants;
    bool lower_advisory = false; // delta_eps below the grid floor: warning only
};

// C0 = (max |H(x,0) - f(x)| + |theta| + max |h_i|) / min(lambda, 1)
double c0_constant(const NetProblem& p, double theta);

// psi_{L,delta}(x) = L(x - x^{1+alpha}) for x <= delta, frozen beyond
double barrier_ramp(double L, double delta, double alpha, double x);

BarrierPair build_barriers(const NetProblem& p, double theta, double alpha = 0.5);

struct BarrierViolation {
    std::size_t edge;
    std::size_t node;
    double amount;
    bool upper; // true: u > psi^+, false: u < psi^-
};

std::vector<BarrierViolation> barrier_check(const GridFunction& u, const BarrierPair& b,
                                            double tol = 1e-10);

// Solve the Dirichlet-star problems of an ordered data pair and count
// pointwise order violations (monotone schemes give exactly zero).
struct ComparisonOutcome {
    std::size_t violations = 0;
    double worst = 0.0; // most negative of u2 - u1
    double max_gap = 0.0;
};
ComparisonOutcome comparison_test(const NetProblem& lo, const NetProblem& hi, double theta_lo,
                                  double theta_hi, double tol = 1e-10);
ComparisonOutcome compare_solutions(const GridFunction& lo, const GridFunction& hi, double tol);

// Grid-convergence study against a reference: manufactured truth when the
// problem carries one, otherwise the finest computed grid.
struct ConvergenceRow {
    double h = 0.0;
    double error = 0.0;
};
struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double observed_order = 0.0;
    bool exact = false; // errors at rounding level on every grid
};
ConvergenceStudy convergence_study(const NetProblem& base, const std::vector<int>& cells_list,
                                   const std::function<GridFunction(const NetProblem&)>& solve);

// least-squares slope of log(err) against log(h)
double fit_order(const std::vector<ConvergenceRow>& rows);

// Hoelder transfer measurement: seminorm of the nonlocal image of u across a
// list of grids (Lemma-style stability check).
struct HoelderTransferRow {
    double h = 0.0;
    double input_seminorm = 0.0;
    double image_seminorm = 0.0;
};
std::vector<HoelderTransferRow>
hoelder_transfer(const Network& net, const KernelFamily& kernels,
                 const std::function<double(double)>& profile, double gamma,
                 const std::vector<int>& cells_list);

} // namespace khj

#endif
