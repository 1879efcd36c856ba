#ifndef KHJ_FLUX_LIMITER_HPP
#define KHJ_FLUX_LIMITER_HPP

#include "khj/problem.hpp"

namespace khj {

// Junction-side view of a per-edge Hamiltonian: p is the inward slope at the
// junction, so edges whose head sits at the junction see H(x_O, -p).
class JunctionHamiltonian {
public:
    JunctionHamiltonian() = default;
    JunctionHamiltonian(const Hamiltonian& H, double x_at_junction, int orientation)
        : H_(&H), x_(x_at_junction), orient_(orientation) {}

    double eval(double p) const { return (*H_)(x_, orient_ * p); }
    double minimizer() const { return orient_ * H_->minimizer(x_); }
    double minus_part(double p) const {
        double p0 = minimizer();
        return p <= p0 ? eval(p0) : eval(p);
    }
    double plus_part(double p) const {
        double p0 = minimizer();
        return p >= p0 ? eval(p0) : eval(p);
    }
    double lipschitz_p() const { return H_->lipschitz_p(); }

private:
    const Hamiltonian* H_ = nullptr;
    double x_ = 0.0;
    int orient_ = +1;
};

struct FLState {
    std::vector<double> g;       // base values lambda u(O) - I_i u(O), per edge
    std::vector<double> p0;      // junction-side minimizers
    std::vector<double> p_tilde; // equalizing slopes
    double value = 0.0;          // FL^-
    double delta = 0.0;          // exclusion radius of the nonlocal evaluation
    double eta = 0.0;            // kernel truncation used
    double equalization_gap = 0.0;
    double grid_search_gap = 0.0; // distance to the zooming grid-search value
};

struct CriticalSlopes {
    std::vector<double> upper;       // pbar_i
    std::vector<double> lower;       // plower_i (equal for grid functions)
    std::vector<double> uncertainty; // extrapolation-artifact estimate
};

struct FLCheck {
    bool pass = false;
    double value = 0.0;  // the tested max expression
    double margin = 0.0; // |value| when failing the sign requirement, else slack
    std::vector<double> g_plus; // per-edge G_i^+ at the critical slopes
    double fl_value = 0.0;
};

// FL^- on plain data: minimize over p the max of the per-edge values
// g_i + H_i^-(p_i) and the Kirchhoff excess sum(-p_i) - B, by the
// equalization reduction (bisection on the common level).
FLState fl_minus_from_data(const std::vector<double>& g,
                           const std::vector<JunctionHamiltonian>& H, double B,
                           bool cross_check = true);

// Zooming grid search oracle for the same min-max (test aid and cross-check).
double fl_minus_grid_search(const std::vector<double>& g,
                            const std::vector<JunctionHamiltonian>& H, double B, double radius,
                            int points_per_axis, int zoom_rounds = 3);

// FL^- of a grid function at the junction of a star problem. Requires convex
// Hamiltonians; the nonlocal base values use the truncated kernel at the
// configured eta with no exclusion.
FLState compute_fl_minus(const GridFunction& u, const NetProblem& p);

// Richardson-extrapolated one-sided difference quotients at scales h, 2h, 4h.
CriticalSlopes critical_slopes(const GridFunction& u, const NetProblem& p);

// Discrete FL viscosity checks at the junction: the subsolution check tests
// max{max_i G_i^+(u, pbar_i, O), FL^-(u,O)} <= tol at the upper critical
// slopes; the supersolution check mirrors it from below at the lower ones.
FLCheck check_fl_subsolution(const GridFunction& u, const NetProblem& p, double tol);
FLCheck check_fl_supersolution(const GridFunction& u, const NetProblem& p, double tol);

// shared helper: base values g_i = lambda u(O) - I_i u(O)
std::vector<double> fl_base_values(const GridFunction& u, const NetProblem& p);
std::vector<JunctionHamiltonian> junction_hamiltonians(const NetProblem& p);

} // namespace khj

#endif
