#ifndef KHJ_HAMILTONIAN_HPP
#define KHJ_HAMILTONIAN_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "khj/expr.hpp"

namespace khj {

struct HamiltonianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-edge Hamiltonian H(x,p) under the coercive Lipschitz assumptions, with
// the convex split H = max{H^-, H^+} when a unique minimizer is available.
//
// Built-in families stay inside the hypothesis class: |p - b(x)| + c(x) and
// the asymmetric piecewise-linear max(ap*(p-b), -am*(p-b)) + c(x). Quadratic
// growth is deliberately not offered (no global Lipschitz constant in p).
class Hamiltonian {
public:
    Hamiltonian() = default;

    // H(x,p) = |p - b(x)| + c(x)
    static Hamiltonian abs_shift(Expr b, Expr c, double C_H);
    // H(x,p) = max(slope_plus*(p - b(x)), -slope_minus*(p - b(x))) + c(x)
    static Hamiltonian piecewise_linear(double slope_minus, double slope_plus, Expr b, Expr c,
                                        double C_H);
    // arbitrary evaluator; minimizer found by golden-section search when the
    // convex flag is set
    static Hamiltonian custom(std::function<double(double, double)> H, double C_H, bool convex);

    double operator()(double x, double p) const { return eval_(x, p); }
    double lipschitz_p() const { return C_H_; } // the constant C_H
    bool convex() const { return convex_; }

    // unique minimizer p0(x); analytic for built-ins, golden-section on
    // [-C_H^2, C_H^2] at 1e-12 tolerance otherwise
    double minimizer(double x) const;

    // H^-: constant H(x,p0) left of p0, H right of it (nondecreasing in p)
    double minus_part(double x, double p) const;
    // H^+: mirrored (nonincreasing in p)
    double plus_part(double x, double p) const;

    // local Lax-Friedrichs flux with dissipation coefficient diss:
    //   H(x, (pm+pp)/2) - diss/2 * (pp - pm)
    // diss = C_H (default) dominates the p-Lipschitz constant, so the flux is
    // nondecreasing in pm and nonincreasing in pp.
    double lf_flux(double x, double p_minus, double p_plus) const {
        return lf_flux(x, p_minus, p_plus, C_H_);
    }
    double lf_flux(double x, double p_minus, double p_plus, double diss) const;

    // derivative of H in p at (x,p) by a centered difference; returns a
    // subgradient value at kinks
    double slope_p(double x, double p) const;

private:
    std::function<double(double, double)> eval_;
    std::function<double(double)> minimizer_; // empty -> golden section
    double C_H_ = 1.0;
    bool convex_ = false;

    double golden_minimizer(double x) const;
    void require_convex() const;
};

// Assumption sampler: checks the three coercivity/Lipschitz inequality
// families at random (x,p,q) triples; returns violation messages.
std::vector<std::string> check_hamiltonian_assumptions(const Hamiltonian& H, double x_lo,
                                                       double x_hi, int samples, unsigned seed);

} // namespace khj

#endif
