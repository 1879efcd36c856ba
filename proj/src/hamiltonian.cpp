#include "khj/hamiltonian.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace khj {

Hamiltonian Hamiltonian::abs_shift(Expr b, Expr c, double C_H) {
    if (!(C_H > 1.0))
        throw HamiltonianError("C_H must exceed 1");
    Hamiltonian H;
    H.eval_ = [b, c](double x, double p) { return std::abs(p - b(x)) + c(x); };
    H.minimizer_ = [b](double x) { return b(x); };
    H.C_H_ = C_H;
    H.convex_ = true;
    return H;
}

Hamiltonian Hamiltonian::piecewise_linear(double slope_minus, double slope_plus, Expr b, Expr c,
                                          double C_H) {
    if (!(slope_minus > 0.0) || !(slope_plus > 0.0))
        throw HamiltonianError("piecewise-linear slopes must be positive");
    if (!(C_H > 1.0))
        throw HamiltonianError("C_H must exceed 1");
    Hamiltonian H;
    H.eval_ = [=](double x, double p) {
        double q = p - b(x);
        return std::max(slope_plus * q, -slope_minus * q) + c(x);
    };
    H.minimizer_ = [b](double x) { return b(x); };
    H.C_H_ = C_H;
    H.convex_ = true;
    return H;
}

Hamiltonian Hamiltonian::custom(std::function<double(double, double)> H_fn, double C_H,
                                bool convex) {
    if (!(C_H > 1.0))
        throw HamiltonianError("C_H must exceed 1");
    Hamiltonian H;
    H.eval_ = std::move(H_fn);
    H.C_H_ = C_H;
    H.convex_ = convex;
    return H;
}

void Hamiltonian::require_convex() const {
    if (!convex_)
        throw HamiltonianError("operation requires a convex Hamiltonian with a unique minimum");
}

double Hamiltonian::golden_minimizer(double x) const {
    // coercivity confines the minimizer to [-C_H^2, C_H^2]
    double lo = -C_H_ * C_H_, hi = C_H_ * C_H_;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = eval_(x, a), fb = eval_(x, b);
    while (hi - lo > 1e-12) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = eval_(x, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = eval_(x, b);
        }
    }
    return 0.5 * (lo + hi);
}

double Hamiltonian::minimizer(double x) const {
    require_convex();
    if (minimizer_)
        return minimizer_(x);
    return golden_minimizer(x);
}

double Hamiltonian::minus_part(double x, double p) const {
    double p0 = minimizer(x);
    return p <= p0 ? eval_(x, p0) : eval_(x, p);
}

double Hamiltonian::plus_part(double x, double p) const {
    double p0 = minimizer(x);
    return p >= p0 ? eval_(x, p0) : eval_(x, p);
}

double Hamiltonian::lf_flux(double x, double p_minus, double p_plus, double diss) const {
    return eval_(x, 0.5 * (p_minus + p_plus)) - 0.5 * diss * (p_plus - p_minus);
}

double Hamiltonian::slope_p(double x, double p) const {
    // forward difference: at a kink this picks the right-piece slope, an
    // active element of the subdifferential (a centered stencil would return
    // the useless average 0 on flat solutions of |p|-type Hamiltonians)
    const double dp = 1e-7 * std::max(1.0, std::abs(p));
    return (eval_(x, p + dp) - eval_(x, p)) / dp;
}

std::vector<std::string> check_hamiltonian_assumptions(const Hamiltonian& H, double x_lo,
                                                       double x_hi, int samples, unsigned seed) {
    std::vector<std::string> out;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(x_lo, x_hi);
    std::uniform_real_distribution<double> up(-20.0, 20.0);
    const double C = H.lipschitz_p();
    const double slack = 1e-9;
    auto report = [&](const char* what, double x, double y, double p, double q) {
        std::ostringstream os;
        os << what << " violated at x=" << x << " y=" << y << " p=" << p << " q=" << q;
        out.push_back(os.str());
    };
    for (int k = 0; k < samples && out.size() < 8; ++k) {
        double x = ux(rng), y = ux(rng), p = up(rng), q = up(rng);
        if (std::abs(H(x, p) - H(y, p)) > C * (1.0 + std::abs(p)) * std::abs(x - y) + slack)
            report("x-Lipschitz bound", x, y, p, q);
        if (std::abs(H(x, p) - H(x, q)) > C * std::abs(p - q) + slack)
            report("p-Lipschitz bound", x, y, p, q);
        double h = H(x, p);
        if (h < std::abs(p) / C - C - slack || h > C * (1.0 + std::abs(p)) + slack)
            report("coercivity envelope", x, y, p, q);
    }
    return out;
}

} // namespace khj
