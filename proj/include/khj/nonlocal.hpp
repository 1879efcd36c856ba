#ifndef KHJ_NONLOCAL_HPP
#define KHJ_NONLOCAL_HPP

#include <vector>

#include "khj/grid.hpp"
#include "khj/hamiltonian.hpp"
#include "khj/kernels.hpp"
#include "khj/network.hpp"

namespace khj {

// Integration region relative to the geodesic ball of radius delta around the
// evaluation node: the complement B_delta^c (the usual case) or the ball.
enum class NonlocalRegion { complement, ball };

// Hat-function weights of the discrete nonlocal operator:
//   I_E u(x_m) ~= sum_F sum_k w^{EF}[m][k] (u_F(k) - u(x_m)),
// with per-cell analytic kernel moments for model kernels and composite Gauss
// for tabulated ones. Weights are nonnegative, so the discretization is
// monotone by construction.
class NonlocalOperator {
public:
    NonlocalOperator() = default;
    NonlocalOperator(const Network& net, const GridSet& grids, const KernelFamily& kernels,
                     double delta = 0.0, NonlocalRegion region = NonlocalRegion::complement);

    double apply(const GridFunction& u, std::size_t E, std::size_t m) const;
    // total truncated mass at node m of E (sum of the row weights)
    double mass(std::size_t E, std::size_t m) const { return mass_[E][m]; }
    // lambda_E^eta(x_m) = mass excluding the self pair (E,E)
    double exterior_mass(std::size_t E, std::size_t m) const { return ext_mass_[E][m]; }

    // row of weights of pair (E,F) at node m (size n_F + 1)
    const double* row(std::size_t E, std::size_t F, std::size_t m) const;
    std::size_t row_size(std::size_t F) const { return cols_[F]; }

    const Network& network() const { return *net_; }
    const GridSet& grids() const { return *grids_; }
    const KernelFamily& kernels() const { return *kernels_; }
    double delta() const { return delta_; }

private:
    const Network* net_ = nullptr;
    const GridSet* grids_ = nullptr;
    const KernelFamily* kernels_ = nullptr;
    double delta_ = 0.0;
    std::vector<std::size_t> cols_;
    // pair (E,F) -> row-major (n_E+1) x (n_F+1)
    std::vector<std::vector<double>> w_;
    std::vector<std::vector<double>> mass_, ext_mass_;
};

// One row of hat weights on target edge F for the evaluation node (E, m),
// shared with NonlocalOperator's assembly.
std::vector<double> nonlocal_row(const Network& net, const GridSet& grids,
                                 const KernelFamily& kernels, std::size_t E, std::size_t m,
                                 std::size_t F, double delta, NonlocalRegion region);

// Direct evaluation of I_E[region] u(x_m) without precomputed weights.
// Precondition: the kernel is truncated, or delta >= h (the singular cell
// must be excluded when the kernel value is unbounded).
double nonlocal_apply(const GridFunction& u, const KernelFamily& kernels, std::size_t E,
                      std::size_t m, double delta,
                      NonlocalRegion region = NonlocalRegion::complement);

// Nodal coefficient samples of one edge problem
//   (lambda + lambda_add) u - (mu + eps) u'' - I u + Hhat(x, Du) = f.
struct EdgeFields {
    double lambda = 1.0;
    double eps = 0.0;
    const Hamiltonian* H = nullptr;
    std::vector<double> lambda_add; // per node; empty = 0
    std::vector<double> mu;         // per node; empty = 0
    std::vector<double> f;          // per node; empty = 0
    double node(const std::vector<double>& v, std::size_t m) const {
        return v.empty() ? 0.0 : v[m];
    }
};

// Artificial-dissipation coefficient: full Lax-Friedrichs C_H in the
// degenerate case, lowered when second-order ellipticity already enforces
// monotonicity (keeps the scheme monotone and restores second-order accuracy
// where mu + eps dominates).
double lf_dissipation(double C_H, double mu_plus_eps, double h);

// Residual of the discrete equation at an interior node m of E.
double discrete_residual(const GridFunction& u, const NonlocalOperator& op, const EdgeFields& d,
                         std::size_t E, std::size_t m);

// Discrete Hoelder seminorm sup_{i != j} |u_i - u_j| / |x_i - x_j|^gamma of
// nodal values along one edge.
double measure_modulus(const std::vector<double>& values, double h, double gamma);

} // namespace khj

#endif
