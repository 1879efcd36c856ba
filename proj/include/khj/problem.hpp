#ifndef KHJ_PROBLEM_HPP
#define KHJ_PROBLEM_HPP

#include <functional>
#include <vector>

#include "khj/grid.hpp"
#include "khj/hamiltonian.hpp"
#include "khj/kernels.hpp"
#include "khj/network.hpp"
#include "khj/nonlocal.hpp"

namespace khj {

using ScalarField = std::function<double(double)>; // arc -> value on one edge

// A stationary problem instance on a network: the per-edge data of
//   lambda u - (mu + eps) u'' - I u + H(x, u') = f on each edge,
// Kirchhoff fluxes and Dirichlet values live on the Network's vertices.
struct NetProblem {
    Network net;
    GridSet grids;
    KernelFamily kernels;
    std::vector<Hamiltonian> hamiltonians; // per edge
    std::vector<ScalarField> f;            // per edge; empty entry = 0
    std::vector<ScalarField> mu;           // per edge; empty entry = 0
    SolverConfig cfg;
    std::vector<ScalarField> reference;    // optional manufactured truth

    double max_C_H() const;
    std::vector<double> sample_f(std::size_t e) const;  // nodal values
    std::vector<double> sample_mu(std::size_t e) const; // nodal values
    double boundary_value(std::size_t v) const;         // h_v
    double kirchhoff_flux(std::size_t v) const;         // B_v

    // fixed vertex values for a Dirichlet solve: Dirichlet data at boundary
    // vertices, theta entries at interior ones (ordered as interior_vertices())
    std::vector<double> vertex_values(const std::vector<double>& thetas) const;
};

// sup over node pairs in Gamma^delta (points farther than delta from every
// boundary vertex) of |u(x)-u(y)| / rho(x,y)
double lipschitz_on_gamma_delta(const GridFunction& u, double delta);
// sup over nodes in Gamma^delta of |u - v|
double sup_diff_on_gamma_delta(const GridFunction& u, const GridFunction& v, double delta);

} // namespace khj

#endif
