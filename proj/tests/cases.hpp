#ifndef KHJ_TESTS_CASES_HPP
#define KHJ_TESTS_CASES_HPP

#include <string>
#include <vector>

#include "khj/problem.hpp"

// Shared problem builders for the unit and acceptance suites.
namespace cases {

using namespace khj;

// single edge with Dirichlet ends ("interval" problem), censored model kernel
inline NetProblem interval(double length, int n_cells, double c_self, double sigma,
                           double C_H = 2.0) {
    NetworkSpec spec;
    spec.vertices.push_back({"a", VertexKind::boundary, std::nullopt, 0.0});
    spec.vertices.push_back({"b", VertexKind::boundary, std::nullopt, 0.0});
    spec.edges.push_back({"e", "a", "b", length});
    NetProblem p;
    p.net = Network::build(std::move(spec));
    p.grids = GridSet::uniform(p.net, n_cells);
    p.kernels = KernelFamily(1, std::max(1.0, c_self), sigma);
    if (c_self > 0.0) {
        KernelPair self;
        self.form = KernelPair::Form::model;
        self.c = Expr::constant(c_self);
        p.kernels.set_pair(0, 0, self);
    }
    p.hamiltonians = {Hamiltonian::abs_shift(Expr::constant(0.0), Expr::constant(0.0), C_H)};
    p.f.resize(1);
    p.mu.resize(1);
    return p;
}

// star junction: N edges tailed at O, homogeneous lengths, model kernels with
// self coefficient c_self and exterior coefficient c_cross
inline NetProblem star(int n_edges, int n_cells, double c_self, double c_cross, double sigma,
                       double B = 0.0, std::vector<double> h = {}, double length = 1.0,
                       double C_H = 2.0) {
    NetworkSpec spec;
    spec.vertices.push_back({"O", VertexKind::interior, B, std::nullopt});
    for (int i = 1; i <= n_edges; ++i) {
        std::string vid = "v" + std::to_string(i);
        double hv = h.empty() ? 0.0 : h[static_cast<std::size_t>(i - 1)];
        spec.vertices.push_back({vid, VertexKind::boundary, std::nullopt, hv});
        spec.edges.push_back({"e" + std::to_string(i), "O", vid, length});
    }
    NetProblem p;
    p.net = Network::build(std::move(spec));
    p.grids = GridSet::uniform(p.net, n_cells);
    double bound = std::max(1.0, std::max(c_self, c_cross));
    p.kernels = KernelFamily(static_cast<std::size_t>(n_edges), bound, sigma);
    for (std::size_t E = 0; E < p.net.n_edges(); ++E)
        for (std::size_t F = 0; F < p.net.n_edges(); ++F) {
            double c = E == F ? c_self : c_cross;
            if (c <= 0.0)
                continue;
            KernelPair pair;
            pair.form = KernelPair::Form::model;
            pair.c = Expr::constant(c);
            p.kernels.set_pair(E, F, pair);
        }
    p.hamiltonians.assign(p.net.n_edges(),
                          Hamiltonian::abs_shift(Expr::constant(0.0), Expr::constant(0.0), C_H));
    p.f.resize(p.net.n_edges());
    p.mu.resize(p.net.n_edges());
    return p;
}

inline void set_vertex_data(NetProblem& p, double B, const std::vector<double>& h) {
    NetworkSpec spec;
    std::size_t bi = 0;
    for (std::size_t v = 0; v < p.net.n_vertices(); ++v) {
        Vertex vx = p.net.vertex(v);
        if (vx.kind == VertexKind::interior)
            vx.kirchhoff_flux = B;
        else
            vx.dirichlet_value = h.at(bi++);
        spec.vertices.push_back(std::move(vx));
    }
    for (std::size_t e = 0; e < p.net.n_edges(); ++e)
        spec.edges.push_back(p.net.edge(e));
    p.net = Network::build(std::move(spec));
}

} // namespace cases

#endif
