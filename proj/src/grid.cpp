#include "khj/grid.hpp"

#include <algorithm>
#include <cmath>

namespace khj {

GridSet::GridSet(const Network& net, std::vector<int> n_cells) {
    if (n_cells.size() != net.n_edges())
        throw GridError("one cell count per edge expected");
    for (int n : n_cells)
        if (n < 4)
            throw GridError("grids need at least 4 cells per edge");
    n_ = std::move(n_cells);
    h_.resize(n_.size());
    for (std::size_t e = 0; e < n_.size(); ++e)
        h_[e] = net.length(e) / static_cast<double>(n_[e]);
}

GridSet GridSet::uniform(const Network& net, int n_cells) {
    return GridSet(net, std::vector<int>(net.n_edges(), n_cells));
}

GridSet GridSet::with_spacing(const Network& net, double h_target) {
    if (!(h_target > 0.0))
        throw GridError("grid spacing must be positive");
    std::vector<int> n(net.n_edges());
    for (std::size_t e = 0; e < net.n_edges(); ++e)
        n[e] = std::max(4, static_cast<int>(std::ceil(net.length(e) / h_target - 1e-12)));
    return GridSet(net, std::move(n));
}

double GridSet::min_h() const {
    double m = h_.empty() ? 0.0 : h_[0];
    for (double v : h_)
        m = std::min(m, v);
    return m;
}

GridFunction::GridFunction(const Network& net, const GridSet& grids, double fill)
    : net_(&net), grids_(&grids) {
    interior_.resize(net.n_edges());
    for (std::size_t e = 0; e < net.n_edges(); ++e)
        interior_[e].assign(static_cast<std::size_t>(grids.n_cells(e)) - 1, fill);
    vertex_.assign(net.n_vertices(), fill);
}

double GridFunction::value(std::size_t e, std::size_t m) const {
    const std::size_t n = static_cast<std::size_t>(grids_->n_cells(e));
    if (m == 0)
        return vertex_[net_->tail_of(e)];
    if (m == n)
        return vertex_[net_->head_of(e)];
    return interior_[e][m - 1];
}

void GridFunction::set_value(std::size_t e, std::size_t m, double v) {
    const std::size_t n = static_cast<std::size_t>(grids_->n_cells(e));
    if (m == 0)
        vertex_[net_->tail_of(e)] = v;
    else if (m == n)
        vertex_[net_->head_of(e)] = v;
    else
        interior_[e][m - 1] = v;
}

std::vector<double> GridFunction::edge_values(std::size_t e) const {
    const std::size_t n = static_cast<std::size_t>(grids_->n_cells(e));
    std::vector<double> out(n + 1);
    for (std::size_t m = 0; m <= n; ++m)
        out[m] = value(e, m);
    return out;
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : vertex_)
        m = std::max(m, std::abs(v));
    for (const auto& edge : interior_)
        for (double v : edge)
            m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::max_diff(const GridFunction& u, const GridFunction& v) {
    double m = 0.0;
    for (std::size_t e = 0; e < u.net_->n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(u.grids_->n_cells(e));
        for (std::size_t k = 0; k <= n; ++k)
            m = std::max(m, std::abs(u.value(e, k) - v.value(e, k)));
    }
    return m;
}

GridFunction GridFunction::rebound(const Network& net, const GridSet& grids) const {
    if (net.n_edges() != net_->n_edges() || net.n_vertices() != net_->n_vertices())
        throw GridError("rebound: network shapes differ");
    GridFunction out(net, grids);
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
        if (grids.n_cells(e) != grids_->n_cells(e))
            throw GridError("rebound: grid shapes differ");
        const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
        for (std::size_t m = 0; m <= n; ++m)
            out.set_value(e, m, value(e, m));
    }
    return out;
}

double SolverConfig::effective_eta(const GridSet& grids) const {
    return eta > 0.0 ? eta : grids.min_h();
}

void SolverConfig::check() const {
    if (!(lambda > 0.0))
        throw GridError("steady assumption requires lambda > 0");
    if (!(tol_fp > 0.0) || !(tol_K > 0.0))
        throw GridError("tolerances must be positive");
    if (eps < 0.0)
        throw GridError("viscosity weight must be nonnegative");
    if (eta < 0.0 || eta > 1.0)
        throw GridError("eta must lie in (0,1] (or 0 to tie it to the grid)");
}

double vertex_slope(const GridFunction& u, std::size_t e, std::size_t v) {
    const auto& net = u.network();
    const auto& grids = u.grids();
    const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
    if (n < 2)
        throw GridError("vertex_slope needs at least 3 nodes on the edge");
    const double h = grids.h(e);
    const int idx = net.incidence_index(e, v);
    double d;
    if (idx == +1) {
        d = (-3.0 * u.value(e, 0) + 4.0 * u.value(e, 1) - u.value(e, 2)) / (2.0 * h);
    } else {
        d = (3.0 * u.value(e, n) - 4.0 * u.value(e, n - 1) + u.value(e, n - 2)) / (2.0 * h);
    }
    return idx * d;
}

} // namespace khj
