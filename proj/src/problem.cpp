#include "khj/problem.hpp"

#include <algorithm>
#include <cmath>

namespace khj {

double NetProblem::max_C_H() const {
    double c = 0.0;
    for (const auto& H : hamiltonians)
        c = std::max(c, H.lipschitz_p());
    return c;
}

std::vector<double> NetProblem::sample_f(std::size_t e) const {
    const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
    std::vector<double> out(n + 1, 0.0);
    if (e < f.size() && f[e])
        for (std::size_t m = 0; m <= n; ++m)
            out[m] = f[e](grids.arc(e, m));
    return out;
}

std::vector<double> NetProblem::sample_mu(std::size_t e) const {
    const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
    std::vector<double> out(n + 1, 0.0);
    if (e < mu.size() && mu[e])
        for (std::size_t m = 0; m <= n; ++m)
            out[m] = mu[e](grids.arc(e, m));
    return out;
}

double NetProblem::boundary_value(std::size_t v) const {
    const auto& vx = net.vertex(v);
    if (!vx.dirichlet_value)
        throw NetworkError("vertex '" + vx.id + "' carries no Dirichlet value");
    return *vx.dirichlet_value;
}

double NetProblem::kirchhoff_flux(std::size_t v) const {
    const auto& vx = net.vertex(v);
    if (!vx.kirchhoff_flux)
        throw NetworkError("vertex '" + vx.id + "' carries no Kirchhoff flux");
    return *vx.kirchhoff_flux;
}

std::vector<double> NetProblem::vertex_values(const std::vector<double>& thetas) const {
    auto interior = net.interior_vertices();
    if (thetas.size() != interior.size())
        throw NetworkError("one theta per interior vertex expected");
    std::vector<double> vv(net.n_vertices(), 0.0);
    for (std::size_t v = 0; v < net.n_vertices(); ++v)
        if (net.vertex(v).kind == VertexKind::boundary)
            vv[v] = boundary_value(v);
    for (std::size_t j = 0; j < interior.size(); ++j)
        vv[interior[j]] = thetas[j];
    return vv;
}

namespace {

// nodes of u at geodesic distance > delta from every boundary vertex
std::vector<NetPoint> gamma_delta_nodes(const GridFunction& u, double delta) {
    const auto& net = u.network();
    const auto& grids = u.grids();
    auto boundary = net.boundary_vertices();
    std::vector<NetPoint> pts;
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
        for (std::size_t m = 0; m <= n; ++m) {
            double arc = grids.arc(e, m);
            bool inside = true;
            for (std::size_t v : boundary)
                if (net.point_vertex_distance(e, arc, v) <= delta) {
                    inside = false;
                    break;
                }
            if (inside)
                pts.push_back({e, arc});
        }
    }
    return pts;
}

} // namespace

double lipschitz_on_gamma_delta(const GridFunction& u, double delta) {
    const auto& net = u.network();
    auto pts = gamma_delta_nodes(u, delta);
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& grids = u.grids();
        double ui = u.value(pts[i].edge, static_cast<std::size_t>(
                                             std::llround(pts[i].arc / grids.h(pts[i].edge))));
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double uj = u.value(pts[j].edge, static_cast<std::size_t>(std::llround(
                                                 pts[j].arc / grids.h(pts[j].edge))));
            double d = net.geodesic(pts[i], pts[j]);
            if (d > 1e-14)
                best = std::max(best, std::abs(ui - uj) / d);
        }
    }
    return best;
}

double sup_diff_on_gamma_delta(const GridFunction& u, const GridFunction& v, double delta) {
    auto pts = gamma_delta_nodes(u, delta);
    const auto& grids = u.grids();
    double best = 0.0;
    for (const auto& pt : pts) {
        std::size_t m = static_cast<std::size_t>(std::llround(pt.arc / grids.h(pt.edge)));
        best = std::max(best, std::abs(u.value(pt.edge, m) - v.value(pt.edge, m)));
    }
    return best;
}

} // namespace khj
