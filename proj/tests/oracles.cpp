#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace oracles {

namespace {

constexpr double g8x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                           0.7966664774136267,  0.9602898564975363};
constexpr double g8w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                           0.2223810344533745, 0.1012285362903763};

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
    double hw = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
    for (int q = 0; q < 8; ++q)
        s += g8w[q] * f(mid + hw * g8x[q]);
    return hw * s;
}

} // namespace

double smooth_integral(const std::function<double(double)>& f, double a, double b, int panels,
                       int gauss) {
    (void)gauss;
    if (b <= a)
        return 0.0;
    double s = 0.0;
    for (int k = 0; k < panels; ++k) {
        double lo = a + (b - a) * k / panels;
        double hi = a + (b - a) * (k + 1) / panels;
        s += gauss_panel(f, lo, hi);
    }
    return s;
}

double dyadic_integral(const std::function<double(double)>& f, double a, double b, double sing,
                       int levels, int gauss) {
    (void)gauss;
    if (b <= a)
        return 0.0;
    const double len = b - a;
    const bool at_a = std::abs(sing - a) <= std::abs(sing - b);
    double s = 0.0;
    double frac_hi = 1.0;
    // geometric shells toward the singular end; the remaining sliver below
    // 2^-levels carries the (integrable) truncation error
    for (int k = 0; k < levels; ++k) {
        double frac_lo = frac_hi * 0.5;
        double lo, hi;
        if (at_a) {
            lo = a + frac_lo * len;
            hi = a + frac_hi * len;
        } else {
            lo = b - frac_hi * len;
            hi = b - frac_lo * len;
        }
        for (int p = 0; p < 4; ++p) {
            double plo = lo + (hi - lo) * p / 4.0;
            double phi = lo + (hi - lo) * (p + 1) / 4.0;
            s += gauss_panel(f, plo, phi);
        }
        frac_hi = frac_lo;
    }
    return s;
}

double subdivided_geodesic(const khj::Network& net, const khj::NetPoint& x,
                           const khj::NetPoint& y, int k) {
    // node ids: per edge, k+1 samples; plus two extra nodes for x and y
    struct Arc {
        int to;
        double w;
    };
    const std::size_t ne = net.n_edges();
    const int per_edge = k + 1;
    const int n_nodes = static_cast<int>(ne) * per_edge + 2;
    std::vector<std::vector<Arc>> adj(n_nodes);
    auto node_id = [&](std::size_t e, int i) { return static_cast<int>(e) * per_edge + i; };
    auto link = [&](int a, int b, double w) {
        adj[a].push_back({b, w});
        adj[b].push_back({a, w});
    };
    for (std::size_t e = 0; e < ne; ++e) {
        double step = net.length(e) / k;
        for (int i = 0; i < k; ++i)
            link(node_id(e, i), node_id(e, i + 1), step);
    }
    // identify shared vertices by zero-weight links through per-vertex hubs:
    // use the first incident edge sample as the hub
    for (std::size_t v = 0; v < net.n_vertices(); ++v) {
        auto inc = net.incidence(v);
        int hub = -1;
        for (auto [e, idx] : inc) {
            int node = idx > 0 ? node_id(e, 0) : node_id(e, k);
            if (hub < 0)
                hub = node;
            else
                link(hub, node, 0.0);
        }
    }
    const int xs = n_nodes - 2, ys = n_nodes - 1;
    auto attach = [&](int s, const khj::NetPoint& p) {
        double step = net.length(p.edge) / k;
        int below = std::clamp(static_cast<int>(std::floor(p.arc / step)), 0, k - 1);
        link(s, node_id(p.edge, below), p.arc - below * step);
        link(s, node_id(p.edge, below + 1), (below + 1) * step - p.arc);
    };
    attach(xs, x);
    attach(ys, y);

    std::vector<double> dist(n_nodes, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[xs] = 0.0;
    pq.push({0.0, xs});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u])
            continue;
        for (const auto& arc : adj[u])
            if (d + arc.w < dist[arc.to]) {
                dist[arc.to] = d + arc.w;
                pq.push({dist[arc.to], arc.to});
            }
    }
    return dist[ys];
}

double nonlocal_apply(const khj::NetProblem& p, const std::vector<khj::ScalarField>& profiles,
                      std::size_t E, double x, double cap) {
    const auto& net = p.net;
    const double sigma = p.kernels.sigma();
    const double ux = profiles[E](x);
    double acc = 0.0;
    for (std::size_t F = 0; F < net.n_edges(); ++F) {
        const auto& pair = p.kernels.pair(E, F);
        if (pair.form == khj::KernelPair::Form::zero)
            continue;
        if (pair.form != khj::KernelPair::Form::model)
            throw std::runtime_error("oracle handles model kernels only");
        const double c = pair.c(x);
        auto segs = net.distance_profile(E, x, F);
        for (const auto& seg : segs) {
            auto integrand = [&](double z) {
                double r = seg.r_at(z);
                if (r <= 0.0) // breakpoint rounding; a measure-zero sliver
                    return 0.0;
                double nu = c * std::pow(r, -(1.0 + sigma));
                if (cap > 0.0)
                    nu = std::min(nu, cap);
                return (profiles[F](z) - ux) * nu;
            };
            // refine toward the end where the distance is smallest, and split
            // at the cap crossover so every panel sees a smooth integrand
            double r0 = seg.r0, r1 = seg.r_at(seg.z1);
            double sing = r0 <= r1 ? seg.z0 : seg.z1;
            double z_split = seg.z1;
            if (cap > 0.0 && c > 0.0) {
                double rc = std::pow(c / cap, 1.0 / (1.0 + sigma));
                double zc = seg.z0 + (rc - seg.r0) / seg.slope;
                if (zc > seg.z0 && zc < seg.z1)
                    z_split = zc;
            }
            if (z_split < seg.z1) {
                if (sing == seg.z0) {
                    acc += dyadic_integral(integrand, seg.z0, z_split, seg.z0);
                    acc += smooth_integral(integrand, z_split, seg.z1, 1024);
                } else {
                    acc += smooth_integral(integrand, seg.z0, z_split, 1024);
                    acc += dyadic_integral(integrand, z_split, seg.z1, seg.z1);
                }
            } else {
                acc += dyadic_integral(integrand, seg.z0, seg.z1, sing);
            }
        }
    }
    return acc;
}

std::vector<khj::ScalarField> manufactured_f(const khj::NetProblem& p,
                                             const std::vector<khj::ScalarField>& u,
                                             const std::vector<khj::ScalarField>& du,
                                             const std::vector<khj::ScalarField>& d2u,
                                             double cap) {
    std::vector<khj::ScalarField> out(p.net.n_edges());
    for (std::size_t e = 0; e < p.net.n_edges(); ++e) {
        auto mu = (e < p.mu.size() && p.mu[e]) ? p.mu[e] : khj::ScalarField{};
        const auto& H = p.hamiltonians[e];
        double lambda = p.cfg.lambda, eps = p.cfg.eps;
        out[e] = [&p, u, du, d2u, mu, &H, lambda, eps, cap, e](double x) {
            double m = mu ? mu(x) : 0.0;
            double I = nonlocal_apply(p, u, e, x, cap);
            return lambda * u[e](x) - (m + eps) * d2u[e](x) - I + H(x, du[e](x));
        };
    }
    return out;
}

void set_manufactured_vertex_data(khj::NetProblem& p, const std::vector<khj::ScalarField>& u,
                                  const std::vector<khj::ScalarField>& du) {
    khj::NetworkSpec spec;
    for (std::size_t v = 0; v < p.net.n_vertices(); ++v) {
        khj::Vertex vx = p.net.vertex(v);
        if (vx.kind == khj::VertexKind::boundary) {
            auto [e, idx] = p.net.incidence(v)[0];
            double arc = idx > 0 ? 0.0 : p.net.length(e);
            vx.dirichlet_value = u[e](arc);
        } else {
            double B = 0.0;
            for (auto [e, idx] : p.net.incidence(v)) {
                double arc = idx > 0 ? 0.0 : p.net.length(e);
                B -= idx * du[e](arc); // inward derivative is idx * u_x
            }
            vx.kirchhoff_flux = B;
        }
        spec.vertices.push_back(std::move(vx));
    }
    for (std::size_t e = 0; e < p.net.n_edges(); ++e)
        spec.edges.push_back(p.net.edge(e));
    p.net = khj::Network::build(std::move(spec));
}

} // namespace oracles
