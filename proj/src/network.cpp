#include "khj/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace khj {

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    if (violations.empty()) {
        os << "ok";
        return os.str();
    }
    for (const auto& v : violations)
        os << v.where << ": " << v.what << "\n";
    return os.str();
}

ValidationReport validate(const NetworkSpec& spec) {
    ValidationReport rep;
    auto add = [&](const std::string& where, const std::string& what) {
        rep.violations.push_back({where, what});
    };

    std::map<std::string, std::size_t> vidx;
    for (const auto& v : spec.vertices) {
        if (vidx.count(v.id))
            add(v.id, "duplicate vertex id");
        vidx[v.id] = 1;
        const bool has_B = v.kirchhoff_flux.has_value();
        const bool has_h = v.dirichlet_value.has_value();
        if (v.kind == VertexKind::interior && (!has_B || has_h))
            add(v.id, "interior vertex must carry a Kirchhoff flux and no Dirichlet value");
        if (v.kind == VertexKind::boundary && (!has_h || has_B))
            add(v.id, "boundary vertex must carry a Dirichlet value and no Kirchhoff flux");
    }
    if (spec.vertices.empty())
        add("network", "no vertices");

    std::set<std::string> eids;
    std::set<std::pair<std::string, std::string>> endpoint_pairs;
    for (const auto& e : spec.edges) {
        if (!eids.insert(e.id).second)
            add(e.id, "duplicate edge id");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            add(e.id, "edge length must be strictly positive");
        if (e.tail == e.head)
            add(e.id, "self-loop rejected");
        if (!vidx.count(e.tail))
            add(e.id, "tail vertex '" + e.tail + "' not found");
        if (!vidx.count(e.head))
            add(e.id, "head vertex '" + e.head + "' not found");
        auto key = std::minmax(e.tail, e.head);
        if (!endpoint_pairs.insert({key.first, key.second}).second)
            add(e.id, "parallel edge rejected");
    }
    if (spec.edges.empty())
        add("network", "no edges");

    if (!rep.ok())
        return rep;

    // connectivity and incident-edge coverage
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : spec.edges) {
        adj[e.tail].push_back(e.head);
        adj[e.head].push_back(e.tail);
    }
    for (const auto& v : spec.vertices)
        if (!adj.count(v.id))
            add(v.id, "vertex has no incident edge");
    if (!rep.ok())
        return rep;

    std::set<std::string> seen;
    std::queue<std::string> frontier;
    frontier.push(spec.vertices.front().id);
    seen.insert(spec.vertices.front().id);
    while (!frontier.empty()) {
        auto cur = frontier.front();
        frontier.pop();
        for (const auto& nb : adj[cur])
            if (seen.insert(nb).second)
                frontier.push(nb);
    }
    if (seen.size() != spec.vertices.size())
        add("network", "graph is not connected");
    return rep;
}

Network Network::build(NetworkSpec spec) {
    auto rep = validate(spec);
    if (!rep.ok())
        throw NetworkError("invalid network:\n" + rep.to_string());

    Network net;
    std::sort(spec.vertices.begin(), spec.vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    std::sort(spec.edges.begin(), spec.edges.end(),
              [](const Edge& a, const Edge& b) { return a.id < b.id; });
    net.vertices_ = std::move(spec.vertices);
    net.edges_ = std::move(spec.edges);

    net.tail_.resize(net.edges_.size());
    net.head_.resize(net.edges_.size());
    for (std::size_t e = 0; e < net.edges_.size(); ++e) {
        net.tail_[e] = net.vertex_index(net.edges_[e].tail);
        net.head_[e] = net.vertex_index(net.edges_[e].head);
    }

    // all-pairs vertex distances (graphs are tiny, Floyd-Warshall is enough)
    const std::size_t n = net.vertices_.size();
    const double inf = std::numeric_limits<double>::infinity();
    net.vdist_.assign(n * n, inf);
    for (std::size_t v = 0; v < n; ++v)
        net.vdist_[v * n + v] = 0.0;
    for (std::size_t e = 0; e < net.edges_.size(); ++e) {
        std::size_t a = net.tail_[e], b = net.head_[e];
        double len = net.edges_[e].length;
        net.vdist_[a * n + b] = std::min(net.vdist_[a * n + b], len);
        net.vdist_[b * n + a] = std::min(net.vdist_[b * n + a], len);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                net.vdist_[i * n + j] =
                    std::min(net.vdist_[i * n + j], net.vdist_[i * n + k] + net.vdist_[k * n + j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = std::min(net.vdist_[i * n + j], net.vdist_[j * n + i]);
            net.vdist_[i * n + j] = net.vdist_[j * n + i] = d;
        }
    return net;
}

std::size_t Network::vertex_index(const std::string& id) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id,
                               [](const Vertex& v, const std::string& s) { return v.id < s; });
    if (it == vertices_.end() || it->id != id)
        throw NetworkError("unknown vertex id '" + id + "'");
    return static_cast<std::size_t>(it - vertices_.begin());
}

std::size_t Network::edge_index(const std::string& id) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                               [](const Edge& e, const std::string& s) { return e.id < s; });
    if (it == edges_.end() || it->id != id)
        throw NetworkError("unknown edge id '" + id + "'");
    return static_cast<std::size_t>(it - edges_.begin());
}

std::vector<std::size_t> Network::interior_vertices() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < vertices_.size(); ++v)
        if (vertices_[v].kind == VertexKind::interior)
            out.push_back(v);
    return out;
}

std::vector<std::size_t> Network::boundary_vertices() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < vertices_.size(); ++v)
        if (vertices_[v].kind == VertexKind::boundary)
            out.push_back(v);
    return out;
}

std::vector<std::pair<std::size_t, int>> Network::incidence(std::size_t v) const {
    if (v >= vertices_.size())
        throw NetworkError("vertex index out of range");
    std::vector<std::pair<std::size_t, int>> out;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (tail_[e] == v)
            out.push_back({e, +1});
        else if (head_[e] == v)
            out.push_back({e, -1});
    }
    return out;
}

std::vector<std::pair<std::size_t, int>> Network::incidence(const std::string& vertex_id) const {
    return incidence(vertex_index(vertex_id));
}

int Network::incidence_index(std::size_t e, std::size_t v) const {
    if (tail_[e] == v)
        return +1;
    if (head_[e] == v)
        return -1;
    throw NetworkError("edge '" + edges_[e].id + "' is not incident to vertex '" + vertices_[v].id + "'");
}

double Network::point_vertex_distance(std::size_t e, double arc, std::size_t v) const {
    const std::size_t n = vertices_.size();
    double via_tail = arc + vdist_[tail_[e] * n + v];
    double via_head = (edges_[e].length - arc) + vdist_[head_[e] * n + v];
    return std::min(via_tail, via_head);
}

double Network::geodesic(const NetPoint& x, const NetPoint& y) const {
    if (x.edge >= edges_.size() || y.edge >= edges_.size())
        throw NetworkError("edge index out of range");
    if (x.arc < -1e-14 || x.arc > edges_[x.edge].length + 1e-14 || y.arc < -1e-14 ||
        y.arc > edges_[y.edge].length + 1e-14)
        throw NetworkError("arc coordinate outside edge");

    double best = std::numeric_limits<double>::infinity();
    if (x.edge == y.edge)
        best = std::abs(x.arc - y.arc);
    // any route leaving the edges passes through one endpoint of each
    const std::size_t ends_x[2] = {tail_[x.edge], head_[x.edge]};
    const double off_x[2] = {x.arc, edges_[x.edge].length - x.arc};
    const std::size_t ends_y[2] = {tail_[y.edge], head_[y.edge]};
    const double off_y[2] = {y.arc, edges_[y.edge].length - y.arc};
    const std::size_t n = vertices_.size();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            // symmetric summation order so geodesic(x,y) == geodesic(y,x) exactly
            double lo = std::min(off_x[i], off_y[j]), hi = std::max(off_x[i], off_y[j]);
            best = std::min(best, (lo + hi) + vdist_[ends_x[i] * n + ends_y[j]]);
        }
    return best;
}

namespace {

struct Affine {
    double c;
    int slope;
    double at(double z) const { return c + slope * z; }
};

// lower envelope of slope +-1 affine functions on [lo, hi]
void envelope(const std::vector<Affine>& fs, double lo, double hi, std::vector<DistSeg>& out) {
    if (hi <= lo)
        return;
    std::vector<double> cuts{lo, hi};
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = i + 1; j < fs.size(); ++j) {
            if (fs[i].slope == fs[j].slope)
                continue;
            double z = (fs[j].c - fs[i].c) / double(fs[i].slope - fs[j].slope);
            if (z > lo && z < hi)
                cuts.push_back(z);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = cuts[k + 1];
        double mid = 0.5 * (a + b);
        const Affine* winner = &fs[0];
        for (const auto& f : fs)
            if (f.at(mid) < winner->at(mid))
                winner = &f;
        out.push_back({a, b, winner->at(a), winner->slope});
    }
}

} // namespace

std::vector<DistSeg> Network::distance_profile(std::size_t E, double arc, std::size_t F) const {
    const double aF = edges_[F].length;
    double d_tail = point_vertex_distance(E, arc, tail_[F]);
    double d_head = point_vertex_distance(E, arc, head_[F]);

    std::vector<DistSeg> out;
    std::vector<Affine> routes{{d_tail, +1}, {d_head + aF, -1}};
    if (E != F) {
        envelope(routes, 0.0, aF, out);
        return out;
    }
    // same edge: the direct |arc - z| route, split at z = arc
    auto left = routes;
    left.push_back({arc, -1});
    envelope(left, 0.0, std::min(arc, aF), out);
    auto right = routes;
    right.push_back({-arc, +1});
    envelope(right, std::min(arc, aF), aF, out);
    return out;
}

bool Network::is_star() const {
    auto ints = interior_vertices();
    if (ints.size() != 1)
        return false;
    std::size_t o = ints[0];
    for (std::size_t e = 0; e < edges_.size(); ++e)
        if (tail_[e] != o && head_[e] != o)
            return false;
    return true;
}

} // namespace khj
