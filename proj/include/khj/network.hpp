#ifndef KHJ_NETWORK_HPP
#define KHJ_NETWORK_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace khj {

enum class VertexKind { interior, boundary };

struct Vertex {
    std::string id;
    VertexKind kind = VertexKind::boundary;
    std::optional<double> kirchhoff_flux; // B, present iff interior
    std::optional<double> dirichlet_value; // h, present iff boundary
};

struct Edge {
    std::string id;
    std::string tail; // vertex at arc 0
    std::string head; // vertex at arc length
    double length = 0.0;
};

struct NetPoint {
    std::size_t edge = 0;
    double arc = 0.0;
};

struct Violation {
    std::string where; // vertex/edge id
    std::string what;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Raw description before invariants are established.
struct NetworkSpec {
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
};

ValidationReport validate(const NetworkSpec& spec);

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Segment of the piecewise-linear geodesic distance z -> rho(x, gamma_F(z)).
struct DistSeg {
    double z0, z1; // arc subinterval of the target edge
    double r0;     // distance at z0
    int slope;     // +1 or -1
    double r_at(double z) const { return r0 + slope * (z - z0); }
};

// Metric graph, immutable after construction. Vertices and edges are stored
// sorted by id, so two relabelings of the same network produce identical
// internal orderings (and bitwise identical downstream results).
class Network {
public:
    static Network build(NetworkSpec spec); // throws NetworkError on violations

    std::size_t n_vertices() const { return vertices_.size(); }
    std::size_t n_edges() const { return edges_.size(); }
    const Vertex& vertex(std::size_t v) const { return vertices_[v]; }
    const Edge& edge(std::size_t e) const { return edges_[e]; }

    std::size_t vertex_index(const std::string& id) const;
    std::size_t edge_index(const std::string& id) const;
    std::size_t tail_of(std::size_t e) const { return tail_[e]; }
    std::size_t head_of(std::size_t e) const { return head_[e]; }
    double length(std::size_t e) const { return edges_[e].length; }

    std::vector<std::size_t> interior_vertices() const;
    std::vector<std::size_t> boundary_vertices() const;

    // All edges incident to v with the index of incidence: +1 when v is the
    // tail (gamma_E(0)), -1 when v is the head (gamma_E(a_E)).
    std::vector<std::pair<std::size_t, int>> incidence(std::size_t v) const;
    std::vector<std::pair<std::size_t, int>> incidence(const std::string& vertex_id) const;
    int incidence_index(std::size_t e, std::size_t v) const;

    double geodesic(const NetPoint& x, const NetPoint& y) const;
    // Shortest-path distance from an on-edge point to a vertex.
    double point_vertex_distance(std::size_t e, double arc, std::size_t v) const;
    // Vertex-to-vertex shortest path length.
    double vertex_distance(std::size_t a, std::size_t b) const { return vdist_[a * vertices_.size() + b]; }

    // Lower envelope of the admissible routes from x=(E,arc) to points of F,
    // split so each segment has slope +-1. Covers [0, length(F)].
    std::vector<DistSeg> distance_profile(std::size_t E, double arc, std::size_t F) const;

    bool is_star() const; // exactly one interior vertex, all edges incident to it

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> tail_, head_;
    std::vector<double> vdist_; // dense all-pairs matrix
};

} // namespace khj

#endif
