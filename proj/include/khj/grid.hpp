#ifndef KHJ_GRID_HPP
#define KHJ_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "khj/network.hpp"

namespace khj {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniform per-edge grids aligned with the network: edge E carries nodes at
// arc m*h_E, m = 0..n_E, node 0 at the tail vertex.
class GridSet {
public:
    GridSet() = default;
    GridSet(const Network& net, std::vector<int> n_cells);
    static GridSet uniform(const Network& net, int n_cells);
    // cells chosen so h_E <= h_target on every edge
    static GridSet with_spacing(const Network& net, double h_target);

    std::size_t n_edges() const { return n_.size(); }
    int n_cells(std::size_t e) const { return n_[e]; }
    double h(std::size_t e) const { return h_[e]; }
    double min_h() const;
    double arc(std::size_t e, std::size_t m) const { return h_[e] * static_cast<double>(m); }

private:
    std::vector<int> n_;
    std::vector<double> h_;
};

// Nodal values of a function continuous at vertices. Vertex values are stored
// once per vertex and viewed from each incident edge, so continuity is a
// property of the representation, not a checked condition.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const Network& net, const GridSet& grids, double fill = 0.0);

    double value(std::size_t e, std::size_t m) const;
    void set_value(std::size_t e, std::size_t m, double v);
    double vertex_value(std::size_t v) const { return vertex_[v]; }
    void set_vertex_value(std::size_t v, double val) { vertex_[v] = val; }

    std::vector<double> edge_values(std::size_t e) const; // nodes 0..n
    const Network& network() const { return *net_; }
    const GridSet& grids() const { return *grids_; }

    double max_abs() const;
    // max nodewise |u - v| over all edges (grids must match)
    static double max_diff(const GridFunction& u, const GridFunction& v);

    // same values viewed over another (identically shaped) network/grid pair;
    // used when a solution must outlive the problem instance it came from
    GridFunction rebound(const Network& net, const GridSet& grids) const;

private:
    const Network* net_ = nullptr;
    const GridSet* grids_ = nullptr;
    std::vector<std::vector<double>> interior_; // per edge, nodes 1..n-1
    std::vector<double> vertex_;
};

// Handling of the kernel singularity at the evaluation node: cap the kernel
// value at eta^{-1} (default, eta tied to h), or exclude the geodesic ball of
// radius h and compensate the excluded self-pair window with a second-
// difference Taylor term (restores accuracy when the diffusion dominates).
enum class SingularRule { truncate, exclude_compensate };

struct SolverConfig {
    double lambda = 1.0;  // steady zero-order coefficient, > 0
    double eps = 0.0;     // vanishing-viscosity weight
    double eta = 0.0;     // kernel truncation; 0 = tie to the grid (min h)
    double tol_fp = 1e-10;
    double tol_K = 1e-8;
    int max_iter = 200000;
    double damping_floor = 1e-6;
    bool use_newton = true;
    SingularRule singular_rule = SingularRule::truncate;
    std::vector<double> eps_schedule;
    std::vector<double> eta_schedule;
    unsigned threads = 0; // 0 = hardware default; capped by KHJ_THREADS

    double effective_eta(const GridSet& grids) const;
    void check() const;
};

// Second-order one-sided difference at an edge endpoint, sign-adjusted by the
// index of incidence: returns the inward derivative of u along E at v.
double vertex_slope(const GridFunction& u, std::size_t e, std::size_t v);

} // namespace khj

#endif
