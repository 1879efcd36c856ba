#include "khj/flux_limiter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "khj/junction_solver.hpp"

namespace khj {

namespace {

std::size_t junction_of(const NetProblem& p) {
    auto interior = p.net.interior_vertices();
    if (interior.size() != 1)
        throw SolverError("flux-limiter layer expects a star junction");
    return interior[0];
}

// smallest p with H^-(p) >= level, i.e. the generalized inverse on the
// nondecreasing branch; bisection with 60 iterations (H^- may be flat below
// the minimizer, strictly increasing above it)
double inverse_minus(const JunctionHamiltonian& H, double level) {
    const double p0 = H.minimizer();
    const double at_min = H.eval(p0);
    if (level <= at_min)
        return p0; // the flat branch touches the level at (or below) p0
    double lo = p0;
    double hi = std::max(p0 + 1.0, H.lipschitz_p() * (level + H.lipschitz_p()) + 1.0);
    while (H.minus_part(hi) < level)
        hi = 2.0 * hi + 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (H.minus_part(mid) < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double fl_minus_grid_search(const std::vector<double>& g,
                            const std::vector<JunctionHamiltonian>& H, double B, double radius,
                            int points_per_axis, int zoom_rounds) {
    const std::size_t N = g.size();
    std::vector<double> center(N, 0.0);
    double span = radius;
    double best = 0.0;
    for (int round = 0; round < zoom_rounds; ++round) {
        best = std::numeric_limits<double>::infinity();
        std::vector<double> best_p(N, 0.0);
        std::vector<int> idx(N, 0);
        const int P = points_per_axis;
        std::vector<std::vector<double>> axis(N, std::vector<double>(P));
        for (std::size_t i = 0; i < N; ++i)
            for (int k = 0; k < P; ++k)
                axis[i][k] = center[i] - span + 2.0 * span * k / (P - 1);
        for (;;) {
            double constraint = -B;
            double val = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < N; ++i) {
                double pi = axis[i][idx[i]];
                constraint -= pi;
                val = std::max(val, g[i] + H[i].minus_part(pi));
            }
            val = std::max(val, constraint);
            if (val < best) {
                best = val;
                for (std::size_t i = 0; i < N; ++i)
                    best_p[i] = axis[i][idx[i]];
            }
            std::size_t d = 0;
            while (d < N && ++idx[d] == P) {
                idx[d] = 0;
                ++d;
            }
            if (d == N)
                break;
        }
        center = best_p;
        span = 4.0 * span / (P - 1);
    }
    return best;
}

FLState fl_minus_from_data(const std::vector<double>& g,
                           const std::vector<JunctionHamiltonian>& H, double B,
                           bool cross_check) {
    const std::size_t N = g.size();
    if (N == 0 || H.size() != N)
        throw SolverError("fl_minus_from_data: empty or mismatched inputs");

    FLState st;
    st.g = g;
    st.p0.resize(N);
    st.p_tilde.assign(N, 0.0);

    double t_lo = -std::numeric_limits<double>::infinity();
    std::vector<double> t_min(N);
    for (std::size_t i = 0; i < N; ++i) {
        st.p0[i] = H[i].minimizer();
        t_min[i] = g[i] + H[i].eval(st.p0[i]);
        t_lo = std::max(t_lo, t_min[i]);
    }

    // residual of the equalization: sum(-p_i(t)) - B - t, strictly decreasing
    auto excess = [&](double t, std::vector<double>& p) {
        double s = -B - t;
        for (std::size_t i = 0; i < N; ++i) {
            p[i] = inverse_minus(H[i], t - g[i]);
            s -= p[i];
        }
        return s;
    };

    std::vector<double> p(N);
    double e_lo = excess(t_lo, p);
    if (e_lo <= 0.0) {
        // flat optimum: the level cannot go below t_lo; spend the slack on the
        // flat branches so the Kirchhoff term equalizes too
        st.value = t_lo;
        st.p_tilde = p;
        std::vector<std::size_t> flat;
        for (std::size_t i = 0; i < N; ++i)
            if (t_min[i] >= t_lo - 1e-12 * std::max(1.0, std::abs(t_lo)))
                flat.push_back(i);
        double deficit = -e_lo; // = sum(-p) shortfall against t_lo + B
        for (std::size_t i : flat)
            st.p_tilde[i] -= deficit / static_cast<double>(flat.size());
    } else {
        double lo = t_lo;
        double hi = t_lo + 1.0;
        while (excess(hi, p) > 0.0)
            hi = t_lo + 2.0 * (hi - t_lo);
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (excess(mid, p) > 0.0 ? lo : hi) = mid;
        }
        st.value = 0.5 * (lo + hi);
        excess(st.value, st.p_tilde);
        // close the last bisection gap exactly on the Kirchhoff term
        double sum = 0.0;
        for (double v : st.p_tilde)
            sum -= v;
        double fix = (sum - B - st.value) / static_cast<double>(N);
        for (double& v : st.p_tilde)
            v += fix;
    }

    double gap = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        gap = std::max(gap, std::abs(g[i] + H[i].minus_part(st.p_tilde[i]) - st.value));
        sum -= st.p_tilde[i];
    }
    gap = std::max(gap, std::abs(sum - B - st.value));
    st.equalization_gap = gap;

    if (cross_check && N <= 4) {
        double radius = 1.0;
        for (double v : st.p_tilde)
            radius = std::max(radius, 2.0 * std::abs(v) + 1.0);
        double gs = fl_minus_grid_search(g, H, B, radius, 33, 5);
        st.grid_search_gap = std::abs(gs - st.value);
        if (st.grid_search_gap > 1e-3)
            throw SolverError("flux-limiter reduction disagrees with the grid search by " +
                              std::to_string(st.grid_search_gap));
    }
    return st;
}

std::vector<JunctionHamiltonian> junction_hamiltonians(const NetProblem& p) {
    const std::size_t O = junction_of(p);
    std::vector<JunctionHamiltonian> out;
    for (const auto& [e, idx] : p.net.incidence(O)) {
        if (!p.hamiltonians[e].convex())
            throw HamiltonianError("flux-limiter layer requires convex Hamiltonians");
        double x = idx > 0 ? 0.0 : p.net.length(e);
        out.emplace_back(p.hamiltonians[e], x, idx);
    }
    return out;
}

std::vector<double> fl_base_values(const GridFunction& u, const NetProblem& p) {
    const std::size_t O = junction_of(p);
    KernelFamily kern = p.kernels;
    kern.set_truncation(p.cfg.effective_eta(p.grids));
    std::vector<double> g;
    for (const auto& [e, idx] : p.net.incidence(O)) {
        std::size_t node = idx > 0 ? 0 : static_cast<std::size_t>(p.grids.n_cells(e));
        double Iu = nonlocal_apply(u, kern, e, node, 0.0);
        double fO = (e < p.f.size() && p.f[e]) ? p.f[e](p.grids.arc(e, node)) : 0.0;
        g.push_back(p.cfg.lambda * u.vertex_value(O) - Iu - fO);
    }
    return g;
}

FLState compute_fl_minus(const GridFunction& u, const NetProblem& p) {
    const std::size_t O = junction_of(p);
    auto g = fl_base_values(u, p);
    auto H = junction_hamiltonians(p);
    FLState st = fl_minus_from_data(g, H, p.kirchhoff_flux(O));
    st.eta = p.cfg.effective_eta(p.grids);
    st.delta = 0.0;
    return st;
}

CriticalSlopes critical_slopes(const GridFunction& u, const NetProblem& p) {
    const std::size_t O = junction_of(p);
    CriticalSlopes cs;
    for (const auto& [e, idx] : p.net.incidence(O)) {
        const std::size_t n = static_cast<std::size_t>(p.grids.n_cells(e));
        if (n < 4)
            throw GridError("critical_slopes needs at least 5 nodes per edge");
        const double h = p.grids.h(e);
        auto quotient = [&](std::size_t k) {
            std::size_t node = idx > 0 ? k : n - k;
            return (u.value(e, node) - u.vertex_value(O)) / (h * static_cast<double>(k));
        };
        double d1 = quotient(1), d2 = quotient(2), d4 = quotient(4);
        double extrapolated = (8.0 * d1 - 6.0 * d2 + d4) / 3.0;
        cs.upper.push_back(extrapolated);
        cs.lower.push_back(extrapolated);
        cs.uncertainty.push_back(std::abs(extrapolated - d1));
    }
    return cs;
}

namespace {

FLCheck fl_check(const GridFunction& u, const NetProblem& p, double tol, bool subsolution) {
    auto H = junction_hamiltonians(p);
    auto g = fl_base_values(u, p);
    auto slopes = critical_slopes(u, p);
    FLState st = compute_fl_minus(u, p);

    FLCheck out;
    out.fl_value = st.value;
    double worst = st.value;
    for (std::size_t i = 0; i < H.size(); ++i) {
        double pi = subsolution ? slopes.upper[i] : slopes.lower[i];
        double gp = g[i] + H[i].plus_part(pi);
        out.g_plus.push_back(gp);
        worst = std::max(worst, gp);
    }
    out.value = worst;
    if (subsolution) {
        out.pass = worst <= tol;
        out.margin = worst;
    } else {
        out.pass = worst >= -tol;
        out.margin = -worst;
    }
    return out;
}

} // namespace

FLCheck check_fl_subsolution(const GridFunction& u, const NetProblem& p, double tol) {
    return fl_check(u, p, tol, true);
}

FLCheck check_fl_supersolution(const GridFunction& u, const NetProblem& p, double tol) {
    return fl_check(u, p, tol, false);
}

} // namespace khj
