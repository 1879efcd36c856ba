#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cases.hpp"
#include "khj/network_solver.hpp"
#include "khj/verify.hpp"
#include "oracles.hpp"

using namespace khj;

namespace {

// chain b0 --e1-- i1 --e2-- i2 --e3-- b1, unit lengths, censored self kernels
// plus adjacent-pair coupling
NetProblem chain2(int n_cells, double c_self, double c_adj, double sigma) {
    NetworkSpec spec;
    spec.vertices.push_back({"b0", VertexKind::boundary, std::nullopt, 0.0});
    spec.vertices.push_back({"i1", VertexKind::interior, 0.0, std::nullopt});
    spec.vertices.push_back({"i2", VertexKind::interior, 0.0, std::nullopt});
    spec.vertices.push_back({"b1", VertexKind::boundary, std::nullopt, 0.0});
    spec.edges.push_back({"e1", "b0", "i1", 1.0});
    spec.edges.push_back({"e2", "i1", "i2", 1.0});
    spec.edges.push_back({"e3", "i2", "b1", 1.0});
    NetProblem p;
    p.net = Network::build(std::move(spec));
    p.grids = GridSet::uniform(p.net, n_cells);
    p.kernels = KernelFamily(3, std::max(1.0, std::max(c_self, c_adj)), sigma);
    auto model = [](double c) {
        KernelPair k;
        k.form = KernelPair::Form::model;
        k.c = Expr::constant(c);
        return k;
    };
    for (std::size_t e = 0; e < 3; ++e)
        if (c_self > 0.0)
            p.kernels.set_pair(e, e, model(c_self));
    if (c_adj > 0.0) {
        std::size_t e1 = p.net.edge_index("e1"), e2 = p.net.edge_index("e2"),
                    e3 = p.net.edge_index("e3");
        p.kernels.set_pair(e1, e2, model(c_adj));
        p.kernels.set_pair(e2, e1, model(c_adj));
        p.kernels.set_pair(e2, e3, model(c_adj));
        p.kernels.set_pair(e3, e2, model(c_adj));
    }
    p.hamiltonians.assign(3,
                          Hamiltonian::abs_shift(Expr::constant(0.0), Expr::constant(0.0), 2.0));
    p.f.resize(3);
    p.mu.resize(3);
    return p;
}

struct ManufacturedChain {
    NetProblem p;
    std::vector<ScalarField> u, du, d2u;
    std::vector<double> theta_star; // interior values in interior_vertices() order
};

ManufacturedChain manufactured_chain(int n_cells, double c_self, double c_adj, double sigma,
                                     double mu0, double eps) {
    ManufacturedChain mc{chain2(n_cells, c_self, c_adj, sigma), {}, {}, {}, {}};
    auto& p = mc.p;
    p.cfg.eps = eps;
    if (mu0 > 0.0)
        for (std::size_t e = 0; e < 3; ++e)
            p.mu[e] = [=](double) { return mu0; };
    const double t1 = 0.3 + 0.2 * std::sin(2.0); // u at i1
    const double t2 = t1 - 0.15;                 // u at i2
    std::size_t e1 = p.net.edge_index("e1"), e2 = p.net.edge_index("e2"),
                e3 = p.net.edge_index("e3");
    mc.u.resize(3);
    mc.du.resize(3);
    mc.d2u.resize(3);
    mc.u[e1] = [](double x) { return 0.3 + 0.2 * std::sin(2.0 * x); };
    mc.du[e1] = [](double x) { return 0.4 * std::cos(2.0 * x); };
    mc.d2u[e1] = [](double x) { return -0.8 * std::sin(2.0 * x); };
    mc.u[e2] = [=](double x) { return t1 - 0.25 * x + 0.1 * x * x; };
    mc.du[e2] = [](double x) { return -0.25 + 0.2 * x; };
    mc.d2u[e2] = [](double) { return 0.2; };
    mc.u[e3] = [=](double x) { return t2 + 0.1 * std::sin(3.0 * x); };
    mc.du[e3] = [](double x) { return 0.3 * std::cos(3.0 * x); };
    mc.d2u[e3] = [](double x) { return -0.9 * std::sin(3.0 * x); };
    oracles::set_manufactured_vertex_data(p, mc.u, mc.du);
    p.f = oracles::manufactured_f(p, mc.u, mc.du, mc.d2u, -1.0);
    p.reference = mc.u;
    for (std::size_t j : p.net.interior_vertices())
        mc.theta_star.push_back(p.net.vertex(j).id == "i1" ? t1 : t2);
    return mc;
}

} // namespace

TEST_SUITE_BEGIN("network_solver");

TEST_CASE("single interior vertex: residual map equals the junction residual") {
    auto p = cases::star(3, 20, 0.5, 0.2, 0.5, 0.3, {0.1, -0.2, 0.0});
    p.cfg.eps = 0.05;
    p.f[0] = [](double x) { return 0.2 * std::sin(x); };
    NetworkSolver solver(p);
    auto u = solver.dirichlet_solution({0.4});
    auto F = solver.residuals(u);
    REQUIRE(F.size() == 1);
    CHECK(F[0] == doctest::Approx(kirchhoff_residual(u, p)).epsilon(1e-14));
}

TEST_CASE("constant-compatible chain has vanishing residual map at the constant") {
    const double c = 0.4;
    auto p = chain2(16, 0.5, 0.15, 0.5);
    cases::set_vertex_data(p, 0.0, {c, c});
    for (std::size_t e = 0; e < 3; ++e)
        p.f[e] = [=](double) { return c; };
    p.cfg.eps = 0.04;
    NetworkSolver solver(p);
    auto F = solver.residual_map({c, c});
    for (double v : F)
        CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("manufactured chain: residual map nearly vanishes at the true values") {
    auto mc = manufactured_chain(40, 0.4, 0.1, 0.5, 0.0, 0.05);
    NetworkSolver solver(mc.p);
    auto F = solver.residual_map(mc.theta_star);
    for (double v : F)
        CHECK(std::abs(v) <= 10.0 * mc.p.grids.min_h());
}

TEST_CASE("certify_box on the junction reduces to two sign checks per vertex") {
    auto p = cases::star(3, 20, 0.4, 0.15, 0.5, 0.0, {0.2, 0.2, 0.2});
    p.cfg.eps = 0.05;
    NetworkSolver solver(p);
    double width = solver.default_theta_plus();
    auto cert = solver.certify_box(width);
    CHECK(cert.pass);
    CHECK(cert.samples.size() == 6); // one vertex, two faces, three samples each
    for (const auto& s : cert.samples)
        CHECK((s.side > 0 ? s.F_j > 0.0 : s.F_j < 0.0));
}

TEST_CASE("certify_box fails honestly when the box misses the solution") {
    const double c = 5.0; // constant solution far outside a tiny box
    auto p = chain2(12, 0.3, 0.1, 0.5);
    cases::set_vertex_data(p, 0.0, {c, c});
    for (std::size_t e = 0; e < 3; ++e)
        p.f[e] = [=](double) { return c; };
    p.cfg.eps = 0.05;
    NetworkSolver solver(p);
    auto cert = solver.certify_box(0.5);
    CHECK_FALSE(cert.pass);
    CHECK_FALSE(cert.failure.empty());
}

TEST_CASE("star network: solve_network matches solve_kirchhoff") {
    auto p = cases::star(3, 24, 0.5, 0.15, 0.5, 0.25, {0.1, -0.1, 0.2});
    p.cfg.eps = 0.05;
    p.cfg.tol_K = 1e-10;
    p.f[1] = [](double x) { return 0.3 * std::cos(2.0 * x); };
    auto junction = solve_kirchhoff(p);
    auto network = solve_network(p);
    REQUIRE(network.thetas.size() == 1);
    CHECK(network.converged);
    CHECK(std::abs(network.thetas[0] - junction.theta) <= 1e-8);
    double worst = 0.0;
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 0; m <= 24; ++m)
            worst = std::max(worst, std::abs(network.u.value(e, m) - junction.u.value(e, m)));
    CHECK(worst <= 1e-8);
    // the accepted root sits strictly inside the certified box
    CHECK(std::abs(network.thetas[0]) < network.certificate.theta_plus);
}

TEST_CASE("manufactured chain: recovered vertex values and solution error") {
    auto mc = manufactured_chain(50, 0.4, 0.1, 0.5, 0.0, 0.05);
    auto sol = solve_network(mc.p);
    REQUIRE(sol.thetas.size() == 2);
    const double h = mc.p.grids.min_h();
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(sol.thetas[j] - mc.theta_star[j]) <= 3.0 * h);
    double err = 0.0;
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 0; m <= 50; ++m)
            err = std::max(err, std::abs(sol.u.value(e, m) - mc.u[e](mc.p.grids.arc(e, m))));
    CHECK(err <= 3.0 * h);
}

TEST_CASE("symmetric tree keeps its symmetry group") {
    NetworkSpec spec;
    spec.vertices.push_back({"i0", VertexKind::interior, 0.0, std::nullopt});
    spec.vertices.push_back({"i1", VertexKind::interior, 0.0, std::nullopt});
    spec.vertices.push_back({"i2", VertexKind::interior, 0.0, std::nullopt});
    spec.vertices.push_back({"u1", VertexKind::boundary, std::nullopt, 0.3});
    spec.vertices.push_back({"u2", VertexKind::boundary, std::nullopt, 0.3});
    spec.vertices.push_back({"w1", VertexKind::boundary, std::nullopt, -0.1});
    spec.vertices.push_back({"w2", VertexKind::boundary, std::nullopt, -0.1});
    spec.edges.push_back({"a1", "i0", "i1", 1.0});
    spec.edges.push_back({"a2", "i0", "i2", 1.0});
    spec.edges.push_back({"c1", "i1", "u1", 1.0});
    spec.edges.push_back({"d1", "i1", "w1", 1.0});
    spec.edges.push_back({"c2", "i2", "u2", 1.0});
    spec.edges.push_back({"d2", "i2", "w2", 1.0});
    NetProblem p;
    p.net = Network::build(std::move(spec));
    p.grids = GridSet::uniform(p.net, 12);
    p.kernels = KernelFamily(6, 1.0, 0.5);
    for (std::size_t e = 0; e < 6; ++e) {
        KernelPair k;
        k.form = KernelPair::Form::model;
        k.c = Expr::constant(0.4);
        p.kernels.set_pair(e, e, k);
    }
    p.hamiltonians.assign(6,
                          Hamiltonian::abs_shift(Expr::constant(0.0), Expr::constant(0.0), 2.0));
    p.f.resize(6);
    p.mu.resize(6);
    p.cfg.eps = 0.05;
    p.cfg.tol_K = 1e-10;
    auto sol = solve_network(p);
    auto interior = p.net.interior_vertices();
    double th1 = 0.0, th2 = 0.0;
    for (std::size_t j = 0; j < interior.size(); ++j) {
        if (p.net.vertex(interior[j]).id == "i1")
            th1 = sol.thetas[j];
        if (p.net.vertex(interior[j]).id == "i2")
            th2 = sol.thetas[j];
    }
    CHECK(std::abs(th1 - th2) <= 1e-8);
}

TEST_CASE("viscous pipeline: constant solution and ellipticity precondition") {
    const double c = 0.25;
    auto p = chain2(16, 0.4, 0.1, 0.5);
    cases::set_vertex_data(p, 0.0, {c, c});
    p.cfg.tol_K = 1e-10;
    for (std::size_t e = 0; e < 3; ++e) {
        p.f[e] = [=](double) { return c; };
        p.mu[e] = [](double) { return 1.0; };
    }
    auto sol = solve_viscous_network(p);
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 0; m <= 16; ++m)
            CHECK(sol.u.value(e, m) == doctest::Approx(c).epsilon(1e-8));
    CHECK(sol.residual_norm <= p.cfg.tol_K);

    auto bad = chain2(16, 0.4, 0.1, 0.5);
    cases::set_vertex_data(bad, 0.0, {c, c});
    bad.mu.assign(3, ScalarField{}); // mu = 0
    CHECK_THROWS_AS(solve_viscous_network(bad), SolverError);
}

TEST_CASE("viscous manufactured chain converges at second order") {
    // strictly elliptic, censored kernels, excluded-window compensation
    std::vector<ConvergenceRow> rows;
    for (int n : {16, 32, 64}) {
        auto mc = manufactured_chain(n, 0.5, 0.0, 0.25, 1.0, 0.0);
        mc.p.cfg.singular_rule = SingularRule::exclude_compensate;
        auto sol = solve_viscous_network(mc.p);
        double err = 0.0;
        for (std::size_t e = 0; e < 3; ++e)
            for (int m = 0; m <= n; ++m)
                err = std::max(err,
                               std::abs(sol.u.value(e, static_cast<std::size_t>(m)) -
                                        mc.u[e](mc.p.grids.arc(e, static_cast<std::size_t>(m)))));
        rows.push_back({1.0 / n, err});
        CHECK(sol.second_diff_bound <= 20.0); // classical matching: u'' stays bounded
    }
    CHECK(fit_order(rows) >= 1.7);
}

TEST_CASE("ordered data order the full Kirchhoff solutions across the network") {
    auto lo = chain2(20, 0.4, 0.1, 0.5);
    cases::set_vertex_data(lo, 0.0, {0.0, 0.1});
    auto hi = chain2(20, 0.4, 0.1, 0.5);
    cases::set_vertex_data(hi, 0.0, {0.4, 0.5});
    lo.cfg.eps = hi.cfg.eps = 0.05;
    lo.cfg.tol_K = hi.cfg.tol_K = 1e-11;
    for (std::size_t e = 0; e < 3; ++e) {
        lo.f[e] = [](double x) { return 0.2 * std::sin(2.0 * x); };
        hi.f[e] = [](double x) { return 0.2 * std::sin(2.0 * x) + 0.3; };
    }
    auto slo = solve_network(lo);
    auto shi = solve_network(hi);
    auto out = compare_solutions(slo.u, shi.u, 1e-10);
    CHECK(out.violations == 0);
}

TEST_CASE("permuting the input listing changes nothing bitwise") {
    auto build = [](bool shuffled) {
        NetworkSpec spec;
        std::vector<Vertex> vs = {{"O", VertexKind::interior, 0.2, std::nullopt},
                                  {"v1", VertexKind::boundary, std::nullopt, 0.1},
                                  {"v2", VertexKind::boundary, std::nullopt, -0.3},
                                  {"v3", VertexKind::boundary, std::nullopt, 0.0}};
        std::vector<Edge> es = {{"e1", "O", "v1", 1.0},
                                {"e2", "O", "v2", 1.2},
                                {"e3", "O", "v3", 0.8}};
        if (shuffled) {
            std::swap(vs[0], vs[3]);
            std::swap(vs[1], vs[2]);
            std::swap(es[0], es[2]);
        }
        spec.vertices = vs;
        spec.edges = es;
        NetProblem p;
        p.net = Network::build(std::move(spec));
        p.grids = GridSet::uniform(p.net, 20);
        p.kernels = KernelFamily(3, 1.0, 0.5);
        for (std::size_t E = 0; E < 3; ++E)
            for (std::size_t F = 0; F < 3; ++F) {
                KernelPair k;
                k.form = KernelPair::Form::model;
                k.c = Expr::constant(E == F ? 0.5 : 0.1);
                p.kernels.set_pair(E, F, k);
            }
        p.hamiltonians.assign(
            3, Hamiltonian::abs_shift(Expr::constant(0.1), Expr::constant(0.0), 2.0));
        p.f.resize(3);
        p.mu.resize(3);
        p.cfg.eps = 0.05;
        return p;
    };
    auto a = build(false);
    auto b = build(true);
    auto sa = solve_kirchhoff(a);
    auto sb = solve_kirchhoff(b);
    CHECK(sa.theta == sb.theta); // bitwise
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 0; m <= 20; ++m)
            CHECK(sa.u.value(e, m) == sb.u.value(e, m));
}

TEST_SUITE_END();
