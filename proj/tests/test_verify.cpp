#include <doctest.h>

#include <cmath>

#include "cases.hpp"
#include "khj/edge_solver.hpp"
#include "khj/junction_solver.hpp"
#include "khj/verify.hpp"
#include "oracles.hpp"

using namespace khj;

TEST_SUITE_BEGIN("verify");

TEST_CASE("c0 constant plug-ins") {
    auto zero = cases::star(2, 8, 0.0, 0.0, 0.5, 0.0, {0.0, 0.0});
    CHECK(c0_constant(zero, 0.0) == doctest::Approx(0.0));

    // max |H(x,0)| = 1 via H = |p| + 1, theta = 3, max |h| = 2
    auto p = cases::star(2, 8, 0.0, 0.0, 0.5, 0.0, {2.0, -1.0});
    p.hamiltonians.assign(2,
                          Hamiltonian::abs_shift(Expr::constant(0.0), Expr::constant(1.0), 2.0));
    p.cfg.lambda = 2.0;
    CHECK(c0_constant(p, 3.0) == doctest::Approx(6.0)); // min(lambda,1) = 1
    p.cfg.lambda = 0.5;
    CHECK(c0_constant(p, 3.0) == doctest::Approx(12.0)); // denominator halves
}

TEST_CASE("barrier ramp profile") {
    const double L = 7.0, delta = 0.2, alpha = 0.5;
    // slope at the origin is L
    CHECK(barrier_ramp(L, delta, alpha, 1e-10) / 1e-10 == doctest::Approx(L).epsilon(1e-4));
    // frozen beyond delta
    CHECK(barrier_ramp(L, delta, alpha, 0.5) ==
          doctest::Approx(barrier_ramp(L, delta, alpha, delta)));
    // nondecreasing on [0, delta] under the smallness condition
    double cap = std::pow(2.0 * (1.0 + alpha), -1.0 / alpha);
    double prev = 0.0;
    for (double x = 0.0; x <= cap; x += cap / 50.0) {
        double v = barrier_ramp(L, cap, alpha, x);
        CHECK(v >= prev - 1e-14);
        prev = v;
    }
}

TEST_CASE("barriers anchor at the vertices and cap at C0") {
    auto p = cases::star(3, 32, 0.5, 0.1, 0.5, 0.0, {0.3, -0.2, 0.1});
    p.cfg.eps = 0.05;
    const double theta = 0.25;
    auto b = build_barriers(p, theta);
    std::size_t O = p.net.vertex_index("O");
    CHECK(b.upper.vertex_value(O) == doctest::Approx(theta));
    CHECK(b.lower.vertex_value(O) == doctest::Approx(theta));
    for (const auto& [e, idx] : p.net.incidence(O)) {
        std::size_t far = idx > 0 ? p.net.head_of(e) : p.net.tail_of(e);
        double h_i = p.boundary_value(far);
        CHECK(b.upper.vertex_value(far) == doctest::Approx(h_i));
        CHECK(b.lower.vertex_value(far) == doctest::Approx(h_i));
        // the C0 plateau is active away from the ramps
        CHECK(b.upper.value(e, 16) == doctest::Approx(b.constants.C0));
    }
    CHECK(b.constants.delta < std::pow(2.0 * 1.5, -2.0));
}

TEST_CASE("converged viscous junction sits between its barriers") {
    auto p = cases::star(3, 32, 0.5, 0.15, 0.5, 0.2, {0.1, -0.1, 0.2});
    p.cfg.eps = 0.05;
    p.f[0] = [](double x) { return 0.3 * std::sin(2.0 * x); };
    auto solve = solve_kirchhoff(p);
    auto b = build_barriers(p, solve.theta);
    auto viol = barrier_check(solve.u, b);
    CHECK(viol.empty());
    CHECK(solve.u.max_abs() <= c0_constant(p, solve.theta) + 1e-10);

    // pushing the candidate above the upper barrier is detected
    GridFunction bad = b.upper;
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 1; m < 32; ++m)
            bad.set_value(e, m, b.upper.value(e, m) + 0.1);
    auto viol2 = barrier_check(bad, b);
    CHECK(viol2.size() == 3 * 31);
}

TEST_CASE("constant solution sits between barriers anchored at the constant") {
    const double c = 0.4;
    auto p = cases::star(2, 16, 0.4, 0.1, 0.5, 0.0, {c, c});
    p.cfg.eps = 0.05;
    for (std::size_t e = 0; e < 2; ++e)
        p.f[e] = [=](double) { return c; };
    auto [u, rep] = solve_dirichlet_star(p, c);
    (void)rep;
    auto b = build_barriers(p, c);
    CHECK(barrier_check(u, b).empty());
}

TEST_CASE("ordered Dirichlet data order the solutions exactly") {
    auto lo = cases::star(2, 24, 0.5, 0.2, 0.5, 0.0, {0.0, 0.1});
    auto hi = cases::star(2, 24, 0.5, 0.2, 0.5, 0.0, {1.0, 1.1});
    lo.cfg.eps = hi.cfg.eps = 0.03;
    auto out = comparison_test(lo, hi, 0.1, 0.6);
    CHECK(out.violations == 0);
}

TEST_CASE("identical data produce bitwise identical solutions") {
    auto p = cases::star(2, 24, 0.5, 0.2, 0.5, 0.0, {0.2, -0.1});
    p.cfg.eps = 0.03;
    p.f[0] = [](double x) { return 0.3 * std::cos(3.0 * x); };
    auto a = solve_kirchhoff(p);
    auto b = solve_kirchhoff(p);
    CHECK(a.theta == b.theta);
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t m = 0; m <= 24; ++m)
            CHECK(a.u.value(e, m) == b.u.value(e, m));
}

TEST_CASE("resolvent bound: f + 1 moves the solution by at most 1/lambda") {
    auto lo = cases::star(2, 24, 0.5, 0.2, 0.5, 0.0, {0.1, -0.2});
    auto hi = cases::star(2, 24, 0.5, 0.2, 0.5, 0.0, {0.1, -0.2});
    lo.cfg.eps = hi.cfg.eps = 0.03;
    lo.cfg.lambda = hi.cfg.lambda = 1.0;
    for (std::size_t e = 0; e < 2; ++e) {
        lo.f[e] = [](double x) { return 0.2 * std::sin(x); };
        hi.f[e] = [](double x) { return 0.2 * std::sin(x) + 1.0; };
    }
    auto [ulo, r1] = solve_dirichlet_star(lo, 0.15, StarSolveMode::newton);
    auto [uhi, r2] = solve_dirichlet_star(hi, 0.15, StarSolveMode::newton);
    (void)r1;
    (void)r2;
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t m = 0; m <= 24; ++m) {
            double gap = uhi.value(e, m) - ulo.value(e, m);
            CHECK(gap >= -1e-10);
            CHECK(gap <= 1.0 + 1e-10);
        }
}

TEST_CASE("manufactured viscous interval converges at first order or better") {
    const double pi = 3.14159265358979323846;
    auto base = cases::interval(1.0, 50, 1.0, 0.5);
    base.cfg.eps = 0.1;
    std::vector<ScalarField> u{[=](double x) { return std::sin(pi * x); }};
    std::vector<ScalarField> du{[=](double x) { return pi * std::cos(pi * x); }};
    std::vector<ScalarField> d2u{[=](double x) { return -pi * pi * std::sin(pi * x); }};
    base.f = oracles::manufactured_f(base, u, du, d2u, -1.0);
    base.reference = u;
    auto study = convergence_study(base, {50, 100, 200}, [](const NetProblem& p) {
        DirichletEngine eng(p, p.cfg.effective_eta(p.grids), p.cfg.eps);
        return eng.solve(p.vertex_values({}), StarSolveMode::newton);
    });
    CHECK_FALSE(study.exact);
    CHECK(study.observed_order >= 0.9);
    CHECK(study.rows[1].error <= 0.02);
}

TEST_CASE("constant solutions report an exact study") {
    const double c = 0.3;
    auto base = cases::star(2, 16, 0.4, 0.1, 0.5, 0.0, {c, c});
    base.cfg.eps = 0.05;
    for (std::size_t e = 0; e < 2; ++e)
        base.f[e] = [=](double) { return c; };
    base.reference.assign(2, [=](double) { return c; });
    auto study = convergence_study(base, {16, 32}, [](const NetProblem& p) {
        return solve_kirchhoff(p).u;
    });
    CHECK(study.exact);
}

TEST_CASE("degenerate junction self-converges at order >= 0.8") {
    auto base = cases::star(2, 25, 0.3, 0.08, 0.5, 0.1, {0.15, -0.05});
    base.cfg.eps = 0.0; // eikonal-type limit
    base.f[0] = [](double x) { return 0.4 + 0.1 * std::sin(x); };
    base.f[1] = [](double x) { return 0.35 + 0.05 * std::cos(x); };
    auto study = convergence_study(base, {25, 50, 100, 200}, [](const NetProblem& p) {
        return solve_kirchhoff(p).u;
    });
    CHECK(study.observed_order >= 0.8);
}

TEST_CASE("Hoelder transfer of the nonlocal image stays stable across grids") {
    auto p = cases::interval(1.0, 50, 1.0, 0.5);
    auto rows = hoelder_transfer(p.net, p.kernels, [](double x) { return std::pow(x, 0.9); },
                                 0.9, {50, 100, 200});
    REQUIRE(rows.size() == 3);
    double lo = rows[0].image_seminorm, hi = rows[0].image_seminorm;
    for (const auto& r : rows) {
        lo = std::min(lo, r.image_seminorm);
        hi = std::max(hi, r.image_seminorm);
        // bounded by C * (kernel constants) * input seminorm
        CHECK(r.image_seminorm <= 8.0 * p.kernels.lambda_bound() * r.input_seminorm);
    }
    CHECK(hi / lo < 1.2);
}

TEST_SUITE_END();
