#include <doctest.h>

#include <cmath>
#include <random>

#include "cases.hpp"
#include "khj/nonlocal.hpp"
#include "oracles.hpp"

using namespace khj;

namespace {

GridFunction fill(const NetProblem& p, const std::function<double(double)>& profile) {
    GridFunction u(p.net, p.grids);
    for (std::size_t e = 0; e < p.net.n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(p.grids.n_cells(e));
        for (std::size_t m = 0; m <= n; ++m)
            u.set_value(e, m, profile(p.grids.arc(e, m)));
    }
    return u;
}

} // namespace

TEST_SUITE_BEGIN("nonlocal");

TEST_CASE("constants are annihilated exactly") {
    auto p = cases::star(3, 24, 0.7, 0.3, 0.5);
    p.kernels.set_truncation(0.1);
    GridFunction u = fill(p, [](double) { return 3.7; });
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 0; m <= 24; ++m)
            CHECK(std::abs(nonlocal_apply(u, p.kernels, e, m, 0.0)) <= 1e-14);
}

TEST_CASE("odd data about a midpoint node integrates to zero") {
    auto p = cases::interval(1.0, 40, 1.0, 0.5);
    p.kernels.set_truncation(0.1);
    GridFunction u = fill(p, [](double x) { return x - 0.5; });
    CHECK(std::abs(nonlocal_apply(u, p.kernels, 0, 20, 0.0)) <= 1e-12);
}

TEST_CASE("censored quadratic matches the high-resolution oracle") {
    const int n = 2000;
    auto p = cases::interval(1.0, n, 1.0, 0.5);
    p.kernels.set_truncation(0.05);
    GridFunction u = fill(p, [](double z) { return z * z; });
    std::size_t node = n / 4; // arc 0.25
    double got = nonlocal_apply(u, p.kernels, 0, node, 0.0);
    std::vector<ScalarField> profile{[](double z) { return z * z; }};
    double want = oracles::nonlocal_apply(p, profile, 0, 0.25, 1.0 / 0.05);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("linearity in the grid function") {
    auto p = cases::star(2, 16, 0.5, 0.2, 0.5);
    p.kernels.set_truncation(0.2);
    GridFunction a = fill(p, [](double x) { return std::sin(3.0 * x); });
    GridFunction b = fill(p, [](double x) { return x * x - 0.3; });
    GridFunction combo =
        fill(p, [](double x) { return 2.0 * std::sin(3.0 * x) - 0.5 * (x * x - 0.3); });
    for (std::size_t m : {std::size_t{1}, std::size_t{7}, std::size_t{16}}) {
        double lhs = nonlocal_apply(combo, p.kernels, 0, m, 0.0);
        double rhs = 2.0 * nonlocal_apply(a, p.kernels, 0, m, 0.0) -
                     0.5 * nonlocal_apply(b, p.kernels, 0, m, 0.0);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("untruncated kernel needs an exclusion radius") {
    auto p = cases::interval(1.0, 20, 1.0, 0.5);
    GridFunction u = fill(p, [](double x) { return x; });
    CHECK_THROWS_AS(nonlocal_apply(u, p.kernels, 0, 10, 0.0), KernelError);
    CHECK(std::isfinite(nonlocal_apply(u, p.kernels, 0, 10, p.grids.h(0))));
}

TEST_CASE("ball and complement split reassembles the full operator") {
    auto p = cases::star(3, 20, 0.8, 0.25, 0.5);
    p.kernels.set_truncation(0.08);
    GridFunction u = fill(p, [](double x) { return std::cos(2.0 * x) + 0.3 * x; });
    for (double delta : {0.15, 0.4}) {
        for (std::size_t m : {std::size_t{0}, std::size_t{5}, std::size_t{13}}) {
            double full = nonlocal_apply(u, p.kernels, 1, m, 0.0);
            double outer = nonlocal_apply(u, p.kernels, 1, m, delta, NonlocalRegion::complement);
            double inner = nonlocal_apply(u, p.kernels, 1, m, delta, NonlocalRegion::ball);
            CHECK(full == doctest::Approx(outer + inner).epsilon(1e-12));
        }
    }
}

TEST_CASE("vertex slope stencil") {
    auto p = cases::interval(1.0, 10, 0.0, 0.5);
    std::size_t tail = p.net.vertex_index("a"), head = p.net.vertex_index("b");

    GridFunction c = fill(p, [](double) { return 2.5; });
    CHECK(vertex_slope(c, 0, tail) == doctest::Approx(0.0));

    GridFunction lin = fill(p, [](double x) { return x; });
    CHECK(vertex_slope(lin, 0, tail) == doctest::Approx(1.0).epsilon(1e-14));
    // inward derivative at the head of the edge: u decreases inward
    CHECK(vertex_slope(lin, 0, head) == doctest::Approx(-1.0).epsilon(1e-14));

    GridFunction quad = fill(p, [](double x) { return x * x; });
    CHECK(std::abs(vertex_slope(quad, 0, tail)) <= 1e-13); // exact on quadratics
    CHECK(vertex_slope(quad, 0, head) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("residual vanishes on constant-compatible data") {
    auto p = cases::interval(1.0, 32, 0.6, 0.5);
    p.kernels.set_truncation(1.0 / 32.0);
    NonlocalOperator op(p.net, p.grids, p.kernels);
    const double cval = 0.8, lambda = 1.3;
    GridFunction u = fill(p, [&](double) { return cval; });
    EdgeFields d;
    d.lambda = lambda;
    d.H = &p.hamiltonians[0];
    d.f.assign(33, lambda * cval); // H(x,0) = 0
    for (std::size_t m = 1; m < 32; ++m)
        CHECK(std::abs(discrete_residual(u, op, d, 0, m)) <= 1e-12);
    CHECK_THROWS_AS(discrete_residual(u, op, d, 0, 0), GridError);
}

TEST_CASE("residual of linear data on a symmetric censored edge") {
    // eps = 0, eta = h: at the midpoint node the nonlocal term cancels by
    // symmetry and the scheme reduces to lambda u + |slope| - f
    const int n = 32;
    auto p = cases::interval(1.0, n, 1.0, 0.5);
    p.kernels.set_truncation(p.grids.h(0));
    NonlocalOperator op(p.net, p.grids, p.kernels);
    GridFunction u = fill(p, [](double x) { return 0.7 * x + 0.1; });
    EdgeFields d;
    d.lambda = 2.0;
    d.H = &p.hamiltonians[0];
    d.f.assign(n + 1, 0.25);
    const std::size_t mid = n / 2;
    double expect = 2.0 * u.value(0, mid) + 0.7 - 0.25; // H enters with a plus sign
    CHECK(discrete_residual(u, op, d, 0, mid) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("manufactured residual shrinks first order with h") {
    const double pi = 3.14159265358979323846;
    std::vector<double> norms;
    for (int n : {32, 64, 128}) {
        auto p = cases::interval(1.0, n, 0.8, 0.5);
        p.cfg.eps = 0.0;
        p.kernels.set_truncation(p.grids.h(0));
        std::vector<ScalarField> u{[=](double x) { return std::sin(pi * x); }};
        std::vector<ScalarField> du{[=](double x) { return pi * std::cos(pi * x); }};
        std::vector<ScalarField> d2u{[=](double x) { return -pi * pi * std::sin(pi * x); }};
        auto fs = oracles::manufactured_f(p, u, du, d2u, 1.0 / p.grids.h(0));
        NonlocalOperator op(p.net, p.grids, p.kernels);
        GridFunction ug = fill(p, u[0]);
        EdgeFields d;
        d.lambda = p.cfg.lambda;
        d.H = &p.hamiltonians[0];
        d.f.resize(static_cast<std::size_t>(n) + 1);
        for (int m = 0; m <= n; ++m)
            d.f[static_cast<std::size_t>(m)] = fs[0](p.grids.arc(0, static_cast<std::size_t>(m)));
        double nrm = 0.0;
        for (std::size_t m = 1; m < static_cast<std::size_t>(n); ++m)
            nrm = std::max(nrm, std::abs(discrete_residual(ug, op, d, 0, m)));
        norms.push_back(nrm);
    }
    CHECK(norms[0] / norms[1] >= 1.5);
    CHECK(norms[1] / norms[2] >= 1.5);
}

TEST_CASE("scheme monotonicity by finite-difference probing") {
    auto p = cases::star(2, 12, 0.9, 0.35, 0.5);
    p.kernels.set_truncation(0.1);
    NonlocalOperator op(p.net, p.grids, p.kernels);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> uval(-1.0, 1.0);
    EdgeFields d;
    d.lambda = 0.7;
    d.eps = 0.03;
    d.H = &p.hamiltonians[0];

    GridFunction u(p.net, p.grids);
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t m = 0; m <= 12; ++m)
            u.set_value(e, m, uval(rng));

    const double bump = 1e-6;
    std::uniform_int_distribution<std::size_t> pick_edge(0, 1);
    std::uniform_int_distribution<std::size_t> pick_node(0, 12);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t e = trial % 2;
        std::size_t m = 1 + static_cast<std::size_t>(trial / 2) % 11;
        double base = discrete_residual(u, op, d, e, m);
        for (int probe = 0; probe < 12; ++probe) {
            std::size_t pe = pick_edge(rng), pm = pick_node(rng);
            if (pe == e && pm == m)
                continue;
            double saved = u.value(pe, pm);
            u.set_value(pe, pm, saved + bump);
            double perturbed = discrete_residual(u, op, d, e, m);
            u.set_value(pe, pm, saved);
            CHECK(perturbed <= base + 1e-15); // nonincreasing in off-node values
        }
        double saved = u.value(e, m);
        u.set_value(e, m, saved + bump);
        double up = discrete_residual(u, op, d, e, m);
        u.set_value(e, m, saved);
        CHECK((up - base) / bump >= d.lambda - 1e-6); // own node rate >= lambda
    }
}

TEST_CASE("quadrature weights are nonnegative in every mode") {
    // monotonicity of the scheme rests on this
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> uc(0.05, 1.5), us(0.15, 0.85);
    for (int trial = 0; trial < 6; ++trial) {
        auto p = cases::star(2 + trial % 2, 14, uc(rng), uc(rng), us(rng));
        for (int mode = 0; mode < 2; ++mode) {
            KernelFamily kern = p.kernels;
            double delta = 0.0;
            if (mode == 0)
                kern.set_truncation(0.05 + 0.1 * us(rng));
            else
                delta = p.grids.min_h();
            for (std::size_t e = 0; e < p.net.n_edges(); ++e)
                for (std::size_t F = 0; F < p.net.n_edges(); ++F)
                    for (std::size_t m = 0; m <= 14; m += 3) {
                        auto row = nonlocal_row(p.net, p.grids, kern, e, m, F, delta,
                                                NonlocalRegion::complement);
                        for (double w : row)
                            CHECK(w >= 0.0);
                    }
        }
    }
}

TEST_CASE("precomputed operator agrees with the direct row evaluation") {
    auto p = cases::star(3, 18, 0.6, 0.2, 0.4);
    p.kernels.set_truncation(0.07);
    NonlocalOperator op(p.net, p.grids, p.kernels);
    GridFunction u = fill(p, [](double x) { return std::sin(2.0 * x) - 0.2 * x; });
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t m = 0; m <= 18; m += 5)
            CHECK(op.apply(u, e, m) ==
                  doctest::Approx(nonlocal_apply(u, p.kernels, e, m, 0.0)).epsilon(1e-13));
}

TEST_CASE("Hoelder seminorm measurements") {
    auto p = cases::interval(1.0, 50, 0.0, 0.5);
    GridFunction lin = fill(p, [](double x) { return 2.0 * x; });
    CHECK(measure_modulus(lin.edge_values(0), p.grids.h(0), 1.0) ==
          doctest::Approx(2.0).epsilon(1e-13));
    GridFunction root = fill(p, [](double x) { return std::sqrt(x); });
    CHECK(measure_modulus(root.edge_values(0), p.grids.h(0), 0.5) ==
          doctest::Approx(1.0).epsilon(1e-10));
    GridFunction c = fill(p, [](double) { return 4.0; });
    CHECK(measure_modulus(c.edge_values(0), p.grids.h(0), 0.7) == 0.0);
}

TEST_SUITE_END();
