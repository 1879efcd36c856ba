#include "khj/edge_solver.hpp"

#include <algorithm>
#include <cmath>

#include "khj/linalg.hpp"

namespace khj {

namespace {

struct EdgeWork {
    const EdgeProblem* p;
    std::size_t n; // cells
    double h;
    std::vector<double> values; // nodes 0..n

    double x(std::size_t m) const { return h * static_cast<double>(m); }

    double self_apply(std::size_t m) const {
        const double* w = p->op->row(p->edge, p->edge, m);
        if (!w)
            return 0.0;
        const double um = values[m];
        double acc = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            acc += w[k] * (values[k] - um);
        return acc;
    }

    double residual(std::size_t m) const {
        const auto& d = p->fields;
        const double um = values[m];
        const double ul = values[m - 1], ur = values[m + 1];
        const double mu_eps = d.node(d.mu, m) + d.eps;
        const double diss = lf_dissipation(d.H->lipschitz_p(), mu_eps, h);
        double r = (d.lambda + d.node(d.lambda_add, m)) * um;
        r -= mu_eps * (ul - 2.0 * um + ur) / (h * h);
        r -= self_apply(m);
        r += d.H->lf_flux(x(m), (um - ul) / h, (ur - um) / h, diss);
        r -= d.node(d.f, m);
        return r;
    }

    double residual_norm() const {
        double nrm = 0.0;
        for (std::size_t m = 1; m < n; ++m)
            nrm = std::max(nrm, std::abs(residual(m)));
        return nrm;
    }
};

// Spec damping: tau = 1 / (lambda + max lambda_add + 2(mu_max+eps)/h^2 + C_H/h
// + max self mass), an unconditional contraction for the monotone scheme.
double jacobi_tau(const EdgeWork& w) {
    const auto& d = w.p->fields;
    double lam_add = 0.0, mu_max = 0.0, mass = 0.0;
    for (std::size_t m = 0; m <= w.n; ++m) {
        lam_add = std::max(lam_add, d.node(d.lambda_add, m));
        mu_max = std::max(mu_max, d.node(d.mu, m));
        const double* row = w.p->op->row(w.p->edge, w.p->edge, m);
        if (row) {
            double s = 0.0;
            for (std::size_t k = 0; k <= w.n; ++k)
                s += row[k];
            mass = std::max(mass, s);
        }
    }
    double L = d.lambda + lam_add + 2.0 * (mu_max + d.eps) / (w.h * w.h) +
               d.H->lipschitz_p() / w.h + mass;
    return 1.0 / L;
}

bool newton_step(EdgeWork& w, double current_norm) {
    const auto& d = w.p->fields;
    const std::size_t nu = w.n - 1; // unknowns: interior nodes
    DenseMatrix J(nu, nu);
    std::vector<double> rhs(nu);

    for (std::size_t m = 1; m < w.n; ++m) {
        const std::size_t i = m - 1;
        rhs[i] = -w.residual(m);
        const double mu_eps = d.node(d.mu, m) + d.eps;
        const double diss = lf_dissipation(d.H->lipschitz_p(), mu_eps, w.h);
        const double pbar = 0.5 * ((w.values[m] - w.values[m - 1]) / w.h +
                                   (w.values[m + 1] - w.values[m]) / w.h);
        const double hp = d.H->slope_p(w.x(m), pbar);
        double diag = d.lambda + d.node(d.lambda_add, m) + 2.0 * mu_eps / (w.h * w.h) + diss / w.h;
        const double* row = w.p->op->row(w.p->edge, w.p->edge, m);
        if (row) {
            for (std::size_t k = 0; k <= w.n; ++k) {
                if (k == m)
                    continue;
                diag += row[k];
                if (k >= 1 && k < w.n)
                    J(i, k - 1) -= row[k];
            }
        }
        J(i, i) += diag;
        if (m - 1 >= 1)
            J(i, i - 1) += -mu_eps / (w.h * w.h) - (hp + diss) / (2.0 * w.h);
        if (m + 1 < w.n)
            J(i, i + 1) += -mu_eps / (w.h * w.h) + (hp - diss) / (2.0 * w.h);
    }

    if (!lu_solve(J, rhs))
        return false;

    std::vector<double> saved(w.values);
    double step = 1.0;
    for (int tries = 0; tries < 25; ++tries) {
        for (std::size_t m = 1; m < w.n; ++m)
            w.values[m] = saved[m] + step * rhs[m - 1];
        if (w.residual_norm() < current_norm)
            return true;
        step *= 0.5;
    }
    w.values = saved;
    return false;
}

} // namespace

double edge_residual_norm(const EdgeProblem& p, const std::vector<double>& values) {
    const auto& grids = p.op->grids();
    EdgeWork w{&p, static_cast<std::size_t>(grids.n_cells(p.edge)), grids.h(p.edge), values};
    return w.residual_norm();
}

EdgeSolveResult solve_censored(const EdgeProblem& p, const SolverConfig& cfg,
                               const std::vector<double>* warm_start) {
    cfg.check();
    const auto& grids = p.op->grids();
    const std::size_t n = static_cast<std::size_t>(grids.n_cells(p.edge));
    const auto& d = p.fields;
    if (!d.H)
        throw GridError("edge problem lacks a Hamiltonian");
    if (!std::isfinite(p.tail_value) || !std::isfinite(p.head_value))
        throw GridError("boundary values must be finite");

    EdgeWork w{&p, n, grids.h(p.edge), {}};
    if (warm_start && warm_start->size() == n + 1) {
        w.values = *warm_start;
        w.values[0] = p.tail_value;
        w.values[n] = p.head_value;
    } else {
        w.values.resize(n + 1);
        for (std::size_t m = 0; m <= n; ++m) {
            double t = static_cast<double>(m) / static_cast<double>(n);
            w.values[m] = (1.0 - t) * p.tail_value + t * p.head_value;
        }
    }

    EdgeSolveResult out;
    double tau = jacobi_tau(w);
    // rounding floor: residual entries carry ~eps_machine * L * |u| noise
    const double tol = std::max(
        cfg.tol_fp, 5e-15 / tau *
                        std::max({1.0, std::abs(p.tail_value), std::abs(p.head_value)}));
    double nrm = w.residual_norm();
    out.residual_history.push_back(nrm);

    std::vector<double> res(n + 1, 0.0);
    auto jacobi_sweep = [&]() {
        for (std::size_t m = 1; m < n; ++m)
            res[m] = w.residual(m);
        for (std::size_t m = 1; m < n; ++m)
            w.values[m] -= tau * res[m];
        double next = w.residual_norm();
        if (next > nrm) {
            // cannot happen for the monotone scheme unless tau was too large
            tau = std::max(0.5 * tau, cfg.damping_floor);
        }
        nrm = next;
        out.residual_history.push_back(nrm);
        ++out.sweeps;
    };

    int newton_failures = 0;
    bool newton_enabled = cfg.use_newton;
    while (nrm > tol) {
        if (out.sweeps >= cfg.max_iter)
            throw IterationError("edge solve exhausted the iteration budget",
                                 out.residual_history);
        double nrm_before = nrm;
        bool advanced = false;
        if (newton_enabled) {
            advanced = newton_step(w, nrm);
            if (advanced) {
                out.newton_used = true;
                nrm = w.residual_norm();
                out.residual_history.push_back(nrm);
                ++out.sweeps;
            } else if (++newton_failures >= 3) {
                newton_enabled = false;
            }
        }
        // stalled or absent Newton: damped Jacobi grinds through the kinks
        if (!advanced)
            for (int s = 0; s < 64 && nrm > tol && out.sweeps < cfg.max_iter; ++s)
                jacobi_sweep();
        else if (nrm > 0.6 * nrm_before)
            for (int s = 0; s < 16 && nrm > tol && out.sweeps < cfg.max_iter; ++s)
                jacobi_sweep();
    }

    // discrete comparison bound: |u| <= max(|boundary|, |f - H(x,0)| / (lambda + lambda_add))
    double bound = std::max(std::abs(p.tail_value), std::abs(p.head_value));
    for (std::size_t m = 0; m <= n; ++m) {
        double denom = d.lambda + d.node(d.lambda_add, m);
        bound = std::max(bound, std::abs(d.node(d.f, m) - (*d.H)(w.x(m), 0.0)) / denom);
    }
    out.linf_bound = bound;
    double worst = 0.0;
    for (double v : w.values)
        worst = std::max(worst, std::abs(v));
    if (worst > bound + 1e-8 * std::max(1.0, bound))
        throw GridError("edge solve violated its comparison bound; quadrature weights suspect");

    out.values = std::move(w.values);
    out.final_residual = nrm;
    return out;
}

double measure_modulus(const GridFunction& u, std::size_t edge, double gamma) {
    return measure_modulus(u.edge_values(edge), u.grids().h(edge), gamma);
}

} // namespace khj
