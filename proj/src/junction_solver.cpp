#include "khj/junction_solver.hpp"

#include <algorithm>
#include <cmath>

#include "khj/linalg.hpp"
#include "khj/parallel.hpp"

namespace khj {

// ---------------------------------------------------------------------------
// DirichletEngine

DirichletEngine::DirichletEngine(const NetProblem& p, double eta, double eps)
    : p_(&p), eta_(eta), eps_(eps) {
    // Kirchhoff residuals differentiate the solution with one-sided stencils,
    // amplifying solve noise by ~6/h; solve tight enough that F evaluations
    // stay meaningful at tol_K.
    tol_fp_ = std::min(p.cfg.tol_fp,
                       p.cfg.tol_K * p.grids.min_h() / (8.0 * double(p.net.n_edges())));
    tol_fp_ = std::max(tol_fp_, 1e-12);
    KernelFamily kern = p.kernels;
    const bool compensate = p.cfg.singular_rule == SingularRule::exclude_compensate;
    double delta = 0.0;
    if (compensate) {
        kern.set_truncation(std::nullopt);
        delta = p.grids.min_h();
    } else {
        kern.set_truncation(eta);
    }
    kernels_ = std::move(kern);
    op_ = NonlocalOperator(p.net, p.grids, kernels_, delta);
    const std::size_t ne = p.net.n_edges();
    f_nodes_.resize(ne);
    mu_nodes_.resize(ne);
    coupled_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        f_nodes_[e] = p.sample_f(e);
        mu_nodes_[e] = p.sample_mu(e);
        coupled_[e] = !kernels_.censored(e);
        if (compensate) {
            // second-difference compensation of the excluded self window:
            // I[B_delta] u(x) ~ u''(x)/2 * int_{-delta}^{delta} r^2 nu(x,|r|) dr,
            // an additional diffusion on the interior nodes
            const auto& pair = kernels_.pair(e, e);
            if (pair.form == KernelPair::Form::zero)
                continue;
            if (pair.form != KernelPair::Form::model)
                throw KernelError("exclude_compensate needs model self kernels");
            const std::size_t n = static_cast<std::size_t>(p.grids.n_cells(e));
            const double sig = kernels_.sigma();
            for (std::size_t m = 1; m < n; ++m) {
                double x = p.grids.arc(e, m);
                mu_nodes_[e][m] += pair.c(x) * std::pow(delta, 2.0 - sig) / (2.0 - sig);
            }
        }
    }
}

double DirichletEngine::lambda_star() const {
    double ls = 0.0;
    for (std::size_t e = 0; e < p_->net.n_edges(); ++e) {
        if (!coupled_[e])
            continue;
        const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
        for (std::size_t m = 0; m <= n; ++m) {
            double lam_i = op_.exterior_mass(e, m);
            ls = std::max(ls, lam_i / (p_->cfg.lambda + lam_i));
        }
    }
    return ls;
}

GridFunction DirichletEngine::affine_start(const std::vector<double>& vertex_values) const {
    GridFunction u(p_->net, p_->grids);
    for (std::size_t v = 0; v < p_->net.n_vertices(); ++v)
        u.set_vertex_value(v, vertex_values[v]);
    for (std::size_t e = 0; e < p_->net.n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
        const double a = vertex_values[p_->net.tail_of(e)];
        const double b = vertex_values[p_->net.head_of(e)];
        for (std::size_t m = 1; m < n; ++m) {
            double t = static_cast<double>(m) / static_cast<double>(n);
            u.set_value(e, m, (1.0 - t) * a + t * b);
        }
    }
    return u;
}

EdgeFields DirichletEngine::edge_fields(std::size_t e, bool frozen_coupling,
                                        const GridFunction* frozen) const {
    EdgeFields d;
    d.lambda = p_->cfg.lambda;
    d.eps = eps_;
    d.H = &p_->hamiltonians[e];
    d.mu = mu_nodes_[e];
    d.f = f_nodes_[e];
    if (frozen_coupling && coupled_[e]) {
        const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
        d.lambda_add.assign(n + 1, 0.0);
        for (std::size_t m = 0; m <= n; ++m) {
            d.lambda_add[m] = op_.exterior_mass(e, m);
            // frozen exterior sources f_ij^k from the previous iterate
            double src = 0.0;
            for (std::size_t F = 0; F < p_->net.n_edges(); ++F) {
                if (F == e)
                    continue;
                const double* w = op_.row(e, F, m);
                if (!w)
                    continue;
                const std::size_t nF = op_.row_size(F);
                for (std::size_t k = 0; k < nF; ++k)
                    src += w[k] * frozen->value(F, k);
            }
            d.f[m] += src;
        }
    }
    return d;
}

double DirichletEngine::full_residual_norm(const GridFunction& u) const {
    double nrm = 0.0;
    for (std::size_t e = 0; e < p_->net.n_edges(); ++e) {
        EdgeFields d = edge_fields(e, false, nullptr);
        const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
        for (std::size_t m = 1; m < n; ++m)
            nrm = std::max(nrm, std::abs(discrete_residual(u, op_, d, e, m)));
    }
    return nrm;
}

void DirichletEngine::branch_iteration(GridFunction& u, ContractionReport* report,
                                       int max_sweeps, bool to_convergence) const {
    const auto& net = p_->net;
    const auto& cfg = p_->cfg;
    SolverConfig inner = cfg;
    inner.tol_fp = std::max(tol_fp_ * 1e-2, 1e-13);

    std::vector<std::size_t> censored, coupled;
    for (std::size_t e = 0; e < net.n_edges(); ++e)
        (coupled_[e] ? coupled : censored).push_back(e);
    if (report) {
        report->censored_edges = static_cast<int>(censored.size());
        report->coupled_edges = static_cast<int>(coupled.size());
        report->lambda_star = lambda_star();
    }

    auto solve_edge = [&](std::size_t e, bool frozen_coupling, const GridFunction* frozen,
                          GridFunction& target) {
        EdgeProblem ep;
        ep.op = &op_;
        ep.edge = e;
        ep.fields = edge_fields(e, frozen_coupling, frozen);
        ep.tail_value = u.vertex_value(net.tail_of(e));
        ep.head_value = u.vertex_value(net.head_of(e));
        std::vector<double> warm = u.edge_values(e);
        auto res = solve_censored(ep, inner, &warm);
        const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
        for (std::size_t m = 1; m < n; ++m)
            target.set_value(e, m, res.values[m]);
    };

    // censored edges never see the others: one solve each
    for (std::size_t e : censored)
        solve_edge(e, false, nullptr, u);
    if (coupled.empty()) {
        if (report)
            report->certified = true;
        return;
    }

    const double tol = cfg.tol_fp;
    double prev_inc = -1.0;
    int sweeps = 0;
    int extra = 0;
    for (;;) {
        if (sweeps >= max_sweeps && !to_convergence)
            break;
        if (sweeps >= cfg.max_iter)
            throw IterationError("branch iteration exhausted the sweep budget",
                                 report ? report->increments : std::vector<double>{});
        GridFunction next = u;
        // Jacobi-style: every edge sees only the previous iterate
        parallel_for(coupled.size(), cfg.threads, [&](std::size_t idx) {
            solve_edge(coupled[idx], true, &u, next);
        });
        double inc = 0.0;
        for (std::size_t e : coupled) {
            const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
            for (std::size_t m = 1; m < n; ++m)
                inc = std::max(inc, std::abs(next.value(e, m) - u.value(e, m)));
        }
        u = std::move(next);
        ++sweeps;
        if (report) {
            report->increments.push_back(inc);
            if (prev_inc > 1e3 * inner.tol_fp && sweeps >= 2) {
                report->ratios.push_back(inc / prev_inc);
                report->measured_any = true;
            }
        }
        prev_inc = inc;
        if (inc <= tol) {
            if (!to_convergence)
                break;
            // the frozen sources lag one sweep; polish until the full
            // residual meets the tolerance as well
            if (full_residual_norm(u) <= std::min(tol, tol_fp_) || ++extra > 50)
                break;
        }
        if (!to_convergence && sweeps >= max_sweeps)
            break;
    }
    if (report) {
        report->coupled_sweeps = sweeps;
        report->measured_factor = 0.0;
        for (double r : report->ratios)
            report->measured_factor = std::max(report->measured_factor, r);
        report->certified =
            !report->measured_any || report->measured_factor <= 1.05 * report->lambda_star;
        if (report->measured_any && !report->certified)
            throw SolverError("measured contraction factor " +
                              std::to_string(report->measured_factor) + " exceeds 1.05 * " +
                              std::to_string(report->lambda_star) +
                              "; quadrature weights suspect");
    }
}

void DirichletEngine::newton_finish(GridFunction& u) const {
    const auto& net = p_->net;
    const auto& grids = p_->grids;
    const auto& cfg = p_->cfg;

    // unknown layout: interior nodes, edge-major
    std::vector<std::size_t> offset(net.n_edges());
    std::size_t total = 0;
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
        offset[e] = total;
        total += static_cast<std::size_t>(grids.n_cells(e)) - 1;
    }

    std::vector<EdgeFields> fields(net.n_edges());
    for (std::size_t e = 0; e < net.n_edges(); ++e)
        fields[e] = edge_fields(e, false, nullptr);

    auto residual_norm = [&]() { return full_residual_norm(u); };

    double nrm = residual_norm();
    double L = 0.0; // diagonal slope bound, also sets the rounding floor
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
        const double h = grids.h(e);
        for (std::size_t m = 0; m <= n; ++m) {
            double mu_eps = fields[e].node(fields[e].mu, m) + eps_;
            L = std::max(L, cfg.lambda + 2.0 * mu_eps / (h * h) +
                                p_->hamiltonians[e].lipschitz_p() / h + op_.mass(e, m));
        }
    }
    const double tau = 1.0 / L;
    const double tol_eff = std::max(tol_fp_, 5e-15 * L * std::max(1.0, u.max_abs()));

    auto jacobi_batch = [&](int sweeps) {
        for (int s = 0; s < sweeps && nrm > tol_eff; ++s) {
            GridFunction next = u;
            for (std::size_t e = 0; e < net.n_edges(); ++e) {
                const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
                const auto& d = fields[e];
                for (std::size_t m = 1; m < n; ++m)
                    next.set_value(e, m,
                                   u.value(e, m) - tau * discrete_residual(u, op_, d, e, m));
            }
            u = std::move(next);
            nrm = residual_norm();
        }
    };

    int iter = 0;
    int newton_failures = 0;
    bool newton_enabled = cfg.use_newton;
    while (nrm > tol_eff) {
        if (iter++ >= cfg.max_iter)
            throw IterationError("network Dirichlet solve exhausted its budget", {nrm});
        bool advanced = false;
        double nrm_before = nrm;
        if (newton_enabled) {
            DenseMatrix J(total, total);
            std::vector<double> rhs(total);
            for (std::size_t e = 0; e < net.n_edges(); ++e) {
                const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
                const double h = grids.h(e);
                const auto& d = fields[e];
                for (std::size_t m = 1; m < n; ++m) {
                    const std::size_t i = offset[e] + m - 1;
                    rhs[i] = -discrete_residual(u, op_, d, e, m);
                    const double mu_eps = d.node(d.mu, m) + eps_;
                    const double diss = lf_dissipation(d.H->lipschitz_p(), mu_eps, h);
                    const double pbar = 0.5 * ((u.value(e, m) - u.value(e, m - 1)) / h +
                                               (u.value(e, m + 1) - u.value(e, m)) / h);
                    const double hp = d.H->slope_p(grids.arc(e, m), pbar);
                    double diag =
                        cfg.lambda + d.node(d.lambda_add, m) + 2.0 * mu_eps / (h * h) + diss / h;
                    for (std::size_t F = 0; F < net.n_edges(); ++F) {
                        const double* w = op_.row(e, F, m);
                        if (!w)
                            continue;
                        const std::size_t nF = op_.row_size(F) - 1;
                        for (std::size_t k = 0; k <= nF; ++k) {
                            if (F == e && k == m)
                                continue;
                            diag += w[k];
                            if (k >= 1 && k < nF)
                                J(i, offset[F] + k - 1) -= w[k];
                        }
                    }
                    J(i, i) += diag;
                    if (m - 1 >= 1)
                        J(i, offset[e] + m - 2) += -mu_eps / (h * h) - (hp + diss) / (2.0 * h);
                    if (m + 1 < n)
                        J(i, offset[e] + m) += -mu_eps / (h * h) + (hp - diss) / (2.0 * h);
                }
            }
            if (lu_solve(J, rhs)) {
                GridFunction saved = u;
                double step = 1.0;
                for (int tries = 0; tries < 25; ++tries) {
                    for (std::size_t e = 0; e < net.n_edges(); ++e) {
                        const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
                        for (std::size_t m = 1; m < n; ++m)
                            u.set_value(e, m, saved.value(e, m) + step * rhs[offset[e] + m - 1]);
                    }
                    double next = residual_norm();
                    if (next < nrm) {
                        nrm = next;
                        advanced = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!advanced)
                    u = saved;
            }
        }
        // a stalled (or absent) Newton step hands over to damped Jacobi,
        // whose sup-norm contraction is unconditional for monotone schemes
        if (!advanced) {
            if (++newton_failures >= 3)
                newton_enabled = false;
            jacobi_batch(64);
        } else if (nrm > 0.6 * nrm_before) {
            jacobi_batch(16); // kink-limited progress: grind through the corner
        }
    }
}

GridFunction DirichletEngine::solve(const std::vector<double>& vertex_values, StarSolveMode mode,
                                    ContractionReport* report, const GridFunction* warm,
                                    int certify_sweeps) const {
    GridFunction u = affine_start(vertex_values);
    if (warm) {
        for (std::size_t e = 0; e < p_->net.n_edges(); ++e) {
            const std::size_t n = static_cast<std::size_t>(p_->grids.n_cells(e));
            for (std::size_t m = 1; m < n; ++m)
                u.set_value(e, m, warm->value(e, m));
        }
    }
    switch (mode) {
    case StarSolveMode::branch_iteration:
        branch_iteration(u, report, p_->cfg.max_iter, true);
        break;
    case StarSolveMode::certify_then_newton:
        branch_iteration(u, report, certify_sweeps, false);
        newton_finish(u);
        break;
    case StarSolveMode::newton: {
        // censored edges are cheap and independent; monolithic Newton handles
        // the coupled block
        ContractionReport ignore;
        if (report)
            report->lambda_star = lambda_star();
        newton_finish(u);
        (void)ignore;
        break;
    }
    }
    return u;
}

// ---------------------------------------------------------------------------
// StarSolver

StarSolver::StarSolver(const NetProblem& p) : p_(&p) {
    if (!p.net.is_star())
        throw SolverError("junction pipeline requires a star network "
                          "(one interior vertex, all edges incident to it)");
    junction_ = p.net.interior_vertices()[0];
    p.cfg.check();
    double eta = p.cfg.effective_eta(p.grids);
    engine_ = std::make_unique<DirichletEngine>(p, eta, p.cfg.eps);
}

std::pair<GridFunction, ContractionReport>
StarSolver::solve_dirichlet(double theta, StarSolveMode mode, const GridFunction* warm) const {
    ContractionReport rep;
    auto vv = p_->vertex_values({theta});
    GridFunction u = engine_->solve(vv, mode, &rep, warm);
    return {std::move(u), rep};
}

double StarSolver::kirchhoff_residual(const GridFunction& u) const {
    return khj::kirchhoff_residual(u, *p_);
}

double bracket_theta_seed(const NetProblem& p) {
    const auto& net = p.net;
    auto interior = net.interior_vertices();
    if (interior.size() != 1)
        throw SolverError("bracket_theta_seed expects a star junction");
    const double B = p.kirchhoff_flux(interior[0]);
    const double N = static_cast<double>(net.n_edges());
    // default slopes p_i = -B/N (any vector with sum(-p_i) = B works)
    const double pi = -B / N;
    const double pnorm = std::abs(pi) * std::sqrt(N);
    double abar = 0.0, hmax = 0.0;
    for (std::size_t e = 0; e < net.n_edges(); ++e)
        abar = std::max(abar, net.length(e));
    for (std::size_t v : net.boundary_vertices())
        hmax = std::max(hmax, std::abs(p.boundary_value(v)));
    const double C_H = p.max_C_H();
    const double sig = p.kernels.sigma();
    const double Lam = p.kernels.lambda_bound();
    double theta_plus = abar * pnorm +
                        (std::pow(2.0 * abar, 1.0 - sig) / (1.0 - sig) * Lam * N * pnorm +
                         C_H * (1.0 + pnorm)) /
                            p.cfg.lambda;
    return std::max(theta_plus, abar * pnorm + hmax);
}

std::pair<double, double> StarSolver::bracket_theta() const {
    double theta_plus = bracket_theta_seed(*p_);
    double lo = -theta_plus, hi = theta_plus;
    for (int widen = 0;; ++widen) {
        double f_lo = kirchhoff_residual(solve_dirichlet(lo, StarSolveMode::newton).first);
        double f_hi = kirchhoff_residual(solve_dirichlet(hi, StarSolveMode::newton).first);
        if (f_lo <= 0.0 && f_hi >= 0.0)
            return {lo, hi};
        if (widen >= 6)
            throw SolverError("could not bracket the Kirchhoff residual in theta");
        lo *= 2.0;
        hi *= 2.0;
    }
}

std::vector<std::pair<double, double>>
scan_sign_changes(const std::function<double(double)>& f, double lo, double hi, int samples) {
    std::vector<std::pair<double, double>> out;
    // zeros landing on sample points are absorbed into one crossing
    double anchor_x = lo;
    int anchor_sign = 0;
    for (int k = 0; k <= samples; ++k) {
        double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples);
        double fx = f(x);
        int s = fx > 0.0 ? 1 : (fx < 0.0 ? -1 : 0);
        if (s != 0) {
            if (anchor_sign != 0 && s != anchor_sign)
                out.push_back({anchor_x, x});
            anchor_sign = s;
            anchor_x = x;
        }
    }
    return out;
}

KirchhoffSolve StarSolver::solve_kirchhoff_with(const DirichletEngine& eng,
                                                const GridFunction* warm, double theta_hint,
                                                bool have_hint) const {
    const auto& cfg = p_->cfg;
    KirchhoffSolve out;
    KirchhoffState& st = out.state;

    GridFunction current(p_->net, p_->grids);
    bool have_current = false;
    if (warm) {
        current = *warm;
        have_current = true;
    }

    auto evaluate = [&](double theta) {
        auto vv = p_->vertex_values({theta});
        current = eng.solve(vv, StarSolveMode::newton, nullptr,
                            have_current ? &current : nullptr);
        have_current = true;
        double F = khj::kirchhoff_residual(current, *p_);
        st.evaluations.push_back({theta, F});
        return F;
    };

    double lo, hi;
    if (have_hint) {
        // continuation steps: try a small interval around the previous root
        double w = std::max(0.5, 0.1 * std::abs(theta_hint));
        lo = theta_hint - w;
        hi = theta_hint + w;
        double f_lo = evaluate(lo), f_hi = evaluate(hi);
        int widen = 0;
        while (!(f_lo <= 0.0 && f_hi >= 0.0) && widen++ < 8) {
            lo -= w;
            hi += w;
            w *= 2.0;
            f_lo = evaluate(lo);
            f_hi = evaluate(hi);
        }
        if (!(f_lo <= 0.0 && f_hi >= 0.0))
            throw SolverError("continuation lost the Kirchhoff bracket");
    } else {
        std::tie(lo, hi) = bracket_theta();
        // existence of a root is guaranteed, uniqueness is not: report every
        // sign change in the bracket and solve the leftmost
        auto changes = scan_sign_changes(
            [&](double th) {
                auto vv = p_->vertex_values({th});
                current = eng.solve(vv, StarSolveMode::newton, nullptr,
                                    have_current ? &current : nullptr);
                have_current = true;
                return khj::kirchhoff_residual(current, *p_);
            },
            lo, hi, 8);
        st.sign_changes = static_cast<int>(changes.size());
        for (const auto& c : changes)
            st.all_roots_lo.push_back(c.first);
        if (!changes.empty()) {
            lo = changes.front().first;
            hi = changes.front().second;
        }
    }
    st.theta_lo = lo;
    st.theta_hi = hi;

    double f_lo = evaluate(lo);
    if (std::abs(f_lo) <= cfg.tol_K) {
        st.theta_star = lo;
        st.f_abs = std::abs(f_lo);
    } else {
        double f_hi = evaluate(hi);
        if (std::abs(f_hi) <= cfg.tol_K) {
            st.theta_star = hi;
            st.f_abs = std::abs(f_hi);
        } else {
            if (f_lo > 0.0 || f_hi < 0.0)
                throw SolverError("Kirchhoff bracket does not enclose a sign change");
            double mid = 0.5 * (lo + hi), f_mid = 0.0;
            bool ok = false;
            for (int it = 0; it < 200; ++it) {
                mid = 0.5 * (lo + hi);
                f_mid = evaluate(mid);
                if (std::abs(f_mid) <= cfg.tol_K) {
                    ok = true;
                    break;
                }
                if (f_mid < 0.0)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo < 1e-15 * std::max(1.0, std::abs(hi))) {
                    st.stagnated = true;
                    break;
                }
            }
            st.theta_star = mid;
            st.f_abs = std::abs(f_mid);
            if (!ok && !st.stagnated)
                st.stagnated = true;
        }
    }

    // final solution at theta*; certify the contraction on the way
    auto vvstar = p_->vertex_values({st.theta_star});
    out.u = eng.solve(vvstar, StarSolveMode::certify_then_newton, &out.contraction,
                      have_current ? &current : nullptr);
    out.theta = st.theta_star;
    out.kirchhoff_abs = std::abs(khj::kirchhoff_residual(out.u, *p_));
    st.f_abs = out.kirchhoff_abs;
    if (st.stagnated && st.f_abs > cfg.tol_K)
        throw SolverError("theta bisection stagnated with |F| = " + std::to_string(st.f_abs));
    return out;
}

KirchhoffSolve StarSolver::solve_kirchhoff() const {
    return solve_kirchhoff_with(*engine_, nullptr, 0.0, false);
}

ContinuationResult StarSolver::continuation() const {
    const auto& cfg = p_->cfg;
    std::vector<double> eps_sched = cfg.eps_schedule;
    if (eps_sched.empty())
        eps_sched.push_back(cfg.eps);
    std::vector<double> eta_sched = cfg.eta_schedule;
    for (const auto* sched : {&eps_sched, &eta_sched})
        for (std::size_t k = 1; k < sched->size(); ++k)
            if ((*sched)[k] > (*sched)[k - 1])
                throw SolverError("continuation schedules must be nonincreasing");

    // grid-resolvable floors
    const double hmin = p_->grids.min_h();
    for (double& e : eps_sched)
        e = std::max(e, hmin * hmin);
    for (double& e : eta_sched)
        e = std::max(e, hmin);

    double delta = p_->net.length(0);
    for (std::size_t e = 0; e < p_->net.n_edges(); ++e)
        delta = std::min(delta, p_->net.length(e));
    delta *= 0.25;

    ContinuationResult out;
    out.gamma_delta = delta;
    GridFunction prev(p_->net, p_->grids);
    bool have_prev = false;
    double theta_prev = 0.0;
    double first_lip = -1.0;

    const std::size_t steps = std::max(eps_sched.size(), std::max<std::size_t>(eta_sched.size(), 1));
    for (std::size_t k = 0; k < steps; ++k) {
        double eps_k = k < eps_sched.size() ? eps_sched[k] : eps_sched.back();
        double eta_k = eta_sched.empty() ? cfg.effective_eta(p_->grids)
                                         : eta_sched[std::min(k, eta_sched.size() - 1)];
        DirichletEngine eng(*p_, eta_k, eps_k);
        auto solve = solve_kirchhoff_with(eng, have_prev ? &prev : nullptr, theta_prev, have_prev);

        ContinuationStep step;
        step.eps = eps_k;
        step.eta = eta_k;
        step.theta = solve.theta;
        step.f_abs = solve.kirchhoff_abs;
        step.lipschitz = lipschitz_on_gamma_delta(solve.u, delta);
        if (have_prev)
            step.cauchy_diff = sup_diff_on_gamma_delta(solve.u, prev, delta);
        if (first_lip < 0.0)
            first_lip = step.lipschitz;
        else if (step.lipschitz > 10.0 * first_lip)
            out.monitor_alarm = true; // recorded, not fatal
        out.history.push_back(step);

        prev = solve.u;
        theta_prev = solve.theta;
        have_prev = true;
        out.u = std::move(solve.u);
        out.theta = solve.theta;
    }
    return out;
}

// ---------------------------------------------------------------------------
// free functions

std::pair<GridFunction, ContractionReport> solve_dirichlet_star(const NetProblem& p, double theta,
                                                                StarSolveMode mode) {
    StarSolver s(p);
    return s.solve_dirichlet(theta, mode);
}

double kirchhoff_residual(const GridFunction& u, const NetProblem& p) {
    auto interior = p.net.interior_vertices();
    if (interior.size() != 1)
        throw SolverError("kirchhoff_residual expects a single interior vertex");
    std::size_t O = interior[0];
    double sum = 0.0;
    for (const auto& [e, idx] : p.net.incidence(O)) {
        (void)idx;
        sum -= vertex_slope(u, e, O);
    }
    return sum - p.kirchhoff_flux(O);
}

std::pair<double, double> bracket_theta(const NetProblem& p) {
    return StarSolver(p).bracket_theta();
}

KirchhoffSolve solve_kirchhoff(const NetProblem& p) { return StarSolver(p).solve_kirchhoff(); }

ContinuationResult continuation(const NetProblem& p) { return StarSolver(p).continuation(); }

} // namespace khj
