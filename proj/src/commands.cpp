#include "khj/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "khj/flux_limiter.hpp"
#include "khj/network_solver.hpp"
#include "khj/problem_io.hpp"
#include "khj/verify.hpp"

namespace khj {

using nlohmann::json;

namespace {

json config_echo(const NetProblem& p) {
    json j;
    j["lambda"] = p.cfg.lambda;
    j["eps"] = p.cfg.eps;
    j["eta"] = p.cfg.effective_eta(p.grids);
    j["tol_fp"] = p.cfg.tol_fp;
    j["tol_K"] = p.cfg.tol_K;
    j["min_h"] = p.grids.min_h();
    j["sigma"] = p.kernels.sigma();
    j["Lambda"] = p.kernels.lambda_bound();
    return j;
}

json contraction_to_json(const ContractionReport& r) {
    json j;
    j["lambda_star"] = r.lambda_star;
    j["measured_factor"] = r.measured_factor;
    j["certified"] = r.certified;
    j["coupled_sweeps"] = r.coupled_sweeps;
    j["censored_edges"] = r.censored_edges;
    j["coupled_edges"] = r.coupled_edges;
    j["increments"] = r.increments;
    j["ratios"] = r.ratios;
    return j;
}

json kirchhoff_state_to_json(const KirchhoffState& st) {
    json j;
    j["bracket"] = {st.theta_lo, st.theta_hi};
    j["theta_star"] = st.theta_star;
    j["F_abs"] = st.f_abs;
    j["evaluations"] = st.evaluations.size();
    j["sign_changes"] = st.sign_changes;
    if (st.sign_changes > 1)
        j["all_roots_lo"] = st.all_roots_lo;
    return j;
}

json fl_report(const GridFunction& u, const NetProblem& p) {
    json j;
    double tol = 10.0 * p.grids.min_h();
    FLState st = compute_fl_minus(u, p);
    FLCheck sub = check_fl_subsolution(u, p, tol);
    FLCheck sup = check_fl_supersolution(u, p, tol);
    j["value"] = st.value;
    j["p_tilde"] = st.p_tilde;
    j["equalization_gap"] = st.equalization_gap;
    j["tolerance"] = tol;
    j["subsolution"] = {{"pass", sub.pass}, {"value", sub.value}, {"g_plus", sub.g_plus}};
    j["supersolution"] = {{"pass", sup.pass}, {"value", sup.value}, {"g_plus", sup.g_plus}};
    return j;
}

json verification_summary(const GridFunction& u, const NetProblem& p, double theta) {
    json j;
    double c0 = c0_constant(p, theta);
    j["c0"] = c0;
    j["linf"] = u.max_abs();
    j["linf_ok"] = u.max_abs() <= c0 + 1e-10;
    auto barriers = build_barriers(p, theta);
    auto viol = barrier_check(u, barriers);
    j["barrier_violations"] = viol.size();
    j["lower_barrier_advisory"] = barriers.lower_advisory;
    j["barrier_L"] = barriers.constants.L;
    j["barrier_delta"] = barriers.constants.delta;
    return j;
}

// reports promise finite numbers everywhere
bool all_finite(const json& j) {
    if (j.is_number_float())
        return std::isfinite(j.get<double>());
    if (j.is_object() || j.is_array())
        for (const auto& item : j)
            if (!all_finite(item))
                return false;
    return true;
}

int write_report(const json& report, const std::string& path, std::ostream& out) {
    if (!path.empty()) {
        std::ofstream os(path);
        if (!os) {
            out << "cannot write report to '" << path << "'\n";
            return 2;
        }
        os << report.dump(2) << '\n';
    } else {
        out << report.dump(2) << '\n';
    }
    return report.value("solved", false) ? 0 : 1;
}

double parse_value(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos)
        return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    return std::stod(s);
}

} // namespace

int cmd_validate(const std::string& path, std::ostream& out) {
    json j;
    try {
        j = load_json_file(path);
    } catch (const std::exception& ex) {
        out << "error: " << ex.what() << '\n';
        return 1;
    }
    ValidationReport rep = validate_problem_json(j);
    if (rep.ok()) {
        out << "ok: " << path << "\n";
        return 0;
    }
    out << "invalid: " << path << "\n" << rep.to_string();
    return 1;
}

json run_solve(const json& problem_json, const std::string& mode) {
    json report;
    report["mode"] = mode;
    report["solved"] = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        NetProblem p = problem_from_json(problem_json);
        report["config"] = config_echo(p);
        if (mode == "junction") {
            StarSolver solver(p);
            json cont_hist = json::array();
            GridFunction u(p.net, p.grids);
            double theta = 0.0;
            if (!p.cfg.eps_schedule.empty() || !p.cfg.eta_schedule.empty()) {
                auto cont = solver.continuation();
                for (const auto& s : cont.history) {
                    json js = {{"eps", s.eps},       {"eta", s.eta},
                               {"theta", s.theta},   {"lipschitz", s.lipschitz},
                               {"F_abs", s.f_abs}};
                    if (s.cauchy_diff >= 0.0)
                        js["cauchy_diff"] = s.cauchy_diff;
                    cont_hist.push_back(js);
                }
                report["continuation"] = cont_hist;
                report["monitor_alarm"] = cont.monitor_alarm;
                u = std::move(cont.u);
                theta = cont.theta;
                // the final solution lives at the last schedule step
                p.cfg.eps = cont.history.back().eps;
                p.cfg.eps_schedule.clear();
                report["kirchhoff_residuals"] = {
                    {p.net.vertex(solver.junction()).id, kirchhoff_residual(u, p)}};
            } else {
                auto solve = solver.solve_kirchhoff();
                report["contraction"] = contraction_to_json(solve.contraction);
                report["kirchhoff_state"] = kirchhoff_state_to_json(solve.state);
                report["kirchhoff_residuals"] = {
                    {p.net.vertex(solver.junction()).id, solve.kirchhoff_abs}};
                u = std::move(solve.u);
                theta = solve.theta;
            }
            report["theta"] = theta;
            report["fl"] = fl_report(u, p);
            report["verification"] = verification_summary(u, p, theta);
            report["solution"] = solution_to_json(u);
            report["solved"] = true;
        } else if (mode == "network" || mode == "viscous") {
            NetworkSolve sol = mode == "network" ? solve_network(p) : solve_viscous_network(p);
            report["theta_star"] = sol.thetas;
            json res = json::object();
            auto interior = p.net.interior_vertices();
            for (std::size_t j = 0; j < interior.size(); ++j)
                res[p.net.vertex(interior[j]).id] = sol.residuals[j];
            report["kirchhoff_residuals"] = res;
            report["residual_norm"] = sol.residual_norm;
            report["certificate"] = {{"pass", sol.certificate.pass},
                                     {"theta_plus", sol.certificate.theta_plus},
                                     {"face_samples", sol.certificate.samples.size()}};
            json trace = json::array();
            for (const auto& [th, fn] : sol.trace)
                trace.push_back({{"theta", th}, {"residual_norm", fn}});
            report["trace"] = trace;
            if (!sol.candidate_roots.empty())
                report["multiple_root_warning"] = sol.candidate_roots;
            if (mode == "viscous")
                report["second_diff_bound"] = sol.second_diff_bound;
            report["solution"] = solution_to_json(sol.u);
            report["solved"] = true;
        } else {
            report["error"] = "unknown mode '" + mode + "'";
        }
    } catch (const std::exception& ex) {
        report["error"] = ex.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    report["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    if (!all_finite(report)) {
        report["solved"] = false;
        report["error"] = "report contains non-finite values";
    }
    return report;
}

int cmd_solve(const std::string& path, const SolveOptions& opts, std::ostream& out) {
    json problem_json;
    try {
        problem_json = load_json_file(path);
    } catch (const std::exception& ex) {
        out << "error: " << ex.what() << '\n';
        return 1;
    }
    json report = run_solve(problem_json, opts.mode);
    if (!opts.csv_path.empty() && report.value("solved", false)) {
        NetProblem p = problem_from_json(problem_json);
        GridFunction u(p.net, p.grids);
        for (const auto& row : report.at("solution")) {
            std::size_t e = p.net.edge_index(row.at("edge").get<std::string>());
            double arc = row.at("arc").get<double>();
            std::size_t m = static_cast<std::size_t>(std::llround(arc / p.grids.h(e)));
            u.set_value(e, m, row.at("value").get<double>());
        }
        write_solution_csv_file(opts.csv_path, u);
    }
    int rc = write_report(report, opts.report_path, out);
    if (rc == 0 && !report.value("solved", false))
        rc = 1;
    if (report.contains("error"))
        out << "solver error: " << report.at("error").get<std::string>() << '\n';
    else if (!opts.report_path.empty()) {
        // short human summary when the full report went to a file
        out << "mode " << opts.mode;
        if (report.contains("theta"))
            out << ", theta* = " << report.at("theta").get<double>();
        if (report.contains("theta_star"))
            out << ", " << report.at("theta_star").size() << " interior values";
        if (report.contains("kirchhoff_state"))
            out << ", |F| = " << report.at("kirchhoff_state").at("F_abs").get<double>();
        if (report.contains("residual_norm"))
            out << ", ||F|| = " << report.at("residual_norm").get<double>();
        if (report.contains("fl"))
            out << ", FL checks "
                << (report.at("fl").at("subsolution").at("pass").get<bool>() &&
                            report.at("fl").at("supersolution").at("pass").get<bool>()
                        ? "pass"
                        : "reported")
                << " (sub " << report.at("fl").at("subsolution").at("value").get<double>()
                << ", super " << report.at("fl").at("supersolution").at("value").get<double>()
                << ")";
        if (report.contains("verification"))
            out << ", barriers "
                << (report.at("verification").at("barrier_violations").get<std::size_t>() == 0
                        ? "ok"
                        : "violated");
        out << '\n';
    }
    return rc;
}

std::string run_sweep(const json& problem_json, const std::string& param,
                      const std::vector<std::string>& values) {
    if (values.empty())
        throw IoError("sweep needs a nonempty --values list");
    std::ostringstream csv;
    csv.precision(12);
    csv << "param,value,metric,result\n";

    auto emit = [&](const std::string& value, const std::string& metric, double result) {
        csv << param << ',' << value << ',' << metric << ',' << result << '\n';
    };
    auto emit_error = [&](const std::string& value, const std::string& what) {
        csv << param << ',' << value << ",error," << '"' << what << '"' << '\n';
    };

    // one solve appropriate to the topology: pure Dirichlet when every vertex
    // carries data, the junction pipeline on stars, residual search otherwise
    struct SweepSolve {
        GridFunction u;
        double theta = 0.0, f_abs = 0.0;
        bool has_theta = false;
        double lambda_star = 0.0;
    };
    auto run_one = [](const NetProblem& p) {
        SweepSolve out;
        if (p.net.interior_vertices().empty()) {
            DirichletEngine eng(p, p.cfg.effective_eta(p.grids), p.cfg.eps);
            out.u = eng.solve(p.vertex_values({}), StarSolveMode::newton);
            out.lambda_star = eng.lambda_star();
        } else if (p.net.is_star()) {
            StarSolver solver(p);
            out.lambda_star = solver.engine().lambda_star();
            auto solve = solver.solve_kirchhoff();
            out.u = std::move(solve.u);
            out.theta = solve.theta;
            out.f_abs = solve.kirchhoff_abs;
            out.has_theta = true;
        } else {
            NetworkSolver solver(p);
            out.lambda_star = solver.engine().lambda_star();
            auto solve = solver.solve();
            out.u = std::move(solve.u);
            out.f_abs = solve.residual_norm;
        }
        return out;
    };

    if (param == "h") {
        std::vector<ConvergenceRow> rows;
        for (const auto& vs : values) {
            try {
                double h = parse_value(vs);
                NetProblem p = problem_from_json(problem_json);
                p.grids = GridSet::with_spacing(p.net, h);
                auto solve = run_one(p);
                if (!p.reference.empty()) {
                    double err = 0.0;
                    for (std::size_t e = 0; e < p.net.n_edges(); ++e) {
                        const std::size_t n = static_cast<std::size_t>(p.grids.n_cells(e));
                        for (std::size_t m = 0; m <= n; ++m)
                            err = std::max(err, std::abs(solve.u.value(e, m) -
                                                         p.reference[e](p.grids.arc(e, m))));
                    }
                    rows.push_back({p.grids.min_h(), err});
                    emit(vs, "max_error", err);
                } else if (solve.has_theta) {
                    emit(vs, "theta", solve.theta);
                    emit(vs, "F_abs", solve.f_abs);
                }
            } catch (const std::exception& ex) {
                emit_error(vs, ex.what());
            }
        }
        if (rows.size() >= 2)
            emit("all", "order", fit_order(rows));
        return csv.str();
    }

    if (param == "eps" || param == "eta" || param == "sigma") {
        GridFunction prev;
        bool have_prev = false;
        for (const auto& vs : values) {
            try {
                double v = parse_value(vs);
                json j = problem_json;
                if (param == "eps")
                    j["solver"]["eps"] = v;
                else if (param == "eta")
                    j["solver"]["eta"] = v;
                else
                    j["kernels"]["sigma"] = v;
                NetProblem p = problem_from_json(j);
                auto solve = run_one(p);
                emit(vs, "lambda_star", solve.lambda_star);
                if (solve.has_theta)
                    emit(vs, "theta", solve.theta);
                emit(vs, "F_abs", solve.f_abs);
                double delta = p.net.length(0);
                for (std::size_t e = 0; e < p.net.n_edges(); ++e)
                    delta = std::min(delta, p.net.length(e));
                delta *= 0.25;
                emit(vs, "lipschitz", lipschitz_on_gamma_delta(solve.u, delta));
                if (have_prev)
                    emit(vs, "cauchy_diff", sup_diff_on_gamma_delta(solve.u, prev, delta));
                prev = std::move(solve.u);
                have_prev = true;
            } catch (const std::exception& ex) {
                emit_error(vs, ex.what());
            }
        }
        return csv.str();
    }

    throw IoError("unknown sweep parameter '" + param + "' (expected h|eps|eta|sigma)");
}

int cmd_sweep(const std::string& path, const std::string& param,
              const std::vector<std::string>& values, const std::string& out_csv,
              std::ostream& out) {
    try {
        json j = load_json_file(path);
        std::string csv = run_sweep(j, param, values);
        if (!out_csv.empty()) {
            std::ofstream os(out_csv);
            if (!os) {
                out << "cannot write '" << out_csv << "'\n";
                return 2;
            }
            os << csv;
        } else {
            out << csv;
        }
        return 0;
    } catch (const IoError& ex) {
        out << "usage error: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        out << "error: " << ex.what() << '\n';
        return 1;
    }
}

json run_flcheck(const json& problem_json, const std::string& solution_csv) {
    NetProblem p = problem_from_json(problem_json);
    std::istringstream is(solution_csv);
    GridFunction u = read_solution_csv(is, p);
    json j;
    j["fl"] = fl_report(u, p);
    j["solved"] = true;
    return j;
}

int cmd_flcheck(const std::string& path, const std::string& solution_csv,
                const std::string& report_path, std::ostream& out) {
    try {
        json j = load_json_file(path);
        std::ifstream is(solution_csv);
        if (!is) {
            out << "cannot open solution '" << solution_csv << "'\n";
            return 2;
        }
        std::ostringstream buf;
        buf << is.rdbuf();
        json report = run_flcheck(j, buf.str());
        return write_report(report, report_path, out);
    } catch (const std::exception& ex) {
        out << "error: " << ex.what() << '\n';
        return 1;
    }
}

} // namespace khj
