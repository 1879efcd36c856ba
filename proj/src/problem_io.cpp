#include "khj/problem_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "khj/hamiltonian.hpp"

namespace khj {

using nlohmann::json;

namespace {

NetworkSpec network_spec_from_json(const json& jn) {
    NetworkSpec spec;
    if (!jn.contains("vertices") || !jn.contains("edges"))
        throw IoError("network section needs 'vertices' and 'edges'");
    for (const auto& jv : jn.at("vertices")) {
        Vertex v;
        v.id = jv.at("id").get<std::string>();
        std::string kind = jv.at("kind").get<std::string>();
        if (kind == "interior") {
            v.kind = VertexKind::interior;
            if (jv.contains("B"))
                v.kirchhoff_flux = jv.at("B").get<double>();
        } else if (kind == "boundary") {
            v.kind = VertexKind::boundary;
            if (jv.contains("h"))
                v.dirichlet_value = jv.at("h").get<double>();
        } else {
            throw IoError("vertex '" + v.id + "': unknown kind '" + kind + "'");
        }
        spec.vertices.push_back(std::move(v));
    }
    for (const auto& je : jn.at("edges")) {
        Edge e;
        e.id = je.at("id").get<std::string>();
        e.tail = je.at("tail").get<std::string>();
        e.head = je.at("head").get<std::string>();
        e.length = je.at("length").get<double>();
        spec.edges.push_back(std::move(e));
    }
    return spec;
}

KernelPair kernel_pair_from_json(const json& jp) {
    KernelPair p;
    std::string family = jp.value("family", "zero");
    if (family == "zero") {
        p.form = KernelPair::Form::zero;
    } else if (family == "model") {
        p.form = KernelPair::Form::model;
        p.c = Expr::parse(jp.value("c", std::string("1")));
        p.lipschitz_x = jp.value("lipschitz_x", 0.0);
    } else if (family == "table") {
        p.form = KernelPair::Form::table;
        p.table_r = jp.at("r").get<std::vector<double>>();
        p.table_v = jp.at("values").get<std::vector<double>>();
    } else {
        throw IoError("unknown kernel family '" + family + "'");
    }
    return p;
}

Hamiltonian hamiltonian_from_json(const json& jh) {
    std::string family = jh.value("family", "abs");
    double C_H = jh.value("C_H", 0.0);
    Expr b = Expr::parse(jh.value("b", std::string("0")));
    Expr c = Expr::parse(jh.value("c", std::string("0")));
    if (family == "abs") {
        if (C_H <= 0.0)
            C_H = 2.0;
        return Hamiltonian::abs_shift(b, c, C_H);
    }
    if (family == "pwl") {
        double left = jh.value("left", 1.0);
        double right = jh.value("right", 1.0);
        if (C_H <= 0.0)
            C_H = std::max({left, right, 1.0}) + 1.0;
        return Hamiltonian::piecewise_linear(left, right, b, c, C_H);
    }
    if (family == "table") {
        // bilinear (x, p) grid, continued with coercive linear slopes beyond
        // the tabulated p-range; the assumption sampler vets the data
        auto xs = jh.at("x").get<std::vector<double>>();
        auto ps = jh.at("p").get<std::vector<double>>();
        auto vals = jh.at("values").get<std::vector<std::vector<double>>>();
        if (xs.size() < 2 || ps.size() < 2 || vals.size() != xs.size())
            throw IoError("tabulated Hamiltonian needs x, p axes and one row of values per x");
        for (const auto& row : vals)
            if (row.size() != ps.size())
                throw IoError("tabulated Hamiltonian rows must match the p axis");
        if (C_H <= 0.0)
            C_H = 2.0;
        bool convex = jh.value("convex", false);
        auto interp1 = [](const std::vector<double>& axis, double v) {
            std::size_t i = 0;
            while (i + 2 < axis.size() && axis[i + 1] < v)
                ++i;
            double t = (v - axis[i]) / (axis[i + 1] - axis[i]);
            return std::pair<std::size_t, double>{i, t};
        };
        auto eval = [xs, ps, vals, interp1, C_H](double x, double p) {
            auto [i, tx] = interp1(xs, std::clamp(x, xs.front(), xs.back()));
            double pc = std::clamp(p, ps.front(), ps.back());
            auto [j, tp] = interp1(ps, pc);
            tx = std::clamp(tx, 0.0, 1.0);
            tp = std::clamp(tp, 0.0, 1.0);
            double v = (1 - tx) * ((1 - tp) * vals[i][j] + tp * vals[i][j + 1]) +
                       tx * ((1 - tp) * vals[i + 1][j] + tp * vals[i + 1][j + 1]);
            // coercive continuation outside the tabulated p-range
            if (p > ps.back())
                v += (p - ps.back()) / C_H;
            else if (p < ps.front())
                v += (ps.front() - p) / C_H;
            return v;
        };
        return Hamiltonian::custom(eval, C_H, convex);
    }
    throw IoError("unknown Hamiltonian family '" + family + "'");
}

ScalarField field_from_json(const json& section, const std::string& edge_id) {
    // per-edge expression, sampled table, or section default
    if (section.contains("samples") && section.at("samples").contains(edge_id)) {
        const auto& js = section.at("samples").at(edge_id);
        auto xs = js.at("x").get<std::vector<double>>();
        auto vs = js.at("values").get<std::vector<double>>();
        if (xs.size() != vs.size() || xs.size() < 2)
            throw IoError("sampled field on '" + edge_id + "' needs matching x/values arrays");
        return [xs, vs](double x) {
            if (x <= xs.front())
                return vs.front();
            if (x >= xs.back())
                return vs.back();
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
            double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            return (1.0 - t) * vs[i] + t * vs[i + 1];
        };
    }
    std::string text;
    if (section.contains("edges") && section.at("edges").contains(edge_id))
        text = section.at("edges").at(edge_id).get<std::string>();
    else if (section.contains("default"))
        text = section.at("default").get<std::string>();
    else
        return {};
    Expr e = Expr::parse(text);
    return [e](double x) { return e(x); };
}

} // namespace

NetProblem problem_from_json(const json& j) {
    NetProblem p;
    p.net = Network::build(network_spec_from_json(j.at("network")));
    const std::size_t ne = p.net.n_edges();

    // kernels
    const auto& jk = j.at("kernels");
    double Lambda = jk.value("Lambda", 1.0);
    double sigma = jk.at("sigma").get<double>();
    p.kernels = KernelFamily(ne, Lambda, sigma);
    if (jk.contains("default")) {
        KernelPair def = kernel_pair_from_json(jk.at("default"));
        for (std::size_t E = 0; E < ne; ++E)
            for (std::size_t F = 0; F < ne; ++F)
                p.kernels.set_pair(E, F, def);
    }
    if (jk.contains("pairs"))
        for (const auto& jp : jk.at("pairs")) {
            std::size_t E = p.net.edge_index(jp.at("from").get<std::string>());
            std::size_t F = p.net.edge_index(jp.at("to").get<std::string>());
            bool symmetric = jp.value("symmetric", false);
            p.kernels.set_pair(E, F, kernel_pair_from_json(jp));
            if (symmetric && E != F)
                p.kernels.set_pair(F, E, kernel_pair_from_json(jp));
        }

    // hamiltonians
    const auto& jh = j.at("hamiltonians");
    p.hamiltonians.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const std::string id = p.net.edge(e).id;
        if (jh.contains("edges") && jh.at("edges").contains(id))
            p.hamiltonians[e] = hamiltonian_from_json(jh.at("edges").at(id));
        else if (jh.contains("default"))
            p.hamiltonians[e] = hamiltonian_from_json(jh.at("default"));
        else
            throw IoError("no Hamiltonian for edge '" + id + "'");
    }

    // sources, viscosity coefficient, optional reference
    p.f.resize(ne);
    p.mu.resize(ne);
    p.reference.clear();
    for (std::size_t e = 0; e < ne; ++e) {
        const std::string id = p.net.edge(e).id;
        if (j.contains("sources"))
            p.f[e] = field_from_json(j.at("sources"), id);
        if (j.contains("mu"))
            p.mu[e] = field_from_json(j.at("mu"), id);
    }
    if (j.contains("reference")) {
        p.reference.resize(ne);
        for (std::size_t e = 0; e < ne; ++e)
            p.reference[e] = field_from_json(j.at("reference"), p.net.edge(e).id);
    }

    // solver config and grids
    const auto& js = j.at("solver");
    p.cfg.lambda = js.value("lambda", 1.0);
    p.cfg.eps = js.value("eps", 0.0);
    if (js.contains("eta") && js.at("eta").is_number())
        p.cfg.eta = js.at("eta").get<double>();
    else
        p.cfg.eta = 0.0; // "h" or absent: tie to the grid
    p.cfg.tol_fp = js.value("tol_fp", 1e-10);
    p.cfg.tol_K = js.value("tol_K", 1e-8);
    p.cfg.max_iter = js.value("max_iter", 200000);
    p.cfg.use_newton = js.value("newton", true);
    std::string rule = js.value("singular_rule", std::string("truncate"));
    if (rule == "truncate")
        p.cfg.singular_rule = SingularRule::truncate;
    else if (rule == "exclude_compensate")
        p.cfg.singular_rule = SingularRule::exclude_compensate;
    else
        throw IoError("unknown singular_rule '" + rule + "'");
    if (js.contains("eps_schedule"))
        p.cfg.eps_schedule = js.at("eps_schedule").get<std::vector<double>>();
    if (js.contains("eta_schedule"))
        p.cfg.eta_schedule = js.at("eta_schedule").get<std::vector<double>>();

    std::vector<int> cells(ne, 16);
    if (js.contains("n_cells")) {
        const auto& jc = js.at("n_cells");
        if (jc.is_number_integer()) {
            cells.assign(ne, jc.get<int>());
        } else {
            int def = jc.value("default", 16);
            cells.assign(ne, def);
            if (jc.contains("edges"))
                for (const auto& [id, val] : jc.at("edges").items())
                    cells[p.net.edge_index(id)] = val.get<int>();
        }
    }
    p.grids = GridSet(p.net, cells);
    p.cfg.check();
    return p;
}

ValidationReport validate_problem_json(const json& j) {
    ValidationReport rep;
    auto add = [&](const std::string& where, const std::string& what) {
        rep.violations.push_back({where, what});
    };

    NetworkSpec spec;
    try {
        spec = network_spec_from_json(j.at("network"));
    } catch (const std::exception& ex) {
        add("network", ex.what());
        return rep;
    }
    ValidationReport net_rep = validate(spec);
    rep.violations.insert(rep.violations.end(), net_rep.violations.begin(),
                          net_rep.violations.end());
    if (!rep.ok())
        return rep;

    if (!j.contains("kernels") || !j.at("kernels").contains("sigma")) {
        add("kernels", "missing kernels section or sigma");
        return rep;
    }
    double sigma = j.at("kernels").at("sigma").get<double>();
    if (!(sigma > 0.0 && sigma < 1.0)) {
        add("kernels", "assumption violated: sigma must lie in (0,1), got " +
                           std::to_string(sigma));
        return rep;
    }

    NetProblem p;
    try {
        p = problem_from_json(j);
    } catch (const std::exception& ex) {
        add("problem", ex.what());
        return rep;
    }

    // kernel envelope and x-Lipschitz sampling over five decades of r;
    // density is a knob (default 256 samples per decade for tabulated pairs)
    const double Lambda = p.kernels.lambda_bound();
    const int per_decade = j.at("kernels").value("envelope_samples_per_decade", 256);
    std::mt19937 rng(7);
    for (std::size_t E = 0; E < p.net.n_edges(); ++E) {
        std::uniform_real_distribution<double> ux(0.0, p.net.length(E));
        for (std::size_t F = 0; F < p.net.n_edges(); ++F) {
            if (p.kernels.pair_is_zero(E, F))
                continue;
            const bool tabulated =
                p.kernels.pair(E, F).form == KernelPair::Form::table;
            const int samples = tabulated ? 5 * per_decade : 64;
            for (int s = 0; s < samples; ++s) {
                double x = ux(rng), y = ux(rng);
                double r = std::pow(10.0, -3.0 + 5.0 * (s + 0.5) / samples);
                double envelope = Lambda * std::pow(r, -(1.0 + sigma));
                double vx = p.kernels.raw_value(E, F, x, r);
                if (vx < 0.0 || vx > envelope * (1.0 + 1e-9)) {
                    add(p.net.edge(E).id + "->" + p.net.edge(F).id,
                        "kernel leaves the Lambda r^{-(1+sigma)} envelope at r=" +
                            std::to_string(r));
                    break;
                }
                double vy = p.kernels.raw_value(E, F, y, r);
                if (std::abs(vx - vy) > Lambda * std::abs(x - y) * std::pow(r, -(1.0 + sigma)) *
                                            (1.0 + 1e-9)) {
                    add(p.net.edge(E).id + "->" + p.net.edge(F).id,
                        "kernel violates the x-Lipschitz envelope at r=" + std::to_string(r));
                    break;
                }
            }
        }
    }

    for (std::size_t e = 0; e < p.net.n_edges(); ++e) {
        auto msgs = check_hamiltonian_assumptions(p.hamiltonians[e], 0.0, p.net.length(e), 2000,
                                                  11u + static_cast<unsigned>(e));
        for (const auto& m : msgs)
            add(p.net.edge(e).id, "Hamiltonian assumption sampling: " + m);
    }
    return rep;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw IoError("parse error in '" + path + "': " + ex.what());
    }
    return j;
}

NetProblem load_problem(const std::string& path) {
    return problem_from_json(load_json_file(path));
}

void write_solution_csv(std::ostream& os, const GridFunction& u) {
    const auto& net = u.network();
    const auto& grids = u.grids();
    os << "edge,arc,value\n";
    os.precision(17);
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
        for (std::size_t m = 0; m <= n; ++m)
            os << net.edge(e).id << ',' << grids.arc(e, m) << ',' << u.value(e, m) << '\n';
    }
}

void write_solution_csv_file(const std::string& path, const GridFunction& u) {
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot write '" + path + "'");
    write_solution_csv(os, u);
}

GridFunction read_solution_csv(std::istream& is, const NetProblem& p) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("edge,arc,value", 0) != 0)
        throw IoError("solution CSV must start with the header edge,arc,value");
    std::map<std::string, std::vector<std::pair<double, double>>> rows;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string id, arc_s, val_s;
        if (!std::getline(ls, id, ',') || !std::getline(ls, arc_s, ',') ||
            !std::getline(ls, val_s))
            throw IoError("malformed CSV row: " + line);
        rows[id].push_back({std::stod(arc_s), std::stod(val_s)});
    }
    GridFunction u(p.net, p.grids);
    for (std::size_t e = 0; e < p.net.n_edges(); ++e) {
        const std::string& id = p.net.edge(e).id;
        auto it = rows.find(id);
        const std::size_t n = static_cast<std::size_t>(p.grids.n_cells(e));
        if (it == rows.end() || it->second.size() != n + 1)
            throw IoError("solution rows for edge '" + id + "' do not match its grid");
        auto& pts = it->second;
        std::sort(pts.begin(), pts.end());
        for (std::size_t m = 0; m <= n; ++m) {
            double want = p.grids.arc(e, m);
            if (std::abs(pts[m].first - want) > 1e-9 * std::max(1.0, want))
                throw IoError("solution arc grid for edge '" + id + "' is misaligned");
            // vertex rows from different edges must agree
            if (m == 0 || m == n) {
                std::size_t v = m == 0 ? p.net.tail_of(e) : p.net.head_of(e);
                double existing = u.vertex_value(v);
                if (existing != 0.0 && std::abs(existing - pts[m].second) > 1e-9)
                    throw IoError("solution is discontinuous at vertex '" + p.net.vertex(v).id +
                                  "'");
            }
            u.set_value(e, m, pts[m].second);
        }
    }
    return u;
}

GridFunction read_solution_csv_file(const std::string& path, const NetProblem& p) {
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path + "'");
    return read_solution_csv(is, p);
}

json solution_to_json(const GridFunction& u) {
    const auto& net = u.network();
    const auto& grids = u.grids();
    json rows = json::array();
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
        const std::size_t n = static_cast<std::size_t>(grids.n_cells(e));
        for (std::size_t m = 0; m <= n; ++m)
            rows.push_back({{"edge", net.edge(e).id},
                            {"arc", grids.arc(e, m)},
                            {"value", u.value(e, m)}});
    }
    return rows;
}

} // namespace khj
