#include "khj/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace khj {

namespace {

// 4-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double g4x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                           0.8611363115940526};
constexpr double g4w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                           0.3478548451374538};

} // namespace

KernelMoments model_moments(double c, double sigma, double cap, double r1, double r2) {
    KernelMoments m;
    r1 = std::max(r1, 0.0);
    if (r2 <= r1 || c <= 0.0)
        return m;
    // crossover below which the cap is active: c r^{-(1+sigma)} >= cap
    double rc = cap > 0.0 ? std::pow(c / cap, 1.0 / (1.0 + sigma)) : 0.0;
    double a = std::min(r2, std::max(r1, rc)); // capped on [r1, a], power tail on [a, r2]
    if (cap > 0.0 && a > r1) {
        m.m0 += cap * (a - r1);
        m.m1 += cap * 0.5 * (a * a - r1 * r1);
    }
    if (r2 > a) {
        double lo = std::max(a, 0.0);
        if (lo <= 0.0)
            return {std::numeric_limits<double>::infinity(), m.m1 + c / (1.0 - sigma) * std::pow(r2, 1.0 - sigma)};
        m.m0 += c / sigma * (std::pow(lo, -sigma) - std::pow(r2, -sigma));
        m.m1 += c / (1.0 - sigma) * (std::pow(r2, 1.0 - sigma) - std::pow(lo, 1.0 - sigma));
    }
    return m;
}

KernelFamily::KernelFamily(std::size_t n_edges, double lambda_bound, double sigma)
    : n_(n_edges), lambda_bound_(lambda_bound), sigma_(sigma), pairs_(n_edges * n_edges) {
    if (!(lambda_bound > 0.0))
        throw KernelError("kernel bound must be positive");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw KernelError("kernel order sigma must lie in (0,1)");
}

void KernelFamily::set_pair(std::size_t E, std::size_t F, KernelPair p) {
    if (p.form == KernelPair::Form::table) {
        if (p.table_r.size() != p.table_v.size() || p.table_r.size() < 2)
            throw KernelError("tabulated kernel needs matching r/value arrays of size >= 2");
        if (!std::is_sorted(p.table_r.begin(), p.table_r.end()))
            throw KernelError("tabulated kernel abscissae must be increasing");
        if (p.table_r.front() <= 0.0)
            throw KernelError("tabulated kernel abscissae must be positive");
    }
    pairs_.at(E * n_ + F) = std::move(p);
}

const KernelPair& KernelFamily::pair(std::size_t E, std::size_t F) const {
    return pairs_.at(E * n_ + F);
}

void KernelFamily::set_truncation(std::optional<double> eta) {
    if (eta && !(*eta > 0.0 && *eta <= 1.0))
        throw KernelError("truncation eta must lie in (0,1]");
    eta_ = eta;
}

double KernelFamily::table_value(const KernelPair& p, double r) const {
    const auto& rs = p.table_r;
    const auto& vs = p.table_v;
    if (r <= rs.front())
        return vs.front();
    if (r >= rs.back())
        return 0.0;
    auto it = std::upper_bound(rs.begin(), rs.end(), r);
    std::size_t i = static_cast<std::size_t>(it - rs.begin()) - 1;
    double t = (r - rs[i]) / (rs[i + 1] - rs[i]);
    return (1.0 - t) * vs[i] + t * vs[i + 1];
}

double KernelFamily::raw_value(std::size_t E, std::size_t F, double x, double r) const {
    if (!(r > 0.0))
        throw KernelError("kernel argument r must be positive");
    const auto& p = pair(E, F);
    switch (p.form) {
    case KernelPair::Form::zero: return 0.0;
    case KernelPair::Form::model: return p.c(x) * std::pow(r, -(1.0 + sigma_));
    case KernelPair::Form::table: return table_value(p, r);
    }
    return 0.0;
}

double KernelFamily::value(std::size_t E, std::size_t F, double x, double r) const {
    double v = raw_value(E, F, x, r);
    if (eta_)
        v = std::min(v, 1.0 / *eta_);
    return v;
}

LevyIntegral KernelFamily::levy_integral(std::size_t E, std::size_t F, double x, double gamma) const {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw KernelError("levy_integral requires gamma in (0,1]");
    const auto& p = pair(E, F);
    LevyIntegral out;
    switch (p.form) {
    case KernelPair::Form::zero:
        return out;
    case KernelPair::Form::model: {
        // int_0^1 r^{gamma-1-sigma} + int_1^inf r^{-1-sigma}, both analytic
        if (gamma <= sigma_) {
            out.divergent = true;
            return out;
        }
        out.value = p.c(x) * (1.0 / (gamma - sigma_) + 1.0 / sigma_);
        return out;
    }
    case KernelPair::Form::table: {
        // bounded support; composite Gauss split at the table breakpoints and
        // at r = 1 where min{r^gamma, 1} kinks
        auto panel = [&](double lo, double hi) {
            double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo), s = 0.0;
            for (int q = 0; q < 4; ++q) {
                double r = mid + hw * g4x[q];
                s += hw * g4w[q] * std::min(std::pow(r, gamma), 1.0) * table_value(p, r);
            }
            return s;
        };
        std::vector<double> cuts{0.0};
        for (double r : p.table_r)
            cuts.push_back(r);
        if (1.0 < p.table_r.back())
            cuts.push_back(1.0);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double lo = cuts[i], hi = cuts[i + 1];
            if (hi <= lo)
                continue;
            if (lo == 0.0) {
                // r^gamma has an unbounded derivative at 0: dyadic shells
                double upper = hi;
                for (int shell = 0; shell < 60 && upper > 0.0; ++shell) {
                    double lower = upper * 0.5;
                    out.value += panel(lower, upper);
                    upper = lower;
                }
            } else {
                for (int sub = 0; sub < 8; ++sub)
                    out.value += panel(lo + (hi - lo) * sub / 8.0,
                                       lo + (hi - lo) * (sub + 1) / 8.0);
            }
        }
        return out;
    }
    }
    return out;
}

KernelMoments KernelFamily::table_moments(const KernelPair& p, double x, double r1, double r2) const {
    (void)x;
    KernelMoments m;
    if (r2 <= r1)
        return m;
    const double cap = eta_ ? 1.0 / *eta_ : -1.0;
    // integrate between table breakpoints so the integrand is piecewise smooth
    std::vector<double> cuts{r1, r2};
    for (double r : p.table_r)
        if (r > r1 && r < r2)
            cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double hw = 0.5 * (cuts[i + 1] - cuts[i]), mid = 0.5 * (cuts[i + 1] + cuts[i]);
        if (hw <= 0.0)
            continue;
        for (int q = 0; q < 4; ++q) {
            double r = mid + hw * g4x[q];
            double v = table_value(p, r);
            if (cap > 0.0)
                v = std::min(v, cap);
            m.m0 += hw * g4w[q] * v;
            m.m1 += hw * g4w[q] * r * v;
        }
    }
    return m;
}

KernelMoments KernelFamily::moments(std::size_t E, std::size_t F, double x, double r1, double r2) const {
    const auto& p = pair(E, F);
    switch (p.form) {
    case KernelPair::Form::zero: return {};
    case KernelPair::Form::model: return model_moments(p.c(x), sigma_, cap(), r1, r2);
    case KernelPair::Form::table: return table_moments(p, x, r1, r2);
    }
    return {};
}

double KernelFamily::tail_mass(std::size_t E, std::size_t F, double x, double dist0, double len) const {
    if (!eta_)
        throw KernelError("tail_mass requires the truncation eta to be set");
    if (len <= 0.0)
        return 0.0;
    if (dist0 < 0.0)
        throw KernelError("tail_mass distance offset must be nonnegative");
    return moments(E, F, x, dist0, dist0 + len).m0;
}

bool KernelFamily::pair_is_zero(std::size_t E, std::size_t F) const {
    return pair(E, F).form == KernelPair::Form::zero;
}

bool KernelFamily::censored(std::size_t E) const {
    for (std::size_t F = 0; F < n_; ++F)
        if (F != E && !pair_is_zero(E, F))
            return false;
    return true;
}

} // namespace khj
