#include "khj/nonlocal.hpp"

#include <algorithm>
#include <cmath>

namespace khj {

namespace {

// Accumulate hat weights of one profile segment clipped to [z_lo, z_hi] and
// to the region {r >= delta} or {r < delta}.
void accumulate_segment(const KernelFamily& kern, std::size_t E, std::size_t F, double x,
                        const DistSeg& seg, double delta, NonlocalRegion region, double h,
                        std::size_t n_cells, std::vector<double>& row) {
    double z_lo = seg.z0, z_hi = seg.z1;
    // clip by the region in the distance variable
    if (delta > 0.0 || region == NonlocalRegion::ball) {
        // r(z) = r0 + slope (z - z0) is monotone on the segment
        double r_at_lo = seg.r0, r_at_hi = seg.r_at(seg.z1);
        double rmin = std::min(r_at_lo, r_at_hi), rmax = std::max(r_at_lo, r_at_hi);
        double keep_lo, keep_hi; // admissible r-range
        if (region == NonlocalRegion::complement) {
            keep_lo = std::max(rmin, delta);
            keep_hi = rmax;
        } else {
            keep_lo = rmin;
            keep_hi = std::min(rmax, delta);
        }
        if (keep_hi <= keep_lo)
            return;
        // map the admissible r-range back to z
        auto z_of_r = [&](double r) { return seg.z0 + (r - seg.r0) / seg.slope; };
        double za = z_of_r(seg.slope > 0 ? keep_lo : keep_hi);
        double zb = z_of_r(seg.slope > 0 ? keep_hi : keep_lo);
        z_lo = std::max(z_lo, za);
        z_hi = std::min(z_hi, zb);
        if (z_hi <= z_lo)
            return;
    }

    std::size_t k_first = static_cast<std::size_t>(std::max(0.0, std::floor(z_lo / h - 1e-12)));
    for (std::size_t k = k_first; k < n_cells; ++k) {
        double cell_lo = h * static_cast<double>(k);
        double cell_hi = cell_lo + h;
        double a = std::max(z_lo, cell_lo), b = std::min(z_hi, cell_hi);
        if (b <= a + 1e-300) {
            if (cell_lo >= z_hi)
                break;
            continue;
        }
        double ra = seg.r_at(a), rb = seg.r_at(b);
        double r1 = std::min(ra, rb), r2 = std::max(ra, rb);
        KernelMoments mom = kern.moments(E, F, x, r1, r2);
        // w_right = int (z - cell_lo)/h nu dz, w_left = m0 - w_right
        double w_right;
        if (seg.slope > 0)
            w_right = ((a - cell_lo - ra) * mom.m0 + mom.m1) / h;
        else
            w_right = ((a - cell_lo + ra) * mom.m0 - mom.m1) / h;
        row[k] += mom.m0 - w_right;
        row[k + 1] += w_right;
    }
}

} // namespace

std::vector<double> nonlocal_row(const Network& net, const GridSet& grids,
                                 const KernelFamily& kernels, std::size_t E, std::size_t m,
                                 std::size_t F, double delta, NonlocalRegion region) {
    const std::size_t nF = static_cast<std::size_t>(grids.n_cells(F));
    std::vector<double> row(nF + 1, 0.0);
    if (kernels.pair_is_zero(E, F))
        return row;
    const double x = grids.arc(E, m);
    const double hF = grids.h(F);
    for (const auto& seg : net.distance_profile(E, x, F))
        accumulate_segment(kernels, E, F, x, seg, delta, region, hF, nF, row);
    return row;
}

NonlocalOperator::NonlocalOperator(const Network& net, const GridSet& grids,
                                   const KernelFamily& kernels, double delta,
                                   NonlocalRegion region)
    : net_(&net), grids_(&grids), kernels_(&kernels), delta_(delta) {
    const std::size_t ne = net.n_edges();
    cols_.resize(ne);
    for (std::size_t F = 0; F < ne; ++F)
        cols_[F] = static_cast<std::size_t>(grids.n_cells(F)) + 1;

    const bool truncated = kernels.truncation().has_value();
    if (!truncated && !(delta > 0.0) && region == NonlocalRegion::complement) {
        for (std::size_t E = 0; E < ne; ++E)
            if (!kernels.pair_is_zero(E, E) || !kernels.censored(E))
                throw KernelError("untruncated kernel requires a positive exclusion radius");
    }

    w_.resize(ne * ne);
    mass_.resize(ne);
    ext_mass_.resize(ne);
    for (std::size_t E = 0; E < ne; ++E) {
        const std::size_t rows = static_cast<std::size_t>(grids.n_cells(E)) + 1;
        mass_[E].assign(rows, 0.0);
        ext_mass_[E].assign(rows, 0.0);
        for (std::size_t F = 0; F < ne; ++F) {
            auto& blk = w_[E * ne + F];
            if (kernels.pair_is_zero(E, F))
                continue;
            blk.assign(rows * cols_[F], 0.0);
            for (std::size_t m = 0; m < rows; ++m) {
                auto row = nonlocal_row(net, grids, kernels, E, m, F, delta, region);
                double s = 0.0;
                for (double v : row)
                    s += v;
                std::copy(row.begin(), row.end(), blk.begin() + m * cols_[F]);
                mass_[E][m] += s;
                if (F != E)
                    ext_mass_[E][m] += s;
            }
        }
    }
}

const double* NonlocalOperator::row(std::size_t E, std::size_t F, std::size_t m) const {
    const auto& blk = w_[E * net_->n_edges() + F];
    if (blk.empty())
        return nullptr;
    return blk.data() + m * cols_[F];
}

double NonlocalOperator::apply(const GridFunction& u, std::size_t E, std::size_t m) const {
    const double um = u.value(E, m);
    double acc = 0.0;
    const std::size_t ne = net_->n_edges();
    for (std::size_t F = 0; F < ne; ++F) {
        const double* r = row(E, F, m);
        if (!r)
            continue;
        const std::size_t nc = cols_[F];
        for (std::size_t k = 0; k < nc; ++k)
            acc += r[k] * (u.value(F, k) - um);
    }
    return acc;
}

double nonlocal_apply(const GridFunction& u, const KernelFamily& kernels, std::size_t E,
                      std::size_t m, double delta, NonlocalRegion region) {
    const auto& net = u.network();
    const auto& grids = u.grids();
    if (!kernels.truncation() && region == NonlocalRegion::complement && delta < grids.h(E))
        throw KernelError("nonlocal_apply needs a truncated kernel or delta >= h");
    const double um = u.value(E, m);
    double acc = 0.0;
    for (std::size_t F = 0; F < net.n_edges(); ++F) {
        auto row = nonlocal_row(net, grids, kernels, E, m, F, delta, region);
        for (std::size_t k = 0; k < row.size(); ++k)
            acc += row[k] * (u.value(F, k) - um);
    }
    return acc;
}

double lf_dissipation(double C_H, double mu_plus_eps, double h) {
    return std::max(0.0, C_H - 2.0 * mu_plus_eps / h);
}

double discrete_residual(const GridFunction& u, const NonlocalOperator& op, const EdgeFields& d,
                         std::size_t E, std::size_t m) {
    const auto& grids = op.grids();
    const std::size_t n = static_cast<std::size_t>(grids.n_cells(E));
    if (m == 0 || m >= n)
        throw GridError("discrete_residual is defined at interior nodes only");
    const double h = grids.h(E);
    const double um = u.value(E, m);
    const double ul = u.value(E, m - 1), ur = u.value(E, m + 1);
    const double mu_eps = d.node(d.mu, m) + d.eps;
    const double x = grids.arc(E, m);
    const double diss = lf_dissipation(d.H->lipschitz_p(), mu_eps, h);
    double r = (d.lambda + d.node(d.lambda_add, m)) * um;
    r -= mu_eps * (ul - 2.0 * um + ur) / (h * h);
    r -= op.apply(u, E, m);
    r += d.H->lf_flux(x, (um - ul) / h, (ur - um) / h, diss);
    r -= d.node(d.f, m);
    return r;
}

double measure_modulus(const std::vector<double>& values, double h, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw GridError("measure_modulus requires gamma in (0,1]");
    double best = 0.0;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dist = h * static_cast<double>(j - i);
            best = std::max(best, std::abs(values[j] - values[i]) / std::pow(dist, gamma));
        }
    return best;
}

} // namespace khj
