#ifndef KHJ_KERNELS_HPP
#define KHJ_KERNELS_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "khj/expr.hpp"

namespace khj {

struct KernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One ordered pair (E,F) of the family nu_EF(x,r).
struct KernelPair {
    enum class Form { zero, model, table };
    Form form = Form::zero;
    // model: nu(x,r) = c(x) * r^{-(1+sigma)}; x-dependence enters through c only
    Expr c;
    // table: piecewise linear in r on a (log-spaced) grid, zero beyond the
    // last sample, clamped below the first
    std::vector<double> table_r, table_v;
    double lipschitz_x = 0.0;
};

struct LevyIntegral {
    double value = 0.0;
    bool divergent = false;
};

// Moments of the capped kernel value k(r) = min(cap, c * r^{-(1+sigma)}) on
// [r1, r2]: m0 = int k dr, m1 = int r k dr. cap <= 0 means no cap.
struct KernelMoments {
    double m0 = 0.0;
    double m1 = 0.0;
};
KernelMoments model_moments(double c, double sigma, double cap, double r1, double r2);

class KernelFamily {
public:
    KernelFamily() = default;
    KernelFamily(std::size_t n_edges, double lambda_bound, double sigma);

    void set_pair(std::size_t E, std::size_t F, KernelPair p);
    const KernelPair& pair(std::size_t E, std::size_t F) const;

    double lambda_bound() const { return lambda_bound_; }
    double sigma() const { return sigma_; }
    std::size_t n_edges() const { return n_; }

    std::optional<double> truncation() const { return eta_; }
    void set_truncation(std::optional<double> eta);
    double cap() const { return eta_ ? 1.0 / *eta_ : -1.0; } // -1 = uncapped

    // kernel value, capped at eta^{-1} when truncation is set; r <= 0 is a
    // domain error
    double value(std::size_t E, std::size_t F, double x, double r) const;
    // untruncated value regardless of eta
    double raw_value(std::size_t E, std::size_t F, double x, double r) const;

    // int_0^infty min{r^gamma, 1} nu_EF(x,r) dr, untruncated. The model form
    // is integrated analytically and flagged divergent when gamma <= sigma.
    LevyIntegral levy_integral(std::size_t E, std::size_t F, double x, double gamma) const;

    // lambda_EF^eta(x) = int_0^len nu^eta_EF(x, dist0 + z) dz, the truncated
    // tail mass over a target interval at distance offset dist0 from x.
    // Requires the truncation to be set.
    double tail_mass(std::size_t E, std::size_t F, double x, double dist0, double len) const;

    // moments of the truncated pair kernel in the distance variable, used by
    // the quadrature layer; region clip [r1, r2]
    KernelMoments moments(std::size_t E, std::size_t F, double x, double r1, double r2) const;

    bool pair_is_zero(std::size_t E, std::size_t F) const;
    // true when all exterior pairs (E,F), F != E, vanish
    bool censored(std::size_t E) const;

private:
    std::size_t n_ = 0;
    double lambda_bound_ = 1.0;
    double sigma_ = 0.5;
    std::optional<double> eta_;
    std::vector<KernelPair> pairs_;

    double table_value(const KernelPair& p, double r) const;
    KernelMoments table_moments(const KernelPair& p, double x, double r1, double r2) const;
};

} // namespace khj

#endif
