#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/pascal.hpp"
#include "pascalcert/rational.hpp"
#include "pascalcert/recurrence.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pascalcert {

/// Window data for the affine zoom theta_k(t) = mu + (t - 1/2)/p^(M+k) around mu = (m + 1/2)/p^M.
struct MagnifierConfig {
    unsigned M = 1;
    BigInt m = 1;
    unsigned k = 0;
    BigRational mu;
    BigRational tau;
    BigRational phi_mu;
    unsigned p = 3;

    [[nodiscard]] BigRational half_width() const { return BigRational(BigInt(1), 2 * ipow(p, M + k)); }
    [[nodiscard]] BigRational window_lo() const { return mu - half_width(); }
    [[nodiscard]] BigRational window_hi() const { return mu + half_width(); }
    [[nodiscard]] BigRational theta(const BigRational& t) const {
        return mu + (t - BigRational(1, 2)) / BigRational(ipow(p, M + k));
    }
};

inline MagnifierConfig make_magnifier(const PrimeContext& ctx, unsigned M, const BigInt& m, unsigned k) {
    const unsigned p = ctx.p();
    if (!ctx.odd()) throw std::invalid_argument("make_magnifier: p must be odd");
    if (M < 1) throw std::invalid_argument("make_magnifier: M must be at least 1");
    const BigInt pM = ipow(p, M);
    if (m < 1 || m >= pM) throw std::invalid_argument("make_magnifier: m outside [1, p^M)");
    MagnifierConfig cfg;
    cfg.M = M;
    cfg.m = m;
    cfg.k = k;
    cfg.p = p;
    cfg.mu = BigRational(2 * m + 1, 2 * pM);
    BigInt prod = 1;
    for (BigInt r = m; r > 0; r /= p) prod *= BigInt(r % p) + 1;
    cfg.tau = BigRational(prod, pow(BigInt(static_cast<unsigned long>(ctx.A())), M));
    cfg.phi_mu = phi_exact(ctx.spec(), cfg.mu);
    if (cfg.window_lo().sign() <= 0 || cfg.window_hi() > BigRational(1)) {
        throw std::invalid_argument("make_magnifier: window leaves (0, 1]");
    }
    return cfg;
}

/// M = 1, k = 1 when eta = 0 and p < 11; otherwise M = 2, k = 0 with m = xi p + (p-1)/2 - eta.
inline MagnifierConfig default_magnifier(const PrimeContext& ctx, long xi, long eta) {
    check_candidate(ctx, xi, eta);
    const long p = ctx.p();
    if (p < 11 && eta == 0) return make_magnifier(ctx, 1, BigInt(xi), 1);
    return make_magnifier(ctx, 2, BigInt(xi * p + (p - 1) / 2 - eta), 0);
}

/// slope * rho + intercept with exact rational coefficients.
struct LinearInRho {
    BigRational slope;
    BigRational intercept;

    [[nodiscard]] RInterval eval(const RInterval& rho) const {
        Precision bits = rho.precision();
        return RInterval(slope, bits) * rho + RInterval(intercept, bits);
    }

    /// Sign at the true rho, decided by locating the root -intercept/slope against the enclosure.
    [[nodiscard]] Sign sign(const RInterval& rho) const {
        if (slope.sign() == 0) {
            if (intercept.sign() == 0) return Sign::undecided;
            return intercept.sign() > 0 ? Sign::positive : Sign::negative;
        }
        BigRational root = -intercept / slope;
        RInterval r(root, rho.precision());
        bool above = r.strictly_below(rho) && !rho.contains(root);
        bool below = rho.strictly_below(r) && !rho.contains(root);
        if (!above && !below) return Sign::undecided;
        bool positive = (slope.sign() > 0) == above;
        return positive ? Sign::positive : Sign::negative;
    }

    friend LinearInRho operator-(const LinearInRho& a, const LinearInRho& b) {
        return {a.slope - b.slope, a.intercept - b.intercept};
    }
    friend bool operator==(const LinearInRho&, const LinearInRho&) = default;
};

/// Limit function tau mu (phi(t) - 1/4) - rho phi(mu)/p^M (t - 1/2).
inline LinearInRho Q_mu(const MagnifierConfig& cfg, const PrimeContext& ctx, const BigRational& t) {
    const BigRational quarter(1, 4), half(1, 2);
    BigRational ph = phi_exact(ctx.spec(), t);
    return {-cfg.phi_mu * (t - half) / BigRational(ipow(cfg.p, cfg.M)), cfg.tau * cfg.mu * (ph - quarter)};
}

/// Error term tau rho/p^(M+k) (phi(t) - 1/4)(t - 1/2).
inline LinearInRho E_mu_k(const MagnifierConfig& cfg, const PrimeContext& ctx, const BigRational& t) {
    const BigRational quarter(1, 4), half(1, 2);
    BigRational ph = phi_exact(ctx.spec(), t);
    return {cfg.tau * (ph - quarter) * (t - half) / BigRational(ipow(cfg.p, cfg.M + cfg.k)), BigRational(0)};
}

inline LinearInRho Delta_mu_k(const MagnifierConfig& cfg, const PrimeContext& ctx, const BigRational& t) {
    return Q_mu(cfg, ctx, t) - E_mu_k(cfg, ctx, t);
}

/// Checks p^k (phi(theta_k(t)) - phi(mu)) = tau (phi(t) - 1/4) in exact arithmetic.
inline bool lemma4_check(const MagnifierConfig& cfg, const PrimeContext& ctx, const BigRational& t) {
    if (t.sign() < 0 || t > BigRational(1)) throw std::invalid_argument("lemma4_check: t outside [0,1]");
    BigRational lhs = BigRational(ipow(cfg.p, cfg.k)) * (phi_exact(ctx.spec(), cfg.theta(t)) - cfg.phi_mu);
    BigRational rhs = cfg.tau * (phi_exact(ctx.spec(), t) - BigRational(1, 4));
    return lhs == rhs;
}

} // namespace pascalcert
