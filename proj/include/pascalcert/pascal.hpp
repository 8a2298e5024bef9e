#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/padic.hpp"
#include "pascalcert/rational.hpp"
#include "pascalcert/recurrence.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace pascalcert {

inline bool is_prime(unsigned long n) {
    if (n < 2) return false;
    for (unsigned long d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

/// Number of k with p not dividing binom(n, k): the product of (digit + 1) over the base-p digits of n.
inline BigInt row_count(unsigned p, const BigInt& n) {
    if (n < 0) throw std::invalid_argument("row_count: n must be nonnegative");
    BigInt out = 1, m = n;
    while (m > 0) {
        BigInt q = m / p;
        out *= BigInt(m - q * p) + 1;
        m = q;
    }
    return out;
}

/// F_p(n) = 1/2 sum_j A^j b_j prod_{i >= j} (b_i + 1), with b_j the base-p digits of n.
inline BigInt F(unsigned p, const BigInt& n) {
    if (n < 0) throw std::invalid_argument("F: n must be nonnegative");
    const BigInt A = BigInt(p) * (p + 1) / 2;
    std::vector<unsigned> digits;
    for (BigInt m = n; m > 0; m /= p) digits.push_back(static_cast<unsigned>(BigInt(m % p).get_ui()));
    BigInt total = 0, high = 1;
    for (std::size_t j = digits.size(); j-- > 0;) {
        high *= digits[j] + 1;
        total += pow(A, j) * digits[j] * high;
    }
    return total / 2;
}

/// F_p(n) summed row by row; quadratic in the number of digits times n.
inline BigInt F_cumulative(unsigned p, const BigInt& n) {
    BigInt total = 0;
    for (BigInt m = 0; m < n; ++m) total += row_count(p, m);
    return total;
}

/// F_p(n) from the recurrence F(n) = sum_j (p - j) F(floor((n + j)/p)).
inline BigInt F_recurrence(const RecurrenceSpec& spec, const BigInt& n) {
    if (n == 0) return 0;
    return f_integer(spec, n).numerator();
}

/// Fixed data for one prime: A = binom(p+1, 2), rho = log_p A, and the binomial recurrence.
class PrimeContext {
public:
    explicit PrimeContext(unsigned p, Precision rho_bits = kDefaultPrecisionCap)
        : p_(p), A_(static_cast<unsigned long>(p) * (p + 1) / 2), spec_(RecurrenceSpec::binomial(p)),
          rho_cache_(spec_.rho(rho_bits + 64)), rho_bits_(rho_bits) {
        if (!is_prime(p)) throw std::invalid_argument("PrimeContext: p must be prime");
    }

    [[nodiscard]] unsigned p() const { return p_; }
    [[nodiscard]] unsigned long A() const { return A_; }
    [[nodiscard]] const RecurrenceSpec& spec() const { return spec_; }
    [[nodiscard]] bool odd() const { return p_ % 2 == 1; }

    [[nodiscard]] RInterval rho(Precision bits) const {
        if (bits > rho_bits_) return spec_.rho(bits);
        return rho_cache_.rounded_to(bits);
    }
    [[nodiscard]] double rho_double() const { return rho_cache_.mid_double(); }

    [[nodiscard]] RInterval phi(const BigRational& x, Precision bits) const { return phi_enclosure(spec_, x, bits); }

private:
    unsigned p_;
    unsigned long A_;
    RecurrenceSpec spec_;
    RInterval rho_cache_;
    Precision rho_bits_;
};

/// G(s) = s^(-rho) phi(s) for s in [1/p, 1].
inline RInterval G(const PrimeContext& ctx, const BigRational& s, Precision bits) {
    if (s < BigRational(1, ctx.p()) || s > BigRational(1)) throw std::invalid_argument("G: s outside [1/p, 1]");
    return interval_pow(RInterval(s, bits), ctx.rho(bits)) * ctx.phi(s, bits);
}

inline void check_candidate(const PrimeContext& ctx, long xi, long eta) {
    if (!ctx.odd()) throw std::invalid_argument("candidate points need an odd prime");
    const long p = ctx.p();
    if (xi < 1 || xi >= p || eta < 0 || eta > (p - 1) / 2) {
        throw std::invalid_argument("candidate (" + std::to_string(xi) + "," + std::to_string(eta) + ") out of range");
    }
}

/// (2 xi + 1)/(2p) - eta/p^2, whose digits are xi, (p-1)/2 - eta, then (p-1)/2 forever.
inline BigRational s_hat(const PrimeContext& ctx, long xi, long eta) {
    check_candidate(ctx, xi, eta);
    const long p = ctx.p();
    return BigRational(2 * xi + 1, 2 * p) - BigRational(eta, p * p);
}

/// phi(s_hat) = (xi+1)/(2A) (xi + (p - 2 eta)(p - 2 eta + 1)/(2p(p+1))).
inline BigRational phi_hat(const PrimeContext& ctx, long xi, long eta) {
    check_candidate(ctx, xi, eta);
    const long p = ctx.p();
    const long A = static_cast<long>(ctx.A());
    BigRational inner = BigRational(xi) + BigRational((p - 2 * eta) * (p - 2 * eta + 1), 2 * p * (p + 1));
    return BigRational(xi + 1, 2 * A) * inner;
}

/// Rational factor of B: binom(xi+1, 2) (1 + (p - 2 eta)(p - 2 eta + 1)/(2 xi p (p+1))).
inline BigRational B_coefficient(const PrimeContext& ctx, long xi, long eta) {
    check_candidate(ctx, xi, eta);
    const long p = ctx.p();
    BigRational c(xi * (xi + 1), 2);
    return c * (BigRational(1) + BigRational((p - 2 * eta) * (p - 2 * eta + 1), 2 * xi * p * (p + 1)));
}

/// Base of the power in B: (2 xi + 1)/2 - eta/p.
inline BigRational B_base(const PrimeContext& ctx, long xi, long eta) {
    check_candidate(ctx, xi, eta);
    return BigRational(2 * xi + 1, 2) - BigRational(eta, static_cast<long>(ctx.p()));
}

inline RInterval B_closed_form(const PrimeContext& ctx, long xi, long eta, Precision bits) {
    return RInterval(B_coefficient(ctx, xi, eta), bits) *
           interval_pow(RInterval(B_base(ctx, xi, eta), bits), ctx.rho(bits));
}

/// Floating value of B, for screening the candidate grid.
inline double B_double(unsigned p, double rho, long xi, long eta) {
    const double pd = p;
    double q = (pd - 2.0 * eta) * (pd - 2.0 * eta + 1.0) / (2.0 * xi * pd * (pd + 1.0));
    double base = (2.0 * xi + 1.0) / 2.0 - eta / pd;
    return xi * (xi + 1.0) / 2.0 * (1.0 + q) * std::exp(-rho * std::log(base));
}

struct CandidatePoint {
    unsigned p;
    long xi;
    long eta;
    BigRational s_hat;
    RInterval B;

    [[nodiscard]] nlohmann::json to_json(int digits = 17) const {
        return {{"p", p},
                {"xi", xi},
                {"eta", eta},
                {"s_hat", s_hat.str()},
                {"B", {B.lower_string(digits), B.upper_string(digits)}}};
    }
};

inline CandidatePoint make_candidate(const PrimeContext& ctx, long xi, long eta, Precision bits) {
    return {ctx.p(), xi, eta, s_hat(ctx, xi, eta), B_closed_form(ctx, xi, eta, bits)};
}

} // namespace pascalcert
