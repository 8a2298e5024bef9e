#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/pascal.hpp"
#include "pascalcert/rational.hpp"
#include "pascalcert/recurrence.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pascalcert {

inline constexpr std::uint64_t kBruteRowLimit = 20000;
inline constexpr std::uint64_t kDefaultScanBudget = 100'000'000;

/// Nonzero entries mod p in rows 0..n_max of Pascal's triangle, built row by row with Pascal's rule.
inline std::vector<std::uint64_t> brute_rows(unsigned p, std::uint64_t n_max) {
    if (n_max > kBruteRowLimit) throw BudgetExceeded("brute_rows: n_max exceeds " + std::to_string(kBruteRowLimit));
    std::vector<unsigned> row{1};
    std::vector<std::uint64_t> counts{1};
    row.reserve(n_max + 1);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        row.push_back(0);
        for (std::size_t k = row.size() - 1; k > 0; --k) row[k] = (row[k] + row[k - 1]) % p;
        std::uint64_t c = 0;
        for (unsigned v : row) c += v != 0;
        counts.push_back(c);
    }
    return counts;
}

struct RatioPoint {
    BigInt n;
    BigInt F;
    RInterval ratio;
};

struct ScanResult {
    unsigned p = 0;
    unsigned r = 0;
    BigInt n_min;
    RInterval m;        // F(n_min)/n_min^rho
    RInterval bracket;  // [(1 + p^-r)^-rho m, m]
    std::vector<unsigned> digits;  // base-p digits of n_min, most significant first
    std::optional<long> xi, eta;   // read off the first two digits when the rest equal (p-1)/2
};

namespace detail {

/// Walks n upward keeping the base-p digits, their product prod (b_i + 1), and F(n).
class RowCounter {
public:
    RowCounter(unsigned p, std::uint64_t n) : p_(p), n_(n) {
        for (std::uint64_t m = n; m > 0; m /= p) digits_.push_back(static_cast<unsigned>(m % p));
        prod_ = 1;
        for (unsigned d : digits_) prod_ *= d + 1;
        F_ = from_big(pascalcert::F(p, BigInt(static_cast<unsigned long>(n))));
    }

    [[nodiscard]] std::uint64_t n() const { return n_; }
    [[nodiscard]] unsigned __int128 F() const { return F_; }

    void advance() {
        F_ += prod_;
        ++n_;
        std::size_t i = 0;
        while (true) {
            if (i == digits_.size()) {
                digits_.push_back(1);
                prod_ *= 2;
                return;
            }
            unsigned d = digits_[i];
            if (d + 1 < p_) {
                prod_ = prod_ / (d + 1) * (d + 2);
                digits_[i] = d + 1;
                return;
            }
            prod_ /= p_;
            digits_[i] = 0;
            ++i;
        }
    }

    static BigInt to_big(unsigned __int128 v) {
        BigInt hi(static_cast<unsigned long>(v >> 64));
        BigInt lo(static_cast<unsigned long>(v & ~std::uint64_t{0}));
        BigInt out = hi;
        mpz_mul_2exp(out.get_mpz_t(), out.get_mpz_t(), 64);
        return out + lo;
    }

private:
    static unsigned __int128 from_big(const BigInt& v) {
        BigInt hi = v;
        mpz_tdiv_q_2exp(hi.get_mpz_t(), hi.get_mpz_t(), 64);
        BigInt lo = v - (hi << 64);
        return (static_cast<unsigned __int128>(hi.get_ui()) << 64) | lo.get_ui();
    }

    unsigned p_;
    std::uint64_t n_;
    std::vector<unsigned> digits_;
    std::uint64_t prod_ = 1;
    unsigned __int128 F_ = 0;
};

} // namespace detail

struct RatioExtremes {
    RatioPoint min, max;
    RInterval min_value, max_value;  // enclosures of the min and max over the range
};

/// min and max of F(n)/n^rho for n in [n_lo, n_hi]. Floating point shortlists the candidates
/// (relative guard 1e-12); each shortlisted n is then evaluated with intervals.
inline RatioExtremes ratio_extremes(const PrimeContext& ctx, std::uint64_t n_lo, std::uint64_t n_hi,
                                    Precision bits = kDefaultPrecision) {
    if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("ratio_extremes: need 1 <= n_lo <= n_hi");
    const double rho = ctx.rho_double();
    const double guard = 1e-12;
    detail::RowCounter rc(ctx.p(), n_lo);
    double best_min = std::numeric_limits<double>::infinity(), best_max = 0;
    struct Cand {
        std::uint64_t n;
        unsigned __int128 F;
        double ratio;
    };
    std::vector<Cand> cands;
    auto prune = [&]() {
        std::erase_if(cands, [&](const Cand& c) { return c.ratio > best_min * (1 + guard) && c.ratio < best_max * (1 - guard); });
    };
    while (true) {
        const std::uint64_t n = rc.n();
        double ratio = static_cast<double>(rc.F()) * std::exp(-rho * std::log(static_cast<double>(n)));
        bool keep = false;
        if (ratio <= best_min * (1 + guard)) {
            best_min = std::min(best_min, ratio);
            keep = true;
        }
        if (ratio >= best_max * (1 - guard)) {
            best_max = std::max(best_max, ratio);
            keep = true;
        }
        if (keep) {
            cands.push_back({n, rc.F(), ratio});
            if (cands.size() > 1024) prune();
        }
        if (n == n_hi) break;
        rc.advance();
    }
    prune();
    RInterval rh = ctx.rho(bits);
    std::optional<RatioPoint> mn, mx;
    std::optional<RInterval> mn_v, mx_v;
    for (const Cand& c : cands) {
        BigInt bn(static_cast<unsigned long>(c.n));
        BigInt bF = detail::RowCounter::to_big(c.F);
        RInterval v = RInterval(BigRational(bF), bits) * interval_pow(RInterval(BigRational(bn), bits), rh);
        if (c.ratio <= best_min * (1 + guard)) {
            if (!mn || mpfr_less_p(v.hi(), mn->ratio.hi())) mn = RatioPoint{bn, bF, v};
            mn_v = mn_v ? RInterval(std::min(mn_v->lower_rational(), v.lower_rational()),
                                    std::min(mn_v->upper_rational(), v.upper_rational()), bits)
                        : v;
        }
        if (c.ratio >= best_max * (1 - guard)) {
            if (!mx || mpfr_greater_p(v.lo(), mx->ratio.lo())) mx = RatioPoint{bn, bF, v};
            mx_v = mx_v ? RInterval(std::max(mx_v->lower_rational(), v.lower_rational()),
                                    std::max(mx_v->upper_rational(), v.upper_rational()), bits)
                        : v;
        }
    }
    return {*mn, *mx, *mn_v, *mx_v};
}

/// Largest r with p^(r+1) - p^r within the budget.
inline unsigned affordable_r(unsigned p, std::uint64_t budget = kDefaultScanBudget) {
    unsigned r = 0;
    while (BigInt(ipow(p, r + 2) - ipow(p, r + 1)) <= BigInt(static_cast<unsigned long>(budget))) ++r;
    return r;
}

/// Chen-Ji bracket for beta_p from the scan over n in [p^r, p^(r+1)].
inline ScanResult scan_min(const PrimeContext& ctx, unsigned r, std::uint64_t budget = kDefaultScanBudget,
                           Precision bits = kDefaultPrecision) {
    const unsigned p = ctx.p();
    if (r < 1) throw std::invalid_argument("scan_min: r must be at least 1");
    BigInt lo = ipow(p, r), hi = ipow(p, r + 1);
    if (BigInt(hi - lo) > BigInt(static_cast<unsigned long>(budget))) {
        throw BudgetExceeded("scan_min: p^(r+1) - p^r exceeds the scan budget of " + std::to_string(budget));
    }
    RatioExtremes ex = ratio_extremes(ctx, lo.get_ui(), hi.get_ui(), bits);
    ScanResult res;
    res.p = p;
    res.r = r;
    res.n_min = ex.min.n;
    res.m = ex.min_value;
    RInterval widen = interval_pow(RInterval(BigRational(1) + BigRational(BigInt(1), lo), bits), ctx.rho(bits));
    RInterval low = ex.min_value * widen;
    res.bracket = RInterval(low.lower_rational(), ex.min_value.upper_rational(), bits);
    for (BigInt m = res.n_min; m > 0; m /= p) res.digits.insert(res.digits.begin(), static_cast<unsigned>(BigInt(m % p).get_ui()));
    if (p % 2 == 1 && res.digits.size() >= 3) {
        const unsigned h = (p - 1) / 2;
        bool tail = true;
        for (std::size_t i = 2; i + 1 < res.digits.size(); ++i) tail = tail && res.digits[i] == h;
        if (tail && res.digits[1] <= h && res.digits[0] >= 1) {
            res.xi = res.digits[0];
            res.eta = static_cast<long>(h) - static_cast<long>(res.digits[1]);
        }
    }
    return res;
}

/// F(n_k)/n_k^rho along n_{k+1} = p n_k + (p-1)/2.
inline std::vector<RatioPoint> wilson_sequence(const PrimeContext& ctx, const BigInt& n1, unsigned k_max,
                                               Precision bits = kDefaultPrecision) {
    if (n1 < 1) throw std::invalid_argument("wilson_sequence: n1 must be at least 1");
    const unsigned p = ctx.p();
    RInterval rho = ctx.rho(bits);
    std::vector<RatioPoint> out;
    BigInt n = n1;
    for (unsigned k = 0; k < k_max; ++k) {
        BigInt f = F(p, n);
        out.push_back({n, f, RInterval(BigRational(f), bits) * interval_pow(RInterval(BigRational(n), bits), rho)});
        n = n * p + (p - 1) / 2;
    }
    return out;
}

inline void write_ratio_csv(std::ostream& os, const std::vector<RatioPoint>& rows, int digits = 17) {
    os << "n,F(n),ratio_lo,ratio_hi\n";
    for (const auto& r : rows) {
        os << r.n.get_str() << ',' << r.F.get_str() << ',' << r.ratio.lower_string(digits) << ','
           << r.ratio.upper_string(digits) << '\n';
    }
}

} // namespace pascalcert
