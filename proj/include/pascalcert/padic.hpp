#pragma once

#include "pascalcert/rational.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pascalcert {

using Digit = unsigned;

/// Base-p digits 0.b1 b2 b3 ... of a rational in [0,1], split into a preperiod and a repeating block.
/// The value 1 is the only one written with an all-(p-1) period; every other value uses its
/// terminating form, so two expansions of the same number compare equal member-wise.
struct PAdicExpansion {
    unsigned base = 2;
    std::vector<Digit> preperiod;
    std::vector<Digit> period{0};

    /// Digit b_j for j >= 1.
    [[nodiscard]] Digit digit(std::size_t j) const {
        if (j == 0) throw std::out_of_range("PAdicExpansion::digit: digits are indexed from 1");
        if (j <= preperiod.size()) return preperiod[j - 1];
        return period[(j - 1 - preperiod.size()) % period.size()];
    }

    [[nodiscard]] bool terminates() const { return period.size() == 1 && period[0] == 0; }

    [[nodiscard]] BigRational value() const {
        auto as_int = [&](const std::vector<Digit>& ds) {
            BigInt v = 0;
            for (Digit d : ds) v = v * base + d;
            return v;
        };
        BigInt pre = as_int(preperiod);
        BigInt per = as_int(period);
        BigInt cycle = ipow(base, period.size()) - 1;
        BigRational tail(per, cycle);
        return (BigRational(pre) + tail) / BigRational(ipow(base, preperiod.size()));
    }

    /// "0.14(5)" style rendering; digits above 9 are written in brackets.
    [[nodiscard]] std::string str() const {
        auto put = [&](std::string& s, Digit d) {
            if (base <= 10) s += static_cast<char>('0' + d);
            else s += "[" + std::to_string(d) + "]";
        };
        std::string s = "0.";
        for (Digit d : preperiod) put(s, d);
        s += "(";
        for (Digit d : period) put(s, d);
        s += ")";
        return s;
    }

    friend bool operator==(const PAdicExpansion&, const PAdicExpansion&) = default;
};

inline PAdicExpansion to_padic(const BigRational& x, unsigned p) {
    if (p < 2) throw std::invalid_argument("to_padic: base must be at least 2");
    if (x.sign() < 0 || x > BigRational(1)) throw std::invalid_argument("to_padic: value outside [0,1]");
    PAdicExpansion out;
    out.base = p;
    if (x == BigRational(1)) {
        out.period = {p - 1};
        return out;
    }
    const BigInt den = x.denominator();
    BigInt rem = x.numerator();

    // Preperiod length: number of steps needed to strip from den all factors shared with p.
    std::size_t pre_len = 0;
    BigInt reduced = den;
    BigInt bp(static_cast<unsigned long>(p));
    for (BigInt g = gcd(reduced, bp); g > 1; g = gcd(reduced, bp)) {
        reduced /= g;
        ++pre_len;
    }

    auto step = [&]() {
        rem *= p;
        BigInt q = rem / den;
        rem -= q * den;
        return static_cast<Digit>(q.get_ui());
    };
    out.preperiod.reserve(pre_len);
    for (std::size_t i = 0; i < pre_len; ++i) out.preperiod.push_back(step());
    const BigInt start = rem;
    out.period.clear();
    do {
        out.period.push_back(step());
    } while (rem != start);
    return out;
}

/// Lazily produces base-p digits of a rational in [0,1). Uses 128-bit arithmetic when it fits.
class DigitStream {
public:
    DigitStream(const BigRational& x, unsigned p) : p_(p) {
        if (x.sign() < 0 || x >= BigRational(1)) throw std::invalid_argument("DigitStream: value outside [0,1)");
        const BigInt& den = x.denominator();
        const BigInt& num = x.numerator();
        if (den.fits_ulong_p() && den.get_ui() <= (std::uint64_t{1} << 62) / p) {
            small_ = true;
            num_ = num.get_ui();
            den_ = den.get_ui();
        } else {
            big_num_ = num;
            big_den_ = den;
        }
    }

    Digit next() {
        if (small_) {
            unsigned __int128 r = static_cast<unsigned __int128>(num_) * p_;
            auto d = static_cast<Digit>(r / den_);
            num_ = static_cast<std::uint64_t>(r % den_);
            return d;
        }
        big_num_ *= p_;
        BigInt q = big_num_ / big_den_;
        big_num_ -= q * big_den_;
        return static_cast<Digit>(q.get_ui());
    }

    /// True once the remaining digits are all zero.
    [[nodiscard]] bool exhausted() const { return small_ ? num_ == 0 : big_num_ == 0; }

private:
    unsigned p_;
    bool small_ = false;
    std::uint64_t num_ = 0, den_ = 1;
    BigInt big_num_, big_den_;
};

} // namespace pascalcert
