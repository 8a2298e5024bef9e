#pragma once

#include "pascalcert/rational.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace pascalcert {

using Precision = mpfr_prec_t;

inline constexpr Precision kDefaultPrecision = 128;
inline constexpr Precision kDefaultPrecisionCap = 4096;

/// Raised when an enclosure cannot be tightened within the configured precision cap.
class PrecisionCapExceeded : public std::runtime_error {
public:
    explicit PrecisionCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

class Mpfr {
public:
    explicit Mpfr(Precision bits) { mpfr_init2(v_, bits); }
    Mpfr(const Mpfr& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Mpfr(Mpfr&& o) noexcept {
        mpfr_init2(v_, MPFR_PREC_MIN);
        mpfr_swap(v_, o.v_);
    }
    Mpfr& operator=(const Mpfr& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Mpfr& operator=(Mpfr&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Mpfr() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

inline std::string format(mpfr_srcptr x, int digits, mpfr_rnd_t rnd) {
    char* buf = nullptr;
    const char* fmt = rnd == MPFR_RNDD ? "%.*RDe" : (rnd == MPFR_RNDU ? "%.*RUe" : "%.*RNe");
    // `digits` significant digits
    if (mpfr_asprintf(&buf, fmt, std::max(digits - 1, 0), x) < 0) {
        throw std::runtime_error("mpfr_asprintf failed");
    }
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

} // namespace detail

/// Closed interval [lo, hi] with MPFR endpoints, rounded outward after every operation.
class RInterval {
public:
    explicit RInterval(Precision bits = kDefaultPrecision) : lo_(bits), hi_(bits) {
        mpfr_set_zero(lo_.get(), 1);
        mpfr_set_zero(hi_.get(), 1);
    }

    RInterval(const BigRational& q, Precision bits) : lo_(bits), hi_(bits) {
        mpfr_set_q(lo_.get(), q.get().get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(hi_.get(), q.get().get_mpq_t(), MPFR_RNDU);
    }

    RInterval(const BigRational& a, const BigRational& b, Precision bits) : lo_(bits), hi_(bits) {
        if (b < a) throw std::invalid_argument("RInterval: lower bound exceeds upper bound");
        mpfr_set_q(lo_.get(), a.get().get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(hi_.get(), b.get().get_mpq_t(), MPFR_RNDU);
    }

    /// Encloses num/den for big integers without forming the rational.
    static RInterval quotient(const BigInt& num_lo, const BigInt& num_hi, const BigInt& den, Precision bits) {
        RInterval out(bits);
        mpfr_set_z(out.lo_.get(), num_lo.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(out.lo_.get(), out.lo_.get(), den.get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(out.hi_.get(), num_hi.get_mpz_t(), MPFR_RNDU);
        mpfr_div_z(out.hi_.get(), out.hi_.get(), den.get_mpz_t(), MPFR_RNDU);
        return out;
    }

    [[nodiscard]] Precision precision() const { return std::max(mpfr_get_prec(lo_.get()), mpfr_get_prec(hi_.get())); }

    [[nodiscard]] mpfr_srcptr lo() const { return lo_.get(); }
    [[nodiscard]] mpfr_srcptr hi() const { return hi_.get(); }

    [[nodiscard]] double lower_double() const { return mpfr_get_d(lo_.get(), MPFR_RNDD); }
    [[nodiscard]] double upper_double() const { return mpfr_get_d(hi_.get(), MPFR_RNDU); }
    [[nodiscard]] double mid_double() const {
        detail::Mpfr m(precision() + 1);
        mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
        mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
        return mpfr_get_d(m.get(), MPFR_RNDN);
    }

    /// Endpoints as exact rationals (MPFR values are dyadic).
    [[nodiscard]] BigRational lower_rational() const { return to_rational(lo_.get()); }
    [[nodiscard]] BigRational upper_rational() const { return to_rational(hi_.get()); }

    [[nodiscard]] bool is_positive() const { return mpfr_sgn(lo_.get()) > 0; }
    [[nodiscard]] bool is_negative() const { return mpfr_sgn(hi_.get()) < 0; }
    [[nodiscard]] bool contains_zero() const { return !is_positive() && !is_negative(); }

    [[nodiscard]] bool contains(const BigRational& q) const {
        return mpfr_cmp_q(lo_.get(), q.get().get_mpq_t()) <= 0 && mpfr_cmp_q(hi_.get(), q.get().get_mpq_t()) >= 0;
    }
    [[nodiscard]] bool contains(const RInterval& o) const {
        return mpfr_lessequal_p(lo_.get(), o.lo_.get()) && mpfr_greaterequal_p(hi_.get(), o.hi_.get());
    }
    [[nodiscard]] bool overlaps(const RInterval& o) const {
        return mpfr_lessequal_p(lo_.get(), o.hi_.get()) && mpfr_lessequal_p(o.lo_.get(), hi_.get());
    }
    /// True when every point of this interval is strictly below every point of `o`.
    [[nodiscard]] bool strictly_below(const RInterval& o) const { return mpfr_less_p(hi_.get(), o.lo_.get()); }

    /// Upper bound on hi - lo.
    [[nodiscard]] double width() const {
        detail::Mpfr w(precision());
        mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
        return mpfr_get_d(w.get(), MPFR_RNDU);
    }

    [[nodiscard]] std::string lower_string(int digits = 17) const { return detail::format(lo_.get(), digits, MPFR_RNDD); }
    [[nodiscard]] std::string upper_string(int digits = 17) const { return detail::format(hi_.get(), digits, MPFR_RNDU); }

    /// Exact hexadecimal rendering of the lower endpoint, for bit-for-bit comparisons.
    [[nodiscard]] std::string lower_exact() const { return exact_string(lo_.get()); }

    [[nodiscard]] RInterval intersect(const RInterval& o) const {
        RInterval out(std::max(precision(), o.precision()));
        mpfr_max(out.lo_.get(), lo_.get(), o.lo_.get(), MPFR_RNDD);
        mpfr_min(out.hi_.get(), hi_.get(), o.hi_.get(), MPFR_RNDU);
        if (mpfr_greater_p(out.lo_.get(), out.hi_.get())) {
            throw std::domain_error("RInterval::intersect: disjoint enclosures of the same quantity");
        }
        return out;
    }

    [[nodiscard]] RInterval hull(const RInterval& o) const {
        RInterval out(std::max(precision(), o.precision()));
        mpfr_min(out.lo_.get(), lo_.get(), o.lo_.get(), MPFR_RNDD);
        mpfr_max(out.hi_.get(), hi_.get(), o.hi_.get(), MPFR_RNDU);
        return out;
    }

    friend RInterval operator+(const RInterval& a, const RInterval& b) {
        RInterval out(std::max(a.precision(), b.precision()));
        mpfr_add(out.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
        mpfr_add(out.hi_.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
        return out;
    }

    friend RInterval operator-(const RInterval& a, const RInterval& b) {
        RInterval out(std::max(a.precision(), b.precision()));
        mpfr_sub(out.lo_.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDD);
        mpfr_sub(out.hi_.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDU);
        return out;
    }

    friend RInterval operator-(const RInterval& a) {
        RInterval out(a.precision());
        mpfr_neg(out.lo_.get(), a.hi_.get(), MPFR_RNDD);
        mpfr_neg(out.hi_.get(), a.lo_.get(), MPFR_RNDU);
        return out;
    }

    friend RInterval operator*(const RInterval& a, const RInterval& b) {
        Precision bits = std::max(a.precision(), b.precision());
        RInterval out(bits);
        if (mpfr_sgn(a.lo_.get()) >= 0 && mpfr_sgn(b.lo_.get()) >= 0) {
            mpfr_mul(out.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
            mpfr_mul(out.hi_.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
            return out;
        }
        detail::Mpfr t(bits);
        mpfr_srcptr as[2] = {a.lo_.get(), a.hi_.get()};
        mpfr_srcptr bs[2] = {b.lo_.get(), b.hi_.get()};
        bool first = true;
        for (auto x : as) {
            for (auto y : bs) {
                mpfr_mul(t.get(), x, y, MPFR_RNDD);
                if (first || mpfr_less_p(t.get(), out.lo_.get())) mpfr_set(out.lo_.get(), t.get(), MPFR_RNDD);
                mpfr_mul(t.get(), x, y, MPFR_RNDU);
                if (first || mpfr_greater_p(t.get(), out.hi_.get())) mpfr_set(out.hi_.get(), t.get(), MPFR_RNDU);
                first = false;
            }
        }
        return out;
    }

    friend RInterval operator/(const RInterval& a, const RInterval& b) {
        if (b.contains_zero()) throw std::domain_error("RInterval: division by an interval containing zero");
        Precision bits = std::max(a.precision(), b.precision());
        RInterval inv(bits);
        mpfr_ui_div(inv.lo_.get(), 1, b.hi_.get(), MPFR_RNDD);
        mpfr_ui_div(inv.hi_.get(), 1, b.lo_.get(), MPFR_RNDU);
        return a * inv;
    }

    friend RInterval log(const RInterval& a) {
        if (!a.is_positive()) throw std::domain_error("RInterval: log of a non-positive interval");
        RInterval out(a.precision());
        mpfr_log(out.lo_.get(), a.lo_.get(), MPFR_RNDD);
        mpfr_log(out.hi_.get(), a.hi_.get(), MPFR_RNDU);
        return out;
    }

    friend RInterval exp(const RInterval& a) {
        RInterval out(a.precision());
        mpfr_exp(out.lo_.get(), a.lo_.get(), MPFR_RNDD);
        mpfr_exp(out.hi_.get(), a.hi_.get(), MPFR_RNDU);
        return out;
    }

    /// Rounds both endpoints outward to `bits`.
    [[nodiscard]] RInterval rounded_to(Precision bits) const {
        RInterval out(bits);
        mpfr_set(out.lo_.get(), lo_.get(), MPFR_RNDD);
        mpfr_set(out.hi_.get(), hi_.get(), MPFR_RNDU);
        return out;
    }

private:
    static BigRational to_rational(mpfr_srcptr x) {
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), x);
        return BigRational(q);
    }

    static std::string exact_string(mpfr_srcptr x) {
        char* buf = nullptr;
        if (mpfr_asprintf(&buf, "%Ra", x) < 0) throw std::runtime_error("mpfr_asprintf failed");
        std::string out(buf);
        mpfr_free_str(buf);
        return out;
    }

    detail::Mpfr lo_;
    detail::Mpfr hi_;
};

/// Encloses s^(-rho) as exp(-rho * log s), rounding outward at every step.
inline RInterval interval_pow(const RInterval& s, const RInterval& rho) {
    if (!s.is_positive()) throw std::domain_error("interval_pow: base must be positive");
    return exp(-(rho * log(s)));
}

/// Encloses log_base(value) for positive rationals.
inline RInterval interval_log_ratio(const BigRational& value, const BigRational& base, Precision bits) {
    return log(RInterval(value, bits)) / log(RInterval(base, bits));
}

/// An interval expression that can be re-evaluated at increasing precision.
/// Successive refinements are intersected, so the reported width never grows.
class DeferredInterval {
public:
    using Evaluator = std::function<RInterval(Precision)>;

    explicit DeferredInterval(Evaluator eval, Precision cap = kDefaultPrecisionCap) : eval_(std::move(eval)), cap_(cap) {}

    RInterval refine(Precision bits) {
        if (bits < 53) throw std::invalid_argument("DeferredInterval::refine: precision below 53 bits");
        if (bits > cap_) {
            throw PrecisionCapExceeded("requested " + std::to_string(bits) + " bits exceeds cap " + std::to_string(cap_));
        }
        RInterval fresh = eval_(bits);
        best_ = best_ ? best_->intersect(fresh) : fresh;
        return *best_;
    }

    [[nodiscard]] const std::optional<RInterval>& best() const { return best_; }
    [[nodiscard]] Precision cap() const { return cap_; }

private:
    Evaluator eval_;
    Precision cap_;
    std::optional<RInterval> best_;
};

enum class Sign { negative, positive, undecided };

struct SignDecision {
    Sign sign;
    RInterval enclosure;
    Precision bits;
};

/// Doubles precision from `start` until the enclosure excludes zero or the cap is reached.
inline SignDecision decide_sign(const DeferredInterval::Evaluator& eval, Precision start, Precision cap) {
    DeferredInterval expr(eval, cap);
    Precision bits = start;
    while (true) {
        RInterval value = expr.refine(bits);
        if (value.is_positive()) return {Sign::positive, value, bits};
        if (value.is_negative()) return {Sign::negative, value, bits};
        if (bits * 2 > cap) return {Sign::undecided, value, bits};
        bits *= 2;
    }
}

} // namespace pascalcert
