#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/padic.hpp"
#include "pascalcert/rational.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pascalcert {

/// Raised when a closed form would need an irrational intermediate such as p^(t-1) for t not an integer.
class IrrationalIntermediate : public std::domain_error {
public:
    explicit IrrationalIntermediate(const std::string& what) : std::domain_error(what) {}
};

/// Raised when a scan or sweep would exceed its configured budget.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// f(n) = sum_j gamma_j f(floor((n+j)/p)) for n >= p, with f(1)..f(p-1) given.
class RecurrenceSpec {
public:
    /// With no initial values the standard ones f(j) = gamma_{p-j} + ... + gamma_{p-1} are used.
    RecurrenceSpec(unsigned p, std::vector<BigRational> gamma, std::optional<std::vector<BigRational>> initial = std::nullopt)
        : p_(p), gamma_(std::move(gamma)) {
        if (p_ < 2) throw std::invalid_argument("RecurrenceSpec: p must be at least 2");
        if (gamma_.size() != p_) throw std::invalid_argument("RecurrenceSpec: expected p weights");
        for (const auto& g : gamma_) {
            if (g.sign() <= 0) throw std::invalid_argument("RecurrenceSpec: weights must be positive");
        }
        suffix_.assign(p_ + 1, BigRational(0));
        for (unsigned b = 1; b <= p_; ++b) suffix_[b] = suffix_[b - 1] + gamma_[p_ - b];
        A_ = suffix_[p_];

        BigInt l = 1;
        for (const auto& g : gamma_) l = lcm(l, g.denominator());
        for (const auto& g : gamma_) gamma_int_.push_back((g * BigRational(l)).numerator());
        suffix_int_.assign(p_ + 1, BigInt(0));
        for (unsigned b = 1; b <= p_; ++b) suffix_int_[b] = suffix_int_[b - 1] + gamma_int_[p_ - b];
        A_int_ = suffix_int_[p_];

        if (initial) {
            if (initial->size() != p_ - 1) throw std::invalid_argument("RecurrenceSpec: expected p-1 initial values");
            initial_ = std::move(*initial);
            standard_ = true;
            for (unsigned j = 1; j < p_; ++j) standard_ = standard_ && initial_[j - 1] == suffix_[j];
        } else {
            for (unsigned j = 1; j < p_; ++j) initial_.push_back(suffix_[j]);
            standard_ = true;
        }
    }

    /// Weights gamma_j = p - j, whose solution with standard initial values is F_p.
    static RecurrenceSpec binomial(unsigned p) {
        std::vector<BigRational> g;
        for (unsigned j = 0; j < p; ++j) g.emplace_back(p - j);
        return RecurrenceSpec(p, std::move(g));
    }

    [[nodiscard]] unsigned p() const { return p_; }
    [[nodiscard]] const std::vector<BigRational>& gamma() const { return gamma_; }
    [[nodiscard]] const std::vector<BigRational>& initial() const { return initial_; }
    [[nodiscard]] bool standard_initial() const { return standard_; }
    [[nodiscard]] const BigRational& A() const { return A_; }

    /// gamma_{p-b} + ... + gamma_{p-1}.
    [[nodiscard]] const BigRational& suffix_sum(unsigned b) const { return suffix_.at(b); }
    /// Factor contributed to the running product by digit b.
    [[nodiscard]] const BigRational& digit_weight(Digit b) const { return gamma_.at(p_ - 1 - b); }
    /// gamma_0 + ... + gamma_{k-1}.
    [[nodiscard]] BigRational lower_sum(unsigned k) const { return A_ - suffix_.at(p_ - k); }
    /// gamma_k + ... + gamma_{p-1}.
    [[nodiscard]] const BigRational& upper_sum(unsigned k) const { return suffix_.at(p_ - k); }

    /// The weights rescaled to integers; phi depends only on their ratios.
    [[nodiscard]] const BigInt& int_suffix_sum(unsigned b) const { return suffix_int_[b]; }
    [[nodiscard]] const BigInt& int_digit_weight(Digit b) const { return gamma_int_[p_ - 1 - b]; }
    [[nodiscard]] const BigInt& int_A() const { return A_int_; }

    [[nodiscard]] BigRational max_gamma() const {
        BigRational m = gamma_[0];
        for (const auto& g : gamma_) m = g > m ? g : m;
        return m;
    }

    [[nodiscard]] RInterval rho(Precision bits) const {
        return interval_log_ratio(A_, BigRational(p_), bits);
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["p"] = p_;
        j["gamma"] = nlohmann::json::array();
        for (const auto& g : gamma_) j["gamma"].push_back(g.str());
        if (is_default_initial()) {
            j["initial"] = "standard";
        } else {
            j["initial"] = nlohmann::json::array();
            for (const auto& v : initial_) j["initial"].push_back(v.str());
        }
        return j;
    }

    static RecurrenceSpec from_json(const nlohmann::json& j) {
        auto rational = [](const nlohmann::json& v) {
            if (v.is_number_integer()) return BigRational(v.get<long>());
            if (v.is_string()) return BigRational::parse(v.get<std::string>());
            throw std::invalid_argument("RecurrenceSpec: rationals must be integers or \"a/b\" strings");
        };
        auto p = j.at("p").get<unsigned>();
        std::vector<BigRational> gamma;
        for (const auto& v : j.at("gamma")) gamma.push_back(rational(v));
        std::optional<std::vector<BigRational>> init;
        if (j.contains("initial") && !(j["initial"].is_string() && j["initial"] == "standard")) {
            if (!j["initial"].is_array()) throw std::invalid_argument("RecurrenceSpec: initial must be a list or \"standard\"");
            init.emplace();
            for (const auto& v : j["initial"]) init->push_back(rational(v));
        }
        return RecurrenceSpec(p, std::move(gamma), std::move(init));
    }

private:
    [[nodiscard]] bool is_default_initial() const { return standard_; }

    unsigned p_;
    std::vector<BigRational> gamma_;
    std::vector<BigRational> initial_;
    std::vector<BigRational> suffix_;
    BigRational A_;
    bool standard_ = true;
    std::vector<BigInt> gamma_int_, suffix_int_;
    BigInt A_int_;
};

/// phi lies in [partial, partial + tail_scale] after a finite number of digits.
struct PhiValue {
    BigRational partial;
    BigRational tail_scale;
    std::size_t digits = 0;

    [[nodiscard]] bool contains(const BigRational& x) const { return partial <= x && x <= partial + tail_scale; }
};

/// Exact phi at an eventually periodic expansion: preperiod termwise, then the period as a geometric series.
inline BigRational phi_exact(const RecurrenceSpec& spec, const PAdicExpansion& x) {
    if (x.base != spec.p()) throw std::invalid_argument("phi_exact: expansion base differs from p");
    const BigInt& A = spec.int_A();
    auto run = [&](const std::vector<Digit>& ds, BigInt& sum, BigInt& prod, BigInt& scale) {
        sum = 0;
        prod = 1;
        scale = 1;
        for (Digit b : ds) {
            sum = sum * A + spec.int_suffix_sum(b) * prod;
            prod *= spec.int_digit_weight(b);
            scale *= A;
        }
    };
    BigInt pre_sum, pre_prod, pre_scale, per_sum, per_prod, per_scale;
    run(x.preperiod, pre_sum, pre_prod, pre_scale);
    run(x.period, per_sum, per_prod, per_scale);
    BigInt denom = per_scale - per_prod;
    return BigRational(pre_sum * denom + pre_prod * per_sum, pre_scale * denom);
}

inline BigRational phi_exact(const RecurrenceSpec& spec, const BigRational& x) {
    return phi_exact(spec, to_padic(x, spec.p()));
}

/// phi_k(t): the k-th iterate of the piecewise map started from the identity.
inline BigRational phi_iterate(const RecurrenceSpec& spec, unsigned k, const BigRational& t) {
    if (t.sign() < 0 || t > BigRational(1)) throw std::invalid_argument("phi_iterate: t outside [0,1]");
    const unsigned p = spec.p();
    BigRational acc = 0;
    BigRational scale = 1;
    BigRational u = t;
    for (unsigned i = 0; i < k; ++i) {
        BigRational pu = u * BigRational(p);
        BigInt fl = pu.floor();
        unsigned j = fl >= p ? p - 1 : static_cast<unsigned>(fl.get_ui());
        acc += scale * spec.suffix_sum(j) / spec.A();
        scale *= spec.digit_weight(j) / spec.A();
        u = pu - BigRational(j);
    }
    return acc + scale * u;
}

/// Sum of the first `digits` terms of the digit series, with the factorized tail bound.
inline PhiValue phi_truncated(const RecurrenceSpec& spec, const BigRational& x, std::size_t digits) {
    if (x == BigRational(1)) return {BigRational(1), BigRational(0), 0};
    DigitStream ds(x, spec.p());
    const BigInt& A = spec.int_A();
    BigInt sum = 0, prod = 1, scale = 1;
    std::size_t j = 0;
    for (; j < digits; ++j) {
        if (ds.exhausted()) return {BigRational(sum, scale), BigRational(0), j};
        Digit b = ds.next();
        sum = sum * A + spec.int_suffix_sum(b) * prod;
        prod *= spec.int_digit_weight(b);
        scale *= A;
    }
    if (ds.exhausted()) return {BigRational(sum, scale), BigRational(0), j};
    return {BigRational(sum, scale), BigRational(prod, scale), j};
}

/// Digits needed so that the tail of the series is below 2^-(bits+8).
inline std::size_t phi_depth(const RecurrenceSpec& spec, Precision bits) {
    double contraction = std::log2((spec.A() / spec.max_gamma()).to_double());
    return static_cast<std::size_t>(std::ceil(static_cast<double>(bits + 8) / contraction));
}

/// Directed-rounding enclosure of phi(x), counting digits with integer arithmetic only.
inline RInterval phi_enclosure(const RecurrenceSpec& spec, const BigRational& x, Precision bits) {
    if (x == BigRational(1)) return RInterval(BigRational(1), bits);
    if (x.sign() == 0) return RInterval(BigRational(0), bits);
    DigitStream ds(x, spec.p());
    const BigInt& A = spec.int_A();
    BigInt sum = 0, prod = 1, scale = 1;
    const std::size_t depth = phi_depth(spec, bits);
    for (std::size_t j = 0; j < depth && !ds.exhausted(); ++j) {
        Digit b = ds.next();
        sum = sum * A + spec.int_suffix_sum(b) * prod;
        prod *= spec.int_digit_weight(b);
        scale *= A;
    }
    if (ds.exhausted()) return RInterval::quotient(sum, sum, scale, bits);
    return RInterval::quotient(sum, sum + prod, scale, bits);
}

/// Integer values f(n), n >= 1, via the pair (f(q), f(q+1)) with q = floor(n/p).
inline std::pair<BigRational, BigRational> f_pair(const RecurrenceSpec& spec, const BigInt& n) {
    if (n < 1) throw std::invalid_argument("f_integer: n must be at least 1");
    const unsigned p = spec.p();
    if (n < p) {
        unsigned k = static_cast<unsigned>(n.get_ui());
        BigRational next = k + 1 < p ? spec.initial()[k] : spec.A() * spec.initial()[0];
        return {spec.initial()[k - 1], next};
    }
    BigInt q = n / p;
    unsigned r = static_cast<unsigned>(BigInt(n - q * p).get_ui());
    auto [a, b] = f_pair(spec, q);
    BigRational fn = spec.lower_sum(p - r) * a + spec.upper_sum(p - r) * b;
    BigRational fn1 = r + 1 < p ? spec.lower_sum(p - r - 1) * a + spec.upper_sum(p - r - 1) * b : spec.A() * b;
    return {fn, fn1};
}

inline BigRational f_integer(const RecurrenceSpec& spec, const BigInt& n) { return f_pair(spec, n).first; }

/// f(n + t) = (1 - phi(t)) f(n) + phi(t) f(n + 1) for x = n + t >= 1.
inline BigRational f_real(const RecurrenceSpec& spec, const BigRational& x) {
    if (x < BigRational(1)) throw std::invalid_argument("f_real: x must be at least 1");
    BigInt n = x.floor();
    BigRational t = x - BigRational(n);
    auto [a, b] = f_pair(spec, n);
    if (t.sign() == 0) return a;
    BigRational ph = phi_exact(spec, t);
    return (BigRational(1) - ph) * a + ph * b;
}

/// P(t) = A^(1-t) phi(p^(t-1)) in exact arithmetic; only t = 0 keeps every factor rational.
inline BigRational periodic_P(const RecurrenceSpec& spec, const BigRational& t) {
    if (!spec.standard_initial()) throw std::invalid_argument("periodic_P: closed form needs standard initial values");
    if (t.sign() < 0 || t >= BigRational(1)) throw std::invalid_argument("periodic_P: t outside [0,1)");
    if (t.sign() != 0) throw IrrationalIntermediate("periodic_P: p^(t-1) is irrational for t = " + t.str());
    return spec.A() * phi_exact(spec, BigRational(1, spec.p()));
}

/// Enclosure of P(t) at any rational t in [0,1), using monotonicity of phi on an enclosure of p^(t-1).
inline RInterval periodic_P_enclosure(const RecurrenceSpec& spec, const BigRational& t, Precision bits) {
    if (!spec.standard_initial()) throw std::invalid_argument("periodic_P: closed form needs standard initial values");
    if (t.sign() < 0 || t >= BigRational(1)) throw std::invalid_argument("periodic_P: t outside [0,1)");
    if (t.sign() == 0) return RInterval(periodic_P(spec, t), bits);
    RInterval tm1(t - BigRational(1), bits);
    RInterval s = exp(tm1 * log(RInterval(BigRational(spec.p()), bits)));
    BigRational lo = s.lower_rational(), hi = s.upper_rational();
    if (lo.sign() <= 0) lo = BigRational(0);
    if (hi > BigRational(1)) hi = BigRational(1);
    RInterval phi_lo = phi_enclosure(spec, lo, bits);
    RInterval phi_hi = phi_enclosure(spec, hi, bits);
    RInterval phi(phi_lo.lower_rational(), phi_hi.upper_rational(), bits);
    RInterval a_pow = exp(-(tm1 * log(RInterval(spec.A(), bits))));
    return a_pow * phi;
}

struct ScanBracket {
    RInterval min_bracket;
    RInterval max_bracket;
    BigInt argmin;
    BigInt argmax;
};

namespace detail {

/// Walks f(n), f(n+1) for consecutive n in floating point, carrying one pair per base-p level.
class FOdometer {
public:
    FOdometer(const RecurrenceSpec& spec, const BigInt& start)
        : spec_(spec), p_(spec.p()), A_(spec.A().to_double()) {
        for (unsigned k = 0; k <= p_; ++k) {
            lower_.push_back(spec.lower_sum(k).to_double());
            upper_.push_back(spec.upper_sum(k).to_double());
        }
        BigInt n = start;
        while (n >= p_) {
            levels_.push_back(Level{static_cast<unsigned>(BigInt(n % p_).get_ui()), 0, 0});
            n /= p_;
        }
        top_ = n;
        std::reverse(levels_.begin(), levels_.end());
        reset_top();
        for (std::size_t i = 0; i < levels_.size(); ++i) refresh(i);
    }

    [[nodiscard]] double value() const { return levels_.empty() ? top_a_ : levels_.back().a; }
    [[nodiscard]] double next_value() const { return levels_.empty() ? top_b_ : levels_.back().b; }

    void advance() { advance_level(levels_.size()); }

private:
    struct Level {
        unsigned digit;
        double a, b;
    };

    void reset_top() {
        auto [a, b] = f_pair(spec_, top_);
        top_a_ = a.to_double();
        top_b_ = b.to_double();
    }

    [[nodiscard]] std::pair<double, double> parent(std::size_t i) const {
        if (i == 0) return {top_a_, top_b_};
        return {levels_[i - 1].a, levels_[i - 1].b};
    }

    void refresh(std::size_t i) {
        auto [a, b] = parent(i);
        unsigned r = levels_[i].digit;
        levels_[i].a = lower_[p_ - r] * a + upper_[p_ - r] * b;
        levels_[i].b = r + 1 < p_ ? lower_[p_ - r - 1] * a + upper_[p_ - r - 1] * b : A_ * b;
    }

    void advance_level(std::size_t depth) {
        if (depth == 0) {
            top_ += 1;
            reset_top();
            return;
        }
        std::size_t i = depth - 1;
        if (++levels_[i].digit == p_) {
            levels_[i].digit = 0;
            advance_level(i);
        }
        refresh(i);
    }

    const RecurrenceSpec& spec_;
    unsigned p_;
    double A_;
    std::vector<double> lower_, upper_;
    std::vector<Level> levels_;
    BigInt top_;
    double top_a_ = 0, top_b_ = 0;
};

} // namespace detail

/// Brackets inf and sup of f(n)/n^rho from one period n in [p^r, p^(r+1)].
/// Floating point picks the candidates; the extreme values are then re-evaluated with intervals.
inline ScanBracket sup_inf_scan(const RecurrenceSpec& spec, unsigned r, std::uint64_t budget = 100'000'000,
                                Precision bits = kDefaultPrecision) {
    if (r < 1) throw std::invalid_argument("sup_inf_scan: r must be at least 1");
    const unsigned p = spec.p();
    const BigInt lo_n = ipow(p, r), hi_n = ipow(p, r + 1);
    if (BigInt(hi_n - lo_n) > BigInt(static_cast<unsigned long>(budget))) {
        throw BudgetExceeded("sup_inf_scan: p^(r+1) - p^r exceeds the scan budget");
    }
    // The bracket needs f nondecreasing, which the recurrence propagates from the initial values.
    for (unsigned j = 1; j + 1 < p; ++j) {
        if (spec.initial()[j] < spec.initial()[j - 1]) throw std::domain_error("sup_inf_scan: f is not monotone");
    }
    if (spec.A() * spec.initial()[0] < spec.initial()[p - 2]) throw std::domain_error("sup_inf_scan: f is not monotone");

    const double rho_d = spec.rho(64).mid_double();
    const double guard = 1e-12;
    const std::uint64_t count = BigInt(hi_n - lo_n).get_ui();
    const std::uint64_t first = lo_n.get_ui();

    detail::FOdometer odo(spec, lo_n);
    double best_min = std::numeric_limits<double>::infinity(), best_max = 0;
    std::vector<std::pair<std::uint64_t, double>> ratios;
    ratios.reserve(1024);
    auto prune = [&]() {
        std::erase_if(ratios, [&](const auto& e) {
            return e.second > best_min * (1 + guard) && e.second < best_max * (1 - guard);
        });
    };
    for (std::uint64_t i = 0; i <= count; ++i) {
        std::uint64_t n = first + i;
        double ratio = odo.value() * std::exp(-rho_d * std::log(static_cast<double>(n)));
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
            ratios.emplace_back(n, ratio);
            if (ratios.size() > 512) prune();
        }
        if (i < count) odo.advance();
    }
    prune();

    RInterval rho = spec.rho(bits);
    std::optional<RInterval> mn, mx;
    BigInt argmin, argmax;
    for (const auto& [n, ratio] : ratios) {
        BigInt bn(static_cast<unsigned long>(n));
        RInterval val = RInterval(f_integer(spec, bn), bits) * interval_pow(RInterval(BigRational(bn), bits), rho);
        if (ratio <= best_min * (1 + guard)) {
            if (!mn || mpfr_less_p(val.hi(), mn->hi())) argmin = bn;
            if (!mn) mn = val;
            else {
                RInterval lo_part = mpfr_less_p(val.lo(), mn->lo()) ? val : *mn;
                RInterval hi_part = mpfr_less_p(val.hi(), mn->hi()) ? val : *mn;
                mn = RInterval(lo_part.lower_rational(), hi_part.upper_rational(), bits);
            }
        }
        if (ratio >= best_max * (1 - guard)) {
            if (!mx || mpfr_greater_p(val.lo(), mx->lo())) argmax = bn;
            if (!mx) mx = val;
            else {
                RInterval lo_part = mpfr_greater_p(val.lo(), mx->lo()) ? val : *mx;
                RInterval hi_part = mpfr_greater_p(val.hi(), mx->hi()) ? val : *mx;
                mx = RInterval(lo_part.lower_rational(), hi_part.upper_rational(), bits);
            }
        }
    }
    RInterval widen = interval_pow(RInterval(BigRational(1) + BigRational(BigInt(1), lo_n), bits), rho);
    RInterval min_lo = *mn * widen;
    RInterval max_hi = *mx / widen;
    return {RInterval(min_lo.lower_rational(), mn->upper_rational(), bits),
            RInterval(mx->lower_rational(), max_hi.upper_rational(), bits), argmin, argmax};
}

} // namespace pascalcert
