#pragma once

#include <gmpxx.h>

#include <cctype>
#include <compare>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace pascalcert {

using BigInt = mpz_class;

template <std::integral T>
BigInt to_bigint(T value) {
    if constexpr (std::is_signed_v<T>) {
        return BigInt(static_cast<long>(value));
    } else {
        return BigInt(static_cast<unsigned long>(value));
    }
}

/// Exact fraction kept in lowest terms with a positive denominator.
class BigRational {
public:
    BigRational() = default;

    template <std::integral T>
    BigRational(T value) : value_(to_bigint(value)) {} // NOLINT(implicit)

    BigRational(const BigInt& value) : value_(value) {} // NOLINT(implicit)

    BigRational(const BigInt& num, const BigInt& den) {
        if (den == 0) {
            throw std::domain_error("BigRational: zero denominator");
        }
        value_ = mpq_class(num, den);
        value_.canonicalize();
    }

    template <std::integral T, std::integral U>
    BigRational(T num, U den) : BigRational(to_bigint(num), to_bigint(den)) {}

    explicit BigRational(const mpq_class& q) : value_(q) { value_.canonicalize(); }

    /// Accepts "a", "a/b", and finite decimals such as "-0.46" or "3.51".
    static BigRational parse(std::string_view text) {
        std::string s(text);
        auto trim = [](std::string& v) {
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
        };
        trim(s);
        if (s.empty()) {
            throw std::invalid_argument("BigRational::parse: empty string");
        }
        auto to_int = [&](const std::string& digits) {
            BigInt v;
            if (digits.empty() || v.set_str(digits, 10) != 0) {
                throw std::invalid_argument("BigRational::parse: malformed number '" + std::string(text) + "'");
            }
            return v;
        };
        if (auto slash = s.find('/'); slash != std::string::npos) {
            BigInt den = to_int(s.substr(slash + 1));
            if (den == 0) throw std::invalid_argument("BigRational::parse: zero denominator in '" + std::string(text) + "'");
            return BigRational(to_int(s.substr(0, slash)), den);
        }
        if (auto dot = s.find('.'); dot != std::string::npos) {
            std::string whole = s.substr(0, dot);
            std::string frac = s.substr(dot + 1);
            bool negative = !whole.empty() && whole.front() == '-';
            if (negative || (!whole.empty() && whole.front() == '+')) whole.erase(whole.begin());
            if (whole.empty()) whole = "0";
            BigInt scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
            BigInt num = to_int(whole) * scale + (frac.empty() ? BigInt(0) : to_int(frac));
            if (negative) num = -num;
            return BigRational(num, scale);
        }
        return BigRational(to_int(s));
    }

    [[nodiscard]] const mpq_class& get() const { return value_; }
    [[nodiscard]] BigInt numerator() const { return value_.get_num(); }
    [[nodiscard]] BigInt denominator() const { return value_.get_den(); }
    [[nodiscard]] int sign() const { return sgn(value_); }
    [[nodiscard]] bool is_integer() const { return value_.get_den() == 1; }

    /// Always "num/den", including integers ("3/1").
    [[nodiscard]] std::string str() const {
        return value_.get_num().get_str() + "/" + value_.get_den().get_str();
    }

    [[nodiscard]] double to_double() const { return value_.get_d(); }

    [[nodiscard]] BigInt floor() const {
        BigInt q;
        mpz_fdiv_q(q.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
        return q;
    }

    [[nodiscard]] BigRational abs() const { return BigRational(mpq_class(::abs(value_))); }

    BigRational& operator+=(const BigRational& o) { value_ += o.value_; return *this; }
    BigRational& operator-=(const BigRational& o) { value_ -= o.value_; return *this; }
    BigRational& operator*=(const BigRational& o) { value_ *= o.value_; return *this; }
    BigRational& operator/=(const BigRational& o) {
        if (o.sign() == 0) throw std::domain_error("BigRational: division by zero");
        value_ /= o.value_;
        return *this;
    }

    friend BigRational operator+(BigRational a, const BigRational& b) { return a += b; }
    friend BigRational operator-(BigRational a, const BigRational& b) { return a -= b; }
    friend BigRational operator*(BigRational a, const BigRational& b) { return a *= b; }
    friend BigRational operator/(BigRational a, const BigRational& b) { return a /= b; }
    friend BigRational operator-(const BigRational& a) { return BigRational(mpq_class(-a.value_)); }

    friend bool operator==(const BigRational& a, const BigRational& b) { return cmp(a.value_, b.value_) == 0; }
    friend std::strong_ordering operator<=>(const BigRational& a, const BigRational& b) {
        int c = cmp(a.value_, b.value_);
        return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    mpq_class value_{0};
};

inline BigInt pow(const BigInt& base, unsigned long exponent) {
    BigInt out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
    return out;
}

inline BigInt ipow(unsigned long base, unsigned long exponent) {
    BigInt out;
    mpz_ui_pow_ui(out.get_mpz_t(), base, exponent);
    return out;
}

inline BigRational pow(const BigRational& base, long exponent) {
    auto e = static_cast<unsigned long>(exponent >= 0 ? exponent : -exponent);
    BigRational out(pow(base.numerator(), e), pow(base.denominator(), e));
    return exponent >= 0 ? out : BigRational(1) / out;
}

} // namespace pascalcert
