#include "pascalcert/interval.hpp"
#include "pascalcert/padic.hpp"
#include "pascalcert/rational.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pascalcert;

TEST(BigRational, ParsesFractionsIntegersAndDecimals) {
    EXPECT_EQ(BigRational::parse("6/4"), BigRational(3, 2));
    EXPECT_EQ(BigRational::parse("-7"), BigRational(-7));
    EXPECT_EQ(BigRational::parse("3.51"), BigRational(351, 100));
    EXPECT_EQ(BigRational::parse("-0.46"), BigRational(-23, 50));
    EXPECT_EQ(BigRational::parse(" 12/8 ").str(), "3/2");
    EXPECT_THROW(BigRational::parse(""), std::invalid_argument);
    EXPECT_THROW(BigRational::parse("1/0"), std::invalid_argument);
    EXPECT_THROW(BigRational::parse("abc"), std::invalid_argument);
}

TEST(BigRational, StringFormIsAlwaysNumOverDen) {
    EXPECT_EQ(BigRational(5).str(), "5/1");
    EXPECT_EQ(BigRational(0).str(), "0/1");
    EXPECT_EQ(BigRational(-2, 6).str(), "-1/3");
}

TEST(BigRational, FloorAndPowers) {
    EXPECT_EQ(BigRational(-7, 2).floor(), BigInt(-4));
    EXPECT_EQ(BigRational(7, 2).floor(), BigInt(3));
    EXPECT_EQ(pow(BigRational(2, 3), -2), BigRational(9, 4));
    EXPECT_EQ(ipow(11, 3), BigInt(1331));
    EXPECT_EQ(pow(BigInt(3), 40).get_str(), "12157665459056928801");
}

TEST(RInterval, RationalEnclosureIsTight) {
    BigRational third(1, 3);
    RInterval v(third, 128);
    EXPECT_TRUE(v.contains(third));
    EXPECT_LT(v.width(), 1e-37);
    RInterval exact(BigRational(3, 4), 64);
    EXPECT_EQ(exact.lower_rational(), BigRational(3, 4));
    EXPECT_EQ(exact.upper_rational(), BigRational(3, 4));
}

TEST(RInterval, ArithmeticStaysOutward) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> d(-1000, 1000);
    for (int i = 0; i < 200; ++i) {
        BigRational a(d(rng), 1 + std::abs(d(rng))), b(d(rng), 1 + std::abs(d(rng)));
        RInterval x(a, 64), y(b, 64);
        EXPECT_TRUE((x + y).contains(a + b));
        EXPECT_TRUE((x - y).contains(a - b));
        EXPECT_TRUE((x * y).contains(a * b));
        if (b.sign() != 0) {
            EXPECT_TRUE((x / y).contains(a / b));
        }
    }
}

TEST(RInterval, DivisionByZeroIntervalThrows) {
    RInterval z(BigRational(-1), BigRational(1), 64);
    EXPECT_THROW(RInterval(BigRational(1), 64) / z, std::domain_error);
}

TEST(RInterval, LogExpAndPower) {
    RInterval two(BigRational(2), 200);
    RInterval l = log(two);
    EXPECT_EQ(l.lower_string(20), "6.9314718055994530941e-01");
    EXPECT_TRUE(exp(l).contains(BigRational(2)));
    RInterval rho = interval_log_ratio(BigRational(6), BigRational(3), 200);
    EXPECT_EQ(rho.lower_string(25), "1.630929753571457437099527e+00");
    // (3/2)^{1 - rho_3}
    RInterval beta3 = RInterval(BigRational(3, 2), 200) * interval_pow(RInterval(BigRational(3, 2), 200), rho);
    EXPECT_EQ(beta3.lower_string(20), "7.7428132631512145363e-01");
    EXPECT_LT(beta3.width(), 1e-55);
}

TEST(RInterval, DecimalStringsRoundOutward) {
    RInterval v(BigRational(2, 3), 128);
    EXPECT_EQ(v.lower_string(5), "6.6666e-01");
    EXPECT_EQ(v.upper_string(5), "6.6667e-01");
    RInterval n(BigRational(-2, 3), 128);
    EXPECT_EQ(n.lower_string(5), "-6.6667e-01");
    EXPECT_EQ(n.upper_string(5), "-6.6666e-01");
}

TEST(RInterval, IntersectAndHull) {
    RInterval a(BigRational(0), BigRational(2), 64), b(BigRational(1), BigRational(3), 64);
    RInterval i = a.intersect(b);
    EXPECT_EQ(i.lower_rational(), BigRational(1));
    EXPECT_EQ(i.upper_rational(), BigRational(2));
    RInterval h = a.hull(b);
    EXPECT_EQ(h.upper_rational(), BigRational(3));
    EXPECT_THROW(a.intersect(RInterval(BigRational(5), 64)), std::domain_error);
    EXPECT_TRUE(a.strictly_below(RInterval(BigRational(5), 64)));
}

TEST(DecideSign, DoublesPrecisionUntilDecided) {
    // 2^-300 is invisible to a 128-bit evaluation of (1 + 2^-300) - 1 but not at 512 bits.
    BigRational tiny(BigInt(1), pow(BigInt(2), 300));
    auto eval = [&](Precision bits) {
        RInterval one(BigRational(1), bits);
        RInterval x = RInterval(BigRational(1), bits) + RInterval(tiny, bits);
        return x.rounded_to(bits) - one;
    };
    SignDecision d = decide_sign(eval, 128, 4096);
    EXPECT_EQ(d.sign, Sign::positive);
    EXPECT_EQ(d.bits, 512u);
}

TEST(DecideSign, ZeroStaysUndecidedAtCap) {
    auto eval = [](Precision bits) { return RInterval(BigRational(1, 3), bits) - RInterval(BigRational(1, 3), bits); };
    SignDecision d = decide_sign(eval, 128, 1024);
    EXPECT_EQ(d.sign, Sign::undecided);
    EXPECT_EQ(d.bits, 1024u);
}

TEST(DeferredInterval, RefusesBeyondCap) {
    DeferredInterval di([](Precision b) { return RInterval(BigRational(1, 7), b); }, 256);
    EXPECT_NO_THROW(di.refine(256));
    EXPECT_THROW(di.refine(512), PrecisionCapExceeded);
    EXPECT_THROW(di.refine(32), std::invalid_argument);
}

TEST(PAdic, PreperiodAndPeriod) {
    PAdicExpansion e = to_padic(BigRational(31, 242), 11);
    EXPECT_EQ(e.str(), "0.[1][4]([5])");
    EXPECT_EQ(e.value(), BigRational(31, 242));
    PAdicExpansion half = to_padic(BigRational(1, 2), 3);
    EXPECT_TRUE(half.preperiod.empty());
    EXPECT_EQ(half.period, std::vector<Digit>{1});
    PAdicExpansion fin = to_padic(BigRational(7, 9), 3);
    EXPECT_TRUE(fin.terminates());
    EXPECT_EQ(fin.digit(1), 2u);
    EXPECT_EQ(fin.digit(2), 1u);
    EXPECT_EQ(fin.digit(3), 0u);
    PAdicExpansion one = to_padic(BigRational(1), 5);
    EXPECT_EQ(one.period, std::vector<Digit>{4});
    EXPECT_EQ(one.value(), BigRational(1));
}

TEST(PAdic, RoundTripsRandomRationals) {
    std::mt19937_64 rng(11);
    for (unsigned p : {2u, 3u, 7u, 13u}) {
        for (int i = 0; i < 100; ++i) {
            unsigned long den = 1 + rng() % 5000;
            BigRational x(static_cast<unsigned long>(rng() % den), den);
            EXPECT_EQ(to_padic(x, p).value(), x) << x.str() << " base " << p;
        }
    }
}

TEST(PAdic, DigitStreamMatchesExpansion) {
    BigRational x(1234, 9999);
    PAdicExpansion e = to_padic(x, 7);
    DigitStream s(x, 7);
    for (std::size_t j = 1; j <= 40; ++j) EXPECT_EQ(s.next(), e.digit(j));
    EXPECT_THROW(DigitStream(BigRational(1), 7), std::invalid_argument);
}
