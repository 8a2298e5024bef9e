#include "pascalcert/pascal.hpp"
#include "pascalcert/predictor.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pascalcert;

TEST(Counting, RowCountIsDigitProduct) {
    EXPECT_EQ(row_count(3, BigInt(0)), BigInt(1));
    EXPECT_EQ(row_count(3, BigInt(8)), BigInt(9));   // 22 in base 3
    EXPECT_EQ(row_count(5, BigInt(24)), BigInt(25));
    EXPECT_EQ(row_count(7, BigInt(50)), BigInt(2 * 2));  // 101 in base 7
}

TEST(Counting, ThreeRoutesAgree) {
    for (unsigned p : {2u, 3u, 5u, 7u, 11u}) {
        RecurrenceSpec spec = RecurrenceSpec::binomial(p);
        BigInt cum = 0;
        for (unsigned long n = 0; n <= 3000; ++n) {
            BigInt bn(n);
            ASSERT_EQ(F(p, bn), cum) << "p=" << p << " n=" << n;
            ASSERT_EQ(F_recurrence(spec, bn), cum) << "p=" << p << " n=" << n;
            cum += row_count(p, bn);
        }
        EXPECT_EQ(F_cumulative(p, BigInt(200)), F(p, BigInt(200)));
    }
}

TEST(Counting, SteinScaling) {
    std::mt19937_64 rng(17);
    for (unsigned p : {2u, 3u, 5u, 7u, 11u, 13u}) {
        const BigInt A = BigInt(p) * (p + 1) / 2;
        for (int i = 0; i < 200; ++i) {
            BigInt n(static_cast<unsigned long>(rng() % 1'000'000'000ul));
            EXPECT_EQ(F(p, n * p), A * F(p, n));
        }
        EXPECT_EQ(F(p, ipow(p, 7)), pow(A, 7));
    }
}

TEST(PrimeContext, RejectsComposites) {
    EXPECT_THROW(PrimeContext(9), std::invalid_argument);
    EXPECT_THROW(PrimeContext(1), std::invalid_argument);
    PrimeContext two(2);
    EXPECT_FALSE(two.odd());
    EXPECT_EQ(two.A(), 3u);
}

TEST(Candidate, SHatDigitsAndPhi) {
    PrimeContext ctx(11);
    EXPECT_EQ(s_hat(ctx, 1, 1), BigRational(31, 242));
    EXPECT_EQ(phi_hat(ctx, 1, 1), BigRational(59, 2904));
    EXPECT_EQ(phi_exact(ctx.spec(), s_hat(ctx, 1, 1)), phi_hat(ctx, 1, 1));
    PAdicExpansion e = to_padic(s_hat(ctx, 3, 2), 11);
    EXPECT_EQ(e.digit(1), 3u);
    EXPECT_EQ(e.digit(2), 3u);
    EXPECT_EQ(e.digit(3), 5u);
    EXPECT_THROW(s_hat(ctx, 0, 1), std::invalid_argument);
    EXPECT_THROW(s_hat(ctx, 1, 6), std::invalid_argument);
    EXPECT_THROW(check_candidate(PrimeContext(2), 1, 0), std::invalid_argument);
}

TEST(Candidate, PhiHatAgreesWithExactPhiOnTheWholeGrid) {
    for (unsigned p : {3u, 7u, 13u}) {
        PrimeContext ctx(p);
        for (long xi = 1; xi < static_cast<long>(p); ++xi) {
            for (long eta = 0; eta <= static_cast<long>(p - 1) / 2; ++eta) {
                EXPECT_EQ(phi_exact(ctx.spec(), s_hat(ctx, xi, eta)), phi_hat(ctx, xi, eta));
            }
        }
    }
}

TEST(Candidate, ClosedFormMatchesG) {
    // Values from an independent 40-digit evaluation.
    struct Case {
        unsigned p;
        long xi, eta;
        const char* value;
    };
    const Case cases[] = {{3, 1, 0, "0.774281326315121453631686540833"},
                          {11, 1, 1, "0.736495087226247155691101030008"},
                          {13, 1, 1, "0.7326634607501662095622434"},
                          {29, 2, 1, "0.7168185213505569951450373"},
                          {113, 2, 5, "0.6843236827742303689280279"}};
    for (const auto& c : cases) {
        PrimeContext ctx(c.p);
        RInterval b = B_closed_form(ctx, c.xi, c.eta, 256);
        RInterval g = G(ctx, s_hat(ctx, c.xi, c.eta), 256);
        EXPECT_TRUE(b.overlaps(g)) << c.p;
        EXPECT_LT(b.width(), 1e-60);
        BigRational ref = BigRational::parse(c.value);
        EXPECT_LT((b.lower_rational() - ref).abs().to_double(), 1e-24) << c.p;
        EXPECT_NEAR(B_double(c.p, ctx.rho_double(), c.xi, c.eta), ref.to_double(), 1e-14);
    }
}

TEST(Candidate, GDomain) {
    PrimeContext ctx(5);
    EXPECT_THROW(G(ctx, BigRational(1, 6), 128), std::invalid_argument);
    EXPECT_TRUE(G(ctx, BigRational(1), 128).contains(BigRational(1)));
    EXPECT_TRUE(G(ctx, BigRational(1, 5), 128).contains(BigRational(1)));
}

TEST(Predictor, LargePrimeRounding) {
    Prediction pr = predict_xi_eta(1000003);
    EXPECT_EQ(pr.xi_rounded, 9);
    EXPECT_EQ(pr.eta_rounded, 13206);
    EXPECT_THROW(predict_xi_eta(7), std::invalid_argument);
    EXPECT_THROW(predict_xi_eta(15), std::invalid_argument);
}

TEST(Predictor, GridArgminKnownPairs) {
    struct Case {
        unsigned p;
        long xi, eta;
    };
    for (const Case& c : {Case{3, 1, 0}, Case{11, 1, 1}, Case{23, 1, 1}, Case{29, 2, 1}, Case{31, 2, 2}, Case{113, 2, 5},
                          Case{127, 3, 5}, Case{491, 4, 15}}) {
        GridResult g = grid_argmin(PrimeContext(c.p));
        EXPECT_EQ(g.xi, c.xi) << c.p;
        EXPECT_EQ(g.eta, c.eta) << c.p;
        EXPECT_TRUE(g.separated) << c.p;
    }
}

TEST(Predictor, RankedCandidatesPutTheWinnerFirst) {
    PrimeContext ctx(29);
    auto ranked = search_candidates(ctx, 1);
    ASSERT_FALSE(ranked.empty());
    EXPECT_EQ(ranked.front().point.xi, 2);
    EXPECT_EQ(ranked.front().point.eta, 1);
    EXPECT_THROW(search_candidates(ctx, 0), std::invalid_argument);
}
