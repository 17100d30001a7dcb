#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "trajtree/rational.hpp"

using trajtree::Rational;

TEST(Rational, NormalizesToLowestTerms) {
    EXPECT_EQ(Rational(2, 4), Rational(1, 2));
    EXPECT_EQ(Rational(2, 4).num(), 1);
    EXPECT_EQ(Rational(3, -6).den(), 2);
    EXPECT_EQ(Rational(3, -6).num(), -1);
    EXPECT_EQ(Rational(0, 5), Rational(0, 1));
    EXPECT_EQ(Rational(0, 5).str(), "0/1");
    EXPECT_EQ(Rational(4, 4).str(), "1/1");
}

TEST(Rational, ZeroDenominatorThrows) { EXPECT_THROW(Rational(1, 0), std::invalid_argument); }

TEST(Rational, ParsesFractionsIntegersAndDecimals) {
    EXPECT_EQ(Rational::parse("1/2"), Rational(1, 2));
    EXPECT_EQ(Rational::parse("0.5"), Rational(1, 2));
    EXPECT_EQ(Rational::parse(".25"), Rational(1, 4));
    EXPECT_EQ(Rational::parse("-0.75"), Rational(-3, 4));
    EXPECT_EQ(Rational::parse("3"), Rational(3, 1));
    EXPECT_THROW(Rational::parse("abc"), std::invalid_argument);
    EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument);
    EXPECT_THROW(Rational::parse("0.5x"), std::invalid_argument);
}

TEST(Rational, HalfBoundaryIsExact) {
    // 1/2 - 0 is not strictly greater than 1/2; 2/3 - 1/6 = 1/2 either.
    EXPECT_FALSE(Rational(1, 2) - Rational(0, 1) > Rational(1, 2));
    EXPECT_FALSE(Rational(2, 3) - Rational(1, 6) > Rational(1, 2));
    EXPECT_TRUE(Rational(3, 4) - Rational(1, 5) > Rational(1, 2));
}

TEST(Rational, OrderingMatchesCrossMultiplication) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        std::int64_t a = static_cast<std::int64_t>(rng() % 200), b = 1 + static_cast<std::int64_t>(rng() % 200);
        std::int64_t c = static_cast<std::int64_t>(rng() % 200), d = 1 + static_cast<std::int64_t>(rng() % 200);
        Rational x(a, b), y(c, d);
        EXPECT_EQ(x < y, a * d < c * b);
        EXPECT_EQ(x == y, a * d == c * b);
        EXPECT_EQ((x - y) + y, x);
    }
}
