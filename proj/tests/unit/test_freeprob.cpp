#include <gtest/gtest.h>

#include "lss/freeprob.hpp"
#include "lss/theory.hpp"
#include "lss/verify.hpp"

using namespace lss;

namespace {

RationalGeometry rg(Rational l, Rational r, Rational lr) { return {l, r, lr}; }

}  // namespace

TEST(Ncp, SmallCounts) {
    EXPECT_EQ(enumerate_ncp(1).size(), 1u);
    const auto two = enumerate_ncp(2);
    ASSERT_EQ(two.size(), 2u);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> seen;
    for (const auto& p : two) {
        auto pairs = p.pairs;
        std::sort(pairs.begin(), pairs.end());
        seen.push_back(pairs);
    }
    std::sort(seen.begin(), seen.end());
    const std::vector<std::pair<std::size_t, std::size_t>> nested = {{0, 3}, {1, 2}};
    const std::vector<std::pair<std::size_t, std::size_t>> flat = {{0, 1}, {2, 3}};
    EXPECT_TRUE(std::find(seen.begin(), seen.end(), nested) != seen.end());
    EXPECT_TRUE(std::find(seen.begin(), seen.end(), flat) != seen.end());
    EXPECT_EQ(enumerate_ncp(5).size(), 42u);
    EXPECT_EQ(enumerate_dyck(5).size(), 42u);
    EXPECT_THROW(enumerate_ncp(kMaxNcpHalfSize + 1), std::invalid_argument);
}

TEST(Ncp, BijectionWithDyckPaths) {
    for (std::size_t m = 0; m <= 10; ++m) {
        const auto ncps = enumerate_ncp(m);
        EXPECT_EQ(BigInt(ncps.size()), catalan_exact(m));
        EXPECT_EQ(BigInt(enumerate_dyck(m).size()), catalan_exact(m));
        for (const auto& p : ncps) {
            EXPECT_TRUE(is_noncrossing_perfect(p, 2 * m));
            EXPECT_EQ(dyck_to_ncp(ncp_to_dyck(p)).pairs, p.pairs);
        }
    }
}

TEST(Ncp, CrossingMatchingIsRejected) {
    NCPairPartition crossing{{{0, 2}, {1, 3}}};
    EXPECT_FALSE(is_noncrossing_perfect(crossing, 4));
    NCPairPartition partial{{{0, 1}}};
    EXPECT_FALSE(is_noncrossing_perfect(partial, 4));
    EXPECT_THROW(DyckPath::from_steps({1, -1, -1, 1}), std::invalid_argument);
    EXPECT_THROW(DyckPath::from_steps({1, 1}), std::invalid_argument);
}

TEST(DyckCount, Examples) {
    EXPECT_EQ(dyck_count_at_height(2, 2, 0), 1);
    EXPECT_EQ(dyck_count_at_height(2, 2, 2), 1);
    EXPECT_EQ(dyck_count_at_height(2, 4, 4), 0);
    EXPECT_THROW(dyck_count_at_height(2, 1, 1), std::invalid_argument);
    EXPECT_THROW(dyck_count_at_height(2, 2, 1), std::invalid_argument);
}

TEST(DyckCount, MatchesExhaustiveCounting) {
    const auto r = verify_dyck_counts(16);
    EXPECT_TRUE(r.passed()) << r.detail;
    EXPECT_GT(r.checks, 100u);
}

TEST(MomentMonomial, Examples) {
    const auto g = rg(Rational(1, 2), Rational(2, 3), Rational(1, 3));
    EXPECT_EQ(moment_monomial(1, 1, g), g.gamma_lr * g.gamma_lr);
    EXPECT_EQ(moment_monomial(2, 2, g), g.gamma_l * g.gamma_r * g.gamma_lr + rpow(g.gamma_lr, 3));
    EXPECT_EQ(moment_monomial(2, 1, g), 0);
    EXPECT_EQ(moment_via_partitions(2, 2, g), g.gamma_l * g.gamma_r * g.gamma_lr + rpow(g.gamma_lr, 3));
    EXPECT_EQ(moment_via_partitions(0, 0, g), g.gamma_lr);
    EXPECT_EQ(moment_monomial(0, 0, g), g.gamma_lr);
}

TEST(MomentMonomial, FullOverlapIsCatalanScaled) {
    const Rational gamma(3, 7);
    const auto g = rg(gamma, gamma, gamma);
    EXPECT_EQ(moment_via_partitions(4, 0, g), 2 * rpow(gamma, 3));
    for (long long m = 0; m <= 7; ++m) {
        EXPECT_EQ(moment_monomial(2 * m, 0, g), rpow(gamma, m + 1) * Rational(catalan_exact(static_cast<std::size_t>(m))));
    }
}

TEST(MomentMonomial, EqualsPartitionOracleOnRandomGeometries) {
    const auto r = verify_monomial_oracle(14, 20, 77);
    EXPECT_TRUE(r.passed()) << r.detail;
}

TEST(MomentMonomial, KrewerasComplementAgreesWithEdgeCount) {
    const auto r = verify_kreweras(12, 78);
    EXPECT_TRUE(r.passed()) << r.detail;
}

TEST(MomentMonomial, DoubleOverloadMatchesTheory) {
    const auto g = OverlapGeometry::from_densities(0.5, 0.8, 0.35);
    for (long long k = 0; k <= 6; ++k) {
        for (long long q = 0; q <= 6; ++q) {
            const double b = bilinear_form(functions::monomial(static_cast<std::size_t>(k)),
                                           functions::monomial(static_cast<std::size_t>(q)), g)
                                 .value;
            EXPECT_NEAR(moment_monomial(k, q, g), b, 1e-12);
        }
    }
}

TEST(HIdentities, Examples) {
    const auto h1_20 = hyp_H(1, 2, 0);
    EXPECT_EQ(h1_20.alternating_sum, 0);
    EXPECT_EQ(h1_20.closed_form, 0);
    EXPECT_EQ(hyp_H(1, 2, 2).alternating_sum, Rational(1, 5));
    EXPECT_EQ(hyp_H(2, 3, 3).alternating_sum, Rational(1, 8));
    EXPECT_EQ(hyp_H(2, 3, 3).closed_form, Rational(1, 8));
    EXPECT_THROW(hyp_H(3, 1, 0), std::invalid_argument);
    EXPECT_THROW(hyp_H(1, 1, 2), std::invalid_argument);
}

TEST(HIdentities, ExactUpToThirty) {
    const auto r = verify_h_identities(30);
    EXPECT_TRUE(r.passed()) << r.detail;
}

TEST(MomentPolynomial, UPolynomialExamples) {
    const auto g = rg(Rational(1, 2), Rational(4, 5), Rational(2, 5));
    // gamma^{1/2} U_1 = x is rational; <x, x> = gamma_lr^2.
    const auto u1 = u_polynomial_scaled(1, g.gamma_l);
    EXPECT_EQ(moment_polynomial(u1, u_polynomial_scaled(1, g.gamma_r), g), g.gamma_lr * g.gamma_lr);
    const auto u2 = u_polynomial_scaled(2, g.gamma_l);
    EXPECT_EQ(moment_polynomial(u2, u_polynomial_scaled(0, g.gamma_r), g), 0);
    EXPECT_EQ(moment_polynomial(u2, u_polynomial_scaled(2, g.gamma_r), g), rpow(g.gamma_lr, 3) / (g.gamma_l * g.gamma_r));
}

TEST(MomentPolynomial, DiagonalizesExactlyUpToTen) {
    const auto r = verify_diagonalization_exact(10, 79, false);
    EXPECT_TRUE(r.passed()) << r.detail;
    EXPECT_EQ(r.checks, 3u * 11u * 11u);
}

TEST(MomentPolynomial, DoubleOverloadMatchesUPairing) {
    const auto g = OverlapGeometry::from_densities(0.5, 0.8, 0.35);
    for (std::size_t k = 0; k <= 8; ++k) {
        for (std::size_t q = 0; q <= 8; ++q) {
            const auto uk = u_polynomial(k, g.gamma_l);
            const auto uq = u_polynomial(q, g.gamma_p);
            EXPECT_NEAR(moment_polynomial(*uk.as_polynomial(), *uq.as_polynomial(), g), cheb_U_pairing(k, q, g), 1e-10);
        }
    }
}
