#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "lss/decoupling.hpp"
#include "lss/montecarlo.hpp"

using namespace lss;

namespace {

ExperimentConfig small_config(LawKind kind, std::size_t n, std::size_t replicas) {
    ExperimentConfig c;
    c.n = n;
    c.replicas = replicas;
    c.law = make_entry_law(kind, 2.0);
    c.family = {PrefixSpec{0.5}, WindowSpec{0.25, 0.75}};
    c.functions = {{"x", 1.0, {}}, {"x2", 1.0, {}}};
    c.master_seed = 5;
    c.options.threads = 1;
    return c;
}

}  // namespace

TEST(Stats, MeanAndCovarianceExamples) {
    Eigen::MatrixXd x(4, 2);
    x << 1, 2, 2, 4, 3, 6, 4, 8;
    const auto m = stats::mean(x);
    EXPECT_DOUBLE_EQ(m(0), 2.5);
    EXPECT_DOUBLE_EQ(m(1), 5.0);
    const auto c = stats::covariance(x);
    EXPECT_NEAR(c(0, 0), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(c(0, 1), 10.0 / 3.0, 1e-15);
    EXPECT_NEAR(c(1, 1), 20.0 / 3.0, 1e-15);
    EXPECT_EQ(c(0, 1), c(1, 0));
    EXPECT_THROW(stats::covariance(Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
    EXPECT_THROW(stats::mean(Eigen::MatrixXd::Zero(0, 2)), std::invalid_argument);
}

TEST(Stats, ShapeMomentsExamples) {
    EXPECT_NEAR(stats::skewness({-1.0, 0.0, 1.0}), 0.0, 1e-15);
    EXPECT_NEAR(stats::excess_kurtosis({-1.0, 1.0, -1.0, 1.0}), -2.0, 1e-15);
    EXPECT_GT(stats::skewness({0.0, 0.0, 0.0, 10.0}), 1.0);
    EXPECT_EQ(stats::skewness({2.0, 2.0, 2.0}), 0.0);
    const auto z = stats::standardize({1.0, 2.0, 3.0});
    EXPECT_NEAR(z[0], -1.0, 1e-15);
    EXPECT_NEAR(z[2], 1.0, 1e-15);
    for (double v : stats::standardize({4.0, 4.0})) EXPECT_EQ(v, 0.0);
}

TEST(Stats, KolmogorovSmirnovAgainstNormalQuantiles) {
    // Midpoint quantiles give sup distance exactly 1/(2R).
    const std::size_t r = 1000;
    std::vector<double> q;
    for (std::size_t i = 0; i < r; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(r);
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (stats::normal_cdf(mid) < p ? lo : hi) = mid;
        }
        q.push_back(0.5 * (lo + hi));
    }
    EXPECT_NEAR(stats::ks_statistic_normal(q), 0.5 / static_cast<double>(r), 1e-12);
    std::vector<double> shifted = q;
    for (double& v : shifted) v += 1.0;
    EXPECT_GT(stats::ks_statistic_normal(shifted), 0.3);
    EXPECT_NEAR(stats::ks_critical_1pct(4000), 1.63 / std::sqrt(4000.0), 1e-15);
}

TEST(Stats, DeltaMethodStderrMatchesBootstrap) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(800, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double a = g(rng), b = g(rng);
        x(i, 0) = a;
        x(i, 1) = 0.6 * a + 0.8 * b;
    }
    const auto delta = stats::covariance_stderr(x);
    const auto boot = stats::covariance_stderr_bootstrap(x, 400, 9);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) EXPECT_NEAR(boot(a, b) / delta(a, b), 1.0, 0.2);
    }
    // Gaussian: Var(c_11) ~ 2 / R.
    EXPECT_NEAR(delta(0, 0), std::sqrt(2.0 / 800.0), 0.2 * std::sqrt(2.0 / 800.0));
}

// Coverage of the estimated covariance by +-2 delta-method stderr on
// synthetic data with a known covariance.
TEST(Stats, EstimatorCoverageOnSyntheticData) {
    Eigen::Matrix3d sigma;
    sigma << 2.0, 0.7, -0.3, 0.7, 1.0, 0.2, -0.3, 0.2, 0.5;
    const Eigen::Matrix3d chol = sigma.llt().matrixL();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    std::size_t inside = 0, total = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd x(2000, 3);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::Vector3d e(g(rng), g(rng), g(rng));
            x.row(i) = (chol * e).transpose();
        }
        const auto c = stats::covariance(x);
        const auto se = stats::covariance_stderr(x);
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) {
                inside += std::abs(c(a, b) - sigma(a, b)) <= 2.0 * se(a, b) ? 1 : 0;
                ++total;
            }
        }
    }
    EXPECT_GE(static_cast<double>(inside), 0.95 * static_cast<double>(total)) << inside << " / " << total;
}

TEST(Replica, ConstantFunctionCountsEigenvalues) {
    auto c = small_config(LawKind::gaussian, 64, 10);
    c.functions = {{"1", 1.0, {}}, {"1", 1.0, {}}};
    const auto v = run_replica(c, 3);
    EXPECT_EQ(v.values[0], 32.0);
    EXPECT_EQ(v.values[1], 32.0);
    EXPECT_THROW(run_replica(c, 10), std::out_of_range);
}

TEST(Replica, PureInConfigAndIndex) {
    const auto c = small_config(LawKind::uniform, 48, 20);
    EXPECT_EQ(run_replica(c, 7).values, run_replica(c, 7).values);
    EXPECT_NE(run_replica(c, 7).values, run_replica(c, 8).values);
}

// N(x) = Tr M(B) has mean 0 and variance n_B sigma^2 / n at every finite n.
TEST(Experiment, TraceVarianceIsExactAtFiniteN) {
    for (auto kind : {LawKind::gaussian, LawKind::rademacher, LawKind::uniform}) {
        ExperimentConfig c;
        c.n = 60;
        c.replicas = 2000;
        c.law = make_entry_law(kind, 3.0);
        c.family = {PrefixSpec{0.5}};
        c.functions = {{"x", 1.0, {}}};
        c.master_seed = 17;
        c.options.threads = 1;
        const auto r = run_experiment(c);
        const double want = 30.0 * 3.0 / 60.0;
        EXPECT_LT(std::abs(r.sample_cov(0, 0) - want), 5.0 * r.cov_stderr(0, 0)) << to_string(kind);
        EXPECT_LT(std::abs(r.sample_mean(0)), 5.0 * std::sqrt(want / 2000.0));
    }
}

TEST(Experiment, ConstantStatisticsHaveZeroCovariance) {
    auto c = small_config(LawKind::gaussian, 32, 5);
    c.functions = {{"1", 1.0, {}}, {"1", 1.0, {}}};
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.sample_cov.isZero(0.0));
    EXPECT_TRUE(r.cov_stderr.isZero(0.0));
    EXPECT_TRUE(r.standardized_samples.isZero(0.0));
    EXPECT_EQ(r.replicas_used, 5u);
    EXPECT_TRUE(r.failed_replicas.empty());
}

TEST(Experiment, ResultsDoNotDependOnThreadCount) {
    auto c = small_config(LawKind::rademacher, 40, 30);
    c.options.threads = 1;
    const auto one = run_experiment(c);
    c.options.threads = 3;
    const auto three = run_experiment(c);
    EXPECT_EQ(three.threads_used, 3u);
    EXPECT_TRUE(one.samples == three.samples);
    EXPECT_TRUE(one.sample_cov == three.sample_cov);
    EXPECT_TRUE(one.cov_stderr == three.cov_stderr);
}

TEST(Experiment, NonFiniteStatisticFailsTheReplica) {
    ExperimentConfig c = small_config(LawKind::gaussian, 32, 20);
    c.functions = {{"x", 1.0, {}}, {"x", 1.0, {}}};
    const auto family = realize_index_family(c.family, c.n);
    // log of a negative eigenvalue is non-finite in every replica.
    const std::vector<TestFunction> bad = {
        TestFunction::closure([](double x) { return std::log(x); }, std::nullopt, "log"), functions::monomial(1)};
    EXPECT_THROW(run_replica(c, family, bad, 0), std::domain_error);
    c.replicas = 1;
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiment, BootstrapAuditIsOptional) {
    auto c = small_config(LawKind::gaussian, 32, 60);
    EXPECT_FALSE(run_experiment(c).cov_stderr_bootstrap.has_value());
    c.options.bootstrap = 50;
    const auto r = run_experiment(c);
    ASSERT_TRUE(r.cov_stderr_bootstrap.has_value());
    EXPECT_EQ(r.cov_stderr_bootstrap->rows(), 2);
}

TEST(Config, ValidationErrorsNameTheField) {
    auto c = small_config(LawKind::gaussian, 32, 10);
    c.functions.pop_back();
    try {
        c.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.where(), "functions.list");
    }
    c = small_config(LawKind::gaussian, 4, 10);
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config(LawKind::gaussian, 32, 10);
    c.options.alpha = {1.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c.options.alpha = {};
    c.options.z_gate = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config(LawKind::gaussian, 32, 10);
    c.family.clear();
    c.functions.clear();
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Compare, IdenticalCovarianceGivesZeroZ) {
    const auto c = small_config(LawKind::gaussian, 64, 10);
    auto sim = run_experiment(c);
    const auto theory = theory_report(c, false).theory;
    sim.sample_cov = theory;
    const auto rep = compare_with_theory(sim, c, false);
    EXPECT_TRUE(rep.z_scores.isZero(0.0));
    EXPECT_EQ(rep.max_abs_z, 0.0);
    EXPECT_TRUE(rep.within_gate());
}

TEST(Compare, ZeroStderrLeavesZUndefined) {
    auto c = small_config(LawKind::gaussian, 32, 4);
    c.functions = {{"1", 1.0, {}}, {"1", 1.0, {}}};
    const auto rep = compare_with_theory(run_experiment(c), c, false);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) EXPECT_TRUE(std::isnan(rep.z_scores(i, j)));
    }
    EXPECT_EQ(rep.undefined_z, 3u);
    EXPECT_EQ(rep.max_abs_z, 0.0);
    EXPECT_TRUE(rep.within_gate());
}

TEST(Compare, DisjointSetsAreUncorrelated) {
    ExperimentConfig c;
    c.n = 96;
    c.replicas = 800;
    c.law = make_entry_law(LawKind::uniform, 2.0);
    c.family = {WindowSpec{0.0, 0.5}, WindowSpec{0.5, 1.0}};
    c.functions = {{"x2", 1.0, {}}, {"x2", 1.0, {}}};
    c.master_seed = 11;
    c.options.threads = 1;
    const auto rep = compare_with_theory(run_experiment(c), c);
    EXPECT_EQ(rep.theory(0, 1), 0.0);
    EXPECT_LT(std::abs(rep.z_scores(0, 1)), 4.0);
    EXPECT_TRUE(std::isnan(rep.contour_gff(0, 0)));  // beta = 1 on the diagonal
    EXPECT_NEAR(rep.contour_gff(0, 1), 0.0, 1e-12);
}

TEST(Compare, CombinationIsApproximatelyNormal) {
    ExperimentConfig c = small_config(LawKind::gaussian, 96, 1500);
    c.master_seed = 12;
    const auto rep = compare_with_theory(run_experiment(c), c, false);
    EXPECT_LT(rep.normality.ks_statistic, rep.normality.ks_critical);
    EXPECT_LT(std::abs(rep.normality.skewness), 0.2);
    EXPECT_LT(std::abs(rep.normality.excess_kurtosis), 0.4);
    EXPECT_LT(rep.max_abs_z, 4.0);
}

TEST(Normality, RejectsMismatchedWeights) {
    EXPECT_THROW(normality_of_combination(Eigen::MatrixXd::Zero(10, 2), {1.0}), std::invalid_argument);
}

TEST(Decoupling, ConstantAndRemainderBound) {
    EXPECT_NEAR(decoupling_constant(0), (1.0 + 9.0) / 1.0, 1e-12);
    EXPECT_NEAR(decoupling_constant(1), (1.0 + 125.0) / 2.0, 1e-12);
    EXPECT_EQ(support_radius(make_entry_law(LawKind::rademacher, 2.0)), 1.0);
    EXPECT_TRUE(std::isinf(support_radius(make_entry_law(LawKind::gaussian, 2.0))));
    const auto cube = DerivativeFamily::polynomial({0.0, 0.0, 0.0, 1.0});
    EXPECT_EQ(cube(3, 0.7), 6.0);
    EXPECT_EQ(cube.sup_abs(3, std::numeric_limits<double>::infinity()), 6.0);
    EXPECT_TRUE(std::isinf(cube.sup_abs(1, std::numeric_limits<double>::infinity())));
    EXPECT_NEAR(DerivativeFamily::sin()(1, 0.3), std::cos(0.3), 1e-15);
}

// Rademacher: xi^3 = xi exactly, and x f(x) for f = x^2 expands to kappa_2 f'(xi) = 2 xi
// with remainder -xi; the bound at p = 1 is C_1 E|xi|^3 sup|f''| = 63 * 2.
TEST(Decoupling, RademacherSquare) {
    const auto law = make_entry_law(LawKind::rademacher, 2.0);
    const auto r = decoupling_check(law, DerivativeFamily::polynomial({0.0, 0.0, 1.0}), 1, 20000, 3);
    EXPECT_NEAR(r.remainder_bound, 63.0 * 2.0, 1e-9);
    EXPECT_TRUE(r.within_envelope);
    EXPECT_LT(std::abs(r.residual), 5.0 * r.combined_stderr);
}

TEST(Decoupling, RademacherSineWithinEnvelope) {
    const auto r = decoupling_check(make_entry_law(LawKind::rademacher, 2.0), DerivativeFamily::sin(), 3, 200000, 4);
    EXPECT_TRUE(r.within_envelope);
    EXPECT_LT(std::abs(r.residual), r.envelope);
}

// Gaussian cumulants beyond the second vanish, so the expansion is exact.
TEST(Decoupling, GaussianIdentity) {
    const auto g = gaussian_decoupling_check(200000, 6);
    EXPECT_LT(std::abs(g.z_lhs()), 5.0);
    EXPECT_LT(std::abs(g.z_rhs()), 5.0);
    EXPECT_LT(std::abs(g.z_difference()), 5.0);
    const auto r = decoupling_check(make_entry_law(LawKind::gaussian, 2.0), DerivativeFamily::sin(), 3, 200000, 7);
    EXPECT_LT(std::abs(r.residual), 5.0 * r.combined_stderr);
    EXPECT_THROW(gaussian_decoupling_check(1, 0), std::invalid_argument);
}
