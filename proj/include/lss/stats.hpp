#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "lss/rng.hpp"

namespace lss::stats {

/// Column means of an R x d sample matrix.
inline Eigen::VectorXd mean(const Eigen::MatrixXd& x) {
    if (x.rows() == 0) throw std::invalid_argument("stats::mean: no samples");
    return x.colwise().mean().transpose();
}

/// Unbiased sample covariance (divisor R - 1).
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw std::invalid_argument("stats::covariance: need at least two samples");
    const Eigen::MatrixXd c = x.rowwise() - mean(x).transpose();
    Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
    return 0.5 * (cov + cov.transpose());
}

/// Delta-method standard errors of the covariance entries:
/// Var(c_ab) ~ (m_aabb - c_ab^2) / R with m_aabb = mean of (x_a - m_a)^2 (x_b - m_b)^2.
inline Eigen::MatrixXd covariance_stderr(const Eigen::MatrixXd& x) {
    const auto r = x.rows();
    if (r < 2) throw std::invalid_argument("stats::covariance_stderr: need at least two samples");
    const Eigen::MatrixXd c = x.rowwise() - mean(x).transpose();
    const auto d = x.cols();
    Eigen::MatrixXd se(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = a; b < d; ++b) {
            const Eigen::ArrayXd prod = c.col(a).array() * c.col(b).array();
            const double m11 = prod.mean();
            const double m22 = prod.square().mean();
            const double v = std::max(0.0, m22 - m11 * m11) / static_cast<double>(r);
            se(a, b) = se(b, a) = std::sqrt(v);
        }
    }
    return se;
}

/// Nonparametric bootstrap standard errors of the covariance entries.
inline Eigen::MatrixXd covariance_stderr_bootstrap(const Eigen::MatrixXd& x, std::size_t resamples,
                                                   std::uint64_t seed) {
    if (resamples < 2) throw std::invalid_argument("stats::covariance_stderr_bootstrap: need >= 2 resamples");
    const auto r = x.rows();
    const auto d = x.cols();
    auto rng = replica_engine(seed, 0);
    std::uniform_int_distribution<Eigen::Index> pick(0, r - 1);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd boot(r, d);
    for (std::size_t b = 0; b < resamples; ++b) {
        for (Eigen::Index i = 0; i < r; ++i) boot.row(i) = x.row(pick(rng));
        const Eigen::MatrixXd cov = covariance(boot);
        sum += cov;
        sum_sq += cov.cwiseProduct(cov);
    }
    const double m = static_cast<double>(resamples);
    const Eigen::MatrixXd var = (sum_sq - sum.cwiseProduct(sum) / m) / (m - 1.0);
    return var.cwiseMax(0.0).cwiseSqrt();
}

inline double skewness(const std::vector<double>& v) {
    if (v.size() < 3) throw std::invalid_argument("stats::skewness: need at least three samples");
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double c = x - m;
        m2 += c * c;
        m3 += c * c * c;
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

inline double excess_kurtosis(const std::vector<double>& v) {
    if (v.size() < 4) throw std::invalid_argument("stats::excess_kurtosis: need at least four samples");
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double c2 = (x - m) * (x - m);
        m2 += c2;
        m4 += c2 * c2;
    }
    m2 /= static_cast<double>(v.size());
    m4 /= static_cast<double>(v.size());
    return m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// sup_x |F_emp(x) - Phi(x)|.
inline double ks_statistic_normal(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("stats::ks_statistic_normal: no samples");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = normal_cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t samples) { return 1.63 / std::sqrt(static_cast<double>(samples)); }

/// (v - mean) / sd with the unbiased sd; all zeros when sd = 0.
inline std::vector<double> standardize(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("stats::standardize: need at least two samples");
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    std::vector<double> out(v.size(), 0.0);
    if (sd > 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
    }
    return out;
}

}  // namespace lss::stats
