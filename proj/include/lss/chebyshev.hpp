#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lss/test_function.hpp"

namespace lss {

// Rescaled Chebyshev polynomials on [-2 sqrt(gamma), 2 sqrt(gamma)]:
//   T_k^g(x) = T_k(x / (2 sqrt g)),  U_k^g(x) = U_k(x / (2 sqrt g)).

inline constexpr std::size_t kDefaultChebNodes = 2048;
inline constexpr std::size_t kDefaultClosureTruncation = 64;

namespace detail {

inline void require_positive_gamma(double gamma, const char* where) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument(std::string(where) + ": gamma must be > 0");
    }
}

/// Midpoint nodes theta_j = pi (j + 1/2) / N on (0, pi).
inline std::vector<double> theta_nodes(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t j = 0; j < n; ++j) {
        t[j] = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    }
    return t;
}

}  // namespace detail

struct ChebEval {
    double value = 0.0;
    bool extrapolated = false;
};

/// T_k^gamma(x), with the cosh extension outside the support (flagged).
inline ChebEval cheb_T_checked(std::size_t k, double gamma, double x) {
    detail::require_positive_gamma(gamma, "cheb_T");
    const double t = x / (2.0 * std::sqrt(gamma));
    const double kk = static_cast<double>(k);
    if (std::abs(t) <= 1.0) return {std::cos(kk * std::acos(t)), false};
    const double mag = std::cosh(kk * std::acosh(std::abs(t)));
    return {(t < 0.0 && k % 2 == 1) ? -mag : mag, true};
}

inline double cheb_T(std::size_t k, double gamma, double x) { return cheb_T_checked(k, gamma, x).value; }

/// U_k^gamma(x) by the three-term recurrence U_{k+1} = (x/sqrt g) U_k - U_{k-1}.
inline double cheb_U(std::size_t k, double gamma, double x) {
    detail::require_positive_gamma(gamma, "cheb_U");
    const double s = x / std::sqrt(gamma);
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = s;
    for (std::size_t i = 1; i < k; ++i) {
        const double next = s * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// U_k^gamma(x) = sum_j (-1)^j C(k-j, j) (x / sqrt g)^{k-2j}.
inline double cheb_U_binomial(std::size_t k, double gamma, double x) {
    detail::require_positive_gamma(gamma, "cheb_U");
    const double s = x / std::sqrt(gamma);
    double sum = 0.0;
    for (std::size_t j = 0; 2 * j <= k; ++j) {
        // C(k-j, j) in floating point; exact for the orders used here.
        double binom = 1.0;
        for (std::size_t i = 0; i < j; ++i) {
            binom = binom * static_cast<double>(k - j - i) / static_cast<double>(i + 1);
        }
        const double term = binom * std::pow(s, static_cast<double>(k - 2 * j));
        sum += (j % 2 == 0) ? term : -term;
    }
    return sum;
}

/// U_k^gamma(x) = sin((k+1) theta) / sin(theta), x = 2 sqrt(g) cos(theta).
inline double cheb_U_trig(std::size_t k, double gamma, double x) {
    detail::require_positive_gamma(gamma, "cheb_U");
    const double t = x / (2.0 * std::sqrt(gamma));
    if (std::abs(t) > 1.0) throw std::domain_error("cheb_U_trig: x outside the support");
    const double kk = static_cast<double>(k);
    if (std::abs(t) == 1.0) return (t < 0.0 && k % 2 == 1) ? -(kk + 1.0) : kk + 1.0;
    const double theta = std::acos(t);
    return std::sin((kk + 1.0) * theta) / std::sin(theta);
}

/// U_k^gamma as a polynomial test function (monomial coefficients).
inline TestFunction u_polynomial(std::size_t k, double gamma) {
    detail::require_positive_gamma(gamma, "u_polynomial");
    std::vector<double> c(k + 1, 0.0);
    for (std::size_t j = 0; 2 * j <= k; ++j) {
        double binom = 1.0;
        for (std::size_t i = 0; i < j; ++i) binom = binom * static_cast<double>(k - j - i) / static_cast<double>(i + 1);
        const double v = binom / std::pow(gamma, static_cast<double>(k - 2 * j) / 2.0);
        c[k - 2 * j] = (j % 2 == 0) ? v : -v;
    }
    return TestFunction::polynomial(std::move(c), "U" + std::to_string(k));
}

/// Coefficients of phi in the T_k^gamma basis, phi = sum_k coeffs[k] T_k^gamma.
/// coeffs[0] is the mean of phi under the arcsine law.
struct ChebCoeffs {
    double gamma = 1.0;
    std::vector<double> coeffs;
    std::size_t K = 0;
    /// max |coeffs[k]| over the last five retained k; 0 when phi is a
    /// polynomial of degree <= K (the expansion is then exact).
    double tail_bound = 0.0;

    double operator()(double x) const {
        double sum = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) sum += coeffs[k] * cheb_T(k, gamma, x);
        return sum;
    }
    double at(std::size_t k) const { return k < coeffs.size() ? coeffs[k] : 0.0; }
};

/// Default truncation: the degree for polynomials, 64 otherwise.
inline std::size_t default_truncation(const TestFunction& phi) {
    if (const auto* p = phi.as_polynomial()) return std::max<std::size_t>(1, p->degree());
    return kDefaultClosureTruncation;
}

/// (phi)_k = (2/N) sum_j phi(2 sqrt(g) cos theta_j) cos(k theta_j), k = 0..K,
/// with the k = 0 entry halved. Exact for polynomials of degree < N.
inline ChebCoeffs cheb_coeffs(const TestFunction& phi, double gamma, std::size_t K,
                              std::size_t nodes = kDefaultChebNodes) {
    detail::require_positive_gamma(gamma, "cheb_coeffs");
    if (K < 1) throw std::invalid_argument("cheb_coeffs: K must be >= 1");
    if (nodes < 4 * K) {
        throw std::invalid_argument("cheb_coeffs: quadrature nodes N = " + std::to_string(nodes) +
                                    " must satisfy N >= 4K = " + std::to_string(4 * K));
    }
    const double r = 2.0 * std::sqrt(gamma);
    const auto theta = detail::theta_nodes(nodes);
    std::vector<double> values(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        values[j] = phi(r * std::cos(theta[j]));
        if (!std::isfinite(values[j])) {
            throw std::domain_error("cheb_coeffs: " + phi.label() + " is not finite on the support");
        }
    }
    ChebCoeffs out;
    out.gamma = gamma;
    out.K = K;
    out.coeffs.assign(K + 1, 0.0);
    for (std::size_t k = 0; k <= K; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) sum += values[j] * std::cos(static_cast<double>(k) * theta[j]);
        out.coeffs[k] = 2.0 * sum / static_cast<double>(nodes);
    }
    out.coeffs[0] *= 0.5;
    const auto* poly = phi.as_polynomial();
    if (poly != nullptr && poly->degree() <= K) {
        // Exact expansion: the retained tail beyond the degree is quadrature noise.
        for (std::size_t k = poly->degree() + 1; k <= K; ++k) out.coeffs[k] = 0.0;
        out.tail_bound = 0.0;
    } else {
        const std::size_t first = K >= 4 ? K - 4 : 0;
        for (std::size_t k = first; k <= K; ++k) out.tail_bound = std::max(out.tail_bound, std::abs(out.coeffs[k]));
    }
    return out;
}

/// Coefficients of f in the semicircle-orthonormal U_k^gamma basis:
/// f_k = (2/N) sum_j f(2 sqrt(g) cos theta_j) sin((k+1) theta_j) sin(theta_j).
inline std::vector<double> u_coeffs(const TestFunction& f, double gamma, std::size_t K,
                                    std::size_t nodes = kDefaultChebNodes) {
    detail::require_positive_gamma(gamma, "u_coeffs");
    if (nodes < 2 * (K + 1)) throw std::invalid_argument("u_coeffs: too few quadrature nodes for K");
    const double r = 2.0 * std::sqrt(gamma);
    const auto theta = detail::theta_nodes(nodes);
    std::vector<double> weighted(nodes);
    for (std::size_t j = 0; j < nodes; ++j) weighted[j] = f(r * std::cos(theta[j])) * std::sin(theta[j]);
    std::vector<double> out(K + 1, 0.0);
    for (std::size_t k = 0; k <= K; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) sum += weighted[j] * std::sin(static_cast<double>(k + 1) * theta[j]);
        out[k] = 2.0 * sum / static_cast<double>(nodes);
    }
    if (const auto* poly = f.as_polynomial()) {
        for (std::size_t k = poly->degree() + 1; k <= K; ++k) out[k] = 0.0;
    }
    return out;
}

inline double catalan(std::size_t m) {
    double c = 1.0;
    for (std::size_t i = 0; i < m; ++i) c = c * 2.0 * static_cast<double>(2 * i + 1) / static_cast<double>(i + 2);
    return c;
}

/// m-th moment of the semicircle law of variance gamma.
inline double semicircle_moment(double gamma, std::size_t m) {
    if (m % 2 == 1) return 0.0;
    return catalan(m / 2) * std::pow(gamma, static_cast<double>(m / 2));
}

enum class WeightKind { semicircle, odd, kappa4 };

/// Integral of phi against the chosen weight over [-2 sqrt(g), 2 sqrt(g)]:
///   semicircle  sqrt(4g - l^2) / (2 pi g)
///   odd         l / sqrt(4g - l^2)
///   kappa4      (2g - l^2) / sqrt(4g - l^2)
/// After l = 2 sqrt(g) cos(theta) the weights become (2/pi) sin^2, 2 sqrt(g) cos
/// and -2g cos(2 theta), integrated by the midpoint rule on (0, pi).
inline double weighted_integral(const TestFunction& phi, double gamma, WeightKind kind,
                                std::size_t nodes = kDefaultChebNodes) {
    detail::require_positive_gamma(gamma, "weighted_integral");
    if (nodes == 0) throw std::invalid_argument("weighted_integral: nodes must be positive");
    const double r = 2.0 * std::sqrt(gamma);
    const auto theta = detail::theta_nodes(nodes);
    double sum = 0.0;
    for (double t : theta) {
        double w = 0.0;
        switch (kind) {
            case WeightKind::semicircle: w = (2.0 / std::numbers::pi) * std::sin(t) * std::sin(t); break;
            case WeightKind::odd: w = r * std::cos(t); break;
            case WeightKind::kappa4: w = -2.0 * gamma * std::cos(2.0 * t); break;
        }
        sum += phi(r * std::cos(t)) * w;
    }
    return sum * std::numbers::pi / static_cast<double>(nodes);
}

/// B_phi = (1 / (pi g^2)) * integral of phi (2g - l^2) / sqrt(4g - l^2).
inline double b_phi(const TestFunction& phi, double gamma, std::size_t nodes = kDefaultChebNodes) {
    return weighted_integral(phi, gamma, WeightKind::kappa4, nodes) / (std::numbers::pi * gamma * gamma);
}

}  // namespace lss
