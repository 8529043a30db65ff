#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lss/chebyshev.hpp"
#include "lss/entry_law.hpp"
#include "lss/error.hpp"
#include "lss/index_family.hpp"
#include "lss/test_function.hpp"

namespace lss {

struct TheoryOptions {
    std::size_t cheb_nodes = kDefaultChebNodes;
    /// 0 selects the per-function default (degree, or 64 for closures).
    std::size_t truncation_K = 0;
    std::size_t contour_grid = 1024;
};

/// Limiting covariance of one coordinate pair, split by origin.
///   gff_part     1/2 sum_{k>=1} k beta^k (phi_l)_k (phi_p)_k
///   sigma_part   (sigma^2 - 2)/4 beta (phi_l)_1 (phi_p)_1
///   kappa4_part  (kappa4/2) gamma_lp^2 B_{phi_l} B_{phi_p}
struct CovarianceBreakdown {
    double gff_part = 0.0;
    double sigma_part = 0.0;
    double kappa4_part = 0.0;
    double total = 0.0;
    std::size_t truncation_K = 0;
    double series_tail = 0.0;
    bool converged = true;
};

namespace detail {

inline std::size_t joint_truncation(const TestFunction& a, const TestFunction& b, const TheoryOptions& opt) {
    if (opt.truncation_K > 0) return opt.truncation_K;
    return std::max(default_truncation(a), default_truncation(b));
}

inline bool is_unit_beta(double beta) { return beta >= 1.0 - 1e-15; }

inline void finish(CovarianceBreakdown& b) {
    b.total = b.gff_part + b.sigma_part + b.kappa4_part;
    b.converged = b.series_tail <= 1e-12 * std::max(1.0, std::abs(b.total));
}

}  // namespace detail

/// Gaussian part from precomputed expansions (both must share K).
inline CovarianceBreakdown cov_gaussian_series(const ChebCoeffs& cl, const ChebCoeffs& cp, const OverlapGeometry& geom,
                                               double sigma_sq) {
    if (geom.beta > 1.0) throw std::invalid_argument("cov_gaussian_series: beta > 1 is not a valid geometry");
    const std::size_t K = std::min(cl.K, cp.K);
    CovarianceBreakdown out;
    out.truncation_K = K;
    std::vector<double> terms(K + 1, 0.0);
    double bk = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
        bk *= geom.beta;
        terms[k] = 0.5 * static_cast<double>(k) * bk * cl.at(k) * cp.at(k);
    }
    // Sum from the small end for stability.
    for (std::size_t k = K; k >= 1; --k) out.gff_part += terms[k];
    out.sigma_part = (sigma_sq - 2.0) / 4.0 * geom.beta * cl.at(1) * cp.at(1);
    const bool exact = cl.tail_bound == 0.0 && cp.tail_bound == 0.0;
    if (!exact) {
        const std::size_t first = K >= 4 ? K - 4 : 1;
        for (std::size_t k = std::max<std::size_t>(first, 1); k <= K; ++k) {
            out.series_tail = std::max(out.series_tail, std::abs(terms[k]));
        }
        // Coefficient tails bound the neglected terms even when beta^k does not.
        if (detail::is_unit_beta(geom.beta)) {
            out.series_tail = std::max(out.series_tail, 0.5 * static_cast<double>(K) * cl.tail_bound * cp.tail_bound);
        }
    }
    detail::finish(out);
    return out;
}

inline CovarianceBreakdown cov_gaussian_series(const TestFunction& phi_l, const TestFunction& phi_p,
                                               const OverlapGeometry& geom, double sigma_sq,
                                               const TheoryOptions& opt = {}) {
    const std::size_t K = detail::joint_truncation(phi_l, phi_p, opt);
    return cov_gaussian_series(cheb_coeffs(phi_l, geom.gamma_l, K, opt.cheb_nodes),
                               cheb_coeffs(phi_p, geom.gamma_p, K, opt.cheb_nodes), geom, sigma_sq);
}

/// kappa4 gamma_lp^2 / (2 pi^2 gamma_l^2 gamma_p^2) * I_l * I_p, with I the
/// kappa4-weighted integral.
inline double cov_kappa4(const TestFunction& phi_l, const TestFunction& phi_p, const OverlapGeometry& geom,
                         double kappa4, std::size_t nodes = kDefaultChebNodes) {
    if (kappa4 == 0.0 || geom.gamma_lp == 0.0) return 0.0;
    const double il = weighted_integral(phi_l, geom.gamma_l, WeightKind::kappa4, nodes);
    const double ip = weighted_integral(phi_p, geom.gamma_p, WeightKind::kappa4, nodes);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return kappa4 * geom.gamma_lp * geom.gamma_lp /
           (2.0 * pi2 * geom.gamma_l * geom.gamma_l * geom.gamma_p * geom.gamma_p) * il * ip;
}

/// The sigma^2 adjustment written with odd-weight integrals instead of (phi)_1.
inline double sigma_part_via_integrals(const TestFunction& phi_l, const TestFunction& phi_p,
                                       const OverlapGeometry& geom, double sigma_sq,
                                       std::size_t nodes = kDefaultChebNodes) {
    const double il = weighted_integral(phi_l, geom.gamma_l, WeightKind::odd, nodes);
    const double ip = weighted_integral(phi_p, geom.gamma_p, WeightKind::odd, nodes);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return geom.gamma_lp * (sigma_sq - 2.0) / (4.0 * pi2 * geom.gamma_l * geom.gamma_p) * il * ip;
}

inline CovarianceBreakdown cov_total(const TestFunction& phi_l, const TestFunction& phi_p, const OverlapGeometry& geom,
                                     const EntryLaw& law, const TheoryOptions& opt = {}) {
    auto out = cov_gaussian_series(phi_l, phi_p, geom, law.sigma_sq_diag, opt);
    out.kappa4_part = cov_kappa4(phi_l, phi_p, geom, law.kappa4, opt.cheb_nodes);
    detail::finish(out);
    return out;
}

/// All d x d breakdowns; expansions and B-functionals are computed once per coordinate.
inline std::vector<std::vector<CovarianceBreakdown>> covariance_breakdowns(const std::vector<TestFunction>& phis,
                                                                           const IndexFamilyRealization& family,
                                                                           const EntryLaw& law,
                                                                           const TheoryOptions& opt = {}) {
    const std::size_t d = family.d();
    if (phis.size() != d) throw std::invalid_argument("covariance_matrix: need one test function per index set");
    std::size_t K = opt.truncation_K;
    if (K == 0) {
        for (const auto& f : phis) K = std::max(K, default_truncation(f));
    }
    std::vector<ChebCoeffs> coeffs;
    std::vector<double> b;
    for (std::size_t l = 0; l < d; ++l) {
        coeffs.push_back(cheb_coeffs(phis[l], family.gamma_l[l], K, opt.cheb_nodes));
        b.push_back(b_phi(phis[l], family.gamma_l[l], opt.cheb_nodes));
    }
    std::vector<std::vector<CovarianceBreakdown>> out(d, std::vector<CovarianceBreakdown>(d));
    for (std::size_t l = 0; l < d; ++l) {
        for (std::size_t p = l; p < d; ++p) {
            const auto geom = overlap_geometry(family, l, p);
            auto cell = cov_gaussian_series(coeffs[l], coeffs[p], geom, law.sigma_sq_diag);
            cell.kappa4_part = 0.5 * law.kappa4 * geom.gamma_lp * geom.gamma_lp * b[l] * b[p];
            detail::finish(cell);
            out[l][p] = cell;
            out[p][l] = cell;
        }
    }
    return out;
}

inline Eigen::MatrixXd covariance_matrix(const std::vector<TestFunction>& phis, const IndexFamilyRealization& family,
                                         const EntryLaw& law, const TheoryOptions& opt = {}) {
    const auto cells = covariance_breakdowns(phis, family, law, opt);
    const auto d = static_cast<Eigen::Index>(cells.size());
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index l = 0; l < d; ++l) {
        for (Eigen::Index p = 0; p < d; ++p) m(l, p) = cells[l][p].total;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Bilinear form and its kernel.

struct SeriesValue {
    double value = 0.0;
    double tail = 0.0;
    std::size_t terms = 0;
};

/// <f, g>_lr = sum_k f_k g_k sqrt(g_l g_r) beta^{k+1}, with f_k, g_k the
/// U-basis coefficients at gamma_l and gamma_r. K = 0 picks max degree + 5 for
/// polynomials and 64 otherwise.
inline SeriesValue bilinear_form(const TestFunction& f, const TestFunction& g, const OverlapGeometry& geom,
                                 std::size_t K = 0, std::size_t nodes = kDefaultChebNodes) {
    if (K == 0) {
        const auto* pf = f.as_polynomial();
        const auto* pg = g.as_polynomial();
        K = (pf && pg) ? std::max(pf->degree(), pg->degree()) + 5 : kDefaultClosureTruncation;
    }
    const auto fk = u_coeffs(f, geom.gamma_l, K, nodes);
    const auto gk = u_coeffs(g, geom.gamma_p, K, nodes);
    const double scale = std::sqrt(geom.gamma_l * geom.gamma_p);
    std::vector<double> terms(K + 1);
    double bk = geom.beta;
    for (std::size_t k = 0; k <= K; ++k) {
        terms[k] = fk[k] * gk[k] * scale * bk;
        bk *= geom.beta;
    }
    SeriesValue out;
    out.terms = K + 1;
    for (std::size_t k = K + 1; k-- > 0;) out.value += terms[k];
    const std::size_t first = K >= 4 ? K - 4 : 0;
    for (std::size_t k = first; k <= K; ++k) out.tail = std::max(out.tail, std::abs(terms[k]));
    if (detail::is_unit_beta(geom.beta) && out.tail > 1e-10 * std::max(1.0, std::abs(out.value))) {
        throw ConvergenceError("bilinear_form: U-coefficient tail does not decay at beta = 1 (tail " +
                               std::to_string(out.tail) + "); increase K or use a smoother function");
    }
    return out;
}

/// <U_k^{g_l}, U_q^{g_r}>_lr = sqrt(g_l g_r) delta_kq beta^{k+1}.
inline double cheb_U_pairing(std::size_t k, std::size_t q, const OverlapGeometry& geom) {
    if (k != q) return 0.0;
    return std::sqrt(geom.gamma_l * geom.gamma_p) * std::pow(geom.beta, static_cast<double>(k + 1));
}

namespace detail {

inline double u_at_angle(std::size_t k, double theta) {
    // Recurrence in 2 cos(theta); stable on the whole closed interval.
    const double s = 2.0 * std::cos(theta);
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

inline void require_support(double x, double gamma, const char* where) {
    if (!(std::abs(x) < 2.0 * std::sqrt(gamma))) {
        throw std::domain_error(std::string(where) + ": point outside the open support");
    }
}

/// Smallest K with beta^{K+2}/(1 - beta) <= 1e-16.
inline std::size_t kernel_default_K(double beta) {
    if (beta <= 0.0) return 0;
    const double k = std::log(1e-16 * (1.0 - beta)) / std::log(beta) - 2.0;
    return static_cast<std::size_t>(std::max(0.0, std::ceil(k)));
}

}  // namespace detail

/// F_lr(x, y) = sqrt(g_l g_r) sum_{k=0}^{K} beta^{k+1} U_k^{g_l}(x) U_k^{g_r}(y)
/// without any beta restriction; for beta = 1 this is a partial sum only.
inline SeriesValue kernel_F_truncated(double x, double y, const OverlapGeometry& geom, std::size_t K) {
    detail::require_support(x, geom.gamma_l, "kernel_F");
    detail::require_support(y, geom.gamma_p, "kernel_F");
    const double sx = x / std::sqrt(geom.gamma_l);
    const double sy = y / std::sqrt(geom.gamma_p);
    double ux_prev = 0.0, ux = 1.0, uy_prev = 0.0, uy = 1.0;
    double bk = geom.beta;
    SeriesValue out;
    out.terms = K + 1;
    for (std::size_t k = 0; k <= K; ++k) {
        out.value += bk * ux * uy;
        const double nx = sx * ux - ux_prev;
        const double ny = sy * uy - uy_prev;
        ux_prev = ux;
        ux = nx;
        uy_prev = uy;
        uy = ny;
        bk *= geom.beta;
    }
    const double scale = std::sqrt(geom.gamma_l * geom.gamma_p);
    out.value *= scale;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - x * x / (4.0 * geom.gamma_l)));
    const double sin_w = std::sqrt(std::max(0.0, 1.0 - y * y / (4.0 * geom.gamma_p)));
    out.tail = geom.beta < 1.0 ? scale * std::pow(geom.beta, static_cast<double>(K + 2)) /
                                     ((1.0 - geom.beta) * sin_t * sin_w)
                               : std::numeric_limits<double>::infinity();
    return out;
}

/// Kernel of the bilinear form; the series diverges pointwise at beta = 1.
inline SeriesValue kernel_F(double x, double y, const OverlapGeometry& geom, std::size_t K = 0) {
    if (geom.beta >= 1.0) throw std::invalid_argument("kernel_F: beta = 1 is rejected (pointwise divergence)");
    if (K == 0) K = detail::kernel_default_K(geom.beta);
    return kernel_F_truncated(x, y, geom, K);
}

/// <f, g>_lr as a double integral against the truncated kernel:
/// (4/pi^2) iint f g F sin^2(theta) sin^2(omega) d theta d omega on a midpoint grid.
inline double bilinear_form_quadrature(const TestFunction& f, const TestFunction& g, const OverlapGeometry& geom,
                                       std::size_t K = 64, std::size_t nodes = 256) {
    const auto theta = detail::theta_nodes(nodes);
    const auto n = static_cast<Eigen::Index>(nodes);
    const double rl = 2.0 * std::sqrt(geom.gamma_l);
    const double rp = 2.0 * std::sqrt(geom.gamma_p);
    // Kernel on the grid: F(i, j) = F_lr(x_i, y_j).
    Eigen::MatrixXd u(n, static_cast<Eigen::Index>(K + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t k = 0; k <= K; ++k) u(i, static_cast<Eigen::Index>(k)) = detail::u_at_angle(k, theta[i]);
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(K + 1));
    double bk = geom.beta;
    for (std::size_t k = 0; k <= K; ++k) {
        w(static_cast<Eigen::Index>(k)) = std::sqrt(geom.gamma_l * geom.gamma_p) * bk;
        bk *= geom.beta;
    }
    const Eigen::MatrixXd F = u * w.asDiagonal() * u.transpose();
    Eigen::VectorXd a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s2 = std::sin(theta[i]) * std::sin(theta[i]);
        a(i) = f(rl * std::cos(theta[i])) * s2;
        b(i) = g(rp * std::cos(theta[i])) * s2;
    }
    const double h = std::numbers::pi / static_cast<double>(nodes);
    return 4.0 / (std::numbers::pi * std::numbers::pi) * h * h * a.dot(F * b);
}

// ---------------------------------------------------------------------------
// Gaussian free field kernel and the contour form.

/// (1 / 2 pi) ln |(g_lp - z w) / (g_lp - z conj(w))| for z, w in the closed upper half plane.
inline double gff_log_kernel(std::complex<double> z, std::complex<double> w, double gamma_lp) {
    if (z.imag() < 0.0 || w.imag() < 0.0) throw std::domain_error("gff_log_kernel: z and w must satisfy Im >= 0");
    if (gamma_lp == 0.0) return 0.0;
    const std::complex<double> num = gamma_lp - z * w;
    const std::complex<double> den = gamma_lp - z * std::conj(w);
    if (std::abs(den) == 0.0 || std::abs(num) == 0.0) {
        throw std::domain_error("gff_log_kernel: logarithmic singularity (z conj(w) = gamma_lp)");
    }
    return std::log(std::abs(num) / std::abs(den)) / (2.0 * std::numbers::pi);
}

/// S(theta, omega) = (1/2) ln(|1 - beta e^{i(theta+omega)}| / |1 - beta e^{i(theta-omega)}|).
inline double log_kernel_angles(double theta, double omega, double beta) {
    const double plus = 1.0 - 2.0 * beta * std::cos(theta + omega) + beta * beta;
    const double minus = 1.0 - 2.0 * beta * std::cos(theta - omega) + beta * beta;
    if (minus == 0.0) throw std::domain_error("log_kernel_angles: singular at beta = 1, theta = omega");
    return 0.25 * std::log(plus / minus);
}

/// sum_{k=1}^{K} beta^k / k sin(k theta) sin(k omega).
inline double log_kernel_series(double theta, double omega, double beta, std::size_t K) {
    double sum = 0.0;
    double bk = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
        bk *= beta;
        const double kk = static_cast<double>(k);
        sum += bk / kk * std::sin(kk * theta) * std::sin(kk * omega);
    }
    return sum;
}

/// S on an N x N midpoint grid, precomputed once per beta.
class ContourKernelGrid {
public:
    ContourKernelGrid(double beta, std::size_t nodes) : beta_(beta), theta_(detail::theta_nodes(nodes)) {
        if (beta >= 1.0) throw std::invalid_argument("cov_contour: beta = 1 is rejected (log singularity)");
        if (beta < 0.0) throw std::invalid_argument("cov_contour: beta must be >= 0");
        const auto n = static_cast<Eigen::Index>(nodes);
        s_.resize(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i <= j; ++i) {
                const double v = log_kernel_angles(theta_[i], theta_[j], beta);
                s_(i, j) = v;
                s_(j, i) = v;
            }
        }
    }

    double beta() const { return beta_; }
    std::size_t nodes() const { return theta_.size(); }
    const std::vector<double>& theta() const { return theta_; }

    /// (2/pi^2) iint phi_l'(2 sqrt(g_l) cos t) phi_p'(2 sqrt(g_p) cos w) S
    ///          (2 sqrt(g_l) sin t)(2 sqrt(g_p) sin w) dt dw.
    double contract(const TestFunction& phi_l, const TestFunction& phi_p, double gamma_l, double gamma_p) const {
        const auto n = static_cast<Eigen::Index>(theta_.size());
        const double rl = 2.0 * std::sqrt(gamma_l);
        const double rp = 2.0 * std::sqrt(gamma_p);
        Eigen::VectorXd a(n), b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i) = phi_l.derivative(rl * std::cos(theta_[i])) * rl * std::sin(theta_[i]);
            b(i) = phi_p.derivative(rp * std::cos(theta_[i])) * rp * std::sin(theta_[i]);
        }
        const double h = std::numbers::pi / static_cast<double>(n);
        return 2.0 / (std::numbers::pi * std::numbers::pi) * h * h * a.dot(s_ * b);
    }

private:
    double beta_;
    std::vector<double> theta_;
    Eigen::MatrixXd s_;
};

struct ContourValue {
    double value = 0.0;
    /// |I_N - I_{N/2}|.
    double achieved_tol = 0.0;
};

/// Contour form of the GFF part of the covariance (no sigma^2 or kappa4 terms).
inline ContourValue cov_contour(const TestFunction& phi_l, const TestFunction& phi_p, const OverlapGeometry& geom,
                                std::size_t nodes = 1024) {
    if (nodes < 4) throw std::invalid_argument("cov_contour: grid too small");
    const ContourKernelGrid fine(geom.beta, nodes);
    const ContourKernelGrid coarse(geom.beta, nodes / 2);
    ContourValue out;
    out.value = fine.contract(phi_l, phi_p, geom.gamma_l, geom.gamma_p);
    out.achieved_tol = std::abs(out.value - coarse.contract(phi_l, phi_p, geom.gamma_l, geom.gamma_p));
    return out;
}

}  // namespace lss
