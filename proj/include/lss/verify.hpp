#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <complex>
#include <string>
#include <vector>

#include "lss/chebyshev.hpp"
#include "lss/decoupling.hpp"
#include "lss/freeprob.hpp"
#include "lss/rng.hpp"
#include "lss/theory.hpp"

namespace lss {

struct VerifyOptions {
    /// Largest polynomial degree exercised by the degree-indexed families.
    std::size_t max_degree = 10;
    /// Negate the reference values of the diagonalization and dual-path
    /// families; the suite must then fail (harness self-test).
    bool sign_flip_mutant = false;
    std::size_t decoupling_samples = 1'000'000;
    std::uint64_t seed = 20240601;
};

struct FamilyResult {
    std::string name;
    std::size_t checks = 0;
    std::size_t failures = 0;
    /// Largest residual, in the units named by `metric`.
    double worst = 0.0;
    std::string metric;
    std::string detail;

    bool passed() const { return failures == 0 && checks > 0; }

    void record(double residual, bool ok, const std::string& where = {}) {
        ++checks;
        worst = std::max(worst, residual);
        if (!ok) {
            if (failures == 0) detail = where;
            ++failures;
        }
    }
};

struct VerifyReport {
    std::vector<FamilyResult> families;
    bool passed() const {
        return std::all_of(families.begin(), families.end(), [](const auto& f) { return f.passed(); });
    }
};

/// Random rational geometry 0 < gamma_lr <= min(gamma_l, gamma_r) <= 1.
template <class URBG>
RationalGeometry random_rational_geometry(URBG& rng) {
    std::uniform_int_distribution<int> den(2, 12);
    auto frac = [&](void) {
        const int b = den(rng);
        std::uniform_int_distribution<int> num(1, b);
        return Rational(num(rng), b);
    };
    RationalGeometry g;
    g.gamma_l = frac();
    g.gamma_r = frac();
    g.gamma_lr = std::min(g.gamma_l, g.gamma_r) * frac();
    return g;
}

namespace detail {

inline std::string pair_tag(std::size_t k, std::size_t q) {
    return "(" + std::to_string(k) + "," + std::to_string(q) + ")";
}

}  // namespace detail

inline FamilyResult verify_dyck_counts(std::size_t max_total) {
    FamilyResult r{"dyck_count_closed_form_vs_enumeration", 0, 0, 0.0, "count mismatch", {}};
    for (std::size_t total = 0; total <= max_total; total += 2) {
        std::vector<BigInt> by_height(total + 1);
        const auto paths = enumerate_dyck(total / 2);
        for (std::size_t k = 0; k <= total; ++k) {
            std::vector<long long> hist(total + 1, 0);
            for (const auto& p : paths) ++hist[static_cast<std::size_t>(p.heights[k])];
            for (std::size_t j = k % 2; j <= total; j += 2) {
                const BigInt c = dyck_count_at_height(static_cast<long long>(k), static_cast<long long>(total - k),
                                                      static_cast<long long>(j));
                const bool ok = c == hist[j];
                r.record(ok ? 0.0 : 1.0, ok, "k=" + std::to_string(k) + " q=" + std::to_string(total - k));
            }
        }
    }
    return r;
}

inline FamilyResult verify_catalan_bijection(std::size_t max_m) {
    FamilyResult r{"ncp_dyck_catalan_bijection", 0, 0, 0.0, "count mismatch", {}};
    for (std::size_t m = 0; m <= max_m; ++m) {
        const auto ncps = enumerate_ncp(m);
        bool ok = BigInt(ncps.size()) == catalan_exact(m) && BigInt(enumerate_dyck(m).size()) == catalan_exact(m);
        for (const auto& p : ncps) {
            if (!is_noncrossing_perfect(p, 2 * m) || dyck_to_ncp(ncp_to_dyck(p)).pairs != p.pairs) ok = false;
        }
        r.record(ok ? 0.0 : 1.0, ok, "m=" + std::to_string(m));
    }
    return r;
}

inline FamilyResult verify_monomial_oracle(std::size_t max_total, std::size_t geometries, std::uint64_t seed) {
    FamilyResult r{"moment_monomial_vs_partitions", 0, 0, 0.0, "exact mismatch", {}};
    auto rng = replica_engine(seed, 1);
    for (std::size_t g = 0; g < geometries; ++g) {
        const auto geom = random_rational_geometry(rng);
        for (std::size_t k = 0; k <= max_total; ++k) {
            for (std::size_t q = 0; k + q <= max_total; ++q) {
                const auto kk = static_cast<long long>(k), qq = static_cast<long long>(q);
                const bool ok = moment_monomial(kk, qq, geom) == moment_via_partitions(kk, qq, geom);
                r.record(ok ? 0.0 : 1.0, ok, detail::pair_tag(k, q));
            }
        }
    }
    return r;
}

inline FamilyResult verify_kreweras(std::size_t max_total, std::uint64_t seed) {
    FamilyResult r{"edge_count_vs_kreweras_complement", 0, 0, 0.0, "exact mismatch", {}};
    auto rng = replica_engine(seed, 2);
    for (std::size_t g = 0; g < 3; ++g) {
        const auto geom = random_rational_geometry(rng);
        for (std::size_t k = 0; k <= max_total; ++k) {
            for (std::size_t q = 0; k + q <= max_total; ++q) {
                const auto kk = static_cast<long long>(k), qq = static_cast<long long>(q);
                const bool ok = moment_via_kreweras(kk, qq, geom) == moment_via_partitions(kk, qq, geom);
                r.record(ok ? 0.0 : 1.0, ok, detail::pair_tag(k, q));
            }
        }
    }
    return r;
}

inline FamilyResult verify_h_identities(std::size_t max_q) {
    FamilyResult r{"hypergeometric_chu_vandermonde", 0, 0, 0.0, "exact mismatch", {}};
    for (int which = 1; which <= 2; ++which) {
        for (std::size_t q = 0; q <= max_q; ++q) {
            for (std::size_t j = 0; j <= q; ++j) {
                const auto h = hyp_H(which, static_cast<long long>(q), static_cast<long long>(j));
                const Rational expect = j < q ? Rational(0) : Rational(1, 2 * static_cast<long long>(q) + which);
                const bool ok = h.alternating_sum == h.closed_form && h.closed_form == expect;
                r.record(ok ? 0.0 : 1.0, ok, "H" + std::to_string(which) + detail::pair_tag(q, j));
            }
        }
    }
    return r;
}

inline FamilyResult verify_diagonalization_exact(std::size_t max_k, std::uint64_t seed, bool mutant) {
    FamilyResult r{"diagonalization_rational", 0, 0, 0.0, "exact mismatch", {}};
    auto rng = replica_engine(seed, 3);
    for (std::size_t g = 0; g < 3; ++g) {
        const auto geom = random_rational_geometry(rng);
        for (std::size_t k = 0; k <= max_k; ++k) {
            const auto uk = u_polynomial_scaled(k, geom.gamma_l);
            for (std::size_t q = 0; q <= max_k; ++q) {
                const auto value = moment_polynomial(uk, u_polynomial_scaled(q, geom.gamma_r), geom);
                Rational expect = scaled_u_pairing(k, q, geom);
                if (mutant) expect = -expect;
                const bool ok = value == expect;
                r.record(ok ? 0.0 : 1.0, ok, detail::pair_tag(k, q));
            }
        }
    }
    return r;
}

inline FamilyResult verify_diagonalization_quadrature(std::size_t max_k, bool mutant) {
    FamilyResult r{"diagonalization_quadrature", 0, 0, 0.0, "abs error (tol 1e-9)", {}};
    for (double beta : {0.0, 0.25, 0.5, 1.0}) {
        const auto geom = beta == 1.0 ? OverlapGeometry::from_densities(0.6, 0.6, 0.6)
                                      : OverlapGeometry::from_densities(0.5, 0.8, beta * std::sqrt(0.4));
        for (std::size_t k = 0; k <= max_k; ++k) {
            const auto uk = u_polynomial(k, geom.gamma_l);
            for (std::size_t q = 0; q <= max_k; ++q) {
                const double value = bilinear_form_quadrature(uk, u_polynomial(q, geom.gamma_p), geom);
                double expect = cheb_U_pairing(k, q, geom);
                if (mutant) expect = -expect;
                const double err = std::abs(value - expect);
                r.record(err, err <= 1e-9, "beta=" + std::to_string(beta) + " " + detail::pair_tag(k, q));
            }
        }
    }
    return r;
}

inline FamilyResult verify_dual_path(std::size_t max_degree, std::size_t grid, bool mutant) {
    FamilyResult r{"contour_vs_series_gff", 0, 0, 0.0, "|contour - series| / (1 + |series|) (tol 1e-6)", {}};
    const std::size_t deg = std::min<std::size_t>(6, std::max<std::size_t>(1, max_degree));
    std::vector<TestFunction> phis;
    for (std::size_t p = 1; p <= deg; ++p) phis.push_back(functions::monomial(p));
    phis.push_back(TestFunction::polynomial({0.5, -1.0, 0.25, 0.75}));
    for (double beta : {0.0, 0.25, 0.5, 0.9}) {
        const auto geom = OverlapGeometry::from_densities(0.6, 0.5, beta * std::sqrt(0.3));
        const ContourKernelGrid kernel(geom.beta, grid);
        for (std::size_t a = 0; a < phis.size(); ++a) {
            for (std::size_t b = 0; b < phis.size(); ++b) {
                const double contour = kernel.contract(phis[a], phis[b], geom.gamma_l, geom.gamma_p);
                double series = cov_gaussian_series(phis[a], phis[b], geom, 2.0).gff_part;
                if (mutant) series = -series;
                const double rel = std::abs(contour - series) / (1.0 + std::abs(series));
                r.record(rel, rel <= 1e-6, "beta=" + std::to_string(beta) + " " + phis[a].label() + "," +
                                               phis[b].label());
            }
        }
    }
    return r;
}

inline FamilyResult verify_log_kernel() {
    FamilyResult r{"log_kernel_closed_form_vs_series", 0, 0, 0.0, "abs error (tol 1e-10)", {}};
    constexpr std::size_t grid = 50;
    for (double beta : {0.0, 0.1, 0.5, 0.9}) {
        const double gl = 0.7, gp = 0.45;
        const double glp = beta * std::sqrt(gl * gp);
        for (std::size_t i = 0; i < grid; ++i) {
            const double th = std::numbers::pi * (static_cast<double>(i) + 0.5) / grid;
            for (std::size_t j = 0; j < grid; ++j) {
                const double om = std::numbers::pi * (static_cast<double>(j) + 0.5) / grid;
                const double series = log_kernel_series(th, om, beta, 4000);
                const double closed = log_kernel_angles(th, om, beta);
                const std::complex<double> z = std::polar(std::sqrt(gl), th);
                const std::complex<double> w = std::polar(std::sqrt(gp), om);
                const double complex_form = std::numbers::pi * gff_log_kernel(z, w, glp);
                const double err = std::max(std::abs(series - closed), std::abs(complex_form - closed));
                r.record(err, err <= 1e-10 && closed >= -1e-15, "beta=" + std::to_string(beta));
            }
        }
    }
    return r;
}

inline FamilyResult verify_sigma_forms() {
    FamilyResult r{"sigma_term_two_forms", 0, 0, 0.0, "abs error (tol 1e-10)", {}};
    const std::vector<TestFunction> phis = {functions::monomial(1), functions::monomial(3),
                                            TestFunction::polynomial({1.0, 2.0, -1.0, 0.5}),
                                            functions::cos_t(1.3), functions::gauss_bump()};
    for (double sigma : {0.0, 1.0, 2.0, 3.5}) {
        const auto geom = OverlapGeometry::from_densities(0.5, 0.75, 0.3);
        for (const auto& a : phis) {
            for (const auto& b : phis) {
                const double series = cov_gaussian_series(a, b, geom, sigma).sigma_part;
                const double integral = sigma_part_via_integrals(a, b, geom, sigma);
                const double err = std::abs(series - integral);
                r.record(err, err <= 1e-10, a.label() + "," + b.label());
            }
        }
    }
    return r;
}

inline FamilyResult verify_decoupling(std::size_t samples, std::uint64_t seed) {
    FamilyResult r{"decoupling_formula", 0, 0, 0.0, "|residual| / envelope; gaussian |z| / 5", {}};
    const auto rad = decoupling_check(make_entry_law(LawKind::rademacher, 1.0), DerivativeFamily::sin(), 3, samples,
                                      seed);
    r.record(std::abs(rad.residual) / rad.envelope, rad.within_envelope, "rademacher sin p=3");
    const auto gauss = gaussian_decoupling_check(samples, seed + 1);
    const double z = std::max({std::abs(gauss.z_difference()), std::abs(gauss.z_lhs()), std::abs(gauss.z_rhs())});
    r.record(z / 5.0, z <= 5.0, "gaussian E[xi sin xi] = E[cos xi]");
    return r;
}

inline VerifyReport run_verify_suite(const VerifyOptions& opt = {}) {
    const std::size_t k = std::max<std::size_t>(1, opt.max_degree);
    VerifyReport rep;
    rep.families.push_back(verify_dyck_counts(std::min<std::size_t>(16, 2 * k)));
    rep.families.push_back(verify_catalan_bijection(std::min<std::size_t>(10, k)));
    rep.families.push_back(verify_monomial_oracle(std::min<std::size_t>(14, 2 * k), 20, opt.seed));
    rep.families.push_back(verify_kreweras(std::min<std::size_t>(12, 2 * k), opt.seed));
    rep.families.push_back(verify_h_identities(30));
    rep.families.push_back(verify_diagonalization_exact(k, opt.seed, opt.sign_flip_mutant));
    rep.families.push_back(verify_diagonalization_quadrature(std::min<std::size_t>(12, k), opt.sign_flip_mutant));
    rep.families.push_back(verify_dual_path(k, 1024, opt.sign_flip_mutant));
    rep.families.push_back(verify_log_kernel());
    rep.families.push_back(verify_sigma_forms());
    rep.families.push_back(verify_decoupling(opt.decoupling_samples, opt.seed));
    return rep;
}

}  // namespace lss
