#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lss/entry_law.hpp"
#include "lss/rng.hpp"
#include "lss/test_function.hpp"

namespace lss {

/// A function with derivatives of every order, for the cumulant expansion
/// E[xi f(xi)] = sum_{l<=p} kappa_{l+1}/l! E[f^(l)(xi)] + eps_p.
class DerivativeFamily {
public:
    static DerivativeFamily sin() { return DerivativeFamily(Kind::sin, {}, "sin"); }
    static DerivativeFamily cos() { return DerivativeFamily(Kind::cos, {}, "cos"); }
    static DerivativeFamily polynomial(std::vector<double> coefficients) {
        return DerivativeFamily(Kind::poly, Polynomial(std::move(coefficients)), "poly");
    }

    /// f^(order)(x).
    double operator()(std::size_t order, double x) const {
        switch (kind_) {
            case Kind::sin: return std::sin(x + static_cast<double>(order) * std::numbers::pi / 2.0);
            case Kind::cos: return std::cos(x + static_cast<double>(order) * std::numbers::pi / 2.0);
            case Kind::poly: {
                Polynomial p = poly_;
                for (std::size_t i = 0; i < order; ++i) p = p.derivative();
                return p(x);
            }
        }
        return 0.0;
    }

    /// sup_{|x| <= radius} |f^(order)(x)|; radius may be infinite.
    double sup_abs(std::size_t order, double radius) const {
        if (kind_ != Kind::poly) return 1.0;
        Polynomial p = poly_;
        for (std::size_t i = 0; i < order; ++i) p = p.derivative();
        if (p.degree() == 0) return std::abs(p(0.0));
        if (!std::isfinite(radius)) return std::numeric_limits<double>::infinity();
        double bound = 0.0;
        const auto& c = p.coefficients();
        for (std::size_t i = 0; i < c.size(); ++i) bound += std::abs(c[i]) * std::pow(radius, static_cast<double>(i));
        return bound;
    }

    const std::string& label() const { return label_; }

private:
    enum class Kind { sin, cos, poly };
    DerivativeFamily(Kind kind, Polynomial poly, std::string label)
        : kind_(kind), poly_(std::move(poly)), label_(std::move(label)) {}

    Kind kind_;
    Polynomial poly_;
    std::string label_;
};

struct DecouplingReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    /// MC standard error of the paired difference lhs - rhs.
    double combined_stderr = 0.0;
    /// C_p E|xi|^{p+2} sup |f^(p+1)|.
    double remainder_bound = 0.0;
    /// remainder_bound + 6 combined_stderr.
    double envelope = 0.0;
    bool within_envelope = false;
    /// False when 6 stderr exceeds the analytic bound (sample too small to resolve it).
    bool resolved = false;
    std::size_t samples = 0;
};

/// C_p = (1 + (3 + 2p)^{p+2}) / (p+1)!.
inline double decoupling_constant(std::size_t p) {
    double fact = 1.0;
    for (std::size_t i = 2; i <= p + 1; ++i) fact *= static_cast<double>(i);
    return (1.0 + std::pow(3.0 + 2.0 * static_cast<double>(p), static_cast<double>(p + 2))) / fact;
}

inline double support_radius(const EntryLaw& law) {
    switch (law.kind) {
        case LawKind::gaussian: return std::numeric_limits<double>::infinity();
        case LawKind::rademacher: return 1.0;
        case LawKind::uniform: return std::sqrt(3.0);
        case LawKind::two_point: {
            const auto [hi, lo] = law.two_point_atoms();
            return std::max(std::abs(hi), std::abs(lo));
        }
    }
    return std::numeric_limits<double>::infinity();
}

inline DecouplingReport decoupling_check(const EntryLaw& law, const DerivativeFamily& f, std::size_t p,
                                         std::size_t sample_count, std::uint64_t seed) {
    if (sample_count < 2) throw std::invalid_argument("decoupling_check: need at least two samples");
    std::vector<double> kappa(p + 2, 0.0);
    for (std::size_t l = 0; l <= p; ++l) kappa[l + 1] = law.cumulant(static_cast<int>(l + 1));
    std::vector<double> inv_fact(p + 1, 1.0);
    for (std::size_t l = 1; l <= p; ++l) inv_fact[l] = inv_fact[l - 1] / static_cast<double>(l);

    auto rng = replica_engine(seed, 0);
    UnitSampler draw(law);
    double sum_l = 0.0, sum_r = 0.0, sum_d = 0.0, sum_d2 = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const double xi = draw(rng);
        const double lhs = xi * f(0, xi);
        double rhs = 0.0;
        for (std::size_t l = 0; l <= p; ++l) rhs += kappa[l + 1] * inv_fact[l] * f(l, xi);
        const double diff = lhs - rhs;
        sum_l += lhs;
        sum_r += rhs;
        sum_d += diff;
        sum_d2 += diff * diff;
    }
    const double n = static_cast<double>(sample_count);
    DecouplingReport out;
    out.samples = sample_count;
    out.lhs = sum_l / n;
    out.rhs = sum_r / n;
    out.residual = sum_d / n;
    const double var = std::max(0.0, (sum_d2 - n * out.residual * out.residual) / (n - 1.0));
    out.combined_stderr = std::sqrt(var / n);
    out.remainder_bound = decoupling_constant(p) * law.abs_moment(static_cast<double>(p + 2)) *
                          f.sup_abs(p + 1, support_radius(law));
    out.envelope = out.remainder_bound + 6.0 * out.combined_stderr;
    out.within_envelope = std::abs(out.residual) <= out.envelope;
    out.resolved = 6.0 * out.combined_stderr < out.remainder_bound;
    return out;
}

/// Gaussian identity E[xi f(xi)] = E[xi^2] E[f'(xi)] for f = sin:
/// both sides equal exp(-1/2).
struct GaussianDecouplingReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double lhs_stderr = 0.0;
    double rhs_stderr = 0.0;
    /// Standard error of the paired difference.
    double diff_stderr = 0.0;
    double exact = std::exp(-0.5);
    std::size_t samples = 0;

    double z_difference() const { return diff_stderr > 0.0 ? (lhs - rhs) / diff_stderr : 0.0; }
    double z_lhs() const { return (lhs - exact) / lhs_stderr; }
    double z_rhs() const { return (rhs - exact) / rhs_stderr; }
};

inline GaussianDecouplingReport gaussian_decoupling_check(std::size_t sample_count, std::uint64_t seed) {
    if (sample_count < 2) throw std::invalid_argument("gaussian_decoupling_check: need at least two samples");
    auto rng = replica_engine(seed, 0);
    UnitSampler draw(make_entry_law(LawKind::gaussian, 1.0));
    double sl = 0.0, sl2 = 0.0, sr = 0.0, sr2 = 0.0, sd = 0.0, sd2 = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const double xi = draw(rng);
        const double l = xi * std::sin(xi);
        const double r = std::cos(xi);
        sl += l;
        sl2 += l * l;
        sr += r;
        sr2 += r * r;
        sd += l - r;
        sd2 += (l - r) * (l - r);
    }
    const double n = static_cast<double>(sample_count);
    auto se = [n](double s, double s2) { return std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)) / n); };
    GaussianDecouplingReport out;
    out.samples = sample_count;
    out.lhs = sl / n;
    out.rhs = sr / n;
    out.lhs_stderr = se(sl, sl2);
    out.rhs_stderr = se(sr, sr2);
    out.diff_stderr = se(sd, sd2);
    return out;
}

}  // namespace lss
