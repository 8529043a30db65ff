#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace lss {

enum class LawKind { gaussian, rademacher, uniform, two_point };

inline std::string_view to_string(LawKind kind) {
    switch (kind) {
        case LawKind::gaussian: return "gaussian";
        case LawKind::rademacher: return "rademacher";
        case LawKind::uniform: return "uniform";
        case LawKind::two_point: return "two_point";
    }
    return "unknown";
}

inline LawKind parse_law_kind(std::string_view name) {
    if (name == "gaussian") return LawKind::gaussian;
    if (name == "rademacher") return LawKind::rademacher;
    if (name == "uniform") return LawKind::uniform;
    if (name == "two_point") return LawKind::two_point;
    throw std::invalid_argument("unknown entry law kind '" + std::string(name) + "'");
}

/// Entry distribution of an unnormalized Wigner matrix W.
///
/// Off-diagonal entries follow a fixed zero-mean, unit-variance base law.
/// Diagonal entries follow the same base law rescaled to variance
/// `sigma_sq_diag`. All moment metadata refers to the off-diagonal law.
struct EntryLaw {
    LawKind kind = LawKind::gaussian;
    double sigma_sq_diag = 2.0;
    /// Probability of the positive atom for `two_point`; 0.5 otherwise.
    double p = 0.5;
    double kappa3 = 0.0;
    double mu4 = 3.0;
    double kappa4 = 0.0;
    double mu6 = 15.0;

    /// E[xi^r] of the off-diagonal (unit variance) law.
    double raw_moment(int r) const {
        if (r < 0) throw std::invalid_argument("raw_moment: negative order");
        if (r == 0) return 1.0;
        switch (kind) {
            case LawKind::gaussian: {
                if (r % 2 == 1) return 0.0;
                double m = 1.0;
                for (int k = r - 1; k > 0; k -= 2) m *= k;
                return m;
            }
            case LawKind::rademacher:
                return r % 2 == 0 ? 1.0 : 0.0;
            case LawKind::uniform:
                return r % 2 == 0 ? std::pow(std::sqrt(3.0), r) / (r + 1) : 0.0;
            case LawKind::two_point: {
                const auto [hi, lo] = two_point_atoms();
                return p * std::pow(hi, r) + (1.0 - p) * std::pow(lo, r);
            }
        }
        return 0.0;
    }

    /// E|xi|^r of the off-diagonal law (real r >= 0).
    double abs_moment(double r) const {
        switch (kind) {
            case LawKind::gaussian:
                return std::pow(2.0, r / 2) * std::tgamma((r + 1) / 2) / std::sqrt(std::numbers::pi);
            case LawKind::rademacher:
                return 1.0;
            case LawKind::uniform:
                return std::pow(std::sqrt(3.0), r) / (r + 1);
            case LawKind::two_point: {
                const auto [hi, lo] = two_point_atoms();
                return p * std::pow(std::abs(hi), r) + (1.0 - p) * std::pow(std::abs(lo), r);
            }
        }
        return 0.0;
    }

    /// kappa_r of the off-diagonal law, from moments via the standard recursion
    /// kappa_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k m_{n-k}.
    double cumulant(int r) const {
        if (r < 1) throw std::invalid_argument("cumulant: order must be >= 1");
        std::vector<double> kappa(static_cast<std::size_t>(r) + 1, 0.0);
        for (int order = 1; order <= r; ++order) {
            double value = raw_moment(order);
            double binom = 1.0;  // C(order-1, k-1)
            for (int k = 1; k < order; ++k) {
                value -= binom * kappa[k] * raw_moment(order - k);
                binom = binom * (order - 1 - (k - 1)) / k;
            }
            kappa[order] = value;
        }
        return kappa[r];
    }

    /// (positive atom, negative atom) of the two-point law with unit variance.
    std::pair<double, double> two_point_atoms() const {
        return {std::sqrt((1.0 - p) / p), -std::sqrt(p / (1.0 - p))};
    }
};

/// Stateful draw of unit-variance values from a law. Holds the distribution
/// objects so cached variates (e.g. the polar method's spare) are reused.
class UnitSampler {
public:
    explicit UnitSampler(const EntryLaw& law)
        : kind_(law.kind), p_(law.p), uniform_(-std::sqrt(3.0), std::sqrt(3.0)) {
        if (kind_ == LawKind::two_point) std::tie(hi_, lo_) = law.two_point_atoms();
    }

    template <class URBG>
    double operator()(URBG& rng) {
        switch (kind_) {
            case LawKind::gaussian: return normal_(rng);
            case LawKind::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
            case LawKind::uniform: return uniform_(rng);
            case LawKind::two_point: return unit_(rng) < p_ ? hi_ : lo_;
        }
        return 0.0;
    }

private:
    LawKind kind_;
    double p_;
    double hi_ = 0.0;
    double lo_ = 0.0;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// Build an entry law with exact cumulant metadata.
inline EntryLaw make_entry_law(LawKind kind, double sigma_sq_diag, double two_point_p = 0.5) {
    if (!(sigma_sq_diag >= 0.0) || !std::isfinite(sigma_sq_diag)) {
        throw std::invalid_argument("make_entry_law: sigma_sq_diag must be finite and >= 0");
    }
    EntryLaw law;
    law.kind = kind;
    law.sigma_sq_diag = sigma_sq_diag;
    switch (kind) {
        case LawKind::gaussian:
            law.kappa3 = 0.0;
            law.mu4 = 3.0;
            law.mu6 = 15.0;
            break;
        case LawKind::rademacher:
            law.kappa3 = 0.0;
            law.mu4 = 1.0;
            law.mu6 = 1.0;
            break;
        case LawKind::uniform:
            // Uniform on [-sqrt3, sqrt3]: E x^4 = 9/5, E x^6 = 27/7.
            law.kappa3 = 0.0;
            law.mu4 = 9.0 / 5.0;
            law.mu6 = 27.0 / 7.0;
            break;
        case LawKind::two_point: {
            if (!(two_point_p > 0.0 && two_point_p < 1.0)) {
                throw std::invalid_argument(
                    "make_entry_law: two_point probability must lie in (0, 1) for unit variance");
            }
            law.p = two_point_p;
            const double q = 1.0 - two_point_p;
            law.kappa3 = (q - two_point_p) / std::sqrt(two_point_p * q);
            law.mu4 = q * q / two_point_p + two_point_p * two_point_p / q;
            law.mu6 = law.raw_moment(6);
            break;
        }
    }
    law.kappa4 = law.mu4 - 3.0;
    return law;
}

inline EntryLaw make_entry_law(std::string_view kind, double sigma_sq_diag, double two_point_p = 0.5) {
    return make_entry_law(parse_law_kind(kind), sigma_sq_diag, two_point_p);
}

}  // namespace lss
