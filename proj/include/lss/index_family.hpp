#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lss {

// Index set specifications. Realized sets are 0-based subsets of {0, ..., n-1}.

/// {0, ..., floor(gamma n) - 1}.
struct PrefixSpec {
    double gamma = 1.0;
};

/// {i : floor(a n) <= i < floor(b n)}.
struct WindowSpec {
    double a = 0.0;
    double b = 1.0;
};

/// {i : i mod modulus is in residues}.
struct StrideSpec {
    std::size_t modulus = 1;
    std::vector<std::size_t> residues{0};
};

/// A literal index list; indices >= n are dropped at realization. Its density
/// is the realized fraction at the requested n (there is no limit to take).
struct ExplicitSpec {
    std::vector<std::size_t> indices;
};

using IndexSetSpec = std::variant<PrefixSpec, WindowSpec, StrideSpec, ExplicitSpec>;

inline std::string describe(const IndexSetSpec& spec) {
    std::ostringstream os;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PrefixSpec>) {
                os << "prefix(" << s.gamma << ")";
            } else if constexpr (std::is_same_v<T, WindowSpec>) {
                os << "window(" << s.a << "," << s.b << ")";
            } else if constexpr (std::is_same_v<T, StrideSpec>) {
                os << "stride(" << s.modulus << ";";
                for (std::size_t i = 0; i < s.residues.size(); ++i) os << (i ? " " : "") << s.residues[i];
                os << ")";
            } else {
                os << "explicit(" << s.indices.size() << " indices)";
            }
        },
        spec);
    return os.str();
}

namespace detail {

struct Interval {
    double a;
    double b;
};

inline std::optional<Interval> as_interval(const IndexSetSpec& spec) {
    if (const auto* p = std::get_if<PrefixSpec>(&spec)) return Interval{0.0, p->gamma};
    if (const auto* w = std::get_if<WindowSpec>(&spec)) return Interval{w->a, w->b};
    return std::nullopt;
}

inline void validate_spec(const IndexSetSpec& spec) {
    if (const auto* p = std::get_if<PrefixSpec>(&spec)) {
        if (!(p->gamma > 0.0 && p->gamma <= 1.0)) throw std::invalid_argument("prefix: gamma must lie in (0, 1]");
    } else if (const auto* w = std::get_if<WindowSpec>(&spec)) {
        if (!(w->a >= 0.0 && w->a < w->b && w->b <= 1.0)) {
            throw std::invalid_argument("window: need 0 <= a < b <= 1");
        }
    } else if (const auto* s = std::get_if<StrideSpec>(&spec)) {
        if (s->modulus == 0) throw std::invalid_argument("stride: modulus must be positive");
        if (s->residues.empty()) throw std::invalid_argument("stride: residue set is empty");
        for (auto r : s->residues) {
            if (r >= s->modulus) throw std::invalid_argument("stride: residue out of range");
        }
    }
}

inline std::vector<std::size_t> realize(const IndexSetSpec& spec, std::size_t n) {
    std::vector<std::size_t> out;
    if (auto iv = as_interval(spec)) {
        const auto lo = static_cast<std::size_t>(std::floor(iv->a * static_cast<double>(n)));
        const auto hi = std::min(n, static_cast<std::size_t>(std::floor(iv->b * static_cast<double>(n))));
        for (std::size_t i = lo; i < hi; ++i) out.push_back(i);
    } else if (const auto* s = std::get_if<StrideSpec>(&spec)) {
        std::vector<bool> keep(s->modulus, false);
        for (auto r : s->residues) keep[r] = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (keep[i % s->modulus]) out.push_back(i);
        }
    } else {
        const auto& e = std::get<ExplicitSpec>(spec);
        for (auto i : e.indices) {
            if (i < n) out.push_back(i);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

inline double stride_density(const StrideSpec& s) {
    std::vector<bool> keep(s.modulus, false);
    for (auto r : s.residues) keep[r] = true;
    return static_cast<double>(std::count(keep.begin(), keep.end(), true)) / static_cast<double>(s.modulus);
}

// Period cap for joint stride densities.
inline constexpr std::size_t kMaxStridePeriod = 10'000'000;

inline double stride_pair_density(const StrideSpec& x, const StrideSpec& y) {
    const std::size_t period = std::lcm(x.modulus, y.modulus);
    if (period > kMaxStridePeriod) {
        throw std::invalid_argument("stride pair: joint period lcm(" + std::to_string(x.modulus) + ", " +
                                    std::to_string(y.modulus) + ") too large to compute the joint density");
    }
    std::vector<bool> kx(x.modulus, false), ky(y.modulus, false);
    for (auto r : x.residues) kx[r] = true;
    for (auto r : y.residues) ky[r] = true;
    std::size_t count = 0;
    for (std::size_t i = 0; i < period; ++i) count += (kx[i % x.modulus] && ky[i % y.modulus]) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(period);
}

inline std::size_t intersection_size(const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
    std::size_t count = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

}  // namespace detail

/// Index sets B_l^n realized at order n, with exact sizes and the limiting
/// densities gamma_l = lim n_l / n and gamma_lm = lim n_lm / n.
struct IndexFamilyRealization {
    std::size_t n = 0;
    std::vector<IndexSetSpec> specs;
    std::vector<std::vector<std::size_t>> sets;
    std::vector<std::size_t> n_l;
    std::vector<std::vector<std::size_t>> n_lm;
    std::vector<double> gamma_l;
    std::vector<std::vector<double>> gamma_lm;
    /// canonical[l] is the smallest l' whose realized set equals set l.
    std::vector<std::size_t> canonical;

    std::size_t d() const { return sets.size(); }
};

/// Limiting density of the intersection of two specs (realized sets supply
/// the value when an explicit list is involved).
inline double limiting_pair_density(const IndexSetSpec& x, const IndexSetSpec& y,
                                    const std::vector<std::size_t>& realized_x,
                                    const std::vector<std::size_t>& realized_y, std::size_t n) {
    const bool x_explicit = std::holds_alternative<ExplicitSpec>(x);
    const bool y_explicit = std::holds_alternative<ExplicitSpec>(y);
    if (x_explicit || y_explicit) {
        return static_cast<double>(detail::intersection_size(realized_x, realized_y)) / static_cast<double>(n);
    }
    const auto ix = detail::as_interval(x);
    const auto iy = detail::as_interval(y);
    if (ix && iy) return std::max(0.0, std::min(ix->b, iy->b) - std::max(ix->a, iy->a));
    if (ix) return (ix->b - ix->a) * detail::stride_density(std::get<StrideSpec>(y));
    if (iy) return (iy->b - iy->a) * detail::stride_density(std::get<StrideSpec>(x));
    return detail::stride_pair_density(std::get<StrideSpec>(x), std::get<StrideSpec>(y));
}

inline double limiting_density(const IndexSetSpec& spec, const std::vector<std::size_t>& realized, std::size_t n) {
    if (auto iv = detail::as_interval(spec)) return iv->b - iv->a;
    if (const auto* s = std::get_if<StrideSpec>(&spec)) return detail::stride_density(*s);
    return static_cast<double>(realized.size()) / static_cast<double>(n);
}

inline IndexFamilyRealization realize_index_family(const std::vector<IndexSetSpec>& specs, std::size_t n) {
    if (specs.empty()) throw std::invalid_argument("realize_index_family: empty family");
    if (n == 0) throw std::invalid_argument("realize_index_family: n must be >= 1");
    IndexFamilyRealization out;
    out.n = n;
    out.specs = specs;
    const std::size_t d = specs.size();
    for (std::size_t l = 0; l < d; ++l) {
        detail::validate_spec(specs[l]);
        auto set = detail::realize(specs[l], n);
        if (set.empty()) {
            throw std::invalid_argument("realize_index_family: set " + std::to_string(l) + " (" +
                                        describe(specs[l]) + ") is empty at n = " + std::to_string(n));
        }
        out.n_l.push_back(set.size());
        out.gamma_l.push_back(limiting_density(specs[l], set, n));
        out.sets.push_back(std::move(set));
    }
    out.n_lm.assign(d, std::vector<std::size_t>(d, 0));
    out.gamma_lm.assign(d, std::vector<double>(d, 0.0));
    out.canonical.resize(d);
    for (std::size_t l = 0; l < d; ++l) {
        out.canonical[l] = l;
        for (std::size_t m = 0; m < l; ++m) {
            if (out.sets[m] == out.sets[l]) {
                out.canonical[l] = out.canonical[m];
                break;
            }
        }
        for (std::size_t m = l; m < d; ++m) {
            const auto count = (m == l) ? out.n_l[l] : detail::intersection_size(out.sets[l], out.sets[m]);
            const double g = (m == l) ? out.gamma_l[l]
                                      : limiting_pair_density(specs[l], specs[m], out.sets[l], out.sets[m], n);
            out.n_lm[l][m] = out.n_lm[m][l] = count;
            out.gamma_lm[l][m] = out.gamma_lm[m][l] = g;
        }
    }
    return out;
}

/// The triple (gamma_l, gamma_p, gamma_lp) and beta = gamma_lp / sqrt(gamma_l gamma_p).
struct OverlapGeometry {
    double gamma_l = 1.0;
    double gamma_p = 1.0;
    double gamma_lp = 1.0;
    double beta = 1.0;

    static OverlapGeometry from_densities(double gamma_l, double gamma_p, double gamma_lp) {
        constexpr double slack = 1e-12;
        if (!(gamma_l > 0.0 && gamma_l <= 1.0 + slack) || !(gamma_p > 0.0 && gamma_p <= 1.0 + slack)) {
            throw std::invalid_argument("OverlapGeometry: set densities must lie in (0, 1]");
        }
        if (!(gamma_lp >= 0.0) || gamma_lp > std::min(gamma_l, gamma_p) + slack) {
            throw std::invalid_argument("OverlapGeometry: need 0 <= gamma_lp <= min(gamma_l, gamma_p)");
        }
        OverlapGeometry g;
        g.gamma_l = gamma_l;
        g.gamma_p = gamma_p;
        g.gamma_lp = std::min(gamma_lp, std::min(gamma_l, gamma_p));
        if (g.gamma_lp == gamma_l && g.gamma_lp == gamma_p) {
            g.beta = 1.0;
        } else {
            g.beta = std::min(1.0, g.gamma_lp / std::sqrt(gamma_l * gamma_p));
        }
        return g;
    }

    OverlapGeometry transposed() const { return from_densities(gamma_p, gamma_l, gamma_lp); }
};

inline OverlapGeometry overlap_geometry(const IndexFamilyRealization& family, std::size_t l, std::size_t p) {
    if (l >= family.d() || p >= family.d()) throw std::out_of_range("overlap_geometry: index out of range");
    if (l == p) return OverlapGeometry::from_densities(family.gamma_l[l], family.gamma_l[l], family.gamma_l[l]);
    return OverlapGeometry::from_densities(family.gamma_l[l], family.gamma_l[p], family.gamma_lm[l][p]);
}

}  // namespace lss
