#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lss/index_family.hpp"
#include "lss/test_function.hpp"

namespace lss {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Up (+1) / down (-1) steps; heights[i] is the prefix sum after i steps.
struct DyckPath {
    std::vector<int> steps;
    std::vector<int> heights;

    static DyckPath from_steps(std::vector<int> steps) {
        DyckPath p;
        p.heights.push_back(0);
        for (int s : steps) {
            if (s != 1 && s != -1) throw std::invalid_argument("DyckPath: steps must be +1 or -1");
            p.heights.push_back(p.heights.back() + s);
            if (p.heights.back() < 0) throw std::invalid_argument("DyckPath: path dips below zero");
        }
        if (p.heights.back() != 0) throw std::invalid_argument("DyckPath: path does not return to zero");
        p.steps = std::move(steps);
        return p;
    }
};

/// Perfect non-crossing matching of {0, ..., 2m-1}; pairs are (opener, closer).
struct NCPairPartition {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline constexpr std::size_t kMaxNcpHalfSize = 12;

inline BigInt binomial(long long n, long long r) {
    if (n < 0 || r < 0 || r > n) return 0;
    r = std::min(r, n - r);
    BigInt out = 1;
    for (long long i = 1; i <= r; ++i) {
        out *= (n - r + i);
        out /= i;
    }
    return out;
}

inline BigInt factorial(long long n) {
    if (n < 0) throw std::invalid_argument("factorial: negative argument");
    BigInt out = 1;
    for (long long i = 2; i <= n; ++i) out *= i;
    return out;
}

inline BigInt catalan_exact(std::size_t m) {
    return binomial(2 * static_cast<long long>(m), static_cast<long long>(m)) / (m + 1);
}

namespace detail {

inline void dyck_recurse(std::size_t m, std::vector<int>& steps, int height, std::size_t ups,
                         std::vector<DyckPath>& out) {
    if (steps.size() == 2 * m) {
        out.push_back(DyckPath::from_steps(steps));
        return;
    }
    if (ups < m) {
        steps.push_back(1);
        dyck_recurse(m, steps, height + 1, ups + 1, out);
        steps.pop_back();
    }
    if (height > 0) {
        steps.push_back(-1);
        dyck_recurse(m, steps, height - 1, ups, out);
        steps.pop_back();
    }
}

}  // namespace detail

/// All Dyck paths of length 2m (Catalan(m) of them).
inline std::vector<DyckPath> enumerate_dyck(std::size_t m) {
    if (m > kMaxNcpHalfSize) throw std::invalid_argument("enumerate_dyck: m exceeds the cap of 12");
    std::vector<DyckPath> out;
    std::vector<int> steps;
    detail::dyck_recurse(m, steps, 0, 0, out);
    return out;
}

/// Each up step opens a pair that the matching down step closes.
inline NCPairPartition dyck_to_ncp(const DyckPath& path) {
    NCPairPartition out;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        if (path.steps[i] == 1) {
            stack.push_back(i);
        } else {
            out.pairs.emplace_back(stack.back(), i);
            stack.pop_back();
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

inline DyckPath ncp_to_dyck(const NCPairPartition& ncp) {
    std::vector<int> steps(2 * ncp.pairs.size(), 0);
    for (const auto& [a, b] : ncp.pairs) {
        if (a >= steps.size() || b >= steps.size() || a >= b) throw std::invalid_argument("ncp_to_dyck: bad pair");
        steps[a] = 1;
        steps[b] = -1;
    }
    return DyckPath::from_steps(std::move(steps));
}

inline bool is_noncrossing_perfect(const NCPairPartition& ncp, std::size_t letters) {
    std::vector<int> seen(letters, 0);
    for (const auto& [a, b] : ncp.pairs) {
        if (a >= letters || b >= letters || a == b) return false;
        ++seen[a];
        ++seen[b];
    }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) return false;
    for (const auto& [a, b] : ncp.pairs) {
        for (const auto& [c, d] : ncp.pairs) {
            const auto lo1 = std::min(a, b), hi1 = std::max(a, b);
            const auto lo2 = std::min(c, d), hi2 = std::max(c, d);
            if (lo1 < lo2 && lo2 < hi1 && hi1 < hi2) return false;
        }
    }
    return true;
}

/// All non-crossing pair partitions of 2m letters.
inline std::vector<NCPairPartition> enumerate_ncp(std::size_t m) {
    if (m > kMaxNcpHalfSize) throw std::invalid_argument("enumerate_ncp: m exceeds the cap of 12");
    std::vector<NCPairPartition> out;
    for (const auto& path : enumerate_dyck(m)) out.push_back(dyck_to_ncp(path));
    return out;
}

/// Number of Dyck paths of length k + q with h(k) = j. Evaluates the ballot
/// difference and the product form and requires them to agree.
inline BigInt dyck_count_at_height(long long k, long long q, long long j) {
    if (k < 0 || q < 0 || j < 0) throw std::invalid_argument("dyck_count_at_height: arguments must be >= 0");
    if ((k + q) % 2 != 0) throw std::invalid_argument("dyck_count_at_height: k + q must be even");
    if ((j - k) % 2 != 0) throw std::invalid_argument("dyck_count_at_height: j must have the parity of k");
    if (j > k || j > q) return 0;
    const BigInt left = binomial(k, (k + j) / 2) - binomial(k, (k + j + 2) / 2);
    const BigInt right = binomial(q, (q + j) / 2) - binomial(q, (q + j + 2) / 2);
    const BigInt ballot = left * right;
    const Rational product = Rational(BigInt((j + 1) * (j + 1)), BigInt((k + 1) * (q + 1))) *
                             Rational(binomial(k + 1, (k + j + 2) / 2) * binomial(q + 1, (q + j + 2) / 2));
    if (product != Rational(ballot)) {
        throw std::logic_error("dyck_count_at_height: closed forms disagree at (" + std::to_string(k) + ", " +
                               std::to_string(q) + ", " + std::to_string(j) + ")");
    }
    return ballot;
}

/// Densities as exact rationals.
struct RationalGeometry {
    Rational gamma_l = 1;
    Rational gamma_r = 1;
    Rational gamma_lr = 1;

    OverlapGeometry to_double() const {
        return OverlapGeometry::from_densities(static_cast<double>(gamma_l), static_cast<double>(gamma_r),
                                               static_cast<double>(gamma_lr));
    }
};

inline Rational rpow(const Rational& x, long long e) {
    if (e < 0) throw std::invalid_argument("rpow: negative exponent");
    Rational out = 1;
    for (long long i = 0; i < e; ++i) out *= x;
    return out;
}

/// <x^k, x^q>_lr as the closed binomial sum over heights at the junction.
inline Rational moment_monomial(long long k, long long q, const RationalGeometry& g) {
    if (k < 0 || q < 0) throw std::invalid_argument("moment_monomial: k, q must be >= 0");
    if ((k + q) % 2 != 0) return 0;
    Rational sum = 0;
    if (k % 2 == 0) {
        for (long long j = 0; 2 * j <= k; ++j) {
            if (2 * j > q) break;
            const BigInt count = dyck_count_at_height(k, q, 2 * j);
            if (count == 0) continue;
            sum += Rational(count) * rpow(g.gamma_l, k / 2 - j) * rpow(g.gamma_r, q / 2 - j) *
                   rpow(g.gamma_lr, 2 * j + 1);
        }
    } else {
        for (long long j = 0; 2 * j + 1 <= k; ++j) {
            if (2 * j + 1 > q) break;
            const BigInt count = dyck_count_at_height(k, q, 2 * j + 1);
            if (count == 0) continue;
            sum += Rational(count) * rpow(g.gamma_l, (k - 1) / 2 - j) * rpow(g.gamma_r, (q - 1) / 2 - j) *
                   rpow(g.gamma_lr, 2 * j + 2);
        }
    }
    return sum;
}

inline double moment_monomial(long long k, long long q, const OverlapGeometry& g) {
    if ((k + q) % 2 != 0) return 0.0;
    double sum = 0.0;
    const long long parity = k % 2;
    for (long long j = parity; j <= std::min(k, q); j += 2) {
        const double count = static_cast<double>(dyck_count_at_height(k, q, j));
        const long long a = (k - j) / 2;
        const long long b = (q - j) / 2;
        sum += count * std::pow(g.gamma_l, static_cast<double>(a)) * std::pow(g.gamma_p, static_cast<double>(b)) *
               std::pow(g.gamma_lp, static_cast<double>(j + 1));
    }
    return sum;
}

/// Brute force over NC pair partitions of k + q letters, weighting each by
/// gamma_l^{downs in the first k} gamma_r^{ups in the last q} gamma_lr^{rest}.
inline Rational moment_via_partitions(long long k, long long q, const RationalGeometry& g) {
    if (k < 0 || q < 0) throw std::invalid_argument("moment_via_partitions: k, q must be >= 0");
    if (k + q > 20) throw std::invalid_argument("moment_via_partitions: k + q exceeds the cap of 20");
    if ((k + q) % 2 != 0) return 0;
    const auto m = static_cast<std::size_t>(k + q);
    std::map<std::pair<long long, long long>, long long> histogram;
    for (const auto& ncp : enumerate_ncp(m / 2)) {
        long long downs = 0;
        long long ups = 0;
        for (const auto& [open, close] : ncp.pairs) {
            if (static_cast<long long>(close) < k) ++downs;
            if (static_cast<long long>(open) >= k) ++ups;
        }
        ++histogram[{downs, ups}];
    }
    Rational sum = 0;
    const long long blocks = static_cast<long long>(m / 2) + 1;
    for (const auto& [key, count] : histogram) {
        const auto [downs, ups] = key;
        sum += Rational(count) * rpow(g.gamma_l, downs) * rpow(g.gamma_r, ups) *
               rpow(g.gamma_lr, blocks - downs - ups);
    }
    return sum;
}

/// Same sum with the weights read off the literal Kreweras complement: gap i
/// sits after letter i (the last gap wraps), and two gaps share a block when no
/// pair separates them. A block is weighted gamma_l (all gaps inside the first
/// k letters), gamma_r (all inside the last q) or gamma_lr otherwise.
inline Rational moment_via_kreweras(long long k, long long q, const RationalGeometry& g) {
    if (k < 0 || q < 0) throw std::invalid_argument("moment_via_kreweras: k, q must be >= 0");
    if (k + q > 12) throw std::invalid_argument("moment_via_kreweras: k + q exceeds the cap of 12");
    if ((k + q) % 2 != 0) return 0;
    const auto m = static_cast<std::size_t>(k + q);
    if (m == 0) return g.gamma_lr;
    // Gap type: 0 = between two l-letters, 1 = between two r-letters, 2 = mixed.
    std::vector<int> type(m);
    for (std::size_t i = 0; i < m; ++i) {
        const long long a = static_cast<long long>(i);
        const long long b = static_cast<long long>((i + 1) % m);
        const bool wrap = i + 1 == m;
        if (!wrap && a < k && b < k) {
            type[i] = 0;
        } else if (!wrap && a >= k && b >= k) {
            type[i] = 1;
        } else {
            type[i] = 2;
        }
    }
    Rational sum = 0;
    for (const auto& ncp : enumerate_ncp(m / 2)) {
        std::vector<std::size_t> parent(m);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (std::size_t x = 0; x < m; ++x) {
            for (std::size_t y = x + 1; y < m; ++y) {
                bool separated = false;
                for (const auto& [open, close] : ncp.pairs) {
                    const bool in_x = open <= x && x < close;
                    const bool in_y = open <= y && y < close;
                    if (in_x != in_y) {
                        separated = true;
                        break;
                    }
                }
                if (!separated) parent[find(x)] = find(y);
            }
        }
        std::map<std::size_t, int> block_type;
        for (std::size_t x = 0; x < m; ++x) {
            const auto root = find(x);
            auto it = block_type.find(root);
            if (it == block_type.end()) {
                block_type[root] = type[x];
            } else if (it->second != type[x]) {
                it->second = 2;
            }
        }
        Rational w = 1;
        for (const auto& [root, t] : block_type) w *= (t == 0 ? g.gamma_l : (t == 1 ? g.gamma_r : g.gamma_lr));
        sum += w;
    }
    return sum;
}

struct HValue {
    Rational alternating_sum;
    Rational closed_form;
};

/// H_1(q, j) = sum_p (-1)^p (2q-p)! / (p! (q-p+j+1)! (q-p-j)!)
/// H_2(q, j) = sum_p (-1)^p (2q-p+1)! / (p! (q-p+j+2)! (q-p-j)!)
/// with the Chu-Vandermonde closed forms
/// H_1 = (2q)! / ((q-j)! (q+j+1)!) (j-q+1)_{q-j} / (-2q)_{q-j}
/// H_2 = (2q+1)! / ((q-j)! (q+j+2)!) (j-q+1)_{q-j} / (-2q-1)_{q-j}
inline HValue hyp_H(int which, long long q, long long j) {
    if (which != 1 && which != 2) throw std::invalid_argument("hyp_H: which must be 1 or 2");
    if (q < 0 || j < 0 || j > q) throw std::invalid_argument("hyp_H: need 0 <= j <= q");
    const long long shift = which == 1 ? 0 : 1;
    HValue out;
    for (long long p = 0; p <= q - j; ++p) {
        const Rational term(factorial(2 * q - p + shift),
                            factorial(p) * factorial(q - p + j + 1 + shift) * factorial(q - p - j));
        out.alternating_sum += (p % 2 == 0) ? term : Rational(-term);
    }
    auto rising = [](long long a, long long len) {
        BigInt r = 1;
        for (long long i = 0; i < len; ++i) r *= (a + i);
        return r;
    };
    const BigInt num = rising(j - q + 1, q - j);
    const BigInt den = rising(-2 * q - shift, q - j);
    out.closed_form = Rational(factorial(2 * q + shift), factorial(q - j) * factorial(q + j + 1 + shift)) *
                      Rational(num, den);
    return out;
}

/// Polynomial with exact rational coefficients (ascending degree).
struct RationalPolynomial {
    std::vector<Rational> coeffs;

    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

/// gamma^{(k mod 2)/2} U_k^gamma, which has rational coefficients for rational gamma:
/// sum_j (-1)^j C(k-j, j) x^{k-2j} gamma^{-(k-2j - (k mod 2))/2}.
inline RationalPolynomial u_polynomial_scaled(std::size_t k, const Rational& gamma) {
    if (gamma <= 0) throw std::invalid_argument("u_polynomial_scaled: gamma must be > 0");
    RationalPolynomial out;
    out.coeffs.assign(k + 1, Rational(0));
    const auto kk = static_cast<long long>(k);
    for (long long j = 0; 2 * j <= kk; ++j) {
        const long long e = (kk - 2 * j - kk % 2) / 2;
        Rational c(binomial(kk - j, j));
        c /= rpow(gamma, e);
        out.coeffs[static_cast<std::size_t>(kk - 2 * j)] = (j % 2 == 0) ? c : Rational(-c);
    }
    return out;
}

/// The pairing of the scaled U-polynomials implied by biorthogonality:
/// gamma_lr^{k+1} / (gamma_l gamma_r)^{floor(k/2)} when k == q, else 0.
inline Rational scaled_u_pairing(std::size_t k, std::size_t q, const RationalGeometry& g) {
    if (k != q) return 0;
    const auto kk = static_cast<long long>(k);
    return rpow(g.gamma_lr, kk + 1) / rpow(g.gamma_l * g.gamma_r, kk / 2);
}

/// <f, g>_lr = sum_{i,j} a_i b_j <x^i, x^j>_lr.
inline Rational moment_polynomial(const RationalPolynomial& f, const RationalPolynomial& h, const RationalGeometry& g) {
    Rational sum = 0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        if (f.coeffs[i] == 0) continue;
        for (std::size_t j = 0; j < h.coeffs.size(); ++j) {
            if (h.coeffs[j] == 0) continue;
            sum += f.coeffs[i] * h.coeffs[j] *
                   moment_monomial(static_cast<long long>(i), static_cast<long long>(j), g);
        }
    }
    return sum;
}

inline double moment_polynomial(const Polynomial& f, const Polynomial& h, const OverlapGeometry& g) {
    double sum = 0.0;
    const auto& a = f.coefficients();
    const auto& b = h.coefficients();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (a[i] == 0.0 || b[j] == 0.0) continue;
            sum += a[i] * b[j] * moment_monomial(static_cast<long long>(i), static_cast<long long>(j), g);
        }
    }
    return sum;
}

}  // namespace lss
