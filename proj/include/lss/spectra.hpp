#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lss/error.hpp"
#include "lss/index_family.hpp"
#include "lss/test_function.hpp"
#include "lss/wigner.hpp"

namespace lss {

/// Sorted (ascending) eigenvalues of a real symmetric matrix.
struct Spectrum {
    std::vector<double> eigenvalues;
    std::size_t source_order = 0;
};

/// Eigenvalues with the matching orthonormal eigenvectors (columns).
struct EigenPairs {
    std::vector<double> eigenvalues;
    Eigen::MatrixXd vectors;
};

namespace detail {

inline constexpr int kMaxQlIterations = 50;

inline void check_symmetric(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1e-300)) {
        throw std::invalid_argument("symmetric_eigenvalues: matrix is not symmetric (max asymmetry " +
                                    std::to_string(asym) + ")");
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (e[i] couples d[i] and d[i+1]; e.back() is ignored).
/// When `z` is non-null its columns are rotated alongside.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Eigen::MatrixXd* z) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return;
    e.resize(static_cast<std::size_t>(n));
    e[static_cast<std::size_t>(n - 1)] = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (iter++ == kMaxQlIterations) {
                throw ConvergenceError("tridiagonal QL: no convergence for eigenvalue " + std::to_string(l) +
                                       " after " + std::to_string(kMaxQlIterations) + " iterations");
            }
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            int i = m - 1;
            bool underflow = false;
            for (; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if (z != nullptr) {
                    for (Eigen::Index k = 0; k < z->rows(); ++k) {
                        f = (*z)(k, i + 1);
                        (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
                        (*z)(k, i) = c * (*z)(k, i) - s * f;
                    }
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

}  // namespace detail

/// Eigenvalues of a real symmetric matrix: Householder tridiagonalization
/// followed by implicit-shift QL. Throws ConvergenceError on iteration-cap
/// exhaustion and std::invalid_argument for non-symmetric input.
inline Spectrum symmetric_eigenvalues(const Eigen::MatrixXd& a) {
    detail::check_symmetric(a);
    Spectrum out;
    out.source_order = static_cast<std::size_t>(a.rows());
    if (a.rows() == 0) return out;
    if (a.rows() == 1) {
        out.eigenvalues = {a(0, 0)};
        return out;
    }
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(a);
    const Eigen::VectorXd diag = tri.diagonal();
    const Eigen::VectorXd sub = tri.subDiagonal();
    std::vector<double> d(diag.data(), diag.data() + diag.size());
    std::vector<double> e(sub.data(), sub.data() + sub.size());
    detail::tridiagonal_ql(d, e, nullptr);
    std::sort(d.begin(), d.end());
    out.eigenvalues = std::move(d);
    return out;
}

/// Eigenpairs, for residual spot checks; production paths use eigenvalues only.
inline EigenPairs symmetric_eigenpairs(const Eigen::MatrixXd& a) {
    detail::check_symmetric(a);
    EigenPairs out;
    const Eigen::Index n = a.rows();
    if (n == 0) return out;
    if (n == 1) {
        out.eigenvalues = {a(0, 0)};
        out.vectors = Eigen::MatrixXd::Identity(1, 1);
        return out;
    }
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(a);
    Eigen::MatrixXd z = tri.matrixQ();
    const Eigen::VectorXd diag = tri.diagonal();
    const Eigen::VectorXd sub = tri.subDiagonal();
    std::vector<double> d(diag.data(), diag.data() + diag.size());
    std::vector<double> e(sub.data(), sub.data() + sub.size());
    detail::tridiagonal_ql(d, e, &z);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return d[x] < d[y]; });
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues.push_back(d[order[i]]);
        out.vectors.col(i) = z.col(order[i]);
    }
    return out;
}

/// Principal submatrix M(B): rows and columns selected by B, order inherited.
inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<std::size_t>& indices) {
    const auto n = static_cast<std::size_t>(m.rows());
    for (auto i : indices) {
        if (i >= n) throw std::out_of_range("submatrix: index " + std::to_string(i) + " out of range");
    }
    const auto k = static_cast<Eigen::Index>(indices.size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto src_c = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < k; ++r) {
            out(r, c) = m(static_cast<Eigen::Index>(indices[static_cast<std::size_t>(r)]), src_c);
        }
    }
    return out;
}

inline Eigen::MatrixXd submatrix(const WignerSample& sample, const std::vector<std::size_t>& indices) {
    return submatrix(sample.entries(), indices);
}

/// N[phi] = sum_i phi(lambda_i).
inline double linear_statistic(const Spectrum& spectrum, const TestFunction& phi) {
    double sum = 0.0;
    for (double lambda : spectrum.eigenvalues) {
        const double v = phi(lambda);
        if (!std::isfinite(v)) {
            throw std::domain_error("linear_statistic: " + phi.label() + " is not finite at " + std::to_string(lambda));
        }
        sum += v;
    }
    return sum;
}

/// Uncentered statistics (N_{B_1}[phi_1], ..., N_{B_d}[phi_d]) of one sample.
struct StatisticVector {
    std::vector<double> values;
    std::size_t replica_index = 0;
};

/// Spectra of M(B_l) are computed once per distinct realized set.
inline StatisticVector statistics_vector(const WignerSample& sample, const IndexFamilyRealization& family,
                                         const std::vector<TestFunction>& phis) {
    if (phis.size() != family.d()) {
        throw std::invalid_argument("statistics_vector: need one test function per index set");
    }
    if (sample.n() != family.n) throw std::invalid_argument("statistics_vector: family realized at a different n");
    StatisticVector out;
    out.replica_index = sample.seed_path().replica_index;
    std::map<std::size_t, Spectrum> spectra;
    for (std::size_t l = 0; l < family.d(); ++l) {
        const auto key = family.canonical[l];
        auto it = spectra.find(key);
        if (it == spectra.end()) {
            it = spectra.emplace(key, symmetric_eigenvalues(submatrix(sample, family.sets[key]))).first;
        }
        out.values.push_back(linear_statistic(it->second, phis[l]));
    }
    return out;
}

}  // namespace lss
