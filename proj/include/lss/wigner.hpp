#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "lss/entry_law.hpp"
#include "lss/rng.hpp"

namespace lss {

struct SeedPath {
    std::uint64_t master_seed = 0;
    std::uint64_t replica_index = 0;

    friend bool operator==(const SeedPath&, const SeedPath&) = default;
};

/// One draw of the normalized Wigner matrix M = W / sqrt(n).
class WignerSample {
public:
    WignerSample(Eigen::MatrixXd entries, EntryLaw law, SeedPath seed_path)
        : entries_(std::move(entries)), law_(law), seed_path_(seed_path) {}

    std::size_t n() const { return static_cast<std::size_t>(entries_.rows()); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    double operator()(std::size_t j, std::size_t k) const {
        return entries_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
    const EntryLaw& law() const { return law_; }
    const SeedPath& seed_path() const { return seed_path_; }

private:
    Eigen::MatrixXd entries_;
    EntryLaw law_;
    SeedPath seed_path_;
};

/// Sample M = W / sqrt(n). The upper triangle is filled column by column from
/// the replica's stream (diagonal first within each column) and mirrored, so
/// the result is bitwise symmetric and a pure function of its arguments.
inline WignerSample sample_wigner(std::size_t n, const EntryLaw& law, std::uint64_t master_seed,
                                  std::uint64_t replica_index) {
    if (n < 1) throw std::invalid_argument("sample_wigner: n must be >= 1");
    auto rng = replica_engine(master_seed, replica_index);
    UnitSampler draw(law);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double diag_scale = std::sqrt(law.sigma_sq_diag) * scale;
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd m(size, size);
    for (Eigen::Index k = 0; k < size; ++k) {
        m(k, k) = diag_scale * draw(rng);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double v = scale * draw(rng);
            m(j, k) = v;
            m(k, j) = v;
        }
    }
    return WignerSample(std::move(m), law, SeedPath{master_seed, replica_index});
}

}  // namespace lss
