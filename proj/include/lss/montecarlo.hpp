#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "lss/entry_law.hpp"
#include "lss/error.hpp"
#include "lss/index_family.hpp"
#include "lss/spectra.hpp"
#include "lss/stats.hpp"
#include "lss/test_function.hpp"
#include "lss/theory.hpp"
#include "lss/wigner.hpp"

namespace lss {

struct ExperimentOptions {
    std::size_t cheb_nodes = kDefaultChebNodes;
    std::size_t truncation_K = 0;
    std::size_t contour_grid = 1024;
    /// 0 = LSS_THREADS if set, else hardware concurrency.
    std::size_t threads = 0;
    /// Weights of the linear combination tested for normality; empty = all ones.
    std::vector<double> alpha;
    double z_gate = 4.0;
    /// Bootstrap resamples for an audit of the delta-method stderr; 0 = off.
    std::size_t bootstrap = 0;

    TheoryOptions theory() const { return {cheb_nodes, truncation_K, contour_grid}; }
    friend bool operator==(const ExperimentOptions&, const ExperimentOptions&) = default;
};

struct ExperimentConfig {
    std::size_t n = 512;
    std::size_t replicas = 4000;
    EntryLaw law = make_entry_law(LawKind::gaussian, 2.0);
    std::vector<IndexSetSpec> family;
    std::vector<FunctionSpec> functions;
    std::uint64_t master_seed = 1;
    ExperimentOptions options;

    std::size_t d() const { return family.size(); }

    void validate() const {
        if (replicas < 2) throw ConfigError("replicas must be >= 2", "run.replicas");
        if (n < 8) throw ConfigError("n must be >= 8", "run.n");
        if (family.empty()) throw ConfigError("at least one index set is required", "family.sets");
        if (functions.size() != family.size()) {
            throw ConfigError("need exactly one test function per index set (" + std::to_string(family.size()) +
                                  " sets, " + std::to_string(functions.size()) + " functions)",
                              "functions.list");
        }
        if (!options.alpha.empty() && options.alpha.size() != family.size()) {
            throw ConfigError("alpha must have one weight per index set", "run.alpha");
        }
        if (!(options.z_gate > 0.0)) throw ConfigError("z_gate must be > 0", "run.z_gate");
        if (options.contour_grid < 4) throw ConfigError("contour_grid must be >= 4", "run.contour_grid");
        for (const auto& f : functions) make_test_function(f);
    }

    std::vector<TestFunction> test_functions() const {
        std::vector<TestFunction> out;
        for (const auto& f : functions) out.push_back(make_test_function(f));
        return out;
    }

    std::vector<double> alpha() const {
        return options.alpha.empty() ? std::vector<double>(family.size(), 1.0) : options.alpha;
    }
};

/// Worker count: explicit request, else LSS_THREADS, else hardware concurrency.
inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LSS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// One replica's statistics vector; pure in (config, replica_index).
inline StatisticVector run_replica(const ExperimentConfig& config, const IndexFamilyRealization& family,
                                   const std::vector<TestFunction>& phis, std::size_t replica_index) {
    if (replica_index >= config.replicas) throw std::out_of_range("run_replica: replica index out of range");
    const auto sample = sample_wigner(config.n, config.law, config.master_seed, replica_index);
    return statistics_vector(sample, family, phis);
}

inline StatisticVector run_replica(const ExperimentConfig& config, std::size_t replica_index) {
    const auto family = realize_index_family(config.family, config.n);
    return run_replica(config, family, config.test_functions(), replica_index);
}

struct SimulationResult {
    Eigen::VectorXd sample_mean;
    Eigen::MatrixXd sample_cov;
    Eigen::MatrixXd cov_stderr;
    /// Present when options.bootstrap > 0.
    std::optional<Eigen::MatrixXd> cov_stderr_bootstrap;
    /// Raw statistics of the retained replicas, in replica order (R_used x d).
    Eigen::MatrixXd samples;
    /// Column-standardized samples.
    Eigen::MatrixXd standardized_samples;
    std::vector<std::size_t> failed_replicas;
    std::size_t replicas_used = 0;
    std::size_t threads_used = 1;
    double wall_time_seconds = 0.0;
};

class ExperimentAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Aggregate moments of a sample matrix (the reduction step of run_experiment).
inline SimulationResult summarize_samples(Eigen::MatrixXd samples) {
    SimulationResult out;
    out.sample_mean = stats::mean(samples);
    out.sample_cov = stats::covariance(samples);
    out.cov_stderr = stats::covariance_stderr(samples);
    out.standardized_samples = samples;
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
        const double sd = std::sqrt(out.sample_cov(c, c));
        if (sd > 0.0) {
            out.standardized_samples.col(c) = ((samples.col(c).array() - out.sample_mean(c)) / sd).matrix();
        } else {
            out.standardized_samples.col(c).setZero();
        }
    }
    out.replicas_used = static_cast<std::size_t>(samples.rows());
    out.samples = std::move(samples);
    return out;
}

/// Runs all replicas on a worker pool and reduces in replica-index order, so
/// results do not depend on the thread count.
inline SimulationResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto family = realize_index_family(config.family, config.n);
    const auto phis = config.test_functions();
    const std::size_t R = config.replicas;
    const std::size_t d = config.d();
    const std::size_t threads = std::min(resolve_threads(config.options.threads), R);

    std::vector<std::vector<double>> values(R);
    std::vector<char> failed(R, 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < R; i = next.fetch_add(1)) {
            try {
                values[i] = run_replica(config, family, phis, i).values;
            } catch (const ConvergenceError&) {
                failed[i] = 1;
            } catch (const std::domain_error&) {
                failed[i] = 1;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<std::size_t> failures;
    for (std::size_t i = 0; i < R; ++i) {
        if (failed[i]) failures.push_back(i);
    }
    if (static_cast<double>(failures.size()) > 0.01 * static_cast<double>(R)) {
        throw ExperimentAborted("run_experiment: " + std::to_string(failures.size()) + " of " + std::to_string(R) +
                                " replicas failed (more than 1%)");
    }
    const std::size_t used = R - failures.size();
    if (used < 2) throw ExperimentAborted("run_experiment: fewer than two successful replicas");
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(used), static_cast<Eigen::Index>(d));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < R; ++i) {
        if (failed[i]) continue;
        for (std::size_t l = 0; l < d; ++l) samples(row, static_cast<Eigen::Index>(l)) = values[i][l];
        ++row;
    }
    auto out = summarize_samples(std::move(samples));
    if (config.options.bootstrap > 0) {
        out.cov_stderr_bootstrap =
            stats::covariance_stderr_bootstrap(out.samples, config.options.bootstrap, config.master_seed);
    }
    out.failed_replicas = std::move(failures);
    out.threads_used = threads;
    out.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

struct NormalityReport {
    std::vector<double> alpha;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_statistic = 0.0;
    double ks_critical = 0.0;
    std::size_t samples = 0;
};

/// Standard errors at or below this are numerical zero; the z-score is left undefined there.
inline constexpr double kStderrFloor = 1e-9;

struct ComparisonReport {
    Eigen::MatrixXd theory;
    std::vector<std::vector<CovarianceBreakdown>> breakdown;
    /// GFF part by the contour route; NaN where beta = 1 (route not applicable).
    Eigen::MatrixXd contour_gff;
    Eigen::MatrixXd contour_tol;
    Eigen::MatrixXd simulated;
    Eigen::MatrixXd stderr_;
    /// (simulated - theory) / stderr; NaN where stderr <= kStderrFloor.
    Eigen::MatrixXd z_scores;
    NormalityReport normality;
    double z_gate = 4.0;
    double max_abs_z = 0.0;
    /// Mean |z| over the defined entries of the upper triangle including the diagonal.
    double mean_abs_z = 0.0;
    /// Upper-triangle entries whose z-score is undefined (zero stderr).
    std::size_t undefined_z = 0;

    bool within_gate() const { return max_abs_z <= z_gate; }
};

/// Theory-only part of the comparison (no simulation needed).
inline ComparisonReport theory_report(const ExperimentConfig& config, bool with_contour = true) {
    const auto family = realize_index_family(config.family, config.n);
    const auto phis = config.test_functions();
    const auto opt = config.options.theory();
    ComparisonReport rep;
    rep.breakdown = covariance_breakdowns(phis, family, config.law, opt);
    const auto d = static_cast<Eigen::Index>(config.d());
    rep.theory.resize(d, d);
    rep.contour_gff = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
    rep.contour_tol = rep.contour_gff;
    std::map<double, ContourKernelGrid> fine, coarse;
    for (Eigen::Index l = 0; l < d; ++l) {
        for (Eigen::Index p = 0; p < d; ++p) rep.theory(l, p) = rep.breakdown[l][p].total;
    }
    if (with_contour) {
        for (Eigen::Index l = 0; l < d; ++l) {
            for (Eigen::Index p = l; p < d; ++p) {
                const auto geom = overlap_geometry(family, static_cast<std::size_t>(l), static_cast<std::size_t>(p));
                if (geom.beta >= 1.0) continue;
                auto f = fine.find(geom.beta);
                if (f == fine.end()) {
                    f = fine.emplace(geom.beta, ContourKernelGrid(geom.beta, opt.contour_grid)).first;
                    coarse.emplace(geom.beta, ContourKernelGrid(geom.beta, opt.contour_grid / 2));
                }
                const auto& c = coarse.at(geom.beta);
                const double v = f->second.contract(phis[l], phis[p], geom.gamma_l, geom.gamma_p);
                const double tol = std::abs(v - c.contract(phis[l], phis[p], geom.gamma_l, geom.gamma_p));
                rep.contour_gff(l, p) = rep.contour_gff(p, l) = v;
                rep.contour_tol(l, p) = rep.contour_tol(p, l) = tol;
            }
        }
    }
    rep.z_gate = config.options.z_gate;
    return rep;
}

/// Normality diagnostics of the standardized combination sum_l alpha_l N_l.
inline NormalityReport normality_of_combination(const Eigen::MatrixXd& samples, const std::vector<double>& alpha) {
    if (static_cast<Eigen::Index>(alpha.size()) != samples.cols()) {
        throw std::invalid_argument("normality_of_combination: alpha has the wrong length");
    }
    std::vector<double> xi(static_cast<std::size_t>(samples.rows()), 0.0);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index l = 0; l < samples.cols(); ++l) xi[static_cast<std::size_t>(i)] += alpha[l] * samples(i, l);
    }
    NormalityReport out;
    out.alpha = alpha;
    out.samples = xi.size();
    if (xi.size() < 4) {
        // Shape statistics are undefined; NaN is written as null.
        out.skewness = out.excess_kurtosis = out.ks_statistic = std::numeric_limits<double>::quiet_NaN();
        out.ks_critical = xi.empty() ? out.ks_statistic : stats::ks_critical_1pct(xi.size());
        return out;
    }
    const auto z = stats::standardize(xi);
    out.skewness = stats::skewness(z);
    out.excess_kurtosis = stats::excess_kurtosis(z);
    out.ks_statistic = stats::ks_statistic_normal(z);
    out.ks_critical = stats::ks_critical_1pct(z.size());
    return out;
}

inline ComparisonReport compare_with_theory(const SimulationResult& result, const ExperimentConfig& config,
                                            bool with_contour = true) {
    auto rep = theory_report(config, with_contour);
    rep.simulated = result.sample_cov;
    rep.stderr_ = result.cov_stderr;
    const auto d = rep.theory.rows();
    rep.z_scores.resize(d, d);
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index l = 0; l < d; ++l) {
        for (Eigen::Index p = 0; p < d; ++p) {
            const double se = rep.stderr_(l, p);
            if (!(se > kStderrFloor)) {
                rep.z_scores(l, p) = std::numeric_limits<double>::quiet_NaN();
                if (p >= l) ++rep.undefined_z;
                continue;
            }
            rep.z_scores(l, p) = (rep.simulated(l, p) - rep.theory(l, p)) / se;
            if (p >= l) {
                rep.max_abs_z = std::max(rep.max_abs_z, std::abs(rep.z_scores(l, p)));
                sum += std::abs(rep.z_scores(l, p));
                ++count;
            }
        }
    }
    rep.mean_abs_z = count > 0 ? sum / static_cast<double>(count) : 0.0;
    rep.normality = normality_of_combination(result.samples, config.alpha());
    return rep;
}

}  // namespace lss
