#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lss/config.hpp"
#include "lss/montecarlo.hpp"
#include "lss/theory.hpp"

namespace lss {

using json = nlohmann::json;

#ifndef LSS_VERSION
#define LSS_VERSION "1.0.0"
#endif

inline constexpr const char* kToolVersion = LSS_VERSION;

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string config_hash;
    std::string command;
    std::string started_at;
    std::string finished_at;
    std::string tool_version = kToolVersion;
    std::uint64_t master_seed = 0;
    std::vector<std::string> outputs;
};

inline json to_json(const RunManifest& m) {
    return {{"config_hash", m.config_hash}, {"command", m.command},       {"started_at", m.started_at},
            {"finished_at", m.finished_at}, {"tool_version", m.tool_version}, {"master_seed", m.master_seed},
            {"outputs", m.outputs}};
}

/// Row-major nested arrays; NaN and infinities become null.
inline json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(std::isfinite(v(i)) ? json(v(i)) : json(nullptr));
    return out;
}

inline json to_json(const CovarianceBreakdown& b) {
    return {{"gff_part", b.gff_part},         {"sigma_part", b.sigma_part},
            {"kappa4_part", b.kappa4_part},   {"total", b.total},
            {"truncation_K", b.truncation_K}, {"series_tail", b.series_tail},
            {"converged", b.converged}};
}

inline json config_json(const ExperimentConfig& cfg) {
    json fam = json::array();
    for (const auto& s : cfg.family) fam.push_back(describe(s));
    json fns = json::array();
    for (const auto& f : cfg.functions) fns.push_back(make_test_function(f).label());
    return {{"law",
             {{"kind", std::string(to_string(cfg.law.kind))},
              {"sigma_sq_diag", cfg.law.sigma_sq_diag},
              {"p", cfg.law.p},
              {"mu4", cfg.law.mu4},
              {"kappa4", cfg.law.kappa4},
              {"kappa3", cfg.law.kappa3}}},
            {"family", fam},
            {"functions", fns},
            {"n", cfg.n},
            {"replicas", cfg.replicas},
            {"master_seed", cfg.master_seed},
            {"alpha", cfg.alpha()},
            {"z_gate", cfg.options.z_gate},
            {"cheb_nodes", cfg.options.cheb_nodes},
            {"truncation_K", cfg.options.truncation_K},
            {"contour_grid", cfg.options.contour_grid}};
}

inline json geometry_json(const ExperimentConfig& cfg) {
    const auto family = realize_index_family(cfg.family, cfg.n);
    json out = json::array();
    for (std::size_t l = 0; l < family.d(); ++l) {
        for (std::size_t p = l; p < family.d(); ++p) {
            const auto g = overlap_geometry(family, l, p);
            out.push_back({{"l", l},
                           {"p", p},
                           {"gamma_l", g.gamma_l},
                           {"gamma_p", g.gamma_p},
                           {"gamma_lp", g.gamma_lp},
                           {"beta", g.beta},
                           {"n_l", family.n_l[l]},
                           {"n_p", family.n_l[p]},
                           {"n_lp", family.n_lm[l][p]}});
        }
    }
    return out;
}

inline json theory_json(const ExperimentConfig& cfg, const ComparisonReport& rep, const RunManifest& manifest) {
    json cells = json::array();
    for (const auto& row : rep.breakdown) {
        json r = json::array();
        for (const auto& c : row) r.push_back(to_json(c));
        cells.push_back(std::move(r));
    }
    return {{"schema", "lss.theory/1"},
            {"manifest", to_json(manifest)},
            {"config", config_json(cfg)},
            {"d", cfg.d()},
            {"geometry", geometry_json(cfg)},
            {"covariance", matrix_json(rep.theory)},
            {"breakdown", cells},
            {"contour_gff", matrix_json(rep.contour_gff)},
            {"contour_achieved_tol", matrix_json(rep.contour_tol)}};
}

inline json simulation_json(const ExperimentConfig& cfg, const SimulationResult& sim, const RunManifest& manifest) {
    json out = {{"schema", "lss.simulation/1"},
                {"manifest", to_json(manifest)},
                {"config", config_json(cfg)},
                {"sample_mean", vector_json(sim.sample_mean)},
                {"sample_cov", matrix_json(sim.sample_cov)},
                {"cov_stderr", matrix_json(sim.cov_stderr)},
                {"replicas_used", sim.replicas_used},
                {"failed_replicas", sim.failed_replicas},
                {"threads_used", sim.threads_used},
                {"wall_time_seconds", sim.wall_time_seconds}};
    out["cov_stderr_bootstrap"] = sim.cov_stderr_bootstrap ? matrix_json(*sim.cov_stderr_bootstrap) : json(nullptr);
    return out;
}

inline json comparison_json(const ExperimentConfig& cfg, const ComparisonReport& rep, const RunManifest& manifest) {
    const auto& nr = rep.normality;
    return {{"schema", "lss.comparison/1"},
            {"manifest", to_json(manifest)},
            {"config", config_json(cfg)},
            {"theory", matrix_json(rep.theory)},
            {"simulated", matrix_json(rep.simulated)},
            {"stderr", matrix_json(rep.stderr_)},
            {"z_scores", matrix_json(rep.z_scores)},
            {"stderr_floor", kStderrFloor},
            {"undefined_z", rep.undefined_z},
            {"contour_gff", matrix_json(rep.contour_gff)},
            {"max_abs_z", rep.max_abs_z},
            {"mean_abs_z", rep.mean_abs_z},
            {"z_gate", rep.z_gate},
            {"within_gate", rep.within_gate()},
            {"normality",
             {{"alpha", nr.alpha},
              {"skewness", number_json(nr.skewness)},
              {"excess_kurtosis", number_json(nr.excess_kurtosis)},
              {"ks_statistic", number_json(nr.ks_statistic)},
              {"ks_critical_1pct", number_json(nr.ks_critical)},
              {"samples", nr.samples}}}};
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// RFC 4180 matrix: header config_hash,row,col_0..col_{d-1}; CRLF line ends.
inline void write_csv_matrix(const std::filesystem::path& path, const std::string& hash, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "config_hash,row";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ",col_" << j;
    out << "\r\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << csv_field(hash) << "," << i;
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << "," << csv_number(m(i, j));
        out << "\r\n";
    }
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace lss
