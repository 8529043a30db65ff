#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lss/lss.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGate = 1;
constexpr int kExitError = 2;

struct Loaded {
    lss::ExperimentConfig config;
    std::string hash;
};

Loaded load(const std::string& path, const std::optional<std::uint64_t>& seed) {
    Loaded out{lss::load_config(path), {}};
    if (seed) out.config.master_seed = *seed;
    out.config.validate();
    out.hash = lss::config_hash(out.config);
    return out;
}

lss::RunManifest manifest_for(const std::string& command, const Loaded& l) {
    lss::RunManifest m;
    m.command = command;
    m.config_hash = l.hash;
    m.master_seed = l.config.master_seed;
    m.started_at = lss::utc_timestamp();
    return m;
}

void write_config_copy(const fs::path& dir, const Loaded& l) {
    std::ofstream out(dir / "config.toml", std::ios::binary);
    out << "# config_hash = \"" << l.hash << "\"\n" << lss::serialize_config(l.config);
}

int cmd_theory(const std::string& config_path, const fs::path& out_dir) {
    const auto l = load(config_path, std::nullopt);
    fs::create_directories(out_dir);
    auto m = manifest_for("theory", l);
    const auto rep = lss::theory_report(l.config, true);
    m.outputs = {"theory.json", "theory_covariance.csv", "config.toml"};
    m.finished_at = lss::utc_timestamp();
    lss::write_json(out_dir / "theory.json", lss::theory_json(l.config, rep, m));
    lss::write_csv_matrix(out_dir / "theory_covariance.csv", l.hash, rep.theory);
    write_config_copy(out_dir, l);
    std::printf("theory: d=%zu, config %s -> %s\n", l.config.d(), l.hash.c_str(), out_dir.string().c_str());
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const fs::path& out_dir, std::size_t threads,
                 const std::optional<std::uint64_t>& seed) {
    const auto l = load(config_path, seed);
    // The worker count does not change results, so it stays out of the hashed and echoed config.
    auto run_config = l.config;
    if (threads > 0) run_config.options.threads = threads;
    fs::create_directories(out_dir);
    auto m = manifest_for("simulate", l);
    const auto sim = lss::run_experiment(run_config);
    const auto rep = lss::compare_with_theory(sim, l.config, true);
    m.outputs = {"simulation.json", "comparison.json", "theory_covariance.csv", "sample_covariance.csv",
                 "stderr.csv",      "z_scores.csv",    "config.toml"};
    m.finished_at = lss::utc_timestamp();
    lss::write_json(out_dir / "simulation.json", lss::simulation_json(l.config, sim, m));
    lss::write_json(out_dir / "comparison.json", lss::comparison_json(l.config, rep, m));
    lss::write_csv_matrix(out_dir / "theory_covariance.csv", l.hash, rep.theory);
    lss::write_csv_matrix(out_dir / "sample_covariance.csv", l.hash, rep.simulated);
    lss::write_csv_matrix(out_dir / "stderr.csv", l.hash, rep.stderr_);
    lss::write_csv_matrix(out_dir / "z_scores.csv", l.hash, rep.z_scores);
    write_config_copy(out_dir, l);
    std::printf("simulate: n=%zu R=%zu (%zu used, %zu failed) threads=%zu %.1fs\n", l.config.n, l.config.replicas,
                sim.replicas_used, sim.failed_replicas.size(), sim.threads_used, sim.wall_time_seconds);
    std::printf("max|z| = %.3f (gate %.2f), mean|z| = %.3f, undefined z = %zu\n", rep.max_abs_z, rep.z_gate,
                rep.mean_abs_z, rep.undefined_z);
    if (!rep.within_gate()) {
        std::fprintf(stderr, "simulate: max|z| %.3f exceeds the gate %.2f\n", rep.max_abs_z, rep.z_gate);
        return kExitGate;
    }
    return kExitOk;
}

int cmd_verify(std::size_t max_degree, const std::string& out_dir, const std::string& mutant) {
    lss::VerifyOptions opt;
    opt.max_degree = max_degree;
    if (!mutant.empty()) {
        if (mutant != "sign-flip") throw lss::ConfigError("unknown mutant '" + mutant + "'", "--inject-mutant");
        opt.sign_flip_mutant = true;
    }
    const std::string started = lss::utc_timestamp();
    const auto rep = lss::run_verify_suite(opt);
    lss::json families = lss::json::array();
    for (const auto& f : rep.families) {
        std::printf("%-4s %-40s checks=%-6zu failures=%-4zu worst=%.3e  [%s]%s%s\n", f.passed() ? "PASS" : "FAIL",
                    f.name.c_str(), f.checks, f.failures, f.worst, f.metric.c_str(),
                    f.detail.empty() ? "" : "  first failure: ", f.detail.c_str());
        families.push_back({{"name", f.name},
                            {"passed", f.passed()},
                            {"checks", f.checks},
                            {"failures", f.failures},
                            {"worst_residual", f.worst},
                            {"metric", f.metric},
                            {"first_failure", f.detail}});
    }
    std::printf("verify: %s\n", rep.passed() ? "all families pass" : "FAILED");
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        lss::RunManifest m;
        m.command = "verify";
        m.config_hash = "verify-max-degree-" + std::to_string(max_degree) + (mutant.empty() ? "" : "-" + mutant);
        m.master_seed = opt.seed;
        m.started_at = started;
        m.finished_at = lss::utc_timestamp();
        m.outputs = {"verify.json"};
        lss::write_json(fs::path(out_dir) / "verify.json", {{"schema", "lss.verify/1"},
                                                            {"manifest", lss::to_json(m)},
                                                            {"max_degree", max_degree},
                                                            {"mutant", mutant.empty() ? "none" : mutant},
                                                            {"passed", rep.passed()},
                                                            {"families", families}});
    }
    return rep.passed() ? kExitOk : kExitGate;
}

std::string fmt_cell(const lss::json& v) {
    if (v.is_null()) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
}

void print_matrix(const std::string& title, const lss::json& m) {
    std::printf("%s\n", title.c_str());
    for (const auto& row : m) {
        std::string line = " ";
        for (const auto& v : row) {
            std::string c = fmt_cell(v);
            line += std::string(c.size() < 13 ? 13 - c.size() : 1, ' ') + c;
        }
        std::printf("%s\n", line.c_str());
    }
}

int cmd_report(const fs::path& in_dir) {
    const fs::path path = in_dir / "comparison.json";
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "report: no comparison.json in %s\n", in_dir.string().c_str());
        return kExitError;
    }
    const auto doc = lss::json::parse(in);
    const auto& man = doc.at("manifest");
    const auto& cfg = doc.at("config");
    std::printf("config %s  (%s, tool %s)\n", man.at("config_hash").get<std::string>().c_str(),
                man.at("finished_at").get<std::string>().c_str(), man.at("tool_version").get<std::string>().c_str());
    std::printf("law %s  n=%zu  R=%zu  seed=%llu\n", cfg.at("law").at("kind").get<std::string>().c_str(),
                cfg.at("n").get<std::size_t>(), cfg.at("replicas").get<std::size_t>(),
                static_cast<unsigned long long>(cfg.at("master_seed").get<std::uint64_t>()));
    const auto& fam = cfg.at("family");
    const auto& fns = cfg.at("functions");
    for (std::size_t i = 0; i < fam.size(); ++i) {
        std::printf("  [%zu] %s  phi = %s\n", i, fam[i].get<std::string>().c_str(),
                    fns[i].get<std::string>().c_str());
    }
    print_matrix("theory", doc.at("theory"));
    print_matrix("simulated", doc.at("simulated"));
    print_matrix("stderr", doc.at("stderr"));
    print_matrix("z", doc.at("z_scores"));
    const auto& nr = doc.at("normality");
    std::printf("normality: skew %s  exkurt %s  KS %s (1%% critical %s)\n", fmt_cell(nr.at("skewness")).c_str(),
                fmt_cell(nr.at("excess_kurtosis")).c_str(), fmt_cell(nr.at("ks_statistic")).c_str(),
                fmt_cell(nr.at("ks_critical_1pct")).c_str());
    const bool ok = doc.at("within_gate").get<bool>();
    std::printf("max|z| %.3f  mean|z| %.3f  gate %.2f  -> %s\n", doc.at("max_abs_z").get<double>(),
                doc.at("mean_abs_z").get<double>(), doc.at("z_gate").get<double>(), ok ? "within gate" : "GATE EXCEEDED");
    return ok ? kExitOk : kExitGate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint linear eigenvalue statistics of overlapping Wigner submatrices"};
    app.set_version_flag("--version", std::string(lss::kToolVersion));
    app.require_subcommand(1);

    std::string config_path, out_dir, in_dir, mutant;
    std::size_t threads = 0, max_degree = 10;
    std::optional<std::uint64_t> seed;

    auto* theory = app.add_subcommand("theory", "Evaluate the limiting covariance matrix");
    theory->add_option("--config", config_path, "TOML experiment config")->required()->check(CLI::ExistingFile);
    theory->add_option("--out", out_dir, "Output directory")->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo run compared against theory");
    simulate->add_option("--config", config_path, "TOML experiment config")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--threads", threads, "Worker threads (default: LSS_THREADS or all cores)");
    simulate->add_option("--seed", seed, "Override the master seed");

    auto* verify = app.add_subcommand("verify", "Run the exact and numerical oracle suite");
    verify->add_option("--max-degree", max_degree, "Largest degree in the degree-indexed families")
        ->check(CLI::Range(1, 30));
    verify->add_option("--out", out_dir, "Write verify.json here");
    verify->add_option("--inject-mutant", mutant, "Harness self-test: sign-flip")->check(CLI::IsMember({"sign-flip"}));

    auto* report = app.add_subcommand("report", "Pretty-print a comparison");
    report->add_option("--in", in_dir, "Directory written by simulate")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*theory) return cmd_theory(config_path, out_dir);
        if (*simulate) return cmd_simulate(config_path, out_dir, threads, seed);
        if (*verify) return cmd_verify(max_degree, out_dir, mutant);
        if (*report) return cmd_report(in_dir);
    } catch (const lss::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
