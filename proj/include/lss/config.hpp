#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "lss/entry_law.hpp"
#include "lss/error.hpp"
#include "lss/index_family.hpp"
#include "lss/montecarlo.hpp"
#include "lss/test_function.hpp"

namespace lss {

// Experiment configs are TOML with sections [law], [family], [functions], [run]:
//
//   [law]        kind = "gaussian" | "rademacher" | "uniform" | "two_point"
//                sigma_sq_diag = 2.0, p = 0.5 (two_point only)
//   [family]     sets = [ { kind = "prefix", gamma = 0.5 },
//                         { kind = "window", a = 0.25, b = 0.75 },
//                         { kind = "stride", modulus = 3, residues = [0, 2] },
//                         { kind = "explicit", indices = [0, 4, 7] } ]   # 0-based
//   [functions]  list = [ "x", "x2", "cos_t(1.5)", { name = "cos_t", t = 1.5 },
//                         { coefficients = [0.0, 1.0, 0.5] } ]
//   [run]        n, replicas, master_seed, threads, cheb_nodes, truncation_K,
//                contour_grid, z_gate, alpha, bootstrap

namespace detail {

inline std::string position(const toml::source_region& src) {
    if (src.begin.line == 0) return {};
    return std::to_string(src.begin.line) + ":" + std::to_string(src.begin.column);
}

inline std::string where(const toml::node* node, const std::string& field) {
    const std::string pos = node ? position(node->source()) : std::string{};
    return pos.empty() ? field : pos + " " + field;
}

template <class T>
T required(const toml::table& tbl, std::string_view key, const std::string& field, const toml::node* parent) {
    const toml::node* node = tbl.get(key);
    if (!node) throw ConfigError("missing required field", where(parent, field));
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = node->value<double>()) return *v;
        throw ConfigError("expected a number", where(node, field));
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = node->value<std::string>()) return *v;
        throw ConfigError("expected a string", where(node, field));
    } else {
        auto v = node->value<std::int64_t>();
        if (!v || !node->is_integer()) throw ConfigError("expected an integer", where(node, field));
        if (*v < 0) throw ConfigError("must be non-negative", where(node, field));
        return static_cast<T>(*v);
    }
}

template <class T>
T optional_field(const toml::table& tbl, std::string_view key, const std::string& field, T fallback) {
    if (!tbl.get(key)) return fallback;
    return required<T>(tbl, key, field, &tbl);
}

inline const toml::table& section(const toml::table& root, std::string_view name) {
    const toml::node* node = root.get(name);
    if (!node) throw ConfigError("missing section [" + std::string(name) + "]", std::string(name));
    const auto* tbl = node->as_table();
    if (!tbl) throw ConfigError("expected a table", where(node, std::string(name)));
    return *tbl;
}

inline std::vector<double> number_array(const toml::node* node, const std::string& field) {
    const auto* arr = node ? node->as_array() : nullptr;
    if (!arr) throw ConfigError("expected an array of numbers", where(node, field));
    std::vector<double> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        auto v = arr->get(i)->value<double>();
        if (!v) throw ConfigError("expected a number", where(arr->get(i), field + "[" + std::to_string(i) + "]"));
        out.push_back(*v);
    }
    return out;
}

inline std::vector<std::size_t> index_array(const toml::node* node, const std::string& field) {
    const auto* arr = node ? node->as_array() : nullptr;
    if (!arr) throw ConfigError("expected an array of integers", where(node, field));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto* el = arr->get(i);
        auto v = el->value<std::int64_t>();
        if (!v || !el->is_integer() || *v < 0) {
            throw ConfigError("expected a non-negative integer", where(el, field + "[" + std::to_string(i) + "]"));
        }
        out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
}

inline IndexSetSpec parse_set(const toml::node* node, const std::string& field) {
    const auto* tbl = node->as_table();
    if (!tbl) throw ConfigError("expected an inline table with a 'kind' key", where(node, field));
    const auto kind = required<std::string>(*tbl, "kind", field + ".kind", node);
    IndexSetSpec spec;
    if (kind == "prefix") {
        spec = PrefixSpec{required<double>(*tbl, "gamma", field + ".gamma", node)};
    } else if (kind == "window") {
        spec = WindowSpec{required<double>(*tbl, "a", field + ".a", node), required<double>(*tbl, "b", field + ".b", node)};
    } else if (kind == "stride") {
        StrideSpec s;
        s.modulus = required<std::size_t>(*tbl, "modulus", field + ".modulus", node);
        s.residues = index_array(tbl->get("residues"), field + ".residues");
        spec = s;
    } else if (kind == "explicit") {
        spec = ExplicitSpec{index_array(tbl->get("indices"), field + ".indices")};
    } else {
        throw ConfigError("unknown index set kind '" + kind + "'", where(node, field + ".kind"));
    }
    try {
        detail::validate_spec(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), where(node, field));
    }
    return spec;
}

inline FunctionSpec parse_function(const toml::node* node, const std::string& field) {
    FunctionSpec f;
    if (auto s = node->value<std::string>()) {
        const std::string& name = *s;
        if (name.rfind("cos_t(", 0) == 0 && name.back() == ')') {
            const std::string arg = name.substr(6, name.size() - 7);
            char* end = nullptr;
            f.name = "cos_t";
            f.t = std::strtod(arg.c_str(), &end);
            if (arg.empty() || end != arg.c_str() + arg.size() || !std::isfinite(f.t)) {
                throw ConfigError("cannot parse the frequency in '" + name + "'", where(node, field));
            }
            return f;
        }
        if (!is_known_function_name(name) || name == "poly" || name == "cos_t") {
            throw ConfigError("unsupported test function '" + name +
                                  "' (built-ins: 1, x, x2, x3, x4, cos_t(t), gauss_bump)",
                              where(node, field));
        }
        f.name = name;
        return f;
    }
    const auto* tbl = node->as_table();
    if (!tbl) throw ConfigError("expected a function name or table", where(node, field));
    if (tbl->get("coefficients")) {
        f.name = "poly";
        f.coefficients = number_array(tbl->get("coefficients"), field + ".coefficients");
        if (f.coefficients.empty()) throw ConfigError("coefficient list is empty", where(node, field));
        return f;
    }
    f.name = required<std::string>(*tbl, "name", field + ".name", node);
    if (!is_known_function_name(f.name) || f.name == "poly") {
        throw ConfigError("unsupported test function '" + f.name + "'", where(node, field + ".name"));
    }
    if (f.name == "cos_t") f.t = required<double>(*tbl, "t", field + ".t", node);
    return f;
}

}  // namespace detail

/// Parse and validate a config document. `source` names the input in errors.
inline ExperimentConfig parse_config(std::string_view text, std::string_view source = "config") {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string(e.description()), std::string(source) + ":" + detail::position(e.source()));
    }
    ExperimentConfig cfg;

    const auto& law = detail::section(root, "law");
    const auto kind = detail::required<std::string>(law, "kind", "law.kind", &law);
    const double sigma = detail::optional_field<double>(law, "sigma_sq_diag", "law.sigma_sq_diag", 2.0);
    const double p = detail::optional_field<double>(law, "p", "law.p", 0.5);
    try {
        cfg.law = make_entry_law(kind, sigma, p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), detail::where(&law, "law"));
    }

    const auto& fam = detail::section(root, "family");
    const auto* sets = fam.get("sets");
    if (!sets || !sets->as_array()) throw ConfigError("expected an array of index sets", detail::where(&fam, "family.sets"));
    for (std::size_t i = 0; i < sets->as_array()->size(); ++i) {
        cfg.family.push_back(
            detail::parse_set(sets->as_array()->get(i), "family.sets[" + std::to_string(i) + "]"));
    }

    const auto& fun = detail::section(root, "functions");
    const auto* list = fun.get("list");
    if (!list || !list->as_array()) {
        throw ConfigError("expected an array of test functions", detail::where(&fun, "functions.list"));
    }
    for (std::size_t i = 0; i < list->as_array()->size(); ++i) {
        cfg.functions.push_back(
            detail::parse_function(list->as_array()->get(i), "functions.list[" + std::to_string(i) + "]"));
    }

    const auto& run = detail::section(root, "run");
    cfg.n = detail::required<std::size_t>(run, "n", "run.n", &run);
    cfg.replicas = detail::required<std::size_t>(run, "replicas", "run.replicas", &run);
    cfg.master_seed = detail::optional_field<std::uint64_t>(run, "master_seed", "run.master_seed", 1);
    auto& o = cfg.options;
    o.threads = detail::optional_field<std::size_t>(run, "threads", "run.threads", 0);
    o.cheb_nodes = detail::optional_field<std::size_t>(run, "cheb_nodes", "run.cheb_nodes", kDefaultChebNodes);
    o.truncation_K = detail::optional_field<std::size_t>(run, "truncation_K", "run.truncation_K", 0);
    o.contour_grid = detail::optional_field<std::size_t>(run, "contour_grid", "run.contour_grid", 1024);
    o.z_gate = detail::optional_field<double>(run, "z_gate", "run.z_gate", 4.0);
    o.bootstrap = detail::optional_field<std::size_t>(run, "bootstrap", "run.bootstrap", 0);
    if (run.get("alpha")) o.alpha = detail::number_array(run.get("alpha"), "run.alpha");

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::string head = e.where().substr(0, e.where().find('.'));
        const toml::node* sec = root.get(head);
        throw ConfigError(std::string(e.what()).substr(e.where().size() + 2), detail::where(sec, e.where()));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), detail::where(list, "functions.list"));
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

template <class Seq, class F>
std::string join(const Seq& seq, F&& fmt) {
    std::string out = "[";
    bool first = true;
    for (const auto& v : seq) {
        if (!first) out += ", ";
        out += fmt(v);
        first = false;
    }
    return out + "]";
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

/// Canonical TOML text. Numbers carry 17 significant digits, so
/// serialize(parse(serialize(c))) == serialize(c).
inline std::string serialize_config(const ExperimentConfig& cfg) {
    using detail::fmt_double;
    auto u = [](auto v) { return std::to_string(v); };
    std::ostringstream os;
    os << "[law]\n";
    os << "kind = " << detail::quote(std::string(to_string(cfg.law.kind))) << "\n";
    os << "sigma_sq_diag = " << fmt_double(cfg.law.sigma_sq_diag) << "\n";
    if (cfg.law.kind == LawKind::two_point) os << "p = " << fmt_double(cfg.law.p) << "\n";
    os << "\n[family]\nsets = [\n";
    for (const auto& s : cfg.family) {
        os << "  ";
        if (const auto* pr = std::get_if<PrefixSpec>(&s)) {
            os << "{ kind = \"prefix\", gamma = " << fmt_double(pr->gamma) << " }";
        } else if (const auto* w = std::get_if<WindowSpec>(&s)) {
            os << "{ kind = \"window\", a = " << fmt_double(w->a) << ", b = " << fmt_double(w->b) << " }";
        } else if (const auto* st = std::get_if<StrideSpec>(&s)) {
            os << "{ kind = \"stride\", modulus = " << st->modulus << ", residues = " << detail::join(st->residues, u)
               << " }";
        } else {
            os << "{ kind = \"explicit\", indices = " << detail::join(std::get<ExplicitSpec>(s).indices, u) << " }";
        }
        os << ",\n";
    }
    os << "]\n\n[functions]\nlist = [\n";
    for (const auto& f : cfg.functions) {
        os << "  ";
        if (f.name == "poly") {
            os << "{ coefficients = " << detail::join(f.coefficients, fmt_double) << " }";
        } else if (f.name == "cos_t") {
            os << "{ name = \"cos_t\", t = " << fmt_double(f.t) << " }";
        } else {
            os << detail::quote(f.name);
        }
        os << ",\n";
    }
    const auto& o = cfg.options;
    os << "]\n\n[run]\n";
    os << "n = " << cfg.n << "\n";
    os << "replicas = " << cfg.replicas << "\n";
    os << "master_seed = " << cfg.master_seed << "\n";
    os << "threads = " << o.threads << "\n";
    os << "cheb_nodes = " << o.cheb_nodes << "\n";
    os << "truncation_K = " << o.truncation_K << "\n";
    os << "contour_grid = " << o.contour_grid << "\n";
    os << "z_gate = " << fmt_double(o.z_gate) << "\n";
    os << "bootstrap = " << o.bootstrap << "\n";
    if (!o.alpha.empty()) os << "alpha = " << detail::join(o.alpha, fmt_double) << "\n";
    return os.str();
}

/// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lss
