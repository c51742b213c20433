#pragma once

// Run configuration: TOML file plus command-line overrides.
//
//   [system]   name, and per-system parameters (a, b | p, c | mu, nu_param,
//              modes, profile, zero_profile | root)
//   [contour]  kind = "circle" | "polyline", center = [re, im], radius,
//              vertices = [[re, im], ...], points, max_points
//   [solver]   L, N, mode = "sort" | "track", ratio
//   [roots]    region = [x0, x1, y0, y1], target_size, edge_points, cluster_radius
//   [oracle]   fd_ell, fd_points, shooting_radius, shooting_points
//   [output]   dir
//   [run]      threads = n | "auto"

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include <toml.hpp>

#include "evans/contour.hpp"
#include "evans/problems.hpp"
#include "evans/profile.hpp"
#include "evans/roots.hpp"

namespace evans::cli {

/// Raised for anything wrong with the configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SystemSpec {
    std::string name;
    double a = 0.1;
    double b = -1.0;
    double p = 4.0;
    double c = 5.0;
    double mu = 0.675;
    double nu_param = 2.0;
    int modes = 8;
    std::string profile;
    bool zero_profile = false;
    Complex root{0.0, 0.0};
};

struct OracleSpec {
    double fd_ell = 15.0;
    int fd_points = 600;
    double shooting_radius = 1e-3;
    int shooting_points = 32;
};

struct RunConfig {
    SystemSpec system;
    ContourSpec contour;
    bool has_contour = false;
    double L = 0.0;  // 0: system default
    int N = 0;       // 0: system default
    FrameMode mode = FrameMode::sort;
    double refinement_ratio = 0.1;
    std::string output_dir = "out";
    int threads = 1;  // 0: auto
    std::optional<Box> region;
    double target_size = 1e-3;
    int edge_points = 16;
    double cluster_radius = 0.0;
    OracleSpec oracle;
    std::string source;  // config path, if any
};

/// Command-line values that override the file.
struct Overrides {
    std::optional<std::string> system;
    std::optional<double> L;
    std::optional<int> N;
    std::optional<std::string> mode;
    std::optional<double> ratio;
    std::optional<std::string> out;
    std::optional<std::string> threads;
};

inline const std::set<std::string>& known_systems() {
    static const std::set<std::string> names{"nagumo", "nagumo-coupled", "kdv", "swift-hohenberg", "custom",
                                             "implanted-root"};
    return names;
}

namespace detail {

inline std::string where(const toml::node& n) {
    const auto& src = n.source();
    if (!src.begin) return {};
    return " (line " + std::to_string(src.begin.line) + ")";
}

inline void check_keys(const toml::table& t, const std::string& section, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : t) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k.str() == a;
        if (!ok) throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + section + "]" + where(v));
    }
}

inline double get_real(const toml::table& t, const char* key, const std::string& section, double fallback) {
    const toml::node* n = t.get(key);
    if (!n) return fallback;
    if (auto v = n->value<double>()) return *v;
    throw ConfigError("[" + section + "] " + key + " must be a number" + where(*n));
}

inline int get_int(const toml::table& t, const char* key, const std::string& section, int fallback) {
    const toml::node* n = t.get(key);
    if (!n) return fallback;
    if (n->is_integer()) return static_cast<int>(n->value<int64_t>().value());
    throw ConfigError("[" + section + "] " + key + " must be an integer" + where(*n));
}

inline std::string get_string(const toml::table& t, const char* key, const std::string& section,
                              const std::string& fallback) {
    const toml::node* n = t.get(key);
    if (!n) return fallback;
    if (auto v = n->value<std::string>()) return *v;
    throw ConfigError("[" + section + "] " + key + " must be a string" + where(*n));
}

inline Complex get_complex(const toml::node& n, const std::string& what) {
    const toml::array* arr = n.as_array();
    if (!arr || arr->size() != 2) throw ConfigError(what + " must be a pair [re, im]" + where(n));
    auto re = (*arr)[0].value<double>();
    auto im = (*arr)[1].value<double>();
    if (!re || !im) throw ConfigError(what + " must contain two numbers" + where(n));
    return {*re, *im};
}

inline const toml::table* section(const toml::table& root, const char* name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table" + where(*n));
    return n->as_table();
}

inline FrameMode parse_mode(const std::string& s) {
    if (s == "sort") return FrameMode::sort;
    if (s == "track") return FrameMode::track;
    throw ConfigError("mode must be 'sort' or 'track', got '" + s + "'");
}

inline int parse_threads(const std::string& s) {
    if (s == "auto") return 0;
    try {
        std::size_t used = 0;
        const int n = std::stoi(s, &used);
        if (used == s.size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError("threads must be a positive integer or 'auto', got '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_config(const toml::table& root) {
    using namespace detail;
    RunConfig cfg;
    check_keys(root, "top level", {"system", "contour", "solver", "roots", "oracle", "output", "run"});

    if (const auto* t = section(root, "system")) {
        check_keys(*t, "system",
                   {"name", "a", "b", "p", "c", "mu", "nu_param", "modes", "profile", "zero_profile", "root"});
        auto& s = cfg.system;
        s.name = get_string(*t, "name", "system", "");
        s.a = get_real(*t, "a", "system", s.a);
        s.b = get_real(*t, "b", "system", s.b);
        s.p = get_real(*t, "p", "system", s.p);
        s.c = get_real(*t, "c", "system", s.c);
        s.mu = get_real(*t, "mu", "system", s.mu);
        s.nu_param = get_real(*t, "nu_param", "system", s.nu_param);
        s.modes = get_int(*t, "modes", "system", s.modes);
        s.profile = get_string(*t, "profile", "system", "");
        if (const toml::node* z = t->get("zero_profile")) {
            auto v = z->value<bool>();
            if (!v) throw ConfigError("[system] zero_profile must be a boolean" + where(*z));
            s.zero_profile = *v;
        }
        if (const toml::node* r = t->get("root")) s.root = get_complex(*r, "[system] root");
    }

    if (const auto* t = section(root, "contour")) {
        check_keys(*t, "contour", {"kind", "center", "radius", "vertices", "points", "max_points"});
        cfg.has_contour = true;
        auto& c = cfg.contour;
        const std::string kind = get_string(*t, "kind", "contour", "circle");
        if (kind == "circle") {
            c.kind = ContourSpec::Kind::circle;
            const toml::node* center = t->get("center");
            if (!center) throw ConfigError("[contour] circle needs 'center'");
            c.center = get_complex(*center, "[contour] center");
            if (!t->get("radius")) throw ConfigError("[contour] circle needs 'radius'");
            c.radius = get_real(*t, "radius", "contour", 0.0);
        } else if (kind == "polyline") {
            c.kind = ContourSpec::Kind::polyline;
            const toml::node* v = t->get("vertices");
            if (!v || !v->is_array()) throw ConfigError("[contour] polyline needs 'vertices' = [[re, im], ...]");
            for (const auto& e : *v->as_array()) c.vertices.push_back(get_complex(e, "[contour] vertex"));
        } else {
            throw ConfigError("[contour] kind must be 'circle' or 'polyline', got '" + kind + "'");
        }
        c.initial_points = get_int(*t, "points", "contour", c.initial_points);
        c.max_points = get_int(*t, "max_points", "contour", c.max_points);
    }

    if (const auto* t = section(root, "solver")) {
        check_keys(*t, "solver", {"L", "N", "mode", "ratio"});
        cfg.L = get_real(*t, "L", "solver", cfg.L);
        if (t->get("L") && !(cfg.L > 0.0)) throw ConfigError("[solver] L must be positive");
        cfg.N = get_int(*t, "N", "solver", cfg.N);
        if (t->get("N") && cfg.N < 2) throw ConfigError("[solver] N must be at least 2");
        cfg.mode = parse_mode(get_string(*t, "mode", "solver", "sort"));
        cfg.refinement_ratio = get_real(*t, "ratio", "solver", cfg.refinement_ratio);
    }

    if (const auto* t = section(root, "roots")) {
        check_keys(*t, "roots", {"region", "target_size", "edge_points", "cluster_radius"});
        if (const toml::node* r = t->get("region")) {
            const toml::array* arr = r->as_array();
            if (!arr || arr->size() != 4) throw ConfigError("[roots] region must be [x0, x1, y0, y1]" + where(*r));
            double v[4];
            for (std::size_t i = 0; i < 4; ++i) {
                auto d = (*arr)[i].value<double>();
                if (!d) throw ConfigError("[roots] region entries must be numbers" + where(*r));
                v[i] = *d;
            }
            cfg.region = Box{v[0], v[1], v[2], v[3]};
        }
        cfg.target_size = get_real(*t, "target_size", "roots", cfg.target_size);
        cfg.edge_points = get_int(*t, "edge_points", "roots", cfg.edge_points);
        cfg.cluster_radius = get_real(*t, "cluster_radius", "roots", cfg.cluster_radius);
    }

    if (const auto* t = section(root, "oracle")) {
        check_keys(*t, "oracle", {"fd_ell", "fd_points", "shooting_radius", "shooting_points"});
        cfg.oracle.fd_ell = get_real(*t, "fd_ell", "oracle", cfg.oracle.fd_ell);
        cfg.oracle.fd_points = get_int(*t, "fd_points", "oracle", cfg.oracle.fd_points);
        cfg.oracle.shooting_radius = get_real(*t, "shooting_radius", "oracle", cfg.oracle.shooting_radius);
        cfg.oracle.shooting_points = get_int(*t, "shooting_points", "oracle", cfg.oracle.shooting_points);
    }

    if (const auto* t = section(root, "output")) {
        check_keys(*t, "output", {"dir"});
        cfg.output_dir = get_string(*t, "dir", "output", cfg.output_dir);
    }

    if (const auto* t = section(root, "run")) {
        check_keys(*t, "run", {"threads"});
        if (const toml::node* n = t->get("threads")) {
            if (n->is_integer()) {
                cfg.threads = static_cast<int>(n->value<int64_t>().value());
                if (cfg.threads < 1) throw ConfigError("[run] threads must be positive");
            } else if (auto s = n->value<std::string>()) {
                cfg.threads = parse_threads(*s);
            } else {
                throw ConfigError("[run] threads must be an integer or 'auto'" + where(*n));
            }
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    try {
        RunConfig cfg = parse_config(toml::parse_file(path));
        cfg.source = path;
        return cfg;
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << path << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(os.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.system) cfg.system.name = *o.system;
    if (o.L) cfg.L = *o.L;
    if (o.N) cfg.N = *o.N;
    if (o.mode) cfg.mode = detail::parse_mode(*o.mode);
    if (o.ratio) cfg.refinement_ratio = *o.ratio;
    if (o.out) cfg.output_dir = *o.out;
    if (o.threads) cfg.threads = detail::parse_threads(*o.threads);
}

/// Checks that do not depend on which subcommand runs.
inline void validate(const RunConfig& cfg) {
    const auto& s = cfg.system;
    if (s.name.empty()) throw ConfigError("no system given ([system] name or --system)");
    if (!known_systems().count(s.name)) {
        std::string names;
        for (const auto& n : known_systems()) names += (names.empty() ? "" : ", ") + n;
        throw ConfigError("unknown system '" + s.name + "' (known: " + names + ")");
    }
    if (cfg.L != 0.0 && !(cfg.L > 0.0)) throw ConfigError("L must be positive");
    if (!std::isfinite(cfg.L)) throw ConfigError("L must be finite");
    if (cfg.N != 0 && cfg.N < 2) throw ConfigError("N must be at least 2");
    if (!(cfg.refinement_ratio > 0.0)) throw ConfigError("ratio must be positive");
    if (cfg.threads < 0) throw ConfigError("threads must be positive or 'auto'");
    if (cfg.output_dir.empty()) throw ConfigError("output directory must not be empty");
    if (s.name == "kdv" && (!(s.p > 2.0) || !(s.c > 0.0))) throw ConfigError("kdv needs p > 2 and c > 0");
    if ((s.name == "swift-hohenberg" || s.name == "custom") && (s.modes < 4 || s.modes % 2 != 0)) {
        throw ConfigError("modes must be even and at least 4");
    }
    if (s.name == "custom" && s.profile.empty()) throw ConfigError("system 'custom' needs a profile path");
    if (s.name == "swift-hohenberg" && s.profile.empty() && !s.zero_profile) {
        throw ConfigError("swift-hohenberg needs a profile path or zero_profile = true");
    }
    if (cfg.has_contour) {
        try {
            ContourSpec c = cfg.contour;
            c.refinement_ratio = cfg.refinement_ratio;
            validate_contour(c);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.region && !cfg.region->valid()) throw ConfigError("[roots] region must satisfy x0 < x1 and y0 < y1");
    if (!(cfg.target_size > 0.0)) throw ConfigError("[roots] target_size must be positive");
    if (cfg.edge_points < 2) throw ConfigError("[roots] edge_points must be at least 2");
    if (!(cfg.cluster_radius >= 0.0)) throw ConfigError("[roots] cluster_radius must be non-negative");
    if (!(cfg.oracle.fd_ell > 0.0) || cfg.oracle.fd_points < 3) throw ConfigError("[oracle] fd settings invalid");
    if (!(cfg.oracle.shooting_radius > 0.0) || cfg.oracle.shooting_points < 4) {
        throw ConfigError("[oracle] shooting settings invalid");
    }
}

/// Build the system; profile problems are configuration errors.
inline EvansSystem build_system(const RunConfig& cfg) {
    const auto& s = cfg.system;
    try {
        if (s.name == "nagumo") return nagumo_scalar();
        if (s.name == "nagumo-coupled") return nagumo_coupled(s.a, s.b);
        if (s.name == "kdv") return kdv(s.p, s.c);
        if (s.name == "implanted-root") return implanted_root(s.root);
        std::shared_ptr<const SampledProfile> prof;
        if (!s.profile.empty()) {
            std::filesystem::path p = s.profile;
            if (p.is_relative() && !cfg.source.empty()) p = std::filesystem::path(cfg.source).parent_path() / p;
            prof = std::make_shared<const SampledProfile>(load_profile(p.string()));
        }
        SwiftHohenbergParams prm{s.mu, s.nu_param, s.modes};
        if (prof && prof->y_modes() != 0) prm.modes = prof->y_modes();
        EvansSystem sys = swift_hohenberg(prm, prof);
        const double L = cfg.L > 0.0 ? cfg.L : sys.default_L;
        if (L > sys.x_extent * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "L = " << L << " exceeds the profile range (|x| <= " << sys.x_extent << ")";
            throw ConfigError(os.str());
        }
        if (s.name == "custom") sys.label = "custom";
        return sys;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

inline std::optional<SecondOrderOperator> second_order_form(const RunConfig& cfg) {
    if (cfg.system.name == "nagumo") return nagumo_scalar_operator();
    if (cfg.system.name == "nagumo-coupled") return nagumo_coupled_operator(cfg.system.a, cfg.system.b);
    return std::nullopt;
}

inline EvansConfig evans_config(const RunConfig& cfg) {
    EvansConfig e;
    e.L = cfg.L;
    e.N = cfg.N;
    e.mode = cfg.mode;
    return e;
}

inline ContourSpec contour_spec(const RunConfig& cfg) {
    ContourSpec c = cfg.contour;
    c.refinement_ratio = cfg.refinement_ratio;
    return c;
}

}  // namespace evans::cli
