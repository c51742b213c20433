#pragma once

// Subcommand implementations and their output files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "evans/cli/config.hpp"
#include "evans/contour.hpp"
#include "evans/oracle.hpp"
#include "evans/roots.hpp"

namespace evans::cli {

enum ExitCode : int { ok = 0, config_error = 1, numerical_failure = 2 };

using nlohmann::json;

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json box_json(const Box& b) { return json::array({b.x0, b.x1, b.y0, b.y1}); }

inline json system_json(const RunConfig& cfg, const EvansSystem& sys) {
    const auto& s = cfg.system;
    json j{{"name", s.name}, {"n", sys.n}, {"r", sys.r}};
    if (s.name == "nagumo-coupled") {
        j["a"] = s.a;
        j["b"] = s.b;
    } else if (s.name == "kdv") {
        j["p"] = s.p;
        j["c"] = s.c;
    } else if (s.name == "swift-hohenberg" || s.name == "custom") {
        j["mu"] = s.mu;
        j["nu_param"] = s.nu_param;
        j["modes"] = sys.n / 4;
        j["profile"] = s.profile.empty() ? json(nullptr) : json(s.profile);
    } else if (s.name == "implanted-root") {
        j["root"] = complex_json(s.root);
    }
    return j;
}

inline json contour_json(const ContourSpec& c) {
    json j;
    if (c.kind == ContourSpec::Kind::circle) {
        j = {{"kind", "circle"}, {"center", complex_json(c.center)}, {"radius", c.radius}};
    } else {
        json v = json::array();
        for (auto z : c.vertices) v.push_back(complex_json(z));
        j = {{"kind", "polyline"}, {"vertices", v}};
    }
    j["initial_points"] = c.initial_points;
    j["refinement_ratio"] = c.refinement_ratio;
    j["max_points"] = c.max_points;
    return j;
}

inline json settings_json(const RunConfig& cfg, const EvansSystem& sys) {
    const EvansConfig e = evans_config(cfg);
    return {{"L", e.length(sys)}, {"N", e.degree(sys)}, {"mode", to_string(cfg.mode)},
            {"threads", resolve_threads(cfg.threads)}};
}

inline void write_json(const std::filesystem::path& p, const json& j) {
    std::ofstream out(p);
    out << j.dump(2) << '\n';
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_samples_csv(const std::filesystem::path& p, const WindingReport& rep) {
    std::ofstream out(p);
    out << "s,re_lambda,im_lambda,re_E,im_E,abs_E,arg_E\n";
    for (const auto& s : rep.samples) {
        const Complex l = s.evans.lambda;
        const Complex e = s.evans.value;
        out << fmt(s.s) << ',' << fmt(l.real()) << ',' << fmt(l.imag()) << ',' << fmt(e.real()) << ','
            << fmt(e.imag()) << ',' << fmt(std::abs(e)) << ',' << fmt(std::arg(e)) << '\n';
    }
}

inline void write_plot_script(const std::filesystem::path& p, const std::string& title) {
    std::ofstream out(p);
    out << "# gnuplot script; run from this directory: gnuplot plot.gp\n"
        << "set datafile separator ','\n"
        << "set terminal pngcairo size 1200,560\n"
        << "set output 'contour.png'\n"
        << "set multiplot layout 1,2 title '" << title << "'\n"
        << "set key off\n"
        << "set size ratio -1\n"
        << "set title 'contour'\n"
        << "set xlabel 'Re {/Symbol l}'\n"
        << "set ylabel 'Im {/Symbol l}'\n"
        << "plot 'samples.csv' every ::1 using 2:3 with lines lw 2 lc rgb '#1f4e79'\n"
        << "set title 'Evans function image'\n"
        << "set xlabel 'Re E'\n"
        << "set ylabel 'Im E'\n"
        << "set size noratio\n"
        << "plot 'samples.csv' every ::1 using 4:5 with lines lw 2 lc rgb '#1f4e79', \\\n"
        << "     '-' using 1:2 with points pt 5 ps 1.5 lc rgb 'red'\n"
        << "0,0\n"
        << "e\n"
        << "unset multiplot\n";
}

inline json diagnostics_json(const EvansDiagnostics& d) {
    return {{"ode", d.ode_residual},
            {"bc", d.bc_residual},
            {"biorthogonality", d.biorthogonality},
            {"lstsq", d.lstsq_residual},
            {"chebyshev_tail", d.chebyshev_tail}};
}

inline json error_json(const std::exception& e) {
    if (const auto* ee = dynamic_cast<const Error*>(&e)) return {{"kind", ee->kind()}, {"message", ee->what()}};
    return {{"kind", "internal"}, {"message", e.what()}};
}

/// Required fields of report.json and their JSON types.
inline std::vector<std::string> report_schema_errors(const json& j) {
    std::vector<std::string> errs;
    auto need = [&](const json& obj, const std::string& key, json::value_t type, const std::string& path) {
        if (!obj.contains(key)) {
            errs.push_back("missing " + path + key);
            return;
        }
        const auto t = obj.at(key).type();
        const bool number = type == json::value_t::number_float &&
                            (t == json::value_t::number_float || t == json::value_t::number_integer ||
                             t == json::value_t::number_unsigned);
        const bool integer = type == json::value_t::number_integer &&
                             (t == json::value_t::number_integer || t == json::value_t::number_unsigned);
        if (!(t == type || number || integer)) errs.push_back("wrong type for " + path + key);
    };
    using vt = json::value_t;
    if (!j.is_object()) return {"report is not an object"};
    need(j, "command", vt::string, "");
    need(j, "system", vt::object, "");
    need(j, "settings", vt::object, "");
    need(j, "status", vt::string, "");
    if (!errs.empty()) return errs;
    need(j.at("system"), "name", vt::string, "system.");
    need(j.at("settings"), "L", vt::number_float, "settings.");
    need(j.at("settings"), "N", vt::number_integer, "settings.");
    need(j.at("settings"), "mode", vt::string, "settings.");
    const std::string status = j.at("status").get<std::string>();
    if (status == "error") {
        need(j, "error", vt::object, "");
        if (j.contains("error") && j.at("error").is_object()) {
            need(j.at("error"), "kind", vt::string, "error.");
            need(j.at("error"), "message", vt::string, "error.");
        }
        return errs;
    }
    if (status != "ok") errs.push_back("status must be 'ok' or 'error'");
    if (j.at("command") == "contour") {
        need(j, "winding", vt::number_integer, "");
        need(j, "rounding_defect", vt::number_float, "");
        need(j, "points", vt::number_integer, "");
        need(j, "max_step_ratio", vt::number_float, "");
        need(j, "residuals", vt::object, "");
        need(j, "timing", vt::object, "");
        need(j, "contour", vt::object, "");
        if (j.contains("timing") && j.at("timing").is_object()) need(j.at("timing"), "seconds", vt::number_float, "timing.");
        if (j.contains("residuals") && j.at("residuals").is_object()) {
            for (const char* k : {"ode", "bc", "biorthogonality", "lstsq", "chebyshev_tail"})
                need(j.at("residuals"), k, vt::number_float, "residuals.");
        }
    }
    return errs;
}

struct Paths {
    std::filesystem::path dir;
    std::filesystem::path report() const { return dir / "report.json"; }
    std::filesystem::path samples() const { return dir / "samples.csv"; }
    std::filesystem::path plot() const { return dir / "plot.gp"; }
    std::filesystem::path roots() const { return dir / "roots.json"; }
};

inline Paths prepare_output(const RunConfig& cfg) {
    Paths p{cfg.output_dir};
    std::error_code ec;
    std::filesystem::create_directories(p.dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    return p;
}

inline json base_report(const char* command, const RunConfig& cfg, const EvansSystem& sys) {
    return {{"command", command}, {"system", system_json(cfg, sys)}, {"settings", settings_json(cfg, sys)}};
}

inline int fail(const Paths& p, json report, const std::exception& e, std::ostream& err) {
    report["status"] = "error";
    report["error"] = error_json(e);
    write_json(p.report(), report);
    err << "error: " << e.what() << '\n';
    return numerical_failure;
}

inline int run_contour(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    if (!cfg.has_contour) throw ConfigError("the contour subcommand needs a [contour] section");
    const EvansSystem sys = build_system(cfg);
    const Paths paths = prepare_output(cfg);
    json report = base_report("contour", cfg, sys);
    const ContourSpec contour = contour_spec(cfg);
    report["contour"] = contour_json(contour);
    try {
        ContourOptions opts;
        opts.threads = cfg.threads;
        const WindingReport rep = contour_eval(sys, contour, evans_config(cfg), opts);
        write_samples_csv(paths.samples(), rep);
        write_plot_script(paths.plot(), sys.label + ": winding " + std::to_string(rep.winding));
        report["status"] = "ok";
        report["winding"] = rep.winding;
        report["rounding_defect"] = rep.defect;
        report["points"] = rep.samples.size();
        report["max_step_ratio"] = rep.max_step_ratio;
        report["refinement_rounds"] = rep.refinement_rounds;
        report["residuals"] = diagnostics_json(rep.diagnostics);
        report["monodromy"] = {{"plus", rep.monodromy_plus}, {"minus", rep.monodromy_minus}};
        report["timing"] = {{"seconds", rep.seconds}};
        write_json(paths.report(), report);
        log << sys.label << ": winding number " << rep.winding << " (" << rep.samples.size() << " points, "
            << rep.seconds << " s)\n";
        return ok;
    } catch (const std::exception& e) {
        return fail(paths, report, e, err);
    }
}

inline int run_roots(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    if (!cfg.region) throw ConfigError("the roots subcommand needs [roots] region = [x0, x1, y0, y1]");
    const EvansSystem sys = build_system(cfg);
    const Paths paths = prepare_output(cfg);
    json report = base_report("roots", cfg, sys);
    report["region"] = box_json(*cfg.region);
    try {
        RootOptions opts;
        opts.target_size = cfg.target_size;
        opts.edge_points = cfg.edge_points;
        opts.cluster_radius = cfg.cluster_radius;
        opts.contour.threads = cfg.threads;
        ContourSpec proto;
        proto.refinement_ratio = cfg.refinement_ratio;
        const auto t0 = std::chrono::steady_clock::now();
        const RootReport rr = root_localize(sys, *cfg.region, evans_config(cfg), opts, proto);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json roots = json::array();
        for (const auto& r : rr.roots) {
            roots.push_back({{"center", complex_json(r.root)},
                             {"multiplicity", r.multiplicity},
                             {"box", box_json(r.box)},
                             {"cluster", r.cluster}});
        }
        json out{{"system", system_json(cfg, sys)},
                 {"region", box_json(rr.region)},
                 {"total_winding", rr.total_winding},
                 {"target_size", cfg.target_size},
                 {"cluster_radius", cfg.cluster_radius},
                 {"boxes_evaluated", rr.boxes_evaluated},
                 {"roots", roots}};
        write_json(paths.roots(), out);
        report["status"] = "ok";
        report["total_winding"] = rr.total_winding;
        report["root_count"] = rr.roots.size();
        report["timing"] = {{"seconds", secs}};
        write_json(paths.report(), report);
        log << sys.label << ": " << rr.roots.size() << " root box(es), total winding " << rr.total_winding << '\n';
        for (const auto& r : rr.roots)
            log << "  " << r.root << "  multiplicity " << r.multiplicity << (r.cluster ? " (cluster)" : "") << '\n';
        return ok;
    } catch (const std::exception& e) {
        return fail(paths, report, e, err);
    }
}

/// Compare the Evans-function winding on the contour with the shooting
/// Wronskian on the same circle; with a region, also check every localised
/// root against the shooting oracle and the finite-difference spectrum.
inline int run_oracle_compare(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    if (!cfg.has_contour && !cfg.region) throw ConfigError("oracle-compare needs a [contour] or a [roots] region");
    if (cfg.has_contour && cfg.contour.kind != ContourSpec::Kind::circle) {
        throw ConfigError("oracle-compare supports circular contours only");
    }
    const EvansSystem sys = build_system(cfg);
    if (sys.n > 6) throw ConfigError("oracle-compare needs a system with n <= 6");
    const Paths paths = prepare_output(cfg);
    json report = base_report("oracle-compare", cfg, sys);
    try {
        const EvansConfig ecfg = evans_config(cfg);
        ShootingConfig sh;
        sh.L = ecfg.length(sys);
        bool agree = true;
        if (cfg.has_contour) {
            ContourOptions opts;
            opts.threads = cfg.threads;
            const ContourSpec c = contour_spec(cfg);
            const WindingReport rep = contour_eval(sys, c, ecfg, opts);
            const int ws = shooting_winding(sys, c.center, c.radius, std::max(c.initial_points, 64), sh);
            report["contour"] = contour_json(c);
            report["evans_winding"] = rep.winding;
            report["shooting_winding"] = ws;
            agree = agree && ws == rep.winding;
            log << "contour: Evans winding " << rep.winding << ", shooting winding " << ws << '\n';
        }
        if (cfg.region) {
            RootOptions opts;
            opts.target_size = cfg.target_size;
            opts.edge_points = cfg.edge_points;
            opts.contour.threads = cfg.threads;
            ContourSpec proto;
            proto.refinement_ratio = cfg.refinement_ratio;
            const RootReport rr = root_localize(sys, *cfg.region, ecfg, opts, proto);
            std::vector<Complex> fd;
            if (auto op = second_order_form(cfg)) fd = fd_eigs(*op, cfg.oracle.fd_ell, cfg.oracle.fd_points);
            json roots = json::array();
            for (const auto& r : rr.roots) {
                const int ws = shooting_winding(sys, r.root, cfg.oracle.shooting_radius, cfg.oracle.shooting_points, sh);
                json entry{{"center", complex_json(r.root)}, {"multiplicity", r.multiplicity}, {"shooting_winding", ws}};
                bool ok_root = ws == r.multiplicity;
                if (!fd.empty()) {
                    double best = std::numeric_limits<double>::infinity();
                    for (auto z : fd) best = std::min(best, std::abs(z - r.root));
                    entry["fd_distance"] = best;
                    ok_root = ok_root && best <= 1e-3;
                }
                entry["agree"] = ok_root;
                agree = agree && ok_root;
                roots.push_back(entry);
                log << "root " << r.root << ": shooting winding " << ws
                    << (entry.contains("fd_distance") ? ", fd distance " + fmt(entry["fd_distance"].get<double>()) : "")
                    << (ok_root ? "  ok" : "  MISMATCH") << '\n';
            }
            report["region"] = box_json(rr.region);
            report["roots"] = roots;
        }
        report["agree"] = agree;
        if (!agree) throw Error("oracle_mismatch", "oracle-compare: the Evans function and the oracles disagree");
        report["status"] = "ok";
        write_json(paths.report(), report);
        return ok;
    } catch (const std::exception& e) {
        return fail(paths, report, e, err);
    }
}

}  // namespace evans::cli
