#pragma once

// Closed contours, adaptive evaluation of the Evans function along them,
// and winding numbers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "evans/evans.hpp"

namespace evans {

struct ContourSpec {
    enum class Kind { circle, polyline };
    Kind kind = Kind::circle;
    Complex center{};
    double radius = 1.0;
    std::vector<Complex> vertices;  // polyline corners, closed implicitly
    int initial_points = 64;
    double refinement_ratio = 0.1;
    int max_points = 4096;

    static ContourSpec circle(Complex c, double r, int points = 64) {
        ContourSpec s;
        s.kind = Kind::circle;
        s.center = c;
        s.radius = r;
        s.initial_points = points;
        return s;
    }

    static ContourSpec polyline(std::vector<Complex> v, int points = 64) {
        ContourSpec s;
        s.kind = Kind::polyline;
        s.vertices = std::move(v);
        s.initial_points = points;
        return s;
    }

    /// Counter-clockwise rectangle [x0, x1] x [y0, y1].
    static ContourSpec rectangle(double x0, double x1, double y0, double y1, int points = 64) {
        return polyline({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, points);
    }
};

namespace detail {

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2) {
    const double d1 = cross(q2 - q1, p1 - q1);
    const double d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1);
    const double d4 = cross(p2 - p1, q2 - p1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace detail

inline void validate_contour(const ContourSpec& c) {
    if (c.initial_points < 4) throw InvalidArgument("contour: initial_points must be at least 4");
    if (!(c.refinement_ratio > 0.0)) throw InvalidArgument("contour: refinement_ratio must be positive");
    if (c.max_points < c.initial_points) throw InvalidArgument("contour: max_points below initial_points");
    if (c.kind == ContourSpec::Kind::circle) {
        if (!(c.radius > 0.0) || !std::isfinite(c.radius)) throw InvalidArgument("contour: radius must be positive");
        return;
    }
    const auto& v = c.vertices;
    if (v.size() < 3) throw InvalidArgument("contour: a polyline needs at least three vertices");
    const std::size_t m = v.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (v[i] == v[(i + 1) % m]) throw InvalidArgument("contour: repeated polyline vertex");
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = i + 1; k < m; ++k) {
            if (k == i + 1 || (i == 0 && k == m - 1)) continue;
            if (detail::segments_intersect(v[i], v[(i + 1) % m], v[k], v[(k + 1) % m])) {
                throw InvalidArgument("contour: polyline edges " + std::to_string(i) + " and " + std::to_string(k) +
                                      " intersect");
            }
        }
}

/// Point on the contour at parameter s in [0, 1].
inline Complex contour_point(const ContourSpec& c, double s) {
    if (c.kind == ContourSpec::Kind::circle) {
        return c.center + std::polar(c.radius, 2.0 * std::numbers::pi * s);
    }
    const std::size_t m = c.vertices.size();
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + std::abs(c.vertices[(i + 1) % m] - c.vertices[i]);
    const double t = std::clamp(s, 0.0, 1.0) * cum[m];
    std::size_t e = 0;
    while (e + 1 < m && t >= cum[e + 1]) ++e;
    const Complex a = c.vertices[e];
    const Complex b = c.vertices[(e + 1) % m];
    const double snap = 1e-12 * cum[m];
    if (t - cum[e] <= snap) return a;
    if (cum[e + 1] - t <= snap) return b;
    const double f = (t - cum[e]) / (cum[e + 1] - cum[e]);
    // evaluate from the lexicographically smaller end so shared edges of
    // neighbouring boxes produce bit-identical points
    const bool swap = (b.real() < a.real()) || (b.real() == a.real() && b.imag() < a.imag());
    return swap ? b + (1.0 - f) * (a - b) : a + f * (b - a);
}

/// Initial parameter values; polyline corners are always included.
inline std::vector<double> initial_parameters(const ContourSpec& c) {
    std::vector<double> s;
    if (c.kind == ContourSpec::Kind::circle) {
        for (int i = 0; i < c.initial_points; ++i) s.push_back(static_cast<double>(i) / c.initial_points);
        return s;
    }
    const std::size_t m = c.vertices.size();
    std::vector<double> len(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += len[i] = std::abs(c.vertices[(i + 1) % m] - c.vertices[i]);
    double start = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const int pts = std::max(1, static_cast<int>(std::lround(c.initial_points * len[i] / total)));
        for (int k = 0; k < pts; ++k) s.push_back((start + len[i] * k / pts) / total);
        start += len[i];
    }
    return s;
}

struct WindingResult {
    int winding = 0;
    double defect = 0.0;
    double max_jump = 0.0;  // largest |principal phase increment|
};

/// Winding number of a sampled closed curve around the origin.
inline WindingResult winding_number(const std::vector<Complex>& values, bool closed = true,
                                    double max_phase_jump = 0.75 * std::numbers::pi) {
    WindingResult out;
    if (values.empty()) return out;
    for (std::size_t m = 0; m < values.size(); ++m) {
        if (values[m] == Complex(0.0, 0.0)) {
            throw RootOnContourError("winding_number: sample " + std::to_string(m) + " is exactly zero");
        }
    }
    double total = 0.0;
    const std::size_t segs = closed ? values.size() : values.size() - 1;
    for (std::size_t m = 0; m < segs; ++m) {
        const Complex a = values[m];
        const Complex b = values[(m + 1) % values.size()];
        const double d = std::arg(b / a);
        out.max_jump = std::max(out.max_jump, std::abs(d));
        if (std::abs(d) >= max_phase_jump) {
            std::ostringstream os;
            os << "winding_number: phase jump " << d << " between samples " << m << " and " << (m + 1) % values.size()
               << "; refine the contour";
            throw RefinementError(os.str());
        }
        total += d;
    }
    const double turns = total / (2.0 * std::numbers::pi);
    out.winding = static_cast<int>(std::lround(turns));
    out.defect = std::abs(turns - out.winding);
    return out;
}

struct ContourSample {
    double s = 0.0;
    EvansSample evans;
};

struct WindingReport {
    int winding = 0;
    double defect = 0.0;
    std::vector<ContourSample> samples;  // ordered by s
    double max_step_ratio = 0.0;
    int refinement_rounds = 0;
    EvansDiagnostics diagnostics;
    double monodromy_plus = 0.0;  // |Z after one loop - Z_0|_F
    double monodromy_minus = 0.0;
    double seconds = 0.0;

    std::vector<Complex> values() const {
        std::vector<Complex> v;
        for (const auto& s : samples) v.push_back(s.evans.value);
        return v;
    }
};

/// Run f(i) for i in [0, count) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t count, int threads, F&& f) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct ContourOptions {
    int threads = 1;
    SideCache* cache = nullptr;
    double max_phase_jump = 0.75 * std::numbers::pi;
};

/// Evaluate the Evans function around a closed contour.
///
/// Pass 1 labels frames and Kato-transports both bases around the loop
/// (sequential). Pass 2 solves the BVPs at every point (parallel). Segments
/// whose image step exceeds refinement_ratio relative to the smaller
/// endpoint modulus are bisected; inserted points inherit a basis
/// transported from the preceding point.
inline WindingReport contour_eval(const EvansSystem& system, const ContourSpec& contour, const EvansConfig& cfg,
                                  const ContourOptions& opts = {}) {
    validate_contour(contour);
    const auto t0 = std::chrono::steady_clock::now();

    struct Node {
        double s;
        Complex lambda;
        SideState plus;
        SideState minus;
        EvansSample sample;
    };
    std::vector<Node> nodes;

    // pass 1
    const auto params = initial_parameters(contour);
    {
        SideState p = initial_side(system, contour_point(contour, params[0]), Side::plus, cfg);
        SideState m = initial_side(system, contour_point(contour, params[0]), Side::minus, cfg);
        nodes.push_back({params[0], p.frame.lambda, p, m, {}});
        for (std::size_t i = 1; i < params.size(); ++i) {
            const Complex l = contour_point(contour, params[i]);
            p = transport_side(system, p, l, cfg);
            m = transport_side(system, m, l, cfg);
            nodes.push_back({params[i], l, p, m, {}});
        }
    }

    WindingReport report;
    {
        const SideState p = transport_side(system, nodes.back().plus, nodes.front().lambda, cfg);
        const SideState m = transport_side(system, nodes.back().minus, nodes.front().lambda, cfg);
        report.monodromy_plus = (p.Z - nodes.front().plus.Z).norm();
        report.monodromy_minus = (m.Z - nodes.front().minus.Z).norm();
    }

    const int threads = resolve_threads(opts.threads);
    auto evaluate = [&](std::vector<Node*>& todo) {
        parallel_for(todo.size(), threads, [&](std::size_t i) {
            Node& nd = *todo[i];
            nd.sample = evans_at(system, nd.lambda, nd.plus, nd.minus, cfg, opts.cache);
        });
    };

    // pass 2
    {
        std::vector<Node*> todo;
        for (auto& nd : nodes) todo.push_back(&nd);
        evaluate(todo);
    }

    auto ratio = [](const EvansSample& a, const EvansSample& b) {
        const double den = std::max(std::min(std::abs(a.value), std::abs(b.value)), 1e-300);
        return std::abs(b.value - a.value) / den;
    };

    for (;;) {
        std::vector<std::size_t> bad;
        report.max_step_ratio = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double q = ratio(nodes[i].sample, nodes[(i + 1) % nodes.size()].sample);
            report.max_step_ratio = std::max(report.max_step_ratio, q);
            if (q > contour.refinement_ratio) bad.push_back(i);
        }
        if (bad.empty()) break;
        if (nodes.size() + bad.size() > static_cast<std::size_t>(contour.max_points)) {
            std::ostringstream os;
            os << "contour_eval: refinement needs more than " << contour.max_points
               << " points (max image step ratio " << report.max_step_ratio
               << "); a root probably lies on or very near the contour";
            throw BudgetError(os.str());
        }
        std::vector<Node> fresh;
        fresh.reserve(bad.size());
        for (std::size_t i : bad) {
            const Node& a = nodes[i];
            const double s_next = (i + 1 == nodes.size()) ? 1.0 : nodes[i + 1].s;
            const double s_mid = 0.5 * (a.s + s_next);
            const Complex l = contour_point(contour, s_mid);
            fresh.push_back({s_mid, l, transport_side(system, a.plus, l, cfg), transport_side(system, a.minus, l, cfg),
                             {}});
        }
        std::vector<Node*> todo;
        for (auto& nd : fresh) todo.push_back(&nd);
        evaluate(todo);
        std::vector<Node> merged;
        merged.reserve(nodes.size() + fresh.size());
        std::size_t f = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            merged.push_back(std::move(nodes[i]));
            if (f < bad.size() && bad[f] == i) merged.push_back(std::move(fresh[f++]));
        }
        nodes = std::move(merged);
        ++report.refinement_rounds;
    }

    for (const auto& nd : nodes) {
        report.samples.push_back({nd.s, nd.sample});
        report.diagnostics.absorb(nd.sample.diagnostics);
    }
    const WindingResult w = winding_number(report.values(), true, opts.max_phase_jump);
    report.winding = w.winding;
    report.defect = w.defect;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace evans
