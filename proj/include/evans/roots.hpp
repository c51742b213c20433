#pragma once

// Root localisation by recursive subdivision driven by winding numbers.

#include <array>
#include <functional>
#include <sstream>
#include <vector>

#include "evans/contour.hpp"

namespace evans {

struct Box {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

    Complex center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double diameter() const { return std::hypot(x1 - x0, y1 - y0); }
    bool valid() const { return x0 < x1 && y0 < y1; }
    Box expanded(double fraction) const {
        const double d = fraction * diameter();
        return {x0 - d, x1 + d, y0 - d, y1 + d};
    }
};

struct LocatedRoot {
    Complex root{};
    int multiplicity = 0;
    Box box;
    /// True when subdivision stopped early because children disagreed with
    /// their parent; the box then encloses a cluster.
    bool cluster = false;
};

struct RootOptions {
    double target_size = 1e-3;
    int edge_points = 16;  // initial points per box edge
    int max_boxes = 2000;
    int max_retries = 3;
    /// Roots closer than this are merged into one cluster (0 disables). A
    /// k-fold root of a function known to relative accuracy eps splits into
    /// k simple roots about eps^(1/k) apart.
    double cluster_radius = 0.0;
    ContourOptions contour{};
};

struct RootReport {
    std::vector<LocatedRoot> roots;
    int total_winding = 0;
    int boxes_evaluated = 0;
    Box region;  // region actually used (possibly expanded)
    std::vector<LocatedRoot> unmerged;  // before clustering
};

/// Single-link grouping of roots within `radius`; a group becomes one entry
/// at the multiplicity-weighted centroid, boxed by the union of its boxes.
inline std::vector<LocatedRoot> merge_clusters(const std::vector<LocatedRoot>& roots, double radius) {
    const std::size_t m = roots.size();
    std::vector<std::size_t> group(m);
    for (std::size_t i = 0; i < m; ++i) group[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        return group[i] == i ? i : group[i] = find(group[i]);
    };
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = i + 1; k < m; ++k)
            if (std::abs(roots[i].root - roots[k].root) < radius) group[find(i)] = find(k);
    std::vector<LocatedRoot> out;
    std::vector<std::size_t> slot(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t g = find(i);
        const LocatedRoot& r = roots[i];
        if (slot[g] == m) {
            slot[g] = out.size();
            out.push_back(r);
            out.back().root *= r.multiplicity;
            continue;
        }
        LocatedRoot& acc = out[slot[g]];
        acc.root += static_cast<double>(r.multiplicity) * r.root;
        acc.multiplicity += r.multiplicity;
        acc.cluster = true;
        acc.box = {std::min(acc.box.x0, r.box.x0), std::max(acc.box.x1, r.box.x1), std::min(acc.box.y0, r.box.y0),
                   std::max(acc.box.y1, r.box.y1)};
    }
    for (auto& r : out) r.root /= static_cast<double>(r.multiplicity);
    return out;
}

namespace detail {

class Localizer {
public:
    Localizer(const EvansSystem& s, const EvansConfig& cfg, const RootOptions& opts, const ContourSpec& proto)
        : system_(s), cfg_(cfg), opts_(opts), proto_(proto) {
        if (!opts_.contour.cache) opts_.contour.cache = &cache_;
    }

    int winding(const Box& b) {
        if (++boxes_ > opts_.max_boxes) {
            throw BudgetError("root_localize: more than " + std::to_string(opts_.max_boxes) + " boxes evaluated");
        }
        ContourSpec c = ContourSpec::rectangle(b.x0, b.x1, b.y0, b.y1, 4 * opts_.edge_points);
        c.refinement_ratio = proto_.refinement_ratio;
        c.max_points = proto_.max_points;
        return contour_eval(system_, c, cfg_, opts_.contour).winding;
    }

    void refine(const Box& b, int w, std::vector<LocatedRoot>& out) {
        if (w == 0) return;
        if (b.diameter() <= opts_.target_size) {
            out.push_back({b.center(), w, b, false});
            return;
        }
        // off-centre split lines keep away from roots at round numbers
        static constexpr std::array<std::pair<double, double>, 4> fractions{
            {{0.4927, 0.5063}, {0.4611, 0.5389}, {0.5377, 0.4723}, {0.4213, 0.4451}}};
        for (int attempt = 0; attempt <= opts_.max_retries && attempt < static_cast<int>(fractions.size());
             ++attempt) {
            const auto [fx, fy] = fractions[static_cast<std::size_t>(attempt)];
            const double xm = b.x0 + fx * (b.x1 - b.x0);
            const double ym = b.y0 + fy * (b.y1 - b.y0);
            const std::array<Box, 4> kids{
                Box{b.x0, xm, b.y0, ym}, Box{xm, b.x1, b.y0, ym}, Box{b.x0, xm, ym, b.y1}, Box{xm, b.x1, ym, b.y1}};
            std::array<int, 4> wk{};
            bool ok = true;
            int sum = 0;
            for (std::size_t k = 0; k < 4 && ok; ++k) {
                try {
                    wk[k] = winding(kids[k]);
                    sum += wk[k];
                } catch (const RootOnContourError&) {
                    ok = false;
                } catch (const RefinementError&) {
                    ok = false;
                } catch (const BudgetError&) {
                    if (boxes_ > opts_.max_boxes) throw;
                    ok = false;
                }
            }
            if (!ok || sum != w) continue;
            for (std::size_t k = 0; k < 4; ++k) refine(kids[k], wk[k], out);
            return;
        }
        out.push_back({b.center(), w, b, true});
    }

    int boxes() const { return boxes_; }

private:
    const EvansSystem& system_;
    EvansConfig cfg_;
    RootOptions opts_;
    ContourSpec proto_;
    SideCache cache_;
    int boxes_ = 0;
};

}  // namespace detail

/// Roots of the Evans function inside `region`, each with the winding
/// number of the smallest box that isolates it.
inline RootReport root_localize(const EvansSystem& system, const Box& region, const EvansConfig& cfg,
                                const RootOptions& opts = {}, const ContourSpec& proto = {}) {
    if (!region.valid()) throw InvalidArgument("root_localize: region must satisfy x0 < x1 and y0 < y1");
    if (!(opts.target_size > 0.0)) throw InvalidArgument("root_localize: target_size must be positive");
    detail::Localizer loc(system, cfg, opts, proto);
    RootReport report;
    Box top = region;
    for (int attempt = 0;; ++attempt) {
        try {
            report.total_winding = loc.winding(top);
            break;
        } catch (const Error& e) {
            const bool boundary_problem = e.kind() == "root_on_contour" || e.kind() == "insufficient_refinement" ||
                                          e.kind() == "budget_exhausted";
            if (!boundary_problem || attempt >= opts.max_retries) {
                std::ostringstream os;
                os << "root_localize: region boundary could not be evaluated after " << attempt
                   << " perturbations: ";
                rethrow_with_context(e, os.str());
            }
            top = top.expanded(0.01 / 3.0);  // up to 1% of the diameter in total
        }
    }
    report.region = top;
    loc.refine(top, report.total_winding, report.unmerged);
    report.roots = opts.cluster_radius > 0.0 ? merge_clusters(report.unmerged, opts.cluster_radius) : report.unmerged;
    report.boxes_evaluated = loc.boxes();
    return report;
}

}  // namespace evans
