#pragma once

// Assembly of the Evans function at one lambda:
//   E(lambda) = det(V-(0), V+(0)) * det C- * det C+,
// where V+/- are the BVP modes of each half-line and C+/- map their values
// at x = L onto the Kato-transported analytic bases.

#include <bit>
#include <cstdint>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include "evans/asymptotics.hpp"
#include "evans/bvp.hpp"
#include "evans/linalg.hpp"
#include "evans/problems.hpp"

namespace evans {

struct EvansConfig {
    double L = 0.0;  // 0: system default
    int N = 0;       // 0: system default
    FrameMode mode = FrameMode::sort;
    BvpOptions bvp{};
    FrameOptions frame{};
    /// Least-squares residual for C, relative to |Z|.
    double lstsq_tol = 1e-8;
    double det_c_min = 1e-12;
    double det_c_max = 1e12;

    double length(const EvansSystem& s) const { return L > 0.0 ? L : s.default_L; }
    int degree(const EvansSystem& s) const { return N > 0 ? N : s.default_N; }
    FrameOptions frame_options(const EvansSystem& s) const {
        FrameOptions f = frame;
        f.allow_semisimple = f.allow_semisimple || s.semisimple;
        return f;
    }
};

/// Frame and analytic basis of one side at one lambda. For the minus side
/// both refer to the reflected matrix -A-(lambda).
struct SideState {
    SpectralFrame frame;
    ComplexMatrix Z;
};

struct EvansDiagnostics {
    double ode_residual = 0.0;
    double bc_residual = 0.0;
    double biorthogonality = 0.0;
    double lstsq_residual = 0.0;
    double chebyshev_tail = 0.0;

    void absorb(const EvansDiagnostics& o) {
        ode_residual = std::max(ode_residual, o.ode_residual);
        bc_residual = std::max(bc_residual, o.bc_residual);
        biorthogonality = std::max(biorthogonality, o.biorthogonality);
        lstsq_residual = std::max(lstsq_residual, o.lstsq_residual);
        chebyshev_tail = std::max(chebyshev_tail, o.chebyshev_tail);
    }
};

struct EvansSample {
    Complex lambda{};
    Complex value{};
    Complex det_E{};
    Complex det_C_plus{};
    Complex det_C_minus{};
    EvansDiagnostics diagnostics;
};

struct CSolution {
    ComplexMatrix C;
    Complex det{};
    double residual = 0.0;  // |V_L C - Z|_F / |Z|_F
};

/// Least-squares C with V_L C ~= Z.
inline CSolution solve_C(const ComplexMatrix& v_at_L, const ComplexMatrix& z, double tol = 1e-8) {
    if (v_at_L.rows() != z.rows() || v_at_L.cols() != z.cols()) {
        throw InvalidArgument("solve_C: V(L) and Z must both be n x r");
    }
    CSolution out;
    if (z.cols() == 0) {
        out.C.resize(0, 0);
        out.det = 1.0;
        return out;
    }
    out.C = lstsq(v_at_L, z);
    out.det = det_lu(out.C);
    out.residual = (v_at_L * out.C - z).norm() / std::max(z.norm(), 1e-300);
    if (!(out.residual <= tol)) {
        std::ostringstream os;
        os << "solve_C: least-squares residual " << out.residual << " exceeds " << tol
           << "; the transported basis and the BVP modes span different spaces";
        throw InconsistentBasisError(os.str());
    }
    return out;
}

/// Mode values at x = 0 and x = L for one side at one lambda.
struct SideSolution {
    ComplexVector labels;  // eigenvalues of the modes used (first k of the frame)
    ComplexMatrix at_zero;
    ComplexMatrix at_L;
    EvansDiagnostics diagnostics;
};

/// Thread-safe cache of side solutions keyed by the exact bits of lambda.
/// Reuse is allowed only when the selected eigenvalues coincide, so a
/// cached entry always spans the same decaying space.
class SideCache {
public:
    using Key = std::pair<std::uint64_t, std::uint64_t>;

    static Key key(Complex lambda) {
        return {std::bit_cast<std::uint64_t>(lambda.real()), std::bit_cast<std::uint64_t>(lambda.imag())};
    }

    std::optional<SideSolution> find(Side side, Complex lambda, const ComplexVector& labels) const {
        std::lock_guard lock(mutex_);
        const auto& m = side == Side::plus ? plus_ : minus_;
        auto it = m.find(key(lambda));
        if (it == m.end()) return std::nullopt;
        if (!same_set(it->second.labels, labels)) return std::nullopt;
        return it->second;
    }

    void store(Side side, Complex lambda, const SideSolution& s) {
        std::lock_guard lock(mutex_);
        (side == Side::plus ? plus_ : minus_)[key(lambda)] = s;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return plus_.size() + minus_.size();
    }

private:
    static bool same_set(const ComplexVector& a, const ComplexVector& b) {
        if (a.size() != b.size()) return false;
        const double scale = 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < b.size(); ++k) best = std::min(best, std::abs(a(i) - b(k)));
            if (best > scale) return false;
        }
        return true;
    }

    mutable std::mutex mutex_;
    std::map<Key, SideSolution> plus_;
    std::map<Key, SideSolution> minus_;
};

inline SideSolution solve_side(const EvansSystem& system, Complex lambda, const SpectralFrame& frame,
                               const EvansConfig& cfg) {
    const double L = cfg.length(system);
    if (L > system.x_extent) {
        std::ostringstream os;
        os << "evans: L = " << L << " exceeds the range where the coefficients are defined (" << system.x_extent << ")";
        throw InvalidArgument(os.str());
    }
    const CollocationGrid grid = cheb_grid(cfg.degree(system), 0.0, L);
    const bool plus = frame.side == Side::plus;
    const int k = plus ? system.r : system.n - system.r;
    CoefficientFn a_fn;
    if (plus) {
        a_fn = [&](double x) { return system.A(x, lambda); };
    } else {
        a_fn = [&](double x) -> ComplexMatrix { return -system.A(-x, lambda); };
    }
    const auto modes = solve_all_modes(a_fn, frame, k, grid, cfg.bvp);
    SideSolution out;
    const Eigen::Index n = system.n;
    out.labels = frame.eigenvalues.head(k);
    out.at_zero.resize(n, k);
    out.at_L.resize(n, k);
    for (int j = 0; j < k; ++j) {
        const auto& m = modes[static_cast<std::size_t>(j)];
        out.at_zero.col(j) = m.at_zero();
        out.at_L.col(j) = m.at_L();
        out.diagnostics.ode_residual = std::max(out.diagnostics.ode_residual, m.ode_residual);
        out.diagnostics.bc_residual = std::max(out.diagnostics.bc_residual, m.bc_residual);
        out.diagnostics.chebyshev_tail = std::max(out.diagnostics.chebyshev_tail, m.chebyshev_tail);
    }
    out.diagnostics.biorthogonality = frame.biorthogonality_error();
    return out;
}

/// Evans function at one lambda from the frames and analytic bases of both sides.
inline EvansSample evans_at(const EvansSystem& system, Complex lambda, const SideState& plus, const SideState& minus,
                            const EvansConfig& cfg, SideCache* cache = nullptr) {
    if (plus.frame.side != Side::plus || minus.frame.side != Side::minus) {
        throw InvalidArgument("evans_at: frames must be (plus, minus)");
    }
    const int r = system.r;
    const int s = system.n - system.r;
    if (plus.Z.cols() != r || minus.Z.cols() != s) throw InvalidArgument("evans_at: basis dimensions do not match r");

    auto side = [&](const SideState& st, int k) {
        const ComplexVector labels = st.frame.eigenvalues.head(k);
        if (cache) {
            if (auto hit = cache->find(st.frame.side, lambda, labels)) return *hit;
        }
        SideSolution sol = solve_side(system, lambda, st.frame, cfg);
        if (cache) cache->store(st.frame.side, lambda, sol);
        return sol;
    };
    const SideSolution sp = side(plus, r);
    const SideSolution sm = side(minus, s);

    const CSolution cp = solve_C(sp.at_L, plus.Z, cfg.lstsq_tol);
    const CSolution cm = solve_C(sm.at_L, minus.Z, cfg.lstsq_tol);
    for (const auto& [c, name] : {std::pair{cp.det, "plus"}, std::pair{cm.det, "minus"}}) {
        const double mag = std::abs(c);
        if (!(mag > cfg.det_c_min) || !(mag < cfg.det_c_max)) {
            std::ostringstream os;
            os << "evans_at: |det C " << name << "| = " << mag << " at lambda = " << lambda
               << " is outside (" << cfg.det_c_min << ", " << cfg.det_c_max
               << "); the basis has collapsed (L too small or contour too coarse)";
            throw BasisCollapseError(os.str());
        }
    }

    ComplexMatrix joined(system.n, system.n);
    joined << sm.at_zero, sp.at_zero;

    EvansSample out;
    out.lambda = lambda;
    out.det_E = det_lu(joined);
    out.det_C_plus = cp.det;
    out.det_C_minus = cm.det;
    out.value = out.det_E * out.det_C_minus * out.det_C_plus;
    out.diagnostics = sp.diagnostics;
    out.diagnostics.absorb(sm.diagnostics);
    out.diagnostics.lstsq_residual = std::max(cp.residual, cm.residual);
    return out;
}

/// Matrix whose first k eigenvectors span the decaying space of the side:
/// A+(lambda) for plus, -A-(lambda) for minus.
inline AsymptoticMatrixFn decaying_generator(const EvansSystem& system, Side side) {
    if (side == Side::plus) return [&system](Complex l) { return system.A_inf(l, Side::plus); };
    return [&system](Complex l) -> ComplexMatrix { return -system.A_inf(l, Side::minus); };
}

inline int decaying_dimension(const EvansSystem& system, Side side) {
    return side == Side::plus ? system.r : system.n - system.r;
}

/// Initial side state at lambda: sorted frame, basis = leading eigenvectors.
inline SideState initial_side(const EvansSystem& system, Complex lambda, Side side, const EvansConfig& cfg) {
    const int k = decaying_dimension(system, side);
    SpectralFrame f = frame_at(decaying_generator(system, side)(lambda), lambda, k, side, nullptr, FrameMode::sort,
                               cfg.frame_options(system));
    ComplexMatrix z = f.V.leftCols(k);
    return {std::move(f), std::move(z)};
}

inline TransportOptions transport_options(const EvansSystem& system, const EvansConfig& cfg) {
    TransportOptions t;
    t.mode = cfg.mode;
    t.frame = cfg.frame_options(system);
    return t;
}

/// Kato-transport a side state along the straight segment to `target`.
inline SideState transport_side(const EvansSystem& system, const SideState& from, Complex target,
                                const EvansConfig& cfg) {
    const AsymptoticMatrixFn gen = decaying_generator(system, from.frame.side);
    detail::TransportState st{from.frame, stable_projection(from.frame), from.Z};
    st = detail::transport_to(gen, st, target, transport_options(system, cfg));
    return {std::move(st.frame), std::move(st.basis)};
}

/// Evans function at `target` with the bases normalised at `anchor` and
/// transported along the straight segment between them. Values obtained
/// with the same anchor share one analytic normalisation.
inline EvansSample evans_from_anchor(const EvansSystem& system, Complex anchor, Complex target,
                                     const EvansConfig& cfg) {
    SideState p = initial_side(system, anchor, Side::plus, cfg);
    SideState m = initial_side(system, anchor, Side::minus, cfg);
    if (target != anchor) {
        p = transport_side(system, p, target, cfg);
        m = transport_side(system, m, target, cfg);
    }
    return evans_at(system, target, p, m, cfg);
}

}  // namespace evans
