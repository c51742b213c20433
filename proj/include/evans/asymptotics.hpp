#pragma once

// Spectral frames of the asymptotic matrices, spectral projections and the
// Kato transport of an analytic basis of the decaying eigenspace.

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "evans/linalg.hpp"

namespace evans {

enum class Side { plus, minus };
enum class FrameMode { sort, track };

inline const char* to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }
inline const char* to_string(FrameMode m) { return m == FrameMode::sort ? "sort" : "track"; }

/// Eigen-data of one asymptotic matrix at one lambda.
///
/// The frame is always built for the matrix whose first `r` eigenvectors
/// span the directions that decay into the interior of [0, L]. For the
/// plus side that is A+(lambda); for the minus side it is the reflected
/// matrix -A-(lambda), whose decaying space is the unstable space of A-.
struct SpectralFrame {
    Complex lambda{};
    Side side = Side::plus;
    ComplexVector eigenvalues;  // labelled; ascending real part in sort mode
    ComplexMatrix V;            // right eigenvectors as columns, unit norm
    ComplexMatrix W;            // V^{-1}; row j pairs with column j
    int r = 0;

    Eigen::Index n() const { return eigenvalues.size(); }

    double biorthogonality_error() const {
        return (W * V - ComplexMatrix::Identity(n(), n())).cwiseAbs().maxCoeff();
    }

    /// Number of eigenvalues with negative real part.
    int negative_count() const {
        int c = 0;
        for (Eigen::Index j = 0; j < n(); ++j) c += eigenvalues(j).real() < 0.0 ? 1 : 0;
        return c;
    }
};

struct FrameOptions {
    /// Hypothesis-2 check: eigenvalues closer than this (relative to |A|)
    /// are treated as a multiple eigenvalue.
    double degeneracy_tol = 1e-8;
    /// Accept semisimple multiple eigenvalues (the Swift-Hohenberg
    /// asymptotic matrix has exact +/-k Fourier pairs). Clusters within
    /// `cluster_tol` are given an orthonormal null-space basis.
    bool allow_semisimple = false;
    double cluster_tol = 1e-6;
};

namespace detail {

inline void normalise_phase_initial(ComplexMatrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        const Complex pivot = v(imax, j);
        if (std::abs(pivot) > 0.0) v.col(j) *= std::conj(pivot) / std::abs(pivot);
    }
}

inline void align_phase(ComplexMatrix& v, const ComplexMatrix& prev) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const Complex overlap = prev.col(j).dot(v.col(j));  // <prev_j, v_j>
        if (std::abs(overlap) > 0.0) v.col(j) *= std::conj(overlap) / std::abs(overlap);
    }
}

inline std::vector<Eigen::Index> sort_order(const ComplexVector& ev) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ev.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
        return ev(a).imag() < ev(b).imag();
    });
    return idx;
}

/// Greedy injective matching of new eigenvalues to previous labels.
inline std::vector<Eigen::Index> track_order(const ComplexVector& prev, const ComplexVector& ev) {
    const Eigen::Index n = ev.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> d(static_cast<std::size_t>(n));
        for (Eigen::Index k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = std::abs(ev(k) - prev(i));
        std::sort(d.begin(), d.end());
        if (n > 1 && d[1] > 0.0 && d[1] <= 1.1 * d[0]) {
            std::ostringstream os;
            os << "frame_at: ambiguous eigenvalue tracking for label " << i << " (previous value "
               << prev(i) << "); refine the contour";
            throw TrackingError(os.str());
        }
    }
    struct Pair { double d; Eigen::Index label; Eigen::Index cand; };
    std::vector<Pair> pairs;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) pairs.push_back({std::abs(ev(k) - prev(i)), i, k});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.label != b.label) return a.label < b.label;
        return a.cand < b.cand;
    });
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (const auto& p : pairs) {
        auto& slot = order[static_cast<std::size_t>(p.label)];
        if (slot >= 0 || used[static_cast<std::size_t>(p.cand)]) continue;
        slot = p.cand;
        used[static_cast<std::size_t>(p.cand)] = true;
    }
    return order;
}

/// Replace each cluster of (numerically) equal eigenvalues by its mean and
/// an orthonormal basis of the corresponding null space.
inline void regularise_clusters(const ComplexMatrix& a, ComplexVector& ev, ComplexMatrix& v, double tol) {
    const Eigen::Index n = ev.size();
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (done[static_cast<std::size_t>(i)]) continue;
        std::vector<Eigen::Index> members{i};
        for (Eigen::Index k = i + 1; k < n; ++k)
            if (!done[static_cast<std::size_t>(k)] && std::abs(ev(k) - ev(i)) <= tol) members.push_back(k);
        for (auto k : members) done[static_cast<std::size_t>(k)] = true;
        if (members.size() == 1) continue;
        Complex mean = 0.0;
        for (auto k : members) mean += ev(k);
        mean /= static_cast<double>(members.size());
        const ComplexMatrix shifted = a - mean * ComplexMatrix::Identity(n, n);
        Eigen::JacobiSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
        const auto m = static_cast<Eigen::Index>(members.size());
        for (Eigen::Index c = 0; c < m; ++c) {
            v.col(members[static_cast<std::size_t>(c)]) = svd.matrixV().col(n - m + c);
            ev(members[static_cast<std::size_t>(c)]) = mean;
        }
    }
}

}  // namespace detail

/// Eigen-frame of `a_inf` at `lambda`.
///
/// sort: ascending real part, ties by ascending imaginary part.
/// track: each eigenpair inherits the label of the nearest eigenvalue of
/// `prev` (greedy, injective), so labels survive real-part crossings.
/// Eigenvector phases are aligned with `prev` when it is given, otherwise
/// the largest-modulus entry of each vector is made real positive.
inline SpectralFrame frame_at(const ComplexMatrix& a_inf, Complex lambda, int r, Side side,
                              const SpectralFrame* prev, FrameMode mode, const FrameOptions& opts = {}) {
    require_square(a_inf, "frame_at");
    const Eigen::Index n = a_inf.rows();
    if (r < 0 || r > n) throw InvalidArgument("frame_at: stable count out of range");
    if (mode == FrameMode::track && prev == nullptr) {
        throw InvalidArgument("frame_at: track mode requires a previous frame");
    }

    EigenDecomposition eig = eig_dense(a_inf);
    const double scale = std::max(a_inf.norm(), 1e-300);

    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = i + 1; k < n; ++k) min_gap = std::min(min_gap, std::abs(eig.values(i) - eig.values(k)));
    const bool degenerate = min_gap <= (opts.allow_semisimple ? opts.cluster_tol : opts.degeneracy_tol) * scale;
    if (degenerate) {
        if (!opts.allow_semisimple) {
            std::ostringstream os;
            os << "frame_at: asymptotic eigenvalues at lambda = " << lambda
               << " are not simple (gap " << min_gap << "); multiple eigenvalues are not supported";
            throw DegeneracyError(os.str());
        }
        if (mode == FrameMode::track) {
            throw InvalidArgument("frame_at: track mode requires simple eigenvalues; use sort mode");
        }
        detail::regularise_clusters(a_inf, eig.values, eig.vectors, opts.cluster_tol * scale);
    }

    const auto order = (mode == FrameMode::sort) ? detail::sort_order(eig.values)
                                                 : detail::track_order(prev->eigenvalues, eig.values);
    SpectralFrame f;
    f.lambda = lambda;
    f.side = side;
    f.r = r;
    f.eigenvalues.resize(n);
    f.V.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        f.eigenvalues(j) = eig.values(order[static_cast<std::size_t>(j)]);
        f.V.col(j) = eig.vectors.col(order[static_cast<std::size_t>(j)]);
    }
    if (prev != nullptr && prev->n() == n && !degenerate) {
        detail::align_phase(f.V, prev->V);
    } else {
        detail::normalise_phase_initial(f.V);
    }
    f.W = f.V.partialPivLu().inverse();
    return f;
}

/// Spectral projection P with P^2 = P.
struct Projection {
    ComplexMatrix P;
    int rank = 0;

    double idempotency_error() const { return (P * P - P).cwiseAbs().maxCoeff(); }
};

/// Projection onto the span of the first r labelled eigenvectors along the rest.
inline Projection stable_projection(const SpectralFrame& frame) {
    const auto r = static_cast<Eigen::Index>(frame.r);
    return {frame.V.leftCols(r) * frame.W.topRows(r), frame.r};
}

/// One step of the discrete Kato transport:
///   Z_next = [P_next P_prev + (I - P_next)(I - P_prev)] Z_prev.
inline ComplexMatrix kato_step(const Projection& p_prev, const Projection& p_next, const ComplexMatrix& z_prev) {
    if (p_prev.P == p_next.P) return z_prev;
    const Eigen::Index n = p_prev.P.rows();
    const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
    const double jump = norm2(p_next.P - p_prev.P);
    if (!(jump < 1.0)) {
        std::ostringstream os;
        os << "kato_step: projections differ by " << jump << " in norm; bisect the step";
        throw StepTooLargeError(os.str());
    }
    const ComplexMatrix propagator = p_next.P * p_prev.P + (eye - p_next.P) * (eye - p_prev.P);
    ComplexMatrix z_next = propagator * z_prev;
    Eigen::JacobiSVD<ComplexMatrix> svd(z_next);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0 && !(sv(sv.size() - 1) > 1e-10 * sv(0))) {
        throw StepTooLargeError("kato_step: transported basis lost rank; bisect the step");
    }
    return z_next;
}

/// Analytic basis of the decaying eigenspace sampled along a closed contour.
struct AnalyticBasisTrack {
    std::vector<Complex> contour_points;
    std::vector<ComplexMatrix> bases;
    std::vector<SpectralFrame> frames;
    Side side = Side::plus;
    /// Basis after transporting once around the loop back to point 0.
    ComplexMatrix closing_basis;

    double monodromy_error() const { return (closing_basis - bases.front()).norm(); }
};

struct TransportOptions {
    FrameMode mode = FrameMode::sort;
    FrameOptions frame{};
    /// Segments whose projections differ by at least this much are bisected.
    double max_projection_jump = 0.5;
    int max_bisections = 12;
};

using AsymptoticMatrixFn = std::function<ComplexMatrix(Complex)>;

namespace detail {

struct TransportState {
    SpectralFrame frame;
    Projection projection;
    ComplexMatrix basis;
};

/// Move the state from its current lambda to `target` along the straight
/// segment, bisecting while consecutive projections jump too much.
inline TransportState transport_to(const AsymptoticMatrixFn& a_inf, const TransportState& from, Complex target,
                                   const TransportOptions& opts, int depth = 0) {
    const SpectralFrame next = frame_at(a_inf(target), target, from.frame.r, from.frame.side, &from.frame,
                                        opts.mode, opts.frame);
    const Projection p_next = stable_projection(next);
    const double jump = norm2(p_next.P - from.projection.P);
    if (jump >= opts.max_projection_jump) {
        if (depth >= opts.max_bisections) {
            std::ostringstream os;
            os << "kato transport: projection still jumps by " << jump << " after " << depth
               << " bisections near lambda = " << target;
            throw StepTooLargeError(os.str());
        }
        const Complex mid = 0.5 * (from.frame.lambda + target);
        const TransportState half = transport_to(a_inf, from, mid, opts, depth + 1);
        return transport_to(a_inf, half, target, opts, depth + 1);
    }
    TransportState out{next, p_next, {}};
    try {
        out.basis = kato_step(from.projection, p_next, from.basis);
    } catch (const StepTooLargeError&) {
        if (depth >= opts.max_bisections) throw;
        const Complex mid = 0.5 * (from.frame.lambda + target);
        const TransportState half = transport_to(a_inf, from, mid, opts, depth + 1);
        return transport_to(a_inf, half, target, opts, depth + 1);
    }
    return out;
}

inline TransportState initial_state(const AsymptoticMatrixFn& a_inf, Complex lambda, int r, Side side,
                                    const TransportOptions& opts) {
    SpectralFrame f = frame_at(a_inf(lambda), lambda, r, side, nullptr, FrameMode::sort, opts.frame);
    Projection p = stable_projection(f);
    ComplexMatrix z = f.V.leftCols(r);
    return {std::move(f), std::move(p), std::move(z)};
}

}  // namespace detail

/// Kato transport of the span of the first r eigenvectors around a closed
/// contour. Point 0 is initialised from the sorted frame; later points are
/// labelled according to `opts.mode`.
inline AnalyticBasisTrack kato_basis_along_contour(const AsymptoticMatrixFn& a_inf, const std::vector<Complex>& contour,
                                                   int r, Side side, const TransportOptions& opts = {}) {
    if (contour.empty()) throw InvalidArgument("kato_basis_along_contour: empty contour");
    AnalyticBasisTrack track;
    track.side = side;
    track.contour_points = contour;
    detail::TransportState state = detail::initial_state(a_inf, contour.front(), r, side, opts);
    track.frames.push_back(state.frame);
    track.bases.push_back(state.basis);
    for (std::size_t m = 1; m < contour.size(); ++m) {
        state = detail::transport_to(a_inf, state, contour[m], opts);
        track.frames.push_back(state.frame);
        track.bases.push_back(state.basis);
    }
    track.closing_basis = detail::transport_to(a_inf, state, contour.front(), opts).basis;
    return track;
}

}  // namespace evans
