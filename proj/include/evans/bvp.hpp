#pragma once

// Shifted linear boundary-value problems on [0, L] solved by Chebyshev
// collocation. Mode j solves V' = (A(x) - nu_j I) V with
//   <V_k(0), V(0)> = 0      for k < j,
//   <W_j, V(L)>    = 1,
//   <W_k, V(L)>    = 0      for k > j.

#include <functional>
#include <sstream>
#include <vector>

#include "evans/asymptotics.hpp"
#include "evans/linalg.hpp"

namespace evans {

using CoefficientFn = std::function<ComplexMatrix(double)>;

struct ModeContext {
    const SpectralFrame* frame = nullptr;
    int j = 0;                   // zero-based mode index
    ComplexMatrix prior_at_zero; // n x j, columns V_k(0) for k < j
    Complex shift() const { return frame->eigenvalues(j); }
};

struct BvpSolution {
    int j = 0;
    Complex lambda{};
    ComplexMatrix values;  // n x (N+1); column i is V at node i
    double ode_residual = 0.0;
    double bc_residual = 0.0;
    /// |last two Chebyshev coefficients| / |largest|, worst component.
    double chebyshev_tail = 0.0;

    ComplexVector at_zero() const { return values.col(0); }
    ComplexVector at_L() const { return values.col(values.cols() - 1); }
    double max_abs() const { return values.cwiseAbs().maxCoeff(); }
};

struct BvpOptions {
    /// Residual of the solved linear system, relative to the matrix and
    /// solution scale, above which the solve is rejected.
    double residual_tol = 1e-8;
    /// Pivot ratio below which the collocation matrix is treated as singular.
    double singular_tol = 1e-14;
};

/// Coefficient samples A(x_i) at every node of the grid; shared by all modes
/// of one (lambda, side).
inline std::vector<ComplexMatrix> sample_coefficients(const CoefficientFn& a_fn, const CollocationGrid& grid) {
    std::vector<ComplexMatrix> out;
    out.reserve(static_cast<std::size_t>(grid.size()));
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        out.push_back(a_fn(grid.nodes(i)));
        require_finite(out.back(), "solve_mode: A(x)");
    }
    return out;
}

inline BvpSolution solve_mode(const std::vector<ComplexMatrix>& a_samples, const ModeContext& ctx,
                              const CollocationGrid& grid, const BvpOptions& opts = {}) {
    if (ctx.frame == nullptr) throw InvalidArgument("solve_mode: missing frame");
    const SpectralFrame& f = *ctx.frame;
    const Eigen::Index n = f.n();
    const Eigen::Index nodes = grid.size();
    const int j = ctx.j;
    if (j < 0 || j >= n) throw InvalidArgument("solve_mode: mode index out of range");
    if (ctx.prior_at_zero.cols() != j || (j > 0 && ctx.prior_at_zero.rows() != n)) {
        throw InvalidArgument("solve_mode: prior_at_zero must hold the j previous modes");
    }
    if (static_cast<Eigen::Index>(a_samples.size()) != nodes) {
        throw InvalidArgument("solve_mode: coefficient samples do not match the grid");
    }

    const Eigen::Index size = n * nodes;
    const Complex nu = ctx.shift();
    ComplexMatrix m = ComplexMatrix::Zero(size, size);
    for (Eigen::Index i = 0; i < nodes; ++i) {
        for (Eigen::Index l = 0; l < nodes; ++l) {
            const double d = grid.diff(i, l);
            if (d == 0.0) continue;
            for (Eigen::Index c = 0; c < n; ++c) m(i * n + c, l * n + c) = d;
        }
        m.block(i * n, i * n, n, n) -= a_samples[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < n; ++c) m(i * n + c, i * n + c) += nu;
    }
    ComplexVector rhs = ComplexVector::Zero(size);

    // boundary rows at x = 0: orthogonality to previous modes
    for (int k = 0; k < j; ++k) {
        m.row(k).setZero();
        m.block(k, 0, 1, n) = ctx.prior_at_zero.col(k).adjoint();
    }
    // boundary rows at x = L: eigencomponents j..n-1
    const Eigen::Index last = (nodes - 1) * n;
    for (Eigen::Index c = j; c < n; ++c) {
        m.row(last + c).setZero();
        m.block(last + c, last, 1, n) = f.W.row(c);
    }
    rhs(last + j) = 1.0;

    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const auto& packed = lu.matrixLU();
    double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < size; ++i) {
        pmax = std::max(pmax, std::abs(packed(i, i)));
        pmin = std::min(pmin, std::abs(packed(i, i)));
    }
    if (!(pmin > opts.singular_tol * pmax)) {
        std::ostringstream os;
        os << "solve_mode: collocation matrix is singular for mode " << (j + 1) << " at lambda = " << f.lambda
           << " (pivot ratio " << (pmax > 0 ? pmin / pmax : 0.0)
           << "); the truncation length may be too small or the eigenvalues are not simple";
        throw SingularSystemError(os.str());
    }
    const ComplexVector sol = lu.solve(rhs);
    if (!sol.allFinite()) throw SingularSystemError("solve_mode: non-finite solution");

    const ComplexVector res = m * sol - rhs;
    const double scale = std::max(1.0, m.cwiseAbs().rowwise().sum().maxCoeff() * sol.cwiseAbs().maxCoeff());

    BvpSolution out;
    out.j = j;
    out.lambda = f.lambda;
    out.values = Eigen::Map<const ComplexMatrix>(sol.data(), n, nodes);
    std::vector<bool> boundary(static_cast<std::size_t>(size), false);
    for (int k = 0; k < j; ++k) boundary[static_cast<std::size_t>(k)] = true;
    for (Eigen::Index c = j; c < n; ++c) boundary[static_cast<std::size_t>(last + c)] = true;
    for (Eigen::Index row = 0; row < size; ++row) {
        double& slot = boundary[static_cast<std::size_t>(row)] ? out.bc_residual : out.ode_residual;
        slot = std::max(slot, std::abs(res(row)));
    }
    out.bc_residual /= std::max(1.0, out.max_abs());
    out.ode_residual /= scale;
    if (!(out.ode_residual <= opts.residual_tol) || !(out.bc_residual <= opts.residual_tol)) {
        std::ostringstream os;
        os << "solve_mode: residual " << std::max(out.ode_residual, out.bc_residual) << " for mode " << (j + 1)
           << " exceeds " << opts.residual_tol << "; increase N";
        throw AccuracyError(os.str());
    }

    for (Eigen::Index c = 0; c < n; ++c) {
        const ComplexVector coeff = chebyshev_coefficients(out.values.row(c).transpose());
        const double big = coeff.cwiseAbs().maxCoeff();
        if (big == 0.0) continue;
        const double tail = std::max(std::abs(coeff(coeff.size() - 1)), std::abs(coeff(coeff.size() - 2)));
        out.chebyshev_tail = std::max(out.chebyshev_tail, tail / big);
    }
    return out;
}

inline BvpSolution solve_mode(const CoefficientFn& a_fn, const ModeContext& ctx, const CollocationGrid& grid,
                              const BvpOptions& opts = {}) {
    return solve_mode(sample_coefficients(a_fn, grid), ctx, grid, opts);
}

/// Modes 1..k in sequence, each constrained against the values at x = 0 of
/// the ones before it.
inline std::vector<BvpSolution> solve_all_modes(const CoefficientFn& a_fn, const SpectralFrame& frame, int k,
                                                const CollocationGrid& grid, const BvpOptions& opts = {}) {
    const Eigen::Index n = frame.n();
    if (k < 0 || k > n) throw InvalidArgument("solve_all_modes: k must lie in [0, n]");
    const auto samples = sample_coefficients(a_fn, grid);
    std::vector<BvpSolution> out;
    out.reserve(static_cast<std::size_t>(k));
    ModeContext ctx;
    ctx.frame = &frame;
    ctx.prior_at_zero.resize(n, 0);
    for (int j = 0; j < k; ++j) {
        ctx.j = j;
        try {
            out.push_back(solve_mode(samples, ctx, grid, opts));
        } catch (const Error& e) {
            std::ostringstream os;
            os << "[" << to_string(frame.side) << " side, mode " << (j + 1) << "/" << k << "] ";
            rethrow_with_context(e, os.str());
        }
        ctx.prior_at_zero.conservativeResize(n, j + 1);
        ctx.prior_at_zero.col(j) = out.back().at_zero();
    }
    return out;
}

}  // namespace evans
