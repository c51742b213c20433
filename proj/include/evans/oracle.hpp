#pragma once

// Independent validators: a shooting Wronskian integrated with an adaptive
// Runge-Kutta-Fehlberg 7(8) pair, and a finite-difference eigenvalue solver
// for second-order operators.

#include <algorithm>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "evans/asymptotics.hpp"
#include "evans/contour.hpp"
#include "evans/linalg.hpp"
#include "evans/problems.hpp"

namespace evans {

struct ShootingConfig {
    double L = 10.0;
    double rk_tolerance = 1e-12;
    double rescale_threshold = 1e8;
    /// Initial data at x = L is P(lambda) V(anchor): analytic in lambda.
    /// Without an anchor the eigenvectors at lambda itself are used.
    std::optional<Complex> anchor;
    double chunk = 0.5;
};

namespace detail {

using ShootState = std::vector<Complex>;

/// Solutions of U' = a(x) U from x = L down to x = 0, k columns at once.
inline ComplexMatrix shoot_back(const std::function<ComplexMatrix(double)>& a, const ComplexMatrix& start,
                                const ShootingConfig& cfg) {
    namespace ode = boost::numeric::odeint;
    const Eigen::Index n = start.rows();
    const Eigen::Index k = start.cols();
    ShootState u(static_cast<std::size_t>(n * k));
    Eigen::Map<ComplexMatrix>(u.data(), n, k) = start;

    auto rhs = [&](const ShootState& y, ShootState& dy, double x) {
        const ComplexMatrix ax = a(x);
        Eigen::Map<ComplexMatrix>(dy.data(), n, k) = ax * Eigen::Map<const ComplexMatrix>(y.data(), n, k);
    };
    auto stepper = ode::make_controlled(cfg.rk_tolerance, cfg.rk_tolerance, ode::runge_kutta_fehlberg78<ShootState>());

    double x = cfg.L;
    double dt = -std::min(cfg.chunk, 0.01);
    try {
        while (x > 0.0) {
            const double x_next = std::max(0.0, x - cfg.chunk);
            ode::integrate_adaptive(stepper, rhs, u, x, x_next, dt);
            x = x_next;
            auto um = Eigen::Map<ComplexMatrix>(u.data(), n, k);
            const double big = um.colwise().norm().maxCoeff();
            if (!std::isfinite(big)) throw StiffnessError("shooting: solution overflowed");
            if (big > cfg.rescale_threshold) um /= big;
        }
    } catch (const ode::odeint_error& e) {
        throw StiffnessError(std::string("shooting: integrator failed: ") + e.what());
    }
    return Eigen::Map<ComplexMatrix>(u.data(), n, k);
}

inline ComplexMatrix analytic_start(const AsymptoticMatrixFn& gen, Complex lambda, int k, Side side,
                                    const ShootingConfig& cfg) {
    const SpectralFrame here = frame_at(gen(lambda), lambda, k, side, nullptr, FrameMode::sort);
    if (!cfg.anchor) return here.V.leftCols(k);
    const SpectralFrame ref = frame_at(gen(*cfg.anchor), *cfg.anchor, k, side, nullptr, FrameMode::sort);
    return stable_projection(here).P * ref.V.leftCols(k);
}

}  // namespace detail

/// Wronskian det(U-(0), U+(0)) of the decaying solutions, each column scaled
/// to unit length at x = 0. Only zeros and phase winding are meaningful.
inline Complex shooting_wronskian(const EvansSystem& system, Complex lambda, const ShootingConfig& cfg = {}) {
    if (system.n > 6) throw InvalidArgument("shooting_wronskian: only systems with n <= 6 are supported");
    const int r = system.r;
    const int s = system.n - system.r;
    const ComplexMatrix start_p = detail::analytic_start(
        [&](Complex l) { return system.A_inf(l, Side::plus); }, lambda, r, Side::plus, cfg);
    const ComplexMatrix start_m = detail::analytic_start(
        [&](Complex l) -> ComplexMatrix { return -system.A_inf(l, Side::minus); }, lambda, s, Side::minus, cfg);
    ComplexMatrix up = detail::shoot_back([&](double x) { return system.A(x, lambda); }, start_p, cfg);
    ComplexMatrix um =
        detail::shoot_back([&](double x) -> ComplexMatrix { return -system.A(-x, lambda); }, start_m, cfg);
    ComplexMatrix joined(system.n, system.n);
    joined << um, up;
    for (Eigen::Index j = 0; j < joined.cols(); ++j) joined.col(j).normalize();
    return det_lu(joined);
}

/// Winding number of the shooting Wronskian on a circle (zero counting).
inline int shooting_winding(const EvansSystem& system, Complex center, double radius, int points,
                            ShootingConfig cfg = {}) {
    cfg.anchor = center;
    std::vector<Complex> vals;
    for (int i = 0; i < points; ++i) {
        vals.push_back(shooting_wronskian(system, center + std::polar(radius, 2.0 * std::numbers::pi * i / points), cfg));
    }
    return winding_number(vals).winding;
}

/// Eigenvalues of u'' + Q(x) u with Dirichlet conditions at +/- ell,
/// second-order differences on `gridpoints` interior points; sorted by
/// descending real part.
inline std::vector<Complex> fd_eigs(const SecondOrderOperator& op, double ell, int gridpoints) {
    if (!(ell > 0.0) || gridpoints < 3) throw InvalidArgument("fd_eigs: need ell > 0 and at least 3 grid points");
    const int m = op.m;
    const double h = 2.0 * ell / (gridpoints + 1);
    const Eigen::Index size = static_cast<Eigen::Index>(m) * gridpoints;
    RealMatrix a = RealMatrix::Zero(size, size);
    for (int i = 0; i < gridpoints; ++i) {
        const double x = -ell + (i + 1) * h;
        const RealMatrix q = op.Q(x);
        for (int c = 0; c < m; ++c) {
            const Eigen::Index row = static_cast<Eigen::Index>(i) * m + c;
            a(row, row) -= 2.0 / (h * h);
            if (i > 0) a(row, row - m) += 1.0 / (h * h);
            if (i + 1 < gridpoints) a(row, row + m) += 1.0 / (h * h);
        }
        a.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(i) * m, m, m) += q;
    }
    Eigen::EigenSolver<RealMatrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw ConvergenceError("fd_eigs: eigenvalue iteration failed");
    std::vector<Complex> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + size);
    std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    return ev;
}

}  // namespace evans
