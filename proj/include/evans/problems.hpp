#pragma once

// Benchmark systems U' = A(x, lambda) U and their second-order forms.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "evans/asymptotics.hpp"
#include "evans/linalg.hpp"
#include "evans/profile.hpp"

namespace evans {

struct EvansSystem {
    int n = 0;
    int r = 0;  // dimension of the decaying space as x -> +inf
    /// Coefficients on the whole line. The plus side evaluates x >= 0; the
    /// left half-line is reached through reflect_left, which evaluates A(-x)
    /// (so x = -0.0 arrives for the left end of the interface).
    std::function<ComplexMatrix(double, Complex)> A;
    std::function<ComplexMatrix(Complex, Side)> A_inf;
    double default_L = 10.0;
    int default_N = 30;
    std::string label;
    /// Asymptotic matrices carry semisimple multiple eigenvalues by design.
    bool semisimple = false;
    /// Largest |x| at which A can be evaluated (sampled profiles); inf otherwise.
    double x_extent = std::numeric_limits<double>::infinity();
};

/// Coefficients on [0, L] for the left half-line: A~(x) = -A(-x), A~+ = -A-.
inline EvansSystem reflect_left(const EvansSystem& s) {
    EvansSystem out = s;
    out.r = s.n - s.r;
    out.A = [a = s.A](double x, Complex lambda) -> ComplexMatrix { return -a(-x, lambda); };
    out.A_inf = [a = s.A_inf](Complex lambda, Side side) -> ComplexMatrix {
        return -a(lambda, side == Side::plus ? Side::minus : Side::plus);
    };
    out.label = s.label + " (reflected)";
    return out;
}

// ---------------------------------------------------------------------------
// Nagumo

inline double nagumo_profile(double x) { return std::numbers::sqrt2 / std::cosh(x); }

inline EvansSystem nagumo_scalar() {
    EvansSystem s;
    s.n = 2;
    s.r = 1;
    s.A = [](double x, Complex lambda) {
        const double u = nagumo_profile(x);
        ComplexMatrix a(2, 2);
        a << 0.0, 1.0, lambda + 1.0 - 3.0 * u * u, 0.0;
        return a;
    };
    s.A_inf = [](Complex lambda, Side) {
        ComplexMatrix a(2, 2);
        a << 0.0, 1.0, lambda + 1.0, 0.0;
        return a;
    };
    s.default_L = 10.0;
    s.default_N = 30;
    s.label = "nagumo";
    return s;
}

inline EvansSystem nagumo_coupled(double a, double b) {
    EvansSystem s;
    s.n = 4;
    s.r = 2;
    auto build = [a, b](Complex q) {
        ComplexMatrix m = ComplexMatrix::Zero(4, 4);
        m(0, 1) = 1.0;
        m(1, 0) = q;
        m(1, 2) = -a;
        m(2, 3) = 1.0;
        m(3, 0) = -b;
        m(3, 2) = q;
        return m;
    };
    s.A = [build](double x, Complex lambda) {
        const double u = nagumo_profile(x);
        return build(lambda + 1.0 - 3.0 * u * u);
    };
    s.A_inf = [build](Complex lambda, Side) { return build(lambda + 1.0); };
    s.default_L = 10.0;
    s.default_N = 30;
    s.label = "nagumo-coupled";
    return s;
}

// ---------------------------------------------------------------------------
// generalised KdV solitary wave

struct KdvProfile {
    double p = 4.0;
    double c = 5.0;

    double amplitude() const { return std::pow(c * (p + 2.0) * (p + 1.0) / 2.0, 1.0 / p); }
    double rate() const { return std::sqrt(c) * p / 2.0; }
    double value(double x) const { return amplitude() * std::pow(1.0 / std::cosh(rate() * x), 2.0 / p); }
    double derivative(double x) const { return -std::sqrt(c) * std::tanh(rate() * x) * value(x); }
};

inline EvansSystem kdv(double p, double c) {
    if (!(p > 2.0) || !(c > 0.0)) throw InvalidArgument("kdv: require p > 2 and c > 0");
    const KdvProfile prof{p, c};
    EvansSystem s;
    s.n = 3;
    s.r = 1;
    s.A = [prof](double x, Complex lambda) {
        const double u = prof.value(x);
        const double up = std::pow(u, prof.p);
        // p u^{p-1} u' = -p sqrt(c) tanh(beta x) u^p
        const double coupling = -prof.p * std::sqrt(prof.c) * std::tanh(prof.rate() * x) * up;
        ComplexMatrix a = ComplexMatrix::Zero(3, 3);
        a(0, 1) = 1.0;
        a(1, 2) = 1.0;
        a(2, 0) = -lambda - coupling;
        a(2, 1) = prof.c - up;
        return a;
    };
    s.A_inf = [c](Complex lambda, Side) {
        ComplexMatrix a = ComplexMatrix::Zero(3, 3);
        a(0, 1) = 1.0;
        a(1, 2) = 1.0;
        a(2, 0) = -lambda;
        a(2, 1) = c;
        return a;
    };
    s.default_L = 30.0;
    s.default_N = 160;
    s.label = "kdv";
    return s;
}

// ---------------------------------------------------------------------------
// Swift-Hohenberg on a periodic y-grid

enum class FourierSymbol { one_plus_laplacian, one_plus_laplacian_squared };

/// Spectral operator on `modes` equispaced points of [0, 2pi), applying the
/// symbol (1 - k^2) or (1 - k^2)^2 to wavenumbers -modes/2+1 .. modes/2.
inline ComplexMatrix fourier_diff_operator(int modes, FourierSymbol symbol) {
    if (modes < 4 || modes % 2 != 0) throw InvalidArgument("fourier_diff_operator: modes must be even and >= 4");
    ComplexMatrix m = ComplexMatrix::Zero(modes, modes);
    const double h = 2.0 * std::numbers::pi / modes;
    for (int jr = 0; jr < modes; ++jr) {
        for (int jc = 0; jc < modes; ++jc) {
            double acc = 0.0;
            for (int k = -modes / 2 + 1; k <= modes / 2; ++k) {
                const double base = 1.0 - static_cast<double>(k) * k;
                const double sym = symbol == FourierSymbol::one_plus_laplacian ? base : base * base;
                acc += sym * std::cos(k * h * (jr - jc));
            }
            m(jr, jc) = acc / modes;
        }
    }
    return m;
}

struct SwiftHohenbergParams {
    double mu = 0.675;
    double nu_param = 2.0;
    int modes = 8;
};

/// Block companion system for u_t = -(1+Laplacian)^2 u - mu u + nu u^3 - u^5
/// linearised about a profile sampled on the y-grid (one component per
/// y-point). A null profile gives the constant-coefficient system.
inline EvansSystem swift_hohenberg(const SwiftHohenbergParams& prm, std::shared_ptr<const SampledProfile> profile) {
    const int m = prm.modes;
    if (m < 4 || m % 2 != 0) throw InvalidArgument("swift_hohenberg: modes must be even and >= 4");
    if (profile && profile->components() != m) {
        throw IngestionError("swift_hohenberg: profile has " + std::to_string(profile->components()) +
                             " y-components but modes = " + std::to_string(m));
    }
    const ComplexMatrix d1 = fourier_diff_operator(m, FourierSymbol::one_plus_laplacian_squared);
    const ComplexMatrix d2 = fourier_diff_operator(m, FourierSymbol::one_plus_laplacian);
    auto build = [m, d1, d2, prm](Complex lambda, const RealVector* u) {
        const int n = 4 * m;
        ComplexMatrix a = ComplexMatrix::Zero(n, n);
        for (int b = 0; b < 3; ++b) a.block(b * m, (b + 1) * m, m, m).setIdentity();
        ComplexMatrix l1 = -d1;
        for (int j = 0; j < m; ++j) {
            double pot = -prm.mu;
            if (u != nullptr) {
                const double u2 = (*u)(j) * (*u)(j);
                pot += 3.0 * prm.nu_param * u2 - 5.0 * u2 * u2;
            }
            l1(j, j) += pot - lambda;
        }
        a.block(3 * m, 0, m, m) = l1;
        a.block(3 * m, 2 * m, m, m) = -2.0 * d2;
        return a;
    };
    EvansSystem s;
    s.n = 4 * m;
    s.r = 2 * m;
    s.A = [build, profile](double x, Complex lambda) {
        if (!profile) return build(lambda, nullptr);
        const RealVector u = (*profile)(x);
        return build(lambda, &u);
    };
    s.A_inf = [build](Complex lambda, Side) { return build(lambda, nullptr); };
    s.default_L = 50.0;
    s.default_N = profile ? 60 : 40;
    s.label = "swift-hohenberg";
    s.semisimple = true;
    if (profile) s.x_extent = std::min(-profile->x_min(), profile->x_max());
    return s;
}

// ---------------------------------------------------------------------------
// test system with a known Evans-function root

/// Piecewise-constant 2x2 system with A+ = diag(-1, 1) and
/// A- = S diag(1, -1) S^{-1}, S = [[1, 0], [lambda - root, 1]].
/// The decaying directions at x = 0 are e1 and (1, lambda - root), so the
/// Evans function vanishes exactly at lambda = root, simply.
inline EvansSystem implanted_root(Complex root) {
    auto plus = [](Complex) {
        ComplexMatrix a = ComplexMatrix::Zero(2, 2);
        a(0, 0) = -1.0;
        a(1, 1) = 1.0;
        return a;
    };
    auto minus = [root](Complex lambda) {
        const Complex t = lambda - root;
        // S diag(1,-1) S^{-1} with S^{-1} = [[1,0],[-t,1]]
        ComplexMatrix a(2, 2);
        a << 1.0, 0.0, 2.0 * t, -1.0;
        return a;
    };
    EvansSystem s;
    s.n = 2;
    s.r = 1;
    s.A = [plus, minus](double x, Complex lambda) { return std::signbit(x) ? minus(lambda) : plus(lambda); };
    s.A_inf = [plus, minus](Complex lambda, Side side) { return side == Side::plus ? plus(lambda) : minus(lambda); };
    s.default_L = 5.0;
    s.default_N = 8;
    s.label = "implanted-root";
    return s;
}

// ---------------------------------------------------------------------------
// second-order forms  lambda u = u'' + Q(x) u  (used by the finite-difference oracle)

struct SecondOrderOperator {
    int m = 1;
    std::function<RealMatrix(double)> Q;
    std::string label;
};

inline SecondOrderOperator nagumo_scalar_operator() {
    return {1, [](double x) {
                RealMatrix q(1, 1);
                const double u = nagumo_profile(x);
                q(0, 0) = 3.0 * u * u - 1.0;
                return q;
            },
            "nagumo"};
}

inline SecondOrderOperator nagumo_coupled_operator(double a, double b) {
    return {2, [a, b](double x) {
                const double u = nagumo_profile(x);
                RealMatrix q(2, 2);
                q << 3.0 * u * u - 1.0, a, b, 3.0 * u * u - 1.0;
                return q;
            },
            "nagumo-coupled"};
}

inline SecondOrderOperator zero_potential_operator() {
    return {1, [](double) { return RealMatrix::Constant(1, 1, -1.0); }, "zero-potential"};
}

}  // namespace evans
