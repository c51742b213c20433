#pragma once

// Dense complex linear algebra and Chebyshev collocation primitives.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "evans/error.hpp"

namespace evans {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline void require_finite(const ComplexMatrix& m, const char* where) {
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(where) + ": matrix contains NaN or Inf entries");
    }
}

inline void require_square(const ComplexMatrix& m, const char* where) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << where << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw InvalidArgument(os.str());
    }
}

/// Spectral norm (largest singular value).
inline double norm2(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
}

/// Eigenpairs of a dense square matrix. Columns of `vectors` have unit
/// Euclidean norm; no ordering is implied.
struct EigenDecomposition {
    ComplexVector values;
    ComplexMatrix vectors;

    /// max_j |M v_j - nu_j v_j| / |M|_F
    double relative_residual(const ComplexMatrix& m) const {
        const double scale = std::max(m.norm(), 1e-300);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < values.size(); ++j) {
            const double r = (m * vectors.col(j) - values(j) * vectors.col(j)).norm();
            worst = std::max(worst, r / scale);
        }
        return worst;
    }
};

/// Complex Schur decomposition followed by triangular back substitution.
/// Throws ConvergenceError when the QR sweeps fail or the eigenpair
/// residual exceeds `max_residual` (relative to |M|).
inline EigenDecomposition eig_dense(const ComplexMatrix& m, double max_residual = 1e-8) {
    require_square(m, "eig_dense");
    require_finite(m, "eig_dense");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eig_dense: Schur iteration did not converge");
    }
    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
        const double nrm = out.vectors.col(j).norm();
        if (nrm > 0.0) out.vectors.col(j) /= nrm;
    }
    const double res = out.relative_residual(m);
    if (!(res <= max_residual)) {
        std::ostringstream os;
        os << "eig_dense: eigenpair residual " << res << " exceeds " << max_residual;
        throw ConvergenceError(os.str());
    }
    return out;
}

/// Determinant kept as log10-magnitude and phase so that products of many
/// moderately sized pivots cannot overflow.
struct LogDeterminant {
    double log10_magnitude = 0.0;
    double phase = 0.0;
    bool singular = false;

    Complex value() const {
        if (singular) return {0.0, 0.0};
        return std::polar(std::pow(10.0, log10_magnitude), phase);
    }

    LogDeterminant& operator*=(const LogDeterminant& other) {
        singular = singular || other.singular;
        log10_magnitude += other.log10_magnitude;
        phase = std::remainder(phase + other.phase, 2.0 * std::numbers::pi);
        return *this;
    }
};

inline LogDeterminant log_det(const ComplexMatrix& m) {
    require_square(m, "det_lu");
    require_finite(m, "det_lu");
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const ComplexMatrix& packed = lu.matrixLU();
    LogDeterminant d;
    d.phase = lu.permutationP().determinant() < 0 ? std::numbers::pi : 0.0;
    for (Eigen::Index i = 0; i < packed.rows(); ++i) {
        const Complex pivot = packed(i, i);
        if (pivot == Complex(0.0, 0.0)) {
            d.singular = true;
            return d;
        }
        d.log10_magnitude += std::log10(std::abs(pivot));
        d.phase += std::arg(pivot);
    }
    d.phase = std::remainder(d.phase, 2.0 * std::numbers::pi);
    return d;
}

/// Determinant via row-pivoted LU. Singular input yields 0.
inline Complex det_lu(const ComplexMatrix& m) { return log_det(m).value(); }

/// Least-squares solution X of A X ~= B through column-pivoted Householder QR.
/// `rank_tol` is relative to the largest diagonal entry of R.
inline ComplexMatrix lstsq(const ComplexMatrix& a, const ComplexMatrix& b, double rank_tol = 1e-12) {
    if (a.rows() != b.rows()) {
        throw InvalidArgument("lstsq: A and B must have the same number of rows");
    }
    if (a.cols() > a.rows()) {
        throw InvalidArgument("lstsq: A must have at least as many rows as columns");
    }
    require_finite(a, "lstsq");
    require_finite(b, "lstsq");
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
    const auto& r = qr.matrixR();
    const double lead = std::abs(r(0, 0));
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        if (!(std::abs(r(k, k)) > rank_tol * lead)) {
            std::ostringstream os;
            os << "lstsq: rank deficient; column " << qr.colsPermutation().indices()(k)
               << " of A is (numerically) a combination of the others (|R_kk|/|R_00| = "
               << (lead > 0 ? std::abs(r(k, k)) / lead : 0.0) << ")";
            throw RankDeficientError(os.str());
        }
    }
    return qr.solve(b);
}

/// Chebyshev extrema mapped affinely onto [x0, x1] (ascending) with the
/// matching spectral differentiation matrix.
struct CollocationGrid {
    int degree = 0;
    double x0 = 0.0;
    double x1 = 1.0;
    RealVector nodes;
    RealMatrix diff;

    Eigen::Index size() const { return nodes.size(); }
};

inline CollocationGrid cheb_grid(int degree, double x0, double x1) {
    if (degree < 2) throw InvalidArgument("cheb_grid: degree must be at least 2");
    if (!(x0 < x1)) throw InvalidArgument("cheb_grid: require x0 < x1");

    const int n = degree + 1;
    RealVector s(n);
    RealVector w(n);
    for (int i = 0; i < n; ++i) {
        // sin form of -cos(pi i / N) keeps the nodes exactly antisymmetric
        s(i) = std::sin(std::numbers::pi * (2.0 * i - degree) / (2.0 * degree));
        w(i) = (i % 2 == 0 ? 1.0 : -1.0) * ((i == 0 || i == degree) ? 0.5 : 1.0);
    }

    CollocationGrid g;
    g.degree = degree;
    g.x0 = x0;
    g.x1 = x1;
    g.nodes = x0 + (x1 - x0) * (s.array() + 1.0) / 2.0;
    g.diff = RealMatrix::Zero(n, n);
    const double scale = 2.0 / (x1 - x0);
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            g.diff(i, j) = scale * (w(j) / w(i)) / (s(i) - s(j));
            row += g.diff(i, j);
        }
        g.diff(i, i) = -row;  // negative-sum trick: rows annihilate constants
    }
    return g;
}

/// Coefficients of the Chebyshev interpolant through values sampled on a
/// cheb_grid (ascending nodes). Used for truncation diagnostics.
inline ComplexVector chebyshev_coefficients(const ComplexVector& values) {
    const Eigen::Index n = values.size();
    const Eigen::Index degree = n - 1;
    ComplexVector c = ComplexVector::Zero(n);
    // value at node i equals f(s_i) with s_i = -cos(pi i / N); T_k(-t) = (-1)^k T_k(t)
    for (Eigen::Index k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double weight = (i == 0 || i == degree) ? 0.5 : 1.0;
            acc += weight * values(i) * std::cos(std::numbers::pi * static_cast<double>(k * i) / degree);
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double norm = (k == 0 || k == degree) ? 1.0 / degree : 2.0 / degree;
        c(k) = sign * norm * acc;
    }
    return c;
}

}  // namespace evans
