#include "vnls/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace vnls {

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double hermiticity_defect(const Mat& x) {
    return (x - x.adjoint()).norm();
}

LyapunovSolver::LyapunovSolver(const Mat& a) {
    Eigen::ComplexSchur<Mat> schur(a, true);
    if (schur.info() != Eigen::Success) {
        throw Error(ErrorKind::Numerical, "complex Schur decomposition did not converge");
    }
    u_ = schur.matrixU();
    t_ = schur.matrixT();
    eig_ = t_.diagonal();
    separation_ = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eig_.size(); ++i) {
        for (Eigen::Index j = 0; j < eig_.size(); ++j) {
            separation_ = std::min(separation_, std::abs(eig_(i) + std::conj(eig_(j))));
        }
    }
}

Mat LyapunovSolver::solve(const Mat& c) const {
    const Eigen::Index n = t_.rows();
    // T Y + Y T^* = F with F = U^* C U and X = U Y U^*.
    const Mat f = u_.adjoint() * c * u_;
    Mat y = Mat::Zero(n, n);
    // Column j of Y T^* couples to columns k >= j through conj(T(j, k)); sweep from the right.
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        Vec rhs = f.col(j);
        for (Eigen::Index k = j + 1; k < n; ++k) {
            rhs -= std::conj(t_(j, k)) * y.col(k);
        }
        Mat shifted = t_;
        shifted.diagonal().array() += std::conj(t_(j, j));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (shifted(i, i) == cplx(0.0)) {
                throw Error(ErrorKind::Config,
                            "Lyapunov operator is singular: spec(A) meets -conj(spec(A))");
            }
        }
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return u_ * y * u_.adjoint();
}

ScaledSolve::ScaledSolve(const Mat& x, double rel_tol) {
    const Eigen::Index n = x.rows();
    if (!x.allFinite()) return;
    scale_ = Eigen::VectorXd::Ones(n);
    // Symmetric Ruiz equilibration: drive every row max of D X D towards one.
    Mat scaled = x;
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::VectorXd r(n);
        bool balanced = true;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double row_max = scaled.row(k).cwiseAbs().maxCoeff();
            if (row_max == 0.0) {
                cond_ = std::numeric_limits<double>::infinity();
                return;
            }
            r(k) = 1.0 / std::sqrt(row_max);
            balanced = balanced && row_max > 0.5 && row_max < 2.0;
        }
        if (balanced) break;
        scale_.array() *= r.array();
        scaled = r.asDiagonal() * scaled * r.asDiagonal();
    }
    Eigen::JacobiSVD<Mat> svd(scaled);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(n - 1);
    cond_ = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    singular_ = !(smin > rel_tol * smax);
    if (!singular_) lu_.compute(scaled);
}

Mat ScaledSolve::solve(const Mat& rhs) const {
    if (singular_) throw Error(ErrorKind::Singular, "solve on a numerically singular operator");
    // X^{-1} = D (D X D)^{-1} D
    return scale_.asDiagonal() * lu_.solve(scale_.asDiagonal() * rhs);
}

cplx ScaledSolve::relative_det(const Mat& y) const {
    if (singular_) throw Error(ErrorKind::Singular, "determinant ratio against a numerically singular operator");
    const Mat scaled_y = scale_.asDiagonal() * y * scale_.asDiagonal();
    return lu_.solve(scaled_y).partialPivLu().determinant();
}

Mat expm(const Mat& m) {
    return m.exp();
}

// exp(z) - 1 without cancellation for small |z|.
cplx expm1(cplx z) {
    if (std::abs(z) >= 0.5) return std::exp(z) - 1.0;
    cplx acc = z;
    cplx term = z;
    for (int k = 2; k < 30; ++k) {
        term *= z / static_cast<double>(k);
        acc += term;
        if (std::abs(term) <= 1e-18 * std::abs(acc)) break;
    }
    return acc;
}

// expm(G) - I by its Taylor series when G is small, else through expm.
Mat expm1(const Mat& g) {
    const Eigen::Index n = g.rows();
    if (op_norm(g) > 0.5) return expm(g) - Mat::Identity(n, n);
    Mat acc = g;
    Mat term = g;
    for (int k = 2; k < 40; ++k) {
        term = term * g / static_cast<double>(k);
        acc += term;
        if (term.norm() <= 1e-18 * acc.norm()) break;
    }
    return acc;
}

}  // namespace vnls
