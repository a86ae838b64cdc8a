#pragma once

#include "vnls/types.hpp"

#include <Eigen/Eigenvalues>

namespace vnls {

/// Largest singular value.
double op_norm(const Mat& m);

/// Frobenius norm of X - X^*.
double hermiticity_defect(const Mat& x);

/// Solves A X + X A^* = C by Bartels-Stewart on the complex Schur form of A.
///
/// The Schur factorization is computed once; each solve costs two unitary
/// similarity transforms plus n triangular solves. The solution is unique iff
/// no eigenvalue pair satisfies lambda_i + conj(lambda_j) = 0.
class LyapunovSolver {
public:
    LyapunovSolver() = default;
    explicit LyapunovSolver(const Mat& a);

    /// Smallest |lambda_i + conj(lambda_j)| over eigenvalue pairs of A.
    double separation() const { return separation_; }

    Mat solve(const Mat& c) const;

    const Vec& eigenvalues() const { return eig_; }

private:
    Mat u_;
    Mat t_;
    Vec eig_;
    double separation_ = 0.0;
};

/// Invertibility test plus solver for a square matrix.
///
/// The matrix is symmetrically equilibrated (Ruiz iteration on the row maxima of
/// D X D) before the singular values are taken, so exponential row scaling (typical
/// for vessel X far from the base point) does not read as rank deficiency.
/// X is declared singular when sigma_min(DXD) <= rel_tol * sigma_max(DXD).
class ScaledSolve {
public:
    ScaledSolve() = default;
    ScaledSolve(const Mat& x, double rel_tol);

    bool singular() const { return singular_; }
    double condition() const { return cond_; }

    /// X^{-1} rhs. Only meaningful when !singular().
    Mat solve(const Mat& rhs) const;

    /// det(X^{-1} Y), formed in the equilibrated coordinates as det((DXD)^{-1} DYD).
    cplx relative_det(const Mat& y) const;

private:
    Eigen::VectorXd scale_;
    Eigen::PartialPivLU<Mat> lu_;
    bool singular_ = true;
    double cond_ = std::numeric_limits<double>::infinity();
};

/// Matrix exponential (Pade scaling-and-squaring).
Mat expm(const Mat& m);

/// exp(z) - 1 and expm(G) - I, accurate for small arguments.
cplx expm1(cplx z);
Mat expm1(const Mat& g);

}  // namespace vnls
