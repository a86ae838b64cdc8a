#pragma once

#include "vnls/linalg.hpp"
#include "vnls/params.hpp"
#include "vnls/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vnls {

enum class VesselKind { Diagonal, General };

/// Numerical policy shared by every evaluator of a vessel.
struct EvalOptions {
    double exponent_cap = 500.0;       // max |Re| of any exponent before a Range error
    double singular_rel_tol = 1e-12;   // relative sigma_min threshold for X
    double spectral_tol = 1e-8;        // |lambda - eig| guard, scaled by (1 + ||A||)
    double degenerate_tol = 1e-10;     // |mu_n + conj(mu_m)| below this is a degenerate pair
    bool quadrature_fallback = true;   // General kind with degenerate spectrum
    double quadrature_tol = 1e-10;
    double modal_cond_limit = 1e4;     // max condition of A's eigenvector matrix for modal evaluation
};

/// Spectral data of a finite-dimensional NLS vessel.
///
/// Diagonal vessels store (mu, b1, b2) with A = diag(2 mu); General vessels
/// store (A, B0, X0) at the base point (x0, t = 0). Immutable once built; all
/// evaluators are pure functions of the vessel and their arguments.
class FiniteVessel {
public:
    /// Structural constructor: sizes and finiteness only. Use build_diagonal for
    /// the checked recipe.
    static FiniteVessel diagonal(Vec mu, Vec b1, Vec b2, double x0, EvalOptions opts = {});
    static FiniteVessel general(Mat a, Mat b0, Mat x0_op, double x0, EvalOptions opts = {});

    VesselKind kind() const { return kind_; }
    Eigen::Index dim() const { return a_.rows(); }
    double x0() const { return x0_; }
    const EvalOptions& options() const { return opts_; }

    const Mat& A() const { return a_; }
    double a_norm() const { return a_norm_; }
    const Vec& spectrum() const { return spectrum_; }

    // Diagonal kind
    const Vec& mu() const { return mu_; }
    const Vec& b1() const { return b1_; }
    const Vec& b2() const { return b2_; }
    double mu_min_abs() const { return mu_min_; }
    double mu_max_abs() const { return mu_max_; }

    // General kind
    const Mat& B0() const { return b0_; }
    const Mat& X0() const { return x0_op_; }
    const LyapunovSolver& lyapunov() const { return lyap_; }
    /// True when A X + X A^* = C has no unique solution (General kind).
    bool sylvester_singular() const { return sylvester_singular_; }

    /// General kind with diagonalizable A (eigenvector matrix V within modal_cond_limit):
    /// B and X are evaluated entrywise in the coordinates V^{-1} B, V^{-1} X V^{-*}.
    bool modal() const { return modal_; }
    const Mat& modal_basis() const { return v_; }
    const Mat& modal_basis_inv() const { return v_inv_; }
    const Vec& modal_eigenvalues() const { return lambda_; }
    const Mat& modal_B0() const { return b0_modal_; }
    /// Modal X0 minus the Lyapunov-consistent part; zero up to the input's Lyapunov defect.
    const Mat& modal_offset() const { return offset_; }

    /// Zero-based index pairs (n, m) with |mu_n + conj(mu_m)| below degenerate_tol
    /// (Diagonal), or eigenvalue pairs of A with the same property (General).
    const std::vector<std::pair<int, int>>& degenerate_pairs() const { return degenerate_; }

private:
    FiniteVessel() = default;

    VesselKind kind_ = VesselKind::Diagonal;
    double x0_ = 0.0;
    EvalOptions opts_;
    Mat a_;
    double a_norm_ = 0.0;
    Vec spectrum_;
    Vec mu_, b1_, b2_;
    double mu_min_ = 0.0, mu_max_ = 0.0;
    Mat b0_, x0_op_;
    LyapunovSolver lyap_;
    bool sylvester_singular_ = false;
    bool modal_ = false;
    Mat v_, v_inv_, b0_modal_, offset_;
    Vec lambda_;
    std::vector<std::pair<int, int>> degenerate_;
};

/// All vessel operators frozen at one (x, t).
struct VesselState {
    double x = 0.0;
    double t = 0.0;
    Mat A;
    Mat B;
    Mat X;
    double cond_X = std::numeric_limits<double>::infinity();
    double hermiticity_defect = 0.0;
    bool valid = false;
    std::string reason;  // why the state is invalid
    ScaledSolve x_solver;   // on X, or on V^{-1} X V^{-*} for modal vessels
    Mat basis_inv;          // V^{-1} for modal vessels, empty otherwise

    /// X^{-1} rhs; throws Error(Singular) on an invalid state.
    Mat solve_X(const Mat& rhs) const;
};

/// B(x, t), n x 2.
Mat eval_B(const FiniteVessel& v, double x, double t);

/// X(x, t), n x n.
Mat eval_X(const FiniteVessel& v, double x, double t);

/// Bundles A, B, X and runs the solvability test. Never throws for a singular
/// X; the state is returned with valid == false instead. Range errors from the
/// exponent cap do propagate.
VesselState eval_state(const FiniteVessel& v, double x, double t);

/// [1 0] gamma_* [0 1]^T, i.e. entry (1,2) of H_0 = B^* X^{-1} B.
cplx beta(const VesselState& s);

/// sigma2 H_0 - H_0 sigma2.
Mat2 gamma_star(const VesselState& s);

/// S(lambda, x, t) = I - B^* X^{-1} (lambda I - A)^{-1} B.
Mat2 transfer(const VesselState& s, cplx lambda, double spectral_tol = 1e-8);

/// H_n = B^* X^{-1} A^n B.
Mat2 moment(const VesselState& s, int n);

/// det(X(x0, 0)^{-1} X(x, t)).
cplx tau(const FiniteVessel& v, double x, double t);

/// X(y, t) - X(x, t) formed without cancellation, so it keeps relative accuracy
/// as y approaches x.
Mat eval_X_increment(const FiniteVessel& v, double x, double y, double t);

/// B(y, t) - B(x, t) without cancellation.
Mat eval_B_increment(const FiniteVessel& v, double x, double y, double t);

/// log tau(y, t) - log tau(x, t) = log det(I + X(x, t)^{-1} (X(y, t) - X(x, t))),
/// continued along the segment for small increments (trace-log series).
cplx log_tau_increment(const FiniteVessel& v, double x, double y, double t);

}  // namespace vnls
