#pragma once

#include "vnls/vessel.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace vnls {

struct Segment {
    cplx z_a;
    cplx z_b;
};

struct CircularArc {
    cplx center;
    double radius = 1.0;
    double angle_a = 0.0;
    double angle_b = 1.0;
};

/// Polyline through the nodes; segment k is parameterized by s in [k, k+1].
struct Samples {
    std::vector<cplx> nodes;
};

/// A bounded parameterized curve mu(s), s in [a, b].
struct CurveSpec {
    std::variant<Segment, CircularArc, Samples> family;
    double a = 0.0;
    double b = 1.0;

    static CurveSpec segment(cplx z_a, cplx z_b);
    static CurveSpec arc(cplx center, double radius, double angle_a, double angle_b);
    static CurveSpec samples(std::vector<cplx> nodes);

    cplx point(double s) const;
};

/// Nodes in [a, b] with positive weights.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    /// Composite Gauss-Legendre: `panels` equal panels with `points` nodes each.
    static QuadratureRule gauss_legendre(double a, double b, int points, int panels = 1);
};

using SpectralFunction = std::function<cplx(cplx)>;

/// Discrete-spectrum recipe: A = diag(2 mu), closed-form B and X.
/// Throws Error(Config) for mismatched lengths, |mu_k| == 0 or b1_k = b2_k = 0, and
/// Error(Singular) when X(x0, 0) fails the solvability test.
FiniteVessel build_diagonal(const Vec& mu, const Vec& b1, const Vec& b2, double x0 = 0.0,
                            EvalOptions opts = {});

struct NystromData {
    Vec mu;
    Vec b1;
    Vec b2;
};

/// Nystrom reduction of the curve kernel: mu_j = mu(s_j), b_j = b(mu_j) sqrt(w_j). Checks
/// boundedness on the nodes, positive weights and min |mu_i + conj(mu_j)| > 1e-8.
NystromData nystrom_reduce(const CurveSpec& curve, const SpectralFunction& b1_fn,
                           const SpectralFunction& b2_fn, const QuadratureRule& rule);

/// Curve-spectrum recipe: build_diagonal applied to nystrom_reduce. The discrete X is
/// a Cauchy-like matrix whose conditioning grows quickly with node density; dense
/// rules on short curves fail the solvability test with Error(Singular).
FiniteVessel build_curve(const CurveSpec& curve, const SpectralFunction& b1_fn,
                         const SpectralFunction& b2_fn, const QuadratureRule& rule,
                         double x0 = 0.0, EvalOptions opts = {});

/// Realized-function recipe from (A, B0, X0) at the base point x0.
/// Requires X0 = X0^* and A X0 + X0 A^* + B0 B0^* = 0 within tolerance and X0 invertible.
FiniteVessel build_realized(const Mat& a, const Mat& b0, const Mat& x0_op, double x0 = 0.0,
                            EvalOptions opts = {});

/// Frobenius norm of A X + X A^* + B B^*.
double lyapunov_residual(const Mat& a, const Mat& x, const Mat& b);

}  // namespace vnls
