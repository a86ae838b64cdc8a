#include "vnls/vessel.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace vnls {
namespace {

void check_exponent(cplx z, double cap, const char* what, Eigen::Index index) {
    if (!(std::abs(z.real()) <= cap)) {
        std::ostringstream os;
        os << what << " exponent real part " << z.real() << " exceeds cap " << cap
           << " at index " << index;
        throw Error(ErrorKind::Range, os.str());
    }
}

Mat sigma2_outer(const Mat& b) {
    // B sigma2 B^* = (b1 b1^* - b2 b2^*) / 2
    return 0.5 * (b.col(0) * b.col(0).adjoint() - b.col(1) * b.col(1).adjoint());
}

// Adaptive Simpson on a matrix-valued integrand; tolerance on the Frobenius norm.
Mat simpson_step(const std::function<Mat(double)>& f, double a, double b, const Mat& fa,
                 const Mat& fm, const Mat& fb, const Mat& whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const Mat flm = f(lm);
    const Mat frm = f(rm);
    const Mat left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Mat right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Mat delta = left + right - whole;
    if (depth <= 0 || delta.norm() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

Mat adaptive_simpson(const std::function<Mat(double)>& f, double a, double b, double tol) {
    const Mat fa = f(a);
    if (a == b) return Mat::Zero(fa.rows(), fa.cols());
    const Mat fb = f(b);
    const Mat fm = f(0.5 * (a + b));
    const Mat whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

Vec modal_exponents(const FiniteVessel& v, double s, double t) {
    const Vec& lam = v.modal_eigenvalues();
    Vec g(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        g(k) = -0.5 * lam(k) * s - 0.5 * I_unit * lam(k) * lam(k) * t;
        check_exponent(g(k), v.options().exponent_cap, "B", k);
    }
    return g;
}

// V^{-1} B.
Mat modal_B(const FiniteVessel& v, double s, double t) {
    const Vec g = modal_exponents(v, s, t);
    const Mat& b0 = v.modal_B0();
    Mat b(b0.rows(), 2);
    for (Eigen::Index k = 0; k < b0.rows(); ++k) {
        b(k, 0) = std::exp(g(k)) * b0(k, 0);
        b(k, 1) = std::exp(-g(k)) * b0(k, 1);
    }
    return b;
}

// Entry (i, j) of V^{-1} X V^{-*} (without the offset) or of its increment over x -> x + d.
template <class F>
Mat modal_entries(const FiniteVessel& v, double s, double t, F&& entry) {
    const Vec g = modal_exponents(v, s, t);
    const Vec& lam = v.modal_eigenvalues();
    const Mat& b0 = v.modal_B0();
    const Eigen::Index n = lam.size();
    Mat out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const cplx w = g(i) + std::conj(g(j));
            check_exponent(w, v.options().exponent_cap, "X", i * n + j);
            const cplx p = b0(i, 0) * std::conj(b0(j, 0));
            const cplx q = b0(i, 1) * std::conj(b0(j, 1));
            out(i, j) = entry(p, q, w, lam(i), std::conj(lam(j)), i, j);
        }
    }
    return out;
}

// V^{-1} X V^{-*}: the entrywise Lyapunov solution for the modal B plus the constant offset.
Mat modal_X(const FiniteVessel& v, double s, double t) {
    return modal_entries(v, s, t, [&](cplx p, cplx q, cplx w, cplx li, cplx lj, Eigen::Index i, Eigen::Index j) {
        return -(p * std::exp(w) + q * std::exp(-w)) / (li + lj) + v.modal_offset()(i, j);
    });
}

Mat modal_X_increment(const FiniteVessel& v, double s, double d, double t) {
    const double cap = v.options().exponent_cap;
    return modal_entries(v, s, t, [&](cplx p, cplx q, cplx w, cplx li, cplx lj, Eigen::Index i, Eigen::Index) {
        const cplx dw = -0.5 * (li + lj) * d;
        check_exponent(w + dw, cap, "X", i);
        return -(p * std::exp(w) * expm1(dw) + q * std::exp(-w) * expm1(-dw)) / (li + lj);
    });
}

Mat from_modal(const FiniteVessel& v, const Mat& m) {
    const Mat x = v.modal_basis() * m * v.modal_basis().adjoint();
    return 0.5 * (x + x.adjoint());
}

void find_degenerate(const Vec& values, double tol, std::vector<std::pair<int, int>>& out) {
    for (Eigen::Index n = 0; n < values.size(); ++n) {
        for (Eigen::Index m = 0; m < values.size(); ++m) {
            if (std::abs(values(n) + std::conj(values(m))) < tol) {
                out.emplace_back(static_cast<int>(n), static_cast<int>(m));
            }
        }
    }
}

}  // namespace

FiniteVessel FiniteVessel::diagonal(Vec mu, Vec b1, Vec b2, double x0, EvalOptions opts) {
    if (mu.size() == 0) throw Error(ErrorKind::Config, "vessel dimension must be positive");
    if (b1.size() != mu.size() || b2.size() != mu.size()) {
        throw Error(ErrorKind::Config, "mu, b1 and b2 must have equal lengths");
    }
    if (!mu.allFinite() || !b1.allFinite() || !b2.allFinite() || !std::isfinite(x0)) {
        throw Error(ErrorKind::Config, "vessel data must be finite");
    }
    FiniteVessel v;
    v.kind_ = VesselKind::Diagonal;
    v.x0_ = x0;
    v.opts_ = opts;
    v.mu_ = std::move(mu);
    v.b1_ = std::move(b1);
    v.b2_ = std::move(b2);
    v.a_ = (2.0 * v.mu_).asDiagonal();
    v.spectrum_ = 2.0 * v.mu_;
    v.a_norm_ = v.spectrum_.cwiseAbs().maxCoeff();
    v.mu_min_ = v.mu_.cwiseAbs().minCoeff();
    v.mu_max_ = v.mu_.cwiseAbs().maxCoeff();
    find_degenerate(v.mu_, opts.degenerate_tol, v.degenerate_);
    return v;
}

FiniteVessel FiniteVessel::general(Mat a, Mat b0, Mat x0_op, double x0, EvalOptions opts) {
    const Eigen::Index n = a.rows();
    if (n == 0 || a.cols() != n) throw Error(ErrorKind::Config, "A must be square and non-empty");
    if (b0.rows() != n || b0.cols() != 2) throw Error(ErrorKind::Config, "B0 must be n x 2");
    if (x0_op.rows() != n || x0_op.cols() != n) throw Error(ErrorKind::Config, "X0 must be n x n");
    if (!a.allFinite() || !b0.allFinite() || !x0_op.allFinite() || !std::isfinite(x0)) {
        throw Error(ErrorKind::Config, "vessel data must be finite");
    }
    FiniteVessel v;
    v.kind_ = VesselKind::General;
    v.x0_ = x0;
    v.opts_ = opts;
    v.a_ = std::move(a);
    v.b0_ = std::move(b0);
    v.x0_op_ = std::move(x0_op);
    v.a_norm_ = op_norm(v.a_);
    v.lyap_ = LyapunovSolver(v.a_);
    v.spectrum_ = v.lyap_.eigenvalues();
    // Relative separation test: the Lyapunov operator is numerically singular.
    const double sep_tol = opts.spectral_tol * (1.0 + v.a_norm_);
    v.sylvester_singular_ = v.lyap_.separation() < sep_tol;
    find_degenerate(v.spectrum_, sep_tol, v.degenerate_);
    if (!v.sylvester_singular_) {
        const Eigen::ComplexEigenSolver<Mat> es(v.a_);
        if (es.info() == Eigen::Success) {
            const Eigen::JacobiSVD<Mat> svd(es.eigenvectors());
            const auto& sv = svd.singularValues();
            if (sv(n - 1) > 0.0 && sv(0) / sv(n - 1) <= opts.modal_cond_limit) {
                v.modal_ = true;
                v.v_ = es.eigenvectors();
                v.v_inv_ = v.v_.partialPivLu().inverse();
                v.lambda_ = es.eigenvalues();
                v.b0_modal_ = v.v_inv_ * v.b0_;
                v.offset_ = Mat::Zero(n, n);
                v.offset_ = v.v_inv_ * v.x0_op_ * v.v_inv_.adjoint() - modal_X(v, 0.0, 0.0);
            }
        }
    }
    return v;
}

Mat VesselState::solve_X(const Mat& rhs) const {
    if (!valid) {
        throw Error(ErrorKind::Singular, "outside interval of invertibility: " + reason);
    }
    if (basis_inv.size() == 0) return x_solver.solve(rhs);
    return basis_inv.adjoint() * x_solver.solve(basis_inv * rhs);
}

Mat eval_B(const FiniteVessel& v, double x, double t) {
    const double s = x - v.x0();
    const double cap = v.options().exponent_cap;
    const Eigen::Index n = v.dim();
    Mat b(n, 2);
    if (v.kind() == VesselKind::Diagonal) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const cplx mu = v.mu()(k);
            const cplx e = -mu * s - 2.0 * I_unit * mu * mu * t;
            check_exponent(e, cap, "B", k);
            b(k, 0) = std::exp(e) * v.b1()(k);
            b(k, 1) = std::exp(-e) * v.b2()(k);
        }
        return b;
    }
    if (v.modal()) return v.modal_basis() * modal_B(v, s, t);
    const Mat& a = v.A();
    for (Eigen::Index k = 0; k < n; ++k) {
        const cplx lam = v.spectrum()(k);
        check_exponent(-0.5 * lam * s - 0.5 * I_unit * lam * lam * t, cap, "B", k);
    }
    const Mat gen = -0.5 * s * a - 0.5 * I_unit * t * (a * a);
    b.col(0) = expm(gen) * v.B0().col(0);
    b.col(1) = expm(-gen) * v.B0().col(1);
    return b;
}

Mat eval_X(const FiniteVessel& v, double x, double t) {
    const double s = x - v.x0();
    const double cap = v.options().exponent_cap;
    const Eigen::Index n = v.dim();
    if (v.kind() == VesselKind::Diagonal) {
        const Vec& mu = v.mu();
        const Vec& b1 = v.b1();
        const Vec& b2 = v.b2();
        Mat xm(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx mi = mu(i);
                const cplx mj = std::conj(mu(j));
                const cplx sum = mi + mj;
                const cplx c1 = b1(i) * std::conj(b1(j));
                const cplx c2 = b2(i) * std::conj(b2(j));
                if (std::abs(sum) < v.options().degenerate_tol) {
                    xm(i, j) = 0.5 * (c1 - c2) * (s + 4.0 * I_unit * mi * t);
                    continue;
                }
                // t-exponent uses mu_i^2 - conj(mu_j)^2 so that X_t = i(A B s2 B^* - B s2 B^* A^*).
                const cplx z = -sum * s - 2.0 * I_unit * (mi * mi - mj * mj) * t;
                check_exponent(z, cap, "X", i * n + j);
                const cplx e1 = std::exp(z);
                const cplx e2 = std::exp(-z);
                xm(i, j) = -(c1 * e1 + c2 * e2) / (2.0 * sum);
            }
        }
        return xm;
    }

    if (v.modal()) return from_modal(v, modal_X(v, s, t));
    if (!v.sylvester_singular()) {
        // X = X0 + D with A D + D A^* = B0 B0^* - B B^*; D vanishes identically at (x0, 0).
        const Mat b = eval_B(v, x, t);
        const Mat rhs = v.B0() * v.B0().adjoint() - b * b.adjoint();
        Mat d = v.lyapunov().solve(rhs);
        d = 0.5 * (d + d.adjoint()).eval();
        return v.X0() + d;
    }
    if (!v.options().quadrature_fallback) {
        throw Error(ErrorKind::Config,
                    "degenerate spectrum: Sylvester system is singular and quadrature fallback is disabled");
    }
    const double tol = v.options().quadrature_tol;
    const Mat& a = v.A();
    auto dx = [&](double y) -> Mat { return sigma2_outer(eval_B(v, y, 0.0)); };
    auto dt = [&](double tau) -> Mat {
        const Mat q = sigma2_outer(eval_B(v, x, tau));
        return I_unit * (a * q - q * a.adjoint());
    };
    Mat xm = v.X0();
    xm += adaptive_simpson(dx, v.x0(), x, tol);
    xm += adaptive_simpson(dt, 0.0, t, tol);
    return xm;
}

VesselState eval_state(const FiniteVessel& v, double x, double t) {
    VesselState s;
    s.x = x;
    s.t = t;
    s.A = v.A();
    s.B = eval_B(v, x, t);
    Mat solved;
    if (v.modal()) {
        solved = modal_X(v, x - v.x0(), t);
        s.X = from_modal(v, solved);
        s.basis_inv = v.modal_basis_inv();
    } else {
        s.X = eval_X(v, x, t);
    }
    s.hermiticity_defect = hermiticity_defect(s.X);
    if (!s.X.allFinite() || !s.B.allFinite()) {
        s.reason = "non-finite operator entries";
        return s;
    }
    s.x_solver = ScaledSolve(v.modal() ? solved : s.X, v.options().singular_rel_tol);
    s.cond_X = s.x_solver.condition();
    if (s.x_solver.singular()) {
        std::ostringstream os;
        os << "X numerically singular at (x, t) = (" << x << ", " << t << "), cond " << s.cond_X;
        s.reason = os.str();
        return s;
    }
    s.valid = true;
    return s;
}

Mat2 moment(const VesselState& s, int n) {
    if (n < 0) throw Error(ErrorKind::Config, "moment index must be non-negative");
    Mat rhs = s.B;
    for (int k = 0; k < n; ++k) rhs = s.A * rhs;
    const Mat w = s.solve_X(rhs);
    return s.B.adjoint() * w;
}

cplx beta(const VesselState& s) {
    return moment(s, 0)(0, 1);
}

Mat2 gamma_star(const VesselState& s) {
    const Mat2 h0 = moment(s, 0);
    const Mat2 sigma2 = make_params().sigma2;
    return sigma2 * h0 - h0 * sigma2;
}

Mat2 transfer(const VesselState& s, cplx lambda, double spectral_tol) {
    const Eigen::Index n = s.A.rows();
    const double a_norm = op_norm(s.A);
    Eigen::ComplexEigenSolver<Mat> eig(s.A, false);
    const double guard = spectral_tol * (1.0 + a_norm);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(lambda - eig.eigenvalues()(k)) <= guard) {
            std::ostringstream os;
            os << "lambda = " << lambda << " lies within " << guard
               << " of the spectral point " << eig.eigenvalues()(k);
            throw Error(ErrorKind::Spectral, os.str());
        }
    }
    const Mat shifted = lambda * Mat::Identity(n, n) - s.A;
    const Mat z = shifted.partialPivLu().solve(s.B);
    return Mat2::Identity() - s.B.adjoint() * s.solve_X(z);
}

Mat eval_X_increment(const FiniteVessel& v, double x, double y, double t) {
    const Eigen::Index n = v.dim();
    const double d = y - x;
    if (v.kind() == VesselKind::Diagonal) {
        const double s = x - v.x0();
        const double cap = v.options().exponent_cap;
        const Vec& mu = v.mu();
        Mat dx(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx mi = mu(i);
                const cplx mj = std::conj(mu(j));
                const cplx sum = mi + mj;
                const cplx c1 = v.b1()(i) * std::conj(v.b1()(j));
                const cplx c2 = v.b2()(i) * std::conj(v.b2()(j));
                if (std::abs(sum) < v.options().degenerate_tol) {
                    dx(i, j) = 0.5 * (c1 - c2) * d;
                    continue;
                }
                const cplx z = -sum * s - 2.0 * I_unit * (mi * mi - mj * mj) * t;
                check_exponent(z, cap, "X", i * n + j);
                check_exponent(z - sum * d, cap, "X", i * n + j);
                const cplx e1 = std::exp(z) * expm1(-sum * d);
                const cplx e2 = std::exp(-z) * expm1(sum * d);
                dx(i, j) = -(c1 * e1 + c2 * e2) / (2.0 * sum);
            }
        }
        return dx;
    }
    if (v.modal()) return from_modal(v, modal_X_increment(v, x - v.x0(), d, t));
    const Mat& a = v.A();
    if (!v.sylvester_singular()) {
        const Mat b = eval_B(v, x, t);
        eval_B(v, y, t);  // exponent cap at the far end
        Mat db(n, 2);
        db.col(0) = expm1(Mat(-0.5 * d * a)) * b.col(0);
        db.col(1) = expm1(Mat(0.5 * d * a)) * b.col(1);
        const Mat rhs = -(db * b.adjoint() + b * db.adjoint() + db * db.adjoint());
        Mat dx = v.lyapunov().solve(rhs);
        return 0.5 * (dx + dx.adjoint());
    }
    if (!v.options().quadrature_fallback) {
        throw Error(ErrorKind::Config,
                    "degenerate spectrum: Sylvester system is singular and quadrature fallback is disabled");
    }
    auto integrand = [&](double u) -> Mat { return sigma2_outer(eval_B(v, u, t)); };
    return adaptive_simpson(integrand, x, y, v.options().quadrature_tol * std::max(std::abs(d), 1e-300));
}

Mat eval_B_increment(const FiniteVessel& v, double x, double y, double t) {
    const double d = y - x;
    eval_B(v, y, t);  // exponent cap at the far end
    if (v.kind() == VesselKind::Diagonal) {
        Mat db = eval_B(v, x, t);
        for (Eigen::Index k = 0; k < v.dim(); ++k) {
            db(k, 0) *= expm1(-v.mu()(k) * d);
            db(k, 1) *= expm1(v.mu()(k) * d);
        }
        return db;
    }
    if (v.modal()) {
        Mat db = modal_B(v, x - v.x0(), t);
        for (Eigen::Index k = 0; k < v.dim(); ++k) {
            db(k, 0) *= expm1(-0.5 * v.modal_eigenvalues()(k) * d);
            db(k, 1) *= expm1(0.5 * v.modal_eigenvalues()(k) * d);
        }
        return v.modal_basis() * db;
    }
    const Mat b = eval_B(v, x, t);
    Mat db(v.dim(), 2);
    db.col(0) = expm1(Mat(-0.5 * d * v.A())) * b.col(0);
    db.col(1) = expm1(Mat(0.5 * d * v.A())) * b.col(1);
    return db;
}

cplx log_tau_increment(const FiniteVessel& v, double x, double y, double t) {
    const VesselState s = eval_state(v, x, t);
    if (!s.valid) throw Error(ErrorKind::Singular, "outside interval of invertibility: " + s.reason);
    const Mat m = v.modal() ? s.x_solver.solve(modal_X_increment(v, x - v.x0(), y - x, t))
                            : s.x_solver.solve(eval_X_increment(v, x, y, t));
    if (op_norm(m) < 0.5) {
        // log det(I + M) = sum_k (-1)^{k+1} tr(M^k) / k
        cplx acc = 0.0;
        Mat power = m;
        for (int k = 1; k <= 200; ++k) {
            const cplx term = power.trace() / static_cast<double>(k);
            acc += (k % 2 ? 1.0 : -1.0) * term;
            if (std::abs(term) <= 1e-18 * std::max(std::abs(acc), 1e-300)) break;
            power = power * m;
        }
        return acc;
    }
    return std::log((Mat::Identity(v.dim(), v.dim()) + m).partialPivLu().determinant());
}

cplx tau(const FiniteVessel& v, double x, double t) {
    // det is invariant under the congruence to modal coordinates.
    const Mat base = v.modal() ? modal_X(v, 0.0, 0.0) : eval_X(v, v.x0(), 0.0);
    const ScaledSolve base_solver(base, v.options().singular_rel_tol);
    if (base_solver.singular()) {
        throw Error(ErrorKind::Singular, "X(x0, 0) is singular; tau is undefined");
    }
    return base_solver.relative_det(v.modal() ? modal_X(v, x - v.x0(), t) : eval_X(v, x, t));
}

}  // namespace vnls
