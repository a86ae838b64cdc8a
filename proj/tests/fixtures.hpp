#pragma once

#include "oracles.hpp"
#include "vnls/build.hpp"

#include <random>

namespace fixtures {

using vnls::cplx;
using vnls::Mat;
using vnls::Vec;

inline Vec cvec(std::initializer_list<cplx> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (const auto& c : v) out(k++) = c;
    return out;
}

inline vnls::FiniteVessel one_soliton(double x0 = 0.0) {
    return vnls::build_diagonal(cvec({0.5}), cvec({1.0}), cvec({1.0}), x0);
}

/// mu = (1/2, 1), b1 = (1, 1), b2 = (1, -1).
inline vnls::FiniteVessel two_point() {
    return vnls::build_diagonal(cvec({0.5, 1.0}), cvec({1.0, 1.0}), cvec({1.0, -1.0}));
}

/// Real mu uniform in [0.3, 1], complex normal b; fixed seed.
inline vnls::FiniteVessel random_diagonal(std::uint64_t seed, int n = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu_d(0.3, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec mu(n), b1(n), b2(n);
    for (int k = 0; k < n; ++k) {
        mu(k) = mu_d(rng);
        b1(k) = cplx(nd(rng), nd(rng));
        b2(k) = cplx(nd(rng), nd(rng));
    }
    return vnls::build_diagonal(mu, b1, b2);
}

struct RealizedData {
    Mat a, b0, x0;
};

/// Random A shifted to be Hurwitz (max Re eig = -1/2), random B0, X0 from the
/// Kronecker Lyapunov oracle.
inline RealizedData random_realized_data(std::uint64_t seed, int n = 4) {
    std::mt19937_64 rng(seed);
    Mat a = oracle::random_matrix(rng, n, n) * 0.5;
    Eigen::ComplexEigenSolver<Mat> es(a, false);
    double max_re = -1e300;
    for (Eigen::Index k = 0; k < n; ++k) max_re = std::max(max_re, es.eigenvalues()(k).real());
    a -= (max_re + 0.5) * Mat::Identity(n, n);
    Mat b0 = oracle::random_matrix(rng, n, 2) * 0.5;
    Mat x0 = oracle::kron_lyapunov(a, -b0 * b0.adjoint());
    x0 = (0.5 * (x0 + x0.adjoint())).eval();
    return {a, b0, x0};
}

inline vnls::FiniteVessel random_realized(std::uint64_t seed, int n = 4) {
    const auto d = random_realized_data(seed, n);
    return vnls::build_realized(d.a, d.b0, d.x0);
}

/// 16-node Gauss-Legendre on the vertical segment 1/2 - 4i .. 1/2 + 4i, b1 = b2 = 1.
/// Node spacing is wide relative to 2 Re(mu), which keeps the Cauchy-like X well conditioned.
inline vnls::FiniteVessel curve16() {
    const auto curve = vnls::CurveSpec::segment(cplx(0.5, -4.0), cplx(0.5, 4.0));
    const auto rule = vnls::QuadratureRule::gauss_legendre(curve.a, curve.b, 16);
    auto one = [](cplx) { return cplx(1.0); };
    return vnls::build_curve(curve, one, one, rule);
}

/// Synthetic vessel with B = 0 and X = I: S = I, beta = 0.
inline vnls::FiniteVessel zero_b() {
    Mat a(1, 1);
    a(0, 0) = 1.0;
    return vnls::FiniteVessel::general(a, Mat::Zero(1, 2), Mat::Identity(1, 1), 0.0);
}

/// Diagonal vessel re-wrapped as a realized one at its base point.
inline vnls::FiniteVessel rewrap(const vnls::FiniteVessel& v) {
    return vnls::build_realized(v.A(), vnls::eval_B(v, v.x0(), 0.0), vnls::eval_X(v, v.x0(), 0.0), v.x0());
}

}  // namespace fixtures
