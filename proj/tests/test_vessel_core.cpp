#include "fixtures.hpp"
#include "oracles.hpp"

#include "vnls/field.hpp"
#include "vnls/params.hpp"
#include "vnls/vessel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vnls;
using fixtures::cvec;

namespace {

Mat sigma2_outer(const Mat& b) {
    return 0.5 * (b.col(0) * b.col(0).adjoint() - b.col(1) * b.col(1).adjoint());
}

}  // namespace

TEST_CASE("make_params returns the NLS constants") {
    const VesselParams p = make_params();
    CHECK(p.sigma1 == Mat2::Identity());
    CHECK(p.sigma2(0, 0) == cplx(0.5));
    CHECK(p.sigma2(1, 1) == cplx(-0.5));
    CHECK(p.sigma2(0, 1) == cplx(0.0));
    CHECK(p.sigma2(1, 0) == cplx(0.0));
    CHECK(p.gamma == Mat2::Zero());
    CHECK((p.sigma1 * p.sigma2 - p.sigma2 * p.sigma1).norm() == 0.0);
    CHECK(p.sigma2 == p.sigma2.adjoint());
    CHECK(p.gamma == -p.gamma.adjoint());
}

TEST_CASE("eval_B closed forms") {
    const auto v = fixtures::one_soliton();
    Mat b = eval_B(v, 0.0, 0.0);
    CHECK(b.rows() == 1);
    CHECK(std::abs(b(0, 0) - 1.0) == 0.0);
    CHECK(std::abs(b(0, 1) - 1.0) == 0.0);

    b = eval_B(v, 0.0, 1.0);
    CHECK(std::abs(b(0, 0) - std::exp(cplx(0, -0.5))) < 1e-15);
    CHECK(std::abs(b(0, 1) - std::exp(cplx(0, 0.5))) < 1e-15);

    SUBCASE("general kind with A = [1] matches the scalar exponentials") {
        Mat a(1, 1), b0(1, 2), x0(1, 1);
        a << 1.0;
        b0 << 1.0, 1.0;
        x0 << -1.0;
        const auto g = FiniteVessel::general(a, b0, x0, 0.0);
        for (double x : {-2.0, -0.3, 0.0, 1.7}) {
            const Mat bg = eval_B(g, x, 0.0);
            const Mat bd = eval_B(v, x, 0.0);
            CHECK(std::abs(bg(0, 0) - std::exp(-x / 2)) < 1e-14 * std::exp(std::abs(x)));
            CHECK(std::abs(bg(0, 1) - std::exp(x / 2)) < 1e-14 * std::exp(std::abs(x)));
            CHECK((bg - bd).norm() < 1e-14 * std::exp(std::abs(x)));
        }
    }
}

TEST_CASE("eval_B for a general A agrees with RK4 integration of the vessel ODEs") {
    const auto data = fixtures::random_realized_data(7);
    EvalOptions schur;
    schur.modal_cond_limit = 0.0;
    const auto modal = build_realized(data.a, data.b0, data.x0);
    const auto dense = build_realized(data.a, data.b0, data.x0, 0.0, schur);
    REQUIRE(modal.modal());
    REQUIRE_FALSE(dense.modal());
    const Mat& a = data.a;
    auto rhs_x = [&](double, const Mat& b) -> Mat {
        Mat out = -a * b;
        out.col(1) *= -1.0;  // -A B sigma2 with sigma2 = diag(1, -1)/2
        return 0.5 * out;
    };
    const Mat bx = oracle::rk4(rhs_x, data.b0, 0.0, 1.3, 2000);
    for (const auto* v : {&modal, &dense}) CHECK((eval_B(*v, 1.3, 0.0) - bx).norm() < 1e-10 * (1.0 + bx.norm()));

    // B_t = i A B_x = -i A^2 B sigma2
    auto rhs_t = [&](double, const Mat& b) -> Mat {
        Mat out = a * a * b;
        out.col(1) *= -1.0;
        return cplx(0.0, -0.5) * out;
    };
    const Mat bt = oracle::rk4(rhs_t, bx, 0.0, 0.7, 2000);
    for (const auto* v : {&modal, &dense}) CHECK((eval_B(*v, 1.3, 0.7) - bt).norm() < 1e-10 * (1.0 + bt.norm()));
}

TEST_CASE("modal and Schur evaluation of a general vessel agree") {
    const auto data = fixtures::random_realized_data(42);
    EvalOptions schur;
    schur.modal_cond_limit = 0.0;
    const auto modal = build_realized(data.a, data.b0, data.x0);
    const auto dense = build_realized(data.a, data.b0, data.x0, 0.0, schur);
    CHECK((eval_X(modal, 0.0, 0.0) - data.x0).norm() < 1e-12 * data.x0.norm());
    for (auto [x, t] : {std::pair{-1.0, 0.2}, std::pair{0.4, 0.0}, std::pair{1.5, 0.7}}) {
        const Mat xm = eval_X(modal, x, t);
        CHECK((xm - eval_X(dense, x, t)).norm() < 1e-10 * xm.norm());
        CHECK(lyapunov_residual(data.a, xm, eval_B(modal, x, t)) < 1e-12 * (1.0 + xm.norm()));
        const VesselState a = eval_state(modal, x, t), b = eval_state(dense, x, t);
        CHECK(std::abs(beta(a) - beta(b)) < 1e-9);
        CHECK(std::abs(tau(modal, x, t) - tau(dense, x, t)) < 1e-9 * std::abs(tau(modal, x, t)));
        const cplx lam(2.0, 5.0);
        CHECK((transfer(a, lam) - transfer(b, lam)).norm() < 1e-9);
        const Mat inc = eval_X_increment(modal, x, x + 0.3, t);
        CHECK((inc - eval_X_increment(dense, x, x + 0.3, t)).norm() < 1e-10 * (1.0 + xm.norm()));
    }
    // Far from x0 the X0 + D form cancels O(1) terms; the modal form keeps the symmetry of S.
    const VesselState far = eval_state(modal, -3.0, 0.5);
    for (const cplx lam : {cplx(3.0, 12.0), cplx(-9.0, 4.0), cplx(14.0, -2.0)}) {
        const Mat2 sym = transfer(far, -std::conj(lam)).adjoint() * transfer(far, lam) - Mat2::Identity();
        CHECK(sym.norm() < 1e-11);
    }
}

TEST_CASE("eval_X closed forms") {
    const auto v = fixtures::one_soliton();
    CHECK(std::abs(eval_X(v, 0.0, 0.0)(0, 0) - cplx(-1.0)) < 1e-15);
    for (double x : {-3.0, -0.5, 0.25, 2.0}) {
        CHECK(std::abs(eval_X(v, x, 0.0)(0, 0) + std::cosh(x)) < 1e-14 * std::cosh(x));
    }

    SUBCASE("quadrature of X_x = B s2 B^* from the base point") {
        const auto w = fixtures::two_point();
        auto integrand = [&](double y) -> Mat {
            Mat b(2, 2);
            for (int k = 0; k < 2; ++k) {
                b(k, 0) = std::exp(-w.mu()(k) * y) * w.b1()(k);
                b(k, 1) = std::exp(w.mu()(k) * y) * w.b2()(k);
            }
            return sigma2_outer(b);
        };
        const Mat x_ref = eval_X(w, 0.0, 0.0) + oracle::simpson(integrand, 0.0, 1.4, 400);
        CHECK((eval_X(w, 1.4, 0.0) - x_ref).norm() < 1e-10);
    }

    SUBCASE("degenerate entry mu = i/2, b1 = 1, b2 = 0 gives x/2") {
        const auto d = FiniteVessel::diagonal(cvec({cplx(0, 0.5)}), cvec({1.0}), cvec({0.0}), 0.0);
        REQUIRE(d.degenerate_pairs().size() == 1);
        for (double x : {-1.0, 0.0, 0.6, 3.0}) {
            CHECK(std::abs(eval_X(d, x, 0.0)(0, 0) - cplx(x / 2)) < 1e-15);
        }
    }
}

TEST_CASE("X(x, t) satisfies the t-evolution for complex mu (difference exponent)") {
    // Random complex spectrum: the exponent -2i(mu_n^2 - conj(mu_m)^2) t is the one whose
    // derivative reproduces X_t = i(A B s2 B^* - B s2 B^* A^*).
    const Vec mu = cvec({cplx(0.6, 0.3), cplx(0.9, -0.4), cplx(0.4, 0.7)});
    const Vec b1 = cvec({cplx(1.0, 0.2), cplx(-0.3, 0.8), cplx(0.5, -0.5)});
    const Vec b2 = cvec({cplx(0.7, -0.1), cplx(0.4, 0.4), cplx(-1.0, 0.3)});
    const auto v = FiniteVessel::diagonal(mu, b1, b2, 0.0);
    const Mat& a = v.A();
    const double h = 1e-4;
    for (auto [x, t] : {std::pair{0.3, 0.2}, std::pair{-0.7, 0.5}, std::pair{1.1, -0.4}}) {
        const Mat xt = (eval_X(v, x, t - 2 * h) - 8.0 * eval_X(v, x, t - h) + 8.0 * eval_X(v, x, t + h) -
                        eval_X(v, x, t + 2 * h)) / (12 * h);
        const Mat q = sigma2_outer(eval_B(v, x, t));
        const Mat expected = cplx(0, 1) * (a * q - q * a.adjoint());
        CHECK((xt - expected).norm() < 1e-8 * (1.0 + expected.norm()));

        // The summed exponent +2i(mu_n^2 + conj(mu_m)^2) t does not satisfy the t-equation.
        Mat printed(3, 3);
        for (int n = 0; n < 3; ++n) {
            for (int m = 0; m < 3; ++m) {
                auto entry = [&](double s) {
                    const cplx sum = mu(n) + std::conj(mu(m));
                    const cplx tsum = mu(n) * mu(n) + std::conj(mu(m)) * std::conj(mu(m));
                    const cplx z = -sum * x - cplx(0, 2) * tsum * s;
                    return -(b1(n) * std::conj(b1(m)) * std::exp(z) + b2(n) * std::conj(b2(m)) * std::exp(-z)) /
                           (2.0 * sum);
                };
                printed(n, m) = (entry(t - 2 * h) - 8.0 * entry(t - h) + 8.0 * entry(t + h) - entry(t + 2 * h)) /
                                (12 * h);
            }
        }
        CHECK((printed - expected).norm() > 1e-2);
    }
}

TEST_CASE("degenerate pair entries: closed form (4i coefficient) matches quadrature of the vessel ODEs") {
    // mu_1 + conj(mu_2) = 0 and b1_1 conj(b1_2) + b2_1 conj(b2_2) = 0 keeps the Lyapunov equation.
    const Vec mu = cvec({cplx(0.5, 0.5), cplx(-0.5, 0.5)});
    const Vec b1 = cvec({1.0, 1.0});
    const Vec b2 = cvec({1.0, -1.0});
    const auto d = build_diagonal(mu, b1, b2);
    CHECK(d.degenerate_pairs().size() == 2);
    const auto g = build_realized(d.A(), eval_B(d, 0.0, 0.0), eval_X(d, 0.0, 0.0));
    CHECK(g.sylvester_singular());
    for (auto [x, t] : {std::pair{0.4, 0.3}, std::pair{-0.6, -0.2}, std::pair{1.0, 0.5}}) {
        const Mat xd = eval_X(d, x, t);
        const Mat xg = eval_X(g, x, t);
        CHECK((xd - xg).norm() < 1e-8 * (1.0 + xd.norm()));
        // entry (1,2): (b1 b1* - b2 b2*)/2 * (x + 4 i mu_1 t)
        CHECK(std::abs(xd(0, 1) - (x + 4.0 * cplx(0, 1) * mu(0) * t)) < 1e-14);
    }
}

TEST_CASE("General kind without quadrature fallback rejects a degenerate spectrum") {
    const Vec mu = cvec({cplx(0.5, 0.5), cplx(-0.5, 0.5)});
    const auto d = build_diagonal(mu, cvec({1.0, 1.0}), cvec({1.0, -1.0}));
    EvalOptions opts;
    opts.quadrature_fallback = false;
    const auto g = FiniteVessel::general(d.A(), eval_B(d, 0, 0), eval_X(d, 0, 0), 0.0, opts);
    CHECK_THROWS_AS(eval_X(g, 0.5, 0.0), Error);
    try {
        eval_X(g, 0.5, 0.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("eval_state validity") {
    const auto v = fixtures::one_soliton();
    const VesselState s = eval_state(v, 0.0, 0.0);
    CHECK(s.valid);
    CHECK(std::abs(s.X(0, 0) + 1.0) < 1e-15);
    CHECK(s.cond_X == doctest::Approx(1.0));
    for (double x : {-4.0, 0.3, 2.2}) {
        for (double t : {0.0, 0.8}) {
            CHECK(eval_state(v, x, t).hermiticity_defect < 1e-15 * std::cosh(x));
        }
    }

    const auto zero = FiniteVessel::diagonal(cvec({0.5}), cvec({0.0}), cvec({0.0}), 0.0);
    const VesselState z = eval_state(zero, 0.0, 0.0);
    CHECK(z.X(0, 0) == cplx(0.0));
    CHECK_FALSE(z.valid);
    CHECK_THROWS_AS(beta(z), Error);
    try {
        beta(z);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Singular);
        CHECK(std::string(e.what()).find("outside interval of invertibility") != std::string::npos);
    }
}

TEST_CASE("exponent cap raises a range error naming the index") {
    const auto v = fixtures::one_soliton();
    CHECK_THROWS_AS(eval_B(v, 1200.0, 0.0), Error);
    try {
        eval_X(v, 600.0, 0.0);
        FAIL("expected range error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Range);
        CHECK(std::string(e.what()).find("index 0") != std::string::npos);
    }
}

TEST_CASE("beta, gamma_star and moments of the 1-soliton") {
    const auto v = fixtures::one_soliton();
    const VesselState s = eval_state(v, 0.0, 0.0);
    CHECK(std::abs(beta(s) + 1.0) < 1e-15);

    const Mat2 g = gamma_star(s);
    CHECK(std::abs(g(0, 1) + 1.0) < 1e-15);
    CHECK(std::abs(g(1, 0) - 1.0) < 1e-15);
    CHECK(std::abs(g(0, 0)) < 1e-15);
    CHECK(std::abs(g(1, 1)) < 1e-15);

    Mat2 ones;
    ones << -1.0, -1.0, -1.0, -1.0;
    CHECK((moment(s, 0) - ones).norm() < 1e-15);
    CHECK((moment(s, 1) - ones).norm() < 1e-15);
    CHECK(moment(s, 0)(0, 1) == beta(s));

    for (double x : {-6.0, -1.0, 0.4, 3.5}) {
        for (double t : {0.0, 0.3, 1.0}) {
            const cplx b = beta(eval_state(v, x, t));
            CHECK(std::abs(b - oracle::soliton(x, t)) < 1e-14);
        }
    }
}

TEST_CASE("B = 0 synthetic state") {
    const auto v = fixtures::zero_b();
    const VesselState s = eval_state(v, 0.7, 0.2);
    REQUIRE(s.valid);
    CHECK(s.X == Mat::Identity(1, 1));
    CHECK(beta(s) == cplx(0.0));
    CHECK(gamma_star(s) == Mat2::Zero());
    CHECK(transfer(s, cplx(3.0, 1.0)) == Mat2::Identity());
}

TEST_CASE("gamma_star structure on random states") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(-1.0, 1.0);
    for (const auto& v : {fixtures::random_diagonal(3), fixtures::random_realized(5), fixtures::two_point()}) {
        for (int k = 0; k < 20; ++k) {
            const VesselState s = eval_state(v, ux(rng), ut(rng));
            REQUIRE(s.valid);
            const Mat2 g = gamma_star(s);
            const double tol = 1e-12 * (1.0 + g.norm()) * std::max(1.0, s.cond_X * 1e-4);
            CHECK(std::abs(g(0, 0)) <= tol);
            CHECK(std::abs(g(1, 1)) <= tol);
            CHECK(std::abs(g(1, 0) + std::conj(g(0, 1))) <= tol);
            CHECK(moment(s, 0)(0, 1) == beta(s));
        }
    }
}

TEST_CASE("transfer function of the 1-soliton") {
    const auto v = fixtures::one_soliton();
    const VesselState s = eval_state(v, 0.0, 0.0);
    Mat2 expected;
    expected << 2.0, 1.0, 1.0, 2.0;
    CHECK((transfer(s, 2.0) - expected).norm() < 1e-14);
    for (cplx lam : {cplx(2.0), cplx(-3.0, 1.0), cplx(0.2, -0.7)}) {
        CHECK(std::abs(transfer(s, lam).determinant() - (lam + 1.0) / (lam - 1.0)) < 1e-13);
    }
    CHECK_THROWS_AS(transfer(s, cplx(1.0 + 1e-10)), Error);
    try {
        transfer(s, 1.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Spectral);
    }
}

TEST_CASE("moment expansion matches the transfer function outside 4||A||") {
    for (const auto& v : {fixtures::one_soliton(), fixtures::random_diagonal(3), fixtures::random_realized(5)}) {
        const VesselState s = eval_state(v, 0.3, 0.1);
        const double an = v.a_norm();
        const int n_terms = 12;
        std::vector<Mat2> h;
        for (int n = 0; n <= n_terms; ++n) h.push_back(moment(s, n));
        // Geometric tail: ||H_n|| <= ||B^* X^{-1}|| ||A||^n ||B||
        const double c = (s.B.adjoint() * s.solve_X(Mat::Identity(v.dim(), v.dim()))).norm() * s.B.norm();
        for (int k = 0; k < 6; ++k) {
            const cplx lam = std::polar(4.0 * an, 0.4 + k);
            Mat2 series = Mat2::Identity();
            cplx power = lam;
            for (int n = 0; n <= n_terms; ++n) {
                series -= h[static_cast<std::size_t>(n)] / power;
                power *= lam;
            }
            const double ratio = an / std::abs(lam);
            const double bound = 2.0 * std::pow(ratio, n_terms + 1) * c / std::abs(lam) + 1e-12;
            CHECK((transfer(s, lam) - series).norm() <= bound);
        }
    }
}

TEST_CASE("tau of the 1-soliton is cosh") {
    const auto v = fixtures::one_soliton();
    CHECK(std::abs(tau(v, 0.0, 0.0) - 1.0) < 1e-15);
    for (double x : {-3.0, -1.0, 0.5, 2.0}) {
        CHECK(std::abs(tau(v, x, 0.0) - std::cosh(x)) < 1e-14 * std::cosh(x));
    }
    for (const auto& w : {fixtures::two_point(), fixtures::random_realized(9)}) {
        CHECK(std::abs(tau(w, w.x0(), 0.0) - 1.0) < 1e-14);
    }
    // (log cosh)'' = sech^2 = |beta|^2
    const double h = 1e-3;
    for (double x : {-1.2, 0.0, 0.9}) {
        auto lt = [&](double y) { return std::log(tau(v, y, 0.0).real()); };
        const double d2 = (-lt(x + 2 * h) + 16 * lt(x + h) - 30 * lt(x) + 16 * lt(x - h) - lt(x - 2 * h)) / (12 * h * h);
        const double b = std::abs(beta(eval_state(v, x, 0.0)));
        CHECK(std::abs(d2 - b * b) < 1e-8);
    }
}

TEST_CASE("beta_field grid contract") {
    const auto v = fixtures::one_soliton();
    EvalGrid g{-5.0, 5.0, 11, 0.0, 0.0, 1};
    const BetaField f = beta_field(v, g);
    CHECK(f.values.size() == 11);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) {
        CHECK(f.valid(i, 0));
        worst = std::max(worst, std::abs(f.at(i, 0) + 1.0 / std::cosh(g.x(i))));
    }
    CHECK(worst < 1e-12);

    SUBCASE("singular nodes are masked") {
        // X(x) = (x - 1)/2 vanishes at x = 1.
        const auto d = FiniteVessel::diagonal(cvec({cplx(0, 0.5)}), cvec({1.0}), cvec({0.0}), 0.0);
        EvalGrid g2{0.0, 2.0, 11, 0.0, 0.0, 1};
        const auto shifted = FiniteVessel::diagonal(cvec({cplx(0, 0.5)}), cvec({1.0}), cvec({0.0}), 1.0);
        const BetaField f2 = beta_field(shifted, g2);
        for (std::size_t i = 0; i < g2.nx; ++i) {
            const bool expect_valid = eval_state(shifted, g2.x(i), 0.0).valid;
            CHECK(f2.valid(i, 0) == expect_valid);
            CHECK(f2.valid(i, 0) == (i != 5));
        }
        (void)d;
    }

    SUBCASE("invalid grids are rejected") {
        CHECK_THROWS_AS(beta_field(v, EvalGrid{1.0, 0.0, 5, 0.0, 0.0, 1}), Error);
        CHECK_THROWS_AS(beta_field(v, EvalGrid{0.0, 1.0, 1, 0.0, 0.0, 1}), Error);
    }
}

TEST_CASE("hermiticity and Lyapunov permanency at random points for every constructor") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(-1.0, 1.0);
    const std::vector<FiniteVessel> vessels = {fixtures::one_soliton(), fixtures::two_point(),
                                               fixtures::random_diagonal(3), fixtures::curve16(),
                                               fixtures::random_realized(5)};
    for (const auto& v : vessels) {
        for (int k = 0; k < 100; ++k) {
            const double x = ux(rng), t = ut(rng);
            const Mat xm = eval_X(v, x, t);
            const Mat b = eval_B(v, x, t);
            const double scale = 1.0 + xm.norm();
            CHECK(hermiticity_defect(xm) <= 1e-10 * scale);
            CHECK((v.A() * xm + xm * v.A().adjoint() + b * b.adjoint()).norm() <= 1e-9 * scale);
        }
    }
}

TEST_CASE("diagonal vessel re-wrapped as general gives identical beta") {
    for (const auto& v : {fixtures::one_soliton(), fixtures::two_point(), fixtures::random_diagonal(3)}) {
        const auto g = fixtures::rewrap(v);
        for (double x = -3.0; x <= 3.0; x += 0.5) {
            for (double t : {0.0, 0.4, 1.0}) {
                const cplx bd = beta(eval_state(v, x, t));
                const cplx bg = beta(eval_state(g, x, t));
                CHECK(std::abs(bd - bg) < 1e-9);
            }
        }
    }
}

TEST_CASE("X increment and log tau increment agree with direct differences") {
    const std::vector<FiniteVessel> vessels = {fixtures::two_point(), fixtures::random_diagonal(3),
                                               fixtures::random_realized(5)};
    for (const auto& v : vessels) {
        for (auto [x, y, t] : {std::tuple{0.2, 1.1, 0.3}, std::tuple{-1.0, -0.4, 0.0}, std::tuple{0.5, 0.5001, -0.2}}) {
            const Mat direct = eval_X(v, y, t) - eval_X(v, x, t);
            const Mat inc = eval_X_increment(v, x, y, t);
            CHECK((inc - direct).norm() <= 1e-10 * (1.0 + eval_X(v, x, t).norm()));
            const cplx lt = log_tau_increment(v, x, y, t);
            CHECK(std::abs(std::exp(lt) - tau(v, y, t) / tau(v, x, t)) < 1e-9 * std::abs(std::exp(lt)));
        }
    }
    // The increment keeps relative accuracy where the direct difference has cancelled.
    const auto s = fixtures::one_soliton();
    const double h = (0.7 + 1e-9) - 0.7;
    const cplx inc = eval_X_increment(s, 0.7, 0.7 + h, 0.0)(0, 0);
    // X = -cosh(x) and tau = cosh(x) for this vessel.
    const double dcosh = 2.0 * std::sinh(0.7 + 0.5 * h) * std::sinh(0.5 * h);
    CHECK(std::abs(inc + dcosh) < 1e-12 * dcosh);
    const double dlog = std::log1p(dcosh / std::cosh(0.7));
    CHECK(std::abs(log_tau_increment(s, 0.7, 0.7 + h, 0.0) - dlog) < 1e-12 * dlog);
}

TEST_CASE("X increment on the quadrature path") {
    const Vec mu = cvec({cplx(0.5, 0.5), cplx(-0.5, 0.5)});
    const auto d = build_diagonal(mu, cvec({1.0, 1.0}), cvec({1.0, -1.0}));
    const auto g = fixtures::rewrap(d);
    REQUIRE(g.sylvester_singular());
    const Mat a = eval_X_increment(g, 0.1, 0.6, 0.2);
    const Mat b = eval_X_increment(d, 0.1, 0.6, 0.2);
    CHECK((a - b).norm() < 1e-9);
}

TEST_CASE("B increment agrees with direct differences on every evaluation path") {
    EvalOptions schur;
    schur.modal_cond_limit = 0.0;
    const auto data = fixtures::random_realized_data(5);
    const Vec mu = cvec({cplx(0.5, 0.5), cplx(-0.5, 0.5)});
    const std::vector<FiniteVessel> vessels = {
        fixtures::random_diagonal(3), build_realized(data.a, data.b0, data.x0),
        build_realized(data.a, data.b0, data.x0, 0.0, schur),
        fixtures::rewrap(build_diagonal(mu, cvec({1.0, 1.0}), cvec({1.0, -1.0})))};
    for (const auto& v : vessels) {
        for (auto [x, y, t] : {std::tuple{0.2, 1.1, 0.3}, std::tuple{-1.0, -0.4, 0.0}}) {
            const Mat direct = eval_B(v, y, t) - eval_B(v, x, t);
            CHECK((eval_B_increment(v, x, y, t) - direct).norm() <= 1e-12 * (1.0 + eval_B(v, x, t).norm()));
        }
    }
    // B = [e^{-x/2}, e^{x/2}] for the 1-soliton.
    const auto s = fixtures::one_soliton();
    const double h = (0.7 + 1e-9) - 0.7;
    const Mat db = eval_B_increment(s, 0.7, 0.7 + h, 0.0);
    const double d0 = -2.0 * std::exp(-0.35 - 0.25 * h) * std::sinh(0.25 * h);
    const double d1 = 2.0 * std::exp(0.35 + 0.25 * h) * std::sinh(0.25 * h);
    CHECK(std::abs(db(0, 0) - d0) < 1e-12 * std::abs(d0));
    CHECK(std::abs(db(0, 1) - d1) < 1e-12 * std::abs(d1));
}
