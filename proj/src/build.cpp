#include "vnls/build.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace vnls {
namespace {

constexpr double disjoint_tol = 1e-8;

void require_solvable(const FiniteVessel& v) {
    const VesselState s = eval_state(v, v.x0(), 0.0);
    if (!s.valid) {
        throw Error(ErrorKind::Singular, "X(x0, 0) is not invertible: " + s.reason);
    }
}

// Legendre P_n and its derivative at x by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

CurveSpec CurveSpec::segment(cplx z_a, cplx z_b) {
    return CurveSpec{Segment{z_a, z_b}, 0.0, 1.0};
}

CurveSpec CurveSpec::arc(cplx center, double radius, double angle_a, double angle_b) {
    return CurveSpec{CircularArc{center, radius, angle_a, angle_b}, angle_a, angle_b};
}

CurveSpec CurveSpec::samples(std::vector<cplx> nodes) {
    if (nodes.size() < 2) throw Error(ErrorKind::Config, "sampled curve needs at least two nodes");
    const double b = static_cast<double>(nodes.size() - 1);
    return CurveSpec{Samples{std::move(nodes)}, 0.0, b};
}

cplx CurveSpec::point(double s) const {
    if (const auto* seg = std::get_if<Segment>(&family)) {
        const double u = (s - a) / (b - a);
        return seg->z_a + u * (seg->z_b - seg->z_a);
    }
    if (const auto* arc = std::get_if<CircularArc>(&family)) {
        return arc->center + arc->radius * std::exp(I_unit * s);
    }
    const auto& nodes = std::get<Samples>(family).nodes;
    const double clamped = std::clamp(s, 0.0, static_cast<double>(nodes.size() - 1));
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(clamped), nodes.size() - 2);
    const double u = clamped - static_cast<double>(k);
    return nodes[k] + u * (nodes[k + 1] - nodes[k]);
}

QuadratureRule QuadratureRule::gauss_legendre(double a, double b, int points, int panels) {
    if (points < 1 || panels < 1) throw Error(ErrorKind::Config, "quadrature needs points >= 1 and panels >= 1");
    if (!(a < b)) throw Error(ErrorKind::Config, "quadrature interval must satisfy a < b");
    std::vector<double> ref_x(points), ref_w(points);
    if (points == 1) {
        ref_x[0] = 0.0;
        ref_w[0] = 2.0;
    } else {
        for (int i = 0; i < points; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
            for (int it = 0; it < 100; ++it) {
                const auto [p, dp] = legendre(points, x);
                const double dx = p / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const auto [p, dp] = legendre(points, x);
            (void)p;
            ref_x[points - 1 - i] = x;
            ref_w[points - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
    QuadratureRule rule;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int i = 0; i < points; ++i) {
            rule.nodes.push_back(lo + 0.5 * h * (ref_x[i] + 1.0));
            rule.weights.push_back(0.5 * h * ref_w[i]);
        }
    }
    return rule;
}

double lyapunov_residual(const Mat& a, const Mat& x, const Mat& b) {
    return (a * x + x * a.adjoint() + b * b.adjoint()).norm();
}

FiniteVessel build_diagonal(const Vec& mu, const Vec& b1, const Vec& b2, double x0, EvalOptions opts) {
    if (mu.size() != b1.size() || mu.size() != b2.size()) {
        throw Error(ErrorKind::Config, "mu, b1 and b2 must have equal lengths");
    }
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        if (mu(k) == cplx(0.0)) {
            std::ostringstream os;
            os << "mu[" << k << "] = 0 violates the separated from zero condition";
            throw Error(ErrorKind::Config, os.str());
        }
        if (std::abs(b1(k)) + std::abs(b2(k)) == 0.0) {
            std::ostringstream os;
            os << "b1[" << k << "] and b2[" << k << "] are both zero";
            throw Error(ErrorKind::Config, os.str());
        }
    }
    FiniteVessel v = FiniteVessel::diagonal(mu, b1, b2, x0, opts);
    require_solvable(v);
    return v;
}

NystromData nystrom_reduce(const CurveSpec& curve, const SpectralFunction& b1_fn,
                           const SpectralFunction& b2_fn, const QuadratureRule& rule) {
    const std::size_t n = rule.nodes.size();
    if (n == 0 || rule.weights.size() != n) throw Error(ErrorKind::Config, "quadrature rule is empty or inconsistent");
    NystromData d{Vec(n), Vec(n), Vec(n)};
    for (std::size_t j = 0; j < n; ++j) {
        if (!(rule.weights[j] > 0.0)) throw Error(ErrorKind::Config, "quadrature weights must be positive");
        const cplx m = curve.point(rule.nodes[j]);
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) {
            throw Error(ErrorKind::Config, "curve is unbounded at a quadrature node");
        }
        const double sw = std::sqrt(rule.weights[j]);
        const auto jj = static_cast<Eigen::Index>(j);
        d.mu(jj) = m;
        d.b1(jj) = b1_fn(m) * sw;
        d.b2(jj) = b2_fn(m) * sw;
    }
    double closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d.mu.size(); ++i) {
        for (Eigen::Index j = 0; j < d.mu.size(); ++j) {
            closest = std::min(closest, std::abs(d.mu(i) + std::conj(d.mu(j))));
        }
    }
    if (!(closest > disjoint_tol)) {
        std::ostringstream os;
        os << "curve meets its reflection -conj(curve): min |mu_i + conj(mu_j)| = " << closest;
        throw Error(ErrorKind::Config, os.str());
    }
    return d;
}

FiniteVessel build_curve(const CurveSpec& curve, const SpectralFunction& b1_fn,
                         const SpectralFunction& b2_fn, const QuadratureRule& rule, double x0,
                         EvalOptions opts) {
    const NystromData d = nystrom_reduce(curve, b1_fn, b2_fn, rule);
    return build_diagonal(d.mu, d.b1, d.b2, x0, opts);
}

FiniteVessel build_realized(const Mat& a, const Mat& b0, const Mat& x0_op, double x0, EvalOptions opts) {
    FiniteVessel v = FiniteVessel::general(a, b0, x0_op, x0, opts);
    const double scale = 1.0 + x0_op.norm();
    const double herm = hermiticity_defect(x0_op);
    if (herm > 1e-10 * scale) {
        std::ostringstream os;
        os << "X0 is not self-adjoint: ||X0 - X0^*|| = " << herm;
        throw Error(ErrorKind::Config, os.str());
    }
    const double lyap = lyapunov_residual(a, x0_op, b0);
    if (lyap > 1e-9 * scale) {
        std::ostringstream os;
        os << "Lyapunov equation violated at the base point: residual = " << lyap;
        throw Error(ErrorKind::Config, os.str());
    }
    require_solvable(v);
    return v;
}

}  // namespace vnls
