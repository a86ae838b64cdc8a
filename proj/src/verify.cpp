#include "vnls/verify.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace vnls {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Mat sigma2_right(const Mat& b) {
    Mat out = b;
    out.col(0) *= 0.5;
    out.col(1) *= -0.5;
    return out;
}

Mat sigma2_outer(const Mat& b) {
    return 0.5 * (b.col(0) * b.col(0).adjoint() - b.col(1) * b.col(1).adjoint());
}

// Evaluates f at the five stencil points centered at c with step h.
template <class F>
auto sample5(F&& f, double c, double h) {
    using T = decltype(f(c));
    std::array<T, 5> out;
    for (int k = -2; k <= 2; ++k) out[static_cast<std::size_t>(k + 2)] = f(c + k * h);
    return out;
}

template <class T>
T d1(const std::array<T, 5>& s, double h) {
    return central_d1(s[0], s[1], s[3], s[4], h);
}

template <class T>
T d2(const std::array<T, 5>& s, double h) {
    return central_d2(s[0], s[1], s[2], s[3], s[4], h);
}

template <class T>
double max_norm(const std::array<T, 5>& s) {
    double m = 0.0;
    for (const auto& v : s) m = std::max(m, static_cast<double>(v.norm()));
    return m;
}

VesselState valid_state(const FiniteVessel& v, double x, double t) {
    VesselState s = eval_state(v, x, t);
    if (!s.valid) throw Error(ErrorKind::Unevaluable, s.reason);
    return s;
}

CheckContext at(double x, double t) {
    CheckContext c;
    c.x = x;
    c.t = t;
    return c;
}

}  // namespace

void ResidualReport::add(std::string id, double residual, double threshold, CheckContext ctx) {
    ResidualEntry e;
    e.check_id = std::move(id);
    e.residual = residual;
    e.threshold = threshold;
    e.evaluable = std::isfinite(residual);
    e.pass = e.evaluable && residual <= threshold;
    e.context = std::move(ctx);
    entries.push_back(std::move(e));
}

void ResidualReport::add_unevaluable(std::string id, CheckContext ctx, std::string why) {
    ResidualEntry e;
    e.check_id = std::move(id);
    e.residual = std::numeric_limits<double>::quiet_NaN();
    e.threshold = 0.0;
    e.evaluable = false;
    e.pass = false;
    e.context = std::move(ctx);
    e.context.note = "unevaluable: " + why;
    entries.push_back(std::move(e));
}

void ResidualReport::merge(const ResidualReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

bool ResidualReport::all_pass() const {
    for (const auto& e : entries) {
        if (!e.pass) return false;
    }
    return true;
}

double ResidualReport::max_residual(const std::string& id) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& e : entries) {
        if (e.check_id != id) continue;
        if (!e.evaluable) return std::numeric_limits<double>::infinity();
        m = std::max(m, e.residual);
    }
    return m;
}

const ResidualEntry* ResidualReport::find(const std::string& id) const {
    for (const auto& e : entries) {
        if (e.check_id == id) return &e;
    }
    return nullptr;
}

void ResidualReport::apply_overrides(const std::map<std::string, double>& overrides) {
    for (auto& e : entries) {
        auto it = overrides.find(e.check_id);
        if (it == overrides.end()) {
            const auto dot = e.check_id.find('.');
            if (dot != std::string::npos) it = overrides.find(e.check_id.substr(0, dot));
        }
        if (it == overrides.end()) continue;
        e.threshold = it->second;
        e.pass = e.evaluable && e.residual <= e.threshold;
    }
}

nlohmann::json to_json(const ResidualReport& report) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : report.entries) {
        nlohmann::json ctx = nlohmann::json::object();
        if (e.context.x) ctx["x"] = *e.context.x;
        if (e.context.t) ctx["t"] = *e.context.t;
        if (e.context.lambda) ctx["lambda"] = {e.context.lambda->real(), e.context.lambda->imag()};
        if (e.context.n) ctx["n"] = *e.context.n;
        if (!e.context.note.empty()) ctx["note"] = e.context.note;
        nlohmann::json j;
        j["check_id"] = e.check_id;
        j["residual"] = std::isfinite(e.residual) ? nlohmann::json(e.residual) : nlohmann::json(nullptr);
        j["threshold"] = e.threshold;
        j["pass"] = e.pass;
        j["context"] = std::move(ctx);
        arr.push_back(std::move(j));
    }
    return arr;
}

double stencil_threshold(double h, double rate, int derivative_order, double magnitude) {
    const double growth = std::pow(1.0 + rate, 4 + derivative_order);
    const double truncation = 100.0 * std::pow(h, 4) * growth;
    const double rounding = 100.0 * kEps / std::pow(h, derivative_order);
    return (1.0 + magnitude) * (truncation + rounding);
}

ResidualReport algebraic_identities(const FiniteVessel& v, double x, double t) {
    ResidualReport r;
    const CheckContext ctx = at(x, t);
    VesselState s;
    try {
        s = valid_state(v, x, t);
    } catch (const Error& e) {
        r.add_unevaluable("algebraic.hermiticity", ctx, e.what());
        r.add_unevaluable("algebraic.gamma_star", ctx, e.what());
        return r;
    }
    const double xn = s.X.norm();
    r.add("algebraic.hermiticity", s.hermiticity_defect, 1e-10 * (1.0 + xn), ctx);
    const Mat2 g = gamma_star(s);
    const double structure = std::abs(g(0, 0)) + std::abs(g(1, 1)) + std::abs(g(1, 0) + std::conj(g(0, 1)));
    r.add("algebraic.gamma_star", structure, 1e-12 * (1.0 + g.norm()) * (1.0 + s.cond_X * kEps * 1e3), ctx);
    return r;
}

ResidualReport ode_residuals(const FiniteVessel& v, double x, double t, double h) {
    ResidualReport r;
    const CheckContext ctx = at(x, t);
    static const char* ids[] = {"ode.B_x", "ode.X_x", "ode.B_t", "ode.X_t", "ode.lyapunov"};
    if (!(h > 0.0)) throw Error(ErrorKind::Config, "stencil step must be positive");
    try {
        const Mat& a = v.A();
        const double an = v.a_norm();
        const auto bx = sample5([&](double y) { return eval_B(v, y, t); }, x, h);
        const auto xx = sample5([&](double y) { return eval_X(v, y, t); }, x, h);
        const auto bt = sample5([&](double s) { return eval_B(v, x, s); }, t, h);
        const auto xt = sample5([&](double s) { return eval_X(v, x, s); }, t, h);
        const Mat& b = bx[2];
        const Mat& xm = xx[2];
        const Mat q = sigma2_outer(b);
        const Mat b_x = d1(bx, h);
        const Mat x_x = d1(xx, h);
        const Mat b_t = d1(bt, h);
        const Mat x_t = d1(xt, h);

        const double thr_bx = stencil_threshold(h, 0.5 * an, 1, max_norm(bx));
        const double thr_xx = stencil_threshold(h, an, 1, max_norm(xx));
        const double thr_bt = stencil_threshold(h, 0.5 * an * an, 1, max_norm(bt)) + an * thr_bx;
        const double thr_xt = stencil_threshold(h, an * an, 1, max_norm(xt));

        r.add(ids[0], (b_x + a * sigma2_right(b)).norm(), thr_bx, ctx);
        r.add(ids[1], (x_x - q).norm(), thr_xx, ctx);
        r.add(ids[2], (b_t - I_unit * a * b_x).norm(), thr_bt, ctx);
        r.add(ids[3], (x_t - I_unit * (a * q - q * a.adjoint())).norm(), thr_xt, ctx);
        r.add(ids[4], (a * xm + xm * a.adjoint() + b * b.adjoint()).norm(), 1e-9 * (1.0 + xm.norm()), ctx);
    } catch (const Error& e) {
        for (const char* id : ids) r.add_unevaluable(id, ctx, e.what());
    }
    return r;
}

ResidualReport backlund_residual(const FiniteVessel& v, cplx lambda, const std::vector<double>& x_grid,
                                 double t, BacklundOptions opts) {
    ResidualReport r;
    CheckContext ctx;
    ctx.t = t;
    ctx.lambda = lambda;
    const Mat2 sigma2 = make_params().sigma2;
    const double h = opts.h;
    const double x0 = v.x0();
    auto u = [&](double y) {
        Eigen::Vector2cd out;
        out << std::exp(0.5 * lambda * (y - x0)) * opts.c1, std::exp(-0.5 * lambda * (y - x0)) * opts.c2;
        return out;
    };
    // u(y + d) - u(y)
    auto du = [&](double y, double d) {
        Eigen::Vector2cd out;
        out << std::exp(0.5 * lambda * (y - x0)) * expm1(0.5 * lambda * d) * opts.c1,
            std::exp(-0.5 * lambda * (y - x0)) * expm1(-0.5 * lambda * d) * opts.c2;
        return out;
    };
    const Eigen::Index n = v.dim();
    const Eigen::PartialPivLU<Mat> resolvent(lambda * Mat::Identity(n, n) - v.A());
    double worst = 0.0;
    double worst_thr = 0.0;
    double worst_x = x_grid.empty() ? 0.0 : x_grid.front();
    double max_ratio = -1.0;
    try {
        // Growth rate of y: u grows like |Re lambda|/2, S varies on the scale of ||A||.
        const double rate = 0.5 * std::abs(lambda) + v.a_norm();
        for (double xg : x_grid) {
            const VesselState c = valid_state(v, xg, t);
            const Mat2 sc = transfer(c, lambda, v.options().spectral_tol);
            const Eigen::Vector2cd yc = sc * u(xg);
            // y(xg + k h) - y(xg) from increments of B, X and u, so the stencil never
            // subtracts nearly equal samples of y.
            std::array<Eigen::Vector2cd, 5> dy;
            dy[2].setZero();
            double mag = yc.norm();
            for (int k : {-2, -1, 1, 2}) {
                const double xk = xg + k * h;
                const VesselState e = valid_state(v, xk, t);
                const Mat db = eval_B_increment(v, xg, xk, t);
                const Mat dx = eval_X_increment(v, xg, xk, t);
                const Mat rb = resolvent.solve(e.B);
                const Mat2 ds = -(db.adjoint() * e.solve_X(rb) - c.B.adjoint() * e.solve_X(dx * c.solve_X(rb)) +
                                  c.B.adjoint() * c.solve_X(resolvent.solve(db)));
                auto& slot = dy[static_cast<std::size_t>(k + 2)];
                slot = ds * u(xk) + sc * du(xg, xk - xg);
                mag = std::max(mag, (yc + slot).norm());
            }
            const Eigen::Vector2cd y_x = d1(dy, h);
            const Mat2 g = gamma_star(c);
            const double res = (lambda * sigma2 * yc - y_x + g * yc).norm();
            const double thr = stencil_threshold(h, rate, 1, mag);
            if (res / thr > max_ratio) {
                max_ratio = res / thr;
                worst = res;
                worst_thr = thr;
                worst_x = xg;
            }
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Spectral) throw;
        r.add_unevaluable("backlund", ctx, e.what());
        return r;
    }
    ctx.x = worst_x;
    ctx.note = "max over x grid";
    r.add("backlund", worst, worst_thr, ctx);
    return r;
}

ResidualReport spectral_identities(const FiniteVessel& v, cplx lambda, const std::vector<double>& x_list,
                                   double t) {
    ResidualReport r;
    CheckContext ctx;
    ctx.t = t;
    ctx.lambda = lambda;
    const double tol = v.options().spectral_tol;
    const cplx mirror = -std::conj(lambda);
    double sym = 0.0, sym_thr = 0.0, drift = 0.0, drift_thr = 0.0;
    try {
        const Mat2 s_base = transfer(valid_state(v, v.x0(), t), lambda, tol);
        const cplx det_base = s_base.determinant();
        for (double xv : x_list) {
            const VesselState st = valid_state(v, xv, t);
            const Mat2 s = transfer(st, lambda, tol);
            const Mat2 sm = transfer(st, mirror, tol);
            const double res = (sm.adjoint() * s - Mat2::Identity()).norm();
            const double thr = 1e-9 * std::max(1.0, s.norm() * sm.norm());
            if (res / thr > sym / std::max(sym_thr, 1e-300)) {
                sym = res;
                sym_thr = thr;
            }
            const double dres = std::abs(s.determinant() - det_base);
            const double dthr = 1e-9 * std::max(1.0, std::abs(det_base));
            if (dres / dthr > drift / std::max(drift_thr, 1e-300)) {
                drift = dres;
                drift_thr = dthr;
            }
        }
        if (sym_thr == 0.0) sym_thr = 1e-9;
        if (drift_thr == 0.0) drift_thr = 1e-9;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Spectral) throw;
        r.add_unevaluable("spectral.symmetry", ctx, e.what());
        r.add_unevaluable("spectral.det_drift", ctx, e.what());
        return r;
    }
    ctx.note = "max over x list";
    r.add("spectral.symmetry", sym, sym_thr, ctx);
    r.add("spectral.det_drift", drift, drift_thr, ctx);
    return r;
}

double tau_step(const FiniteVessel& v) {
    const double a = v.a_norm();
    return a > 2.0 ? 2e-3 / a : 1e-3;
}

ResidualReport tau_identity_residual(const FiniteVessel& v, double x, double t, double h) {
    ResidualReport r;
    const CheckContext ctx = at(x, t);
    try {
        const cplx tau0 = tau(v, x, t);
        if (!(std::abs(tau0) > 0.0) || !std::isfinite(std::abs(tau0))) {
            throw Error(ErrorKind::Unevaluable, "tau vanishes or overflows at the center");
        }
        // log tau(x + kh) - log tau(x) from the cancellation-free increment of X.
        const auto logs = sample5(
            [&](double y) -> Eigen::Matrix<cplx, 1, 1> {
                Eigen::Matrix<cplx, 1, 1> m;
                m(0) = y == x ? cplx(0.0) : log_tau_increment(v, x, y, t);
                return m;
            },
            x, h);
        const cplx first = d1(logs, h)(0);
        const cplx second = d2(logs, h)(0);
        const VesselState s = valid_state(v, x, t);
        const Mat2 h0 = moment(s, 0);
        const cplx trace_term = 0.5 * (h0(0, 0) - h0(1, 1));
        const double b2 = std::norm(h0(0, 1));
        const double mag = 1.0 + h0.norm() + max_norm(logs);
        r.add("tau.first", std::abs(first - trace_term), stencil_threshold(h, v.a_norm(), 1, mag), ctx);
        r.add("tau.second", std::abs(second - b2), stencil_threshold(h, v.a_norm(), 2, mag), ctx);
    } catch (const Error& e) {
        r.add_unevaluable("tau.first", ctx, e.what());
        r.add_unevaluable("tau.second", ctx, e.what());
    }
    return r;
}

ResidualReport moment_recursion_residual(const FiniteVessel& v, double x, double t, int n_max, double h) {
    ResidualReport r;
    if (n_max < 1) throw Error(ErrorKind::Config, "n_max must be at least 1");
    const Mat2 sigma2 = make_params().sigma2;
    const double an = v.a_norm();
    auto ctx_n = [&](int n) {
        CheckContext c = at(x, t);
        c.n = n;
        return c;
    };
    // moments[k][n] at stencil offset k
    using Moments = std::vector<Mat2>;
    auto all_moments = [&](double y, double s) {
        const VesselState st = valid_state(v, y, s);
        Moments out;
        Mat w = st.B;
        for (int n = 0; n <= n_max; ++n) {
            out.push_back(st.B.adjoint() * st.solve_X(w));
            w = st.A * w;
        }
        return out;
    };
    try {
        const auto mx = sample5([&](double y) { return all_moments(y, t); }, x, h);
        const auto mt = sample5([&](double s) { return all_moments(x, s); }, t, h);
        auto take = [](const std::array<Moments, 5>& m, int n) {
            std::array<Mat2, 5> out;
            for (std::size_t k = 0; k < 5; ++k) out[k] = m[k][static_cast<std::size_t>(n)];
            return out;
        };
        const Moments& hc = mx[2];
        const cplx b = hc[0](0, 1);
        const Mat2 g = sigma2 * hc[0] - hc[0] * sigma2;
        const auto h0x_s = take(mx, 0);
        const Mat2 h0_x = d1(h0x_s, h);
        for (int n = 0; n < n_max; ++n) {
            const auto sn = take(mx, n);
            const auto sn1 = take(mx, n + 1);
            const auto tn = take(mt, n);
            const Mat2 hn_x = d1(sn, h);
            const Mat2 hn1_x = d1(sn1, h);
            const Mat2 hn_t = d1(tn, h);
            const Mat2& hn = hc[static_cast<std::size_t>(n)];
            const Mat2& hn1 = hc[static_cast<std::size_t>(n + 1)];
            const double mag = std::max({max_norm(sn), max_norm(sn1), max_norm(h0x_s)});
            const double thr_x = stencil_threshold(h, an, 1, mag);
            const double thr_t = stencil_threshold(h, an * an, 1, max_norm(tn)) + (1.0 + mag) * thr_x;

            r.add("moments.x_recursion", (sigma2 * hn1 - hn1 * sigma2 - hn_x + g * hn).norm(), thr_x, ctx_n(n));
            r.add("moments.t_recursion", (hn_t - I_unit * hn1_x - I_unit * h0_x * hn).norm(), thr_t, ctx_n(n));
            // Entrywise recursion for the next moment and first integrals of the diagonal.
            r.add("moments.entry12", std::abs(hn1(0, 1) - (hn_x(0, 1) - b * hn(1, 1))), thr_x, ctx_n(n + 1));
            r.add("moments.entry21", std::abs(hn1(1, 0) - (-hn_x(1, 0) - std::conj(b) * hn(0, 0))), thr_x,
                  ctx_n(n + 1));
            r.add("moments.entry11", std::abs(hn_x(0, 0) - b * hn(1, 0)), thr_x, ctx_n(n));
            r.add("moments.entry22", std::abs(hn_x(1, 1) + std::conj(b) * hn(0, 1)), thr_x, ctx_n(n));
        }
        // (H_0)_x = [[|beta|^2, beta_x], [conj(beta)_x, -|beta|^2]]
        std::array<Eigen::Matrix<cplx, 1, 1>, 5> beta_s;
        for (std::size_t k = 0; k < 5; ++k) beta_s[k](0) = mx[k][0](0, 1);
        const cplx beta_x = d1(beta_s, h)(0);
        Mat2 expected;
        expected << std::norm(b), beta_x, std::conj(beta_x), -std::norm(b);
        r.add("moments.h0x_structure", (h0_x - expected).norm(),
              stencil_threshold(h, an, 1, max_norm(h0x_s)), ctx_n(0));
    } catch (const Error& e) {
        for (const char* id : {"moments.x_recursion", "moments.t_recursion", "moments.h0x_structure"}) {
            r.add_unevaluable(id, at(x, t), e.what());
        }
    }
    return r;
}

ResidualReport moment_bilinear_residual(const FiniteVessel& v, double x, double t, int n_max) {
    ResidualReport r;
    if (n_max < 0) throw Error(ErrorKind::Config, "n_max must be non-negative");
    VesselState s;
    try {
        s = valid_state(v, x, t);
    } catch (const Error& e) {
        r.add_unevaluable("bilinear.coefficient", at(x, t), e.what());
        r.add_unevaluable("bilinear.printed", at(x, t), e.what());
        r.add_unevaluable("bilinear.symmetry_circle", at(x, t), e.what());
        return r;
    }
    std::vector<Mat2> hm;
    for (int n = 0; n <= n_max + 1; ++n) hm.push_back(moment(s, n));
    double hscale = 0.0;
    for (const auto& m : hm) hscale = std::max(hscale, static_cast<double>(m.norm()));
    const double thr = 1e-9 * (1.0 + hscale) * (1.0 + hscale);
    for (int n = 0; n <= n_max; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const Mat2& next = hm[static_cast<std::size_t>(n + 1)];
        const Mat2 lhs = next + sign * next.adjoint();
        Mat2 left_order = Mat2::Zero();   // from S(-conj l)^* S(l) = I
        Mat2 right_order = Mat2::Zero();  // from S(l) S(-conj l)^* = I
        for (int j = 0; j <= n; ++j) {
            const double sj = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^{j+1}
            const Mat2& hj = hm[static_cast<std::size_t>(j)];
            const Mat2& hnj = hm[static_cast<std::size_t>(n - j)];
            left_order += sj * hj.adjoint() * hnj;
            right_order += sj * hnj * hj.adjoint();
        }
        CheckContext c = at(x, t);
        c.n = n;
        r.add("bilinear.coefficient", (lhs - left_order).norm(), thr, c);
        r.add("bilinear.printed", (lhs - right_order).norm(), thr, c);
    }
    const double radius = 4.0 * (v.a_norm() > 0.0 ? v.a_norm() : 1.0);
    double worst = 0.0, worst_thr = 1e-9;
    for (int k = 0; k < 8; ++k) {
        const double ang = 2.0 * std::numbers::pi * (k + 0.5) / 8.0;
        const cplx lam = std::polar(radius, ang);
        const Mat2 sl = transfer(s, lam, v.options().spectral_tol);
        const Mat2 sm = transfer(s, -std::conj(lam), v.options().spectral_tol);
        const double res = (sm.adjoint() * sl - Mat2::Identity()).norm();
        const double th = 1e-9 * std::max(1.0, sl.norm() * sm.norm());
        if (res / th > worst / worst_thr) {
            worst = res;
            worst_thr = th;
        }
    }
    CheckContext c = at(x, t);
    c.note = "8 points on |lambda| = 4 ||A||";
    r.add("bilinear.symmetry_circle", worst, worst_thr, c);
    return r;
}

PdeResidual pde_residual(const BetaField& f) {
    const auto& g = f.grid;
    if (g.nx < 5 || g.nt < 5) throw Error(ErrorKind::Config, "pde residual needs nx >= 5 and nt >= 5");
    PdeResidual out;
    out.nx = g.nx;
    out.nt = g.nt;
    out.values.assign(g.nx * g.nt, std::numeric_limits<double>::quiet_NaN());
    const double hx = g.dx();
    const double ht = g.dt();
    for (std::size_t j = 2; j + 2 < g.nt; ++j) {
        for (std::size_t i = 2; i + 2 < g.nx; ++i) {
            bool ok = true;
            for (int k = -2; k <= 2 && ok; ++k) {
                ok = f.valid(i + k, j) && f.valid(i, j + k);
            }
            if (!ok) {
                ++out.skipped;
                continue;
            }
            const cplx b = f.at(i, j);
            const cplx b_t = central_d1(f.at(i, j - 2), f.at(i, j - 1), f.at(i, j + 1), f.at(i, j + 2), ht);
            const cplx b_xx =
                central_d2(f.at(i - 2, j), f.at(i - 1, j), b, f.at(i + 1, j), f.at(i + 2, j), hx);
            const double res = std::abs(I_unit * b_t + b_xx + 2.0 * std::norm(b) * b);
            out.values[i + g.nx * j] = res;
            out.max = std::max(out.max, res);
            ++out.evaluated;
        }
    }
    return out;
}

}  // namespace vnls
