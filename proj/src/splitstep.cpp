#include "vnls/splitstep.hpp"

#include "vnls/csv.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vnls {
namespace {

// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

class FftPair {
public:
    explicit FftPair(std::size_t n) : n_(n) {
        buf_ = fftw_alloc_complex(n);
        std::lock_guard lock(plan_mutex());
        const int ni = static_cast<int>(n);
        fwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPair() {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;

    cplx* data() { return reinterpret_cast<cplx*>(buf_); }
    void forward() { fftw_execute(fwd_); }
    /// Unnormalized; caller folds 1/n into the multiplier.
    void backward() { fftw_execute(bwd_); }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

double mass(const std::vector<cplx>& y, double dx) {
    // Periodic trapezoid rule reduces to the plain sum.
    double m = 0.0;
    for (const auto& v : y) m += std::norm(v);
    return m * dx;
}

void check_boundary(const std::vector<cplx>& y0) {
    double peak = 0.0;
    for (const auto& v : y0) peak = std::max(peak, std::abs(v));
    const double edge = std::max(std::abs(y0.front()), std::abs(y0.back()));
    if (peak > 0.0 && !(edge < 1e-8 * peak)) {
        std::ostringstream os;
        os << "initial data does not decay at the periodic boundary: boundary magnitude " << edge
           << " vs peak " << peak;
        throw Error(ErrorKind::Config, os.str());
    }
}

}  // namespace

OracleField splitstep_solve(const std::vector<cplx>& y0, PeriodicDomain domain, double dt,
                            std::size_t n_steps, std::size_t snapshot_every, double t0,
                            bool require_decay) {
    if (!is_pow2(domain.nx)) throw Error(ErrorKind::Config, "oracle nx must be a power of two");
    if (y0.size() != domain.nx) throw Error(ErrorKind::Config, "initial data length must equal nx");
    if (!(domain.x_min < domain.x_max)) throw Error(ErrorKind::Config, "oracle domain must satisfy x_min < x_max");
    if (!(dt > 0.0)) throw Error(ErrorKind::Config, "oracle dt must be positive");
    if (snapshot_every == 0) throw Error(ErrorKind::Config, "snapshot_every must be positive");
    if (require_decay) check_boundary(y0);

    const std::size_t n = domain.nx;
    const double length = domain.x_max - domain.x_min;
    const double dx = domain.dx();
    // exp(-i k^2 dt) / n with k = 2 pi m / L, m in the symmetric FFT ordering.
    std::vector<cplx> linear(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double m = j < n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
        const double k = 2.0 * std::numbers::pi * m / length;
        linear[j] = std::exp(-I_unit * (k * k * dt)) / static_cast<double>(n);
    }

    OracleField out;
    out.domain = domain;
    out.dt = dt;
    std::vector<cplx> y = y0;
    out.snapshots.push_back({t0, y});
    out.mass_series.push_back(mass(y, dx));

    FftPair fft(n);
    cplx* buf = fft.data();
    const double half = 0.5 * dt;
    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (std::size_t j = 0; j < n; ++j) {
            buf[j] = y[j] * std::exp(I_unit * (2.0 * std::norm(y[j]) * half));
        }
        fft.forward();
        for (std::size_t j = 0; j < n; ++j) buf[j] *= linear[j];
        fft.backward();
        for (std::size_t j = 0; j < n; ++j) {
            const cplx v = buf[j];
            y[j] = v * std::exp(I_unit * (2.0 * std::norm(v) * half));
            if (!std::isfinite(y[j].real()) || !std::isfinite(y[j].imag())) {
                std::ostringstream os;
                os << "non-finite oracle value at step " << step << ", node " << j;
                throw Error(ErrorKind::Numerical, os.str());
            }
        }
        if (step % snapshot_every == 0 || step == n_steps) {
            out.snapshots.push_back({t0 + dt * static_cast<double>(step), y});
            out.mass_series.push_back(mass(y, dx));
        }
    }
    return out;
}

CrossValidation cross_validate(const FiniteVessel& v, const EvalGrid& g, double dt, OracleOptions opts) {
    g.validate();
    if (!(dt > 0.0)) throw Error(ErrorKind::Config, "oracle dt must be positive");
    if (!(opts.padding >= 1.0)) throw Error(ErrorKind::Config, "oracle padding must be at least 1");
    const double center = 0.5 * (g.x_min + g.x_max);
    const double length = opts.padding * (g.x_max - g.x_min);
    PeriodicDomain domain{center - 0.5 * length, center + 0.5 * length, opts.nx};
    if (!is_pow2(domain.nx)) throw Error(ErrorKind::Config, "oracle nx must be a power of two");

    std::vector<cplx> y0(domain.nx);
    for (std::size_t j = 0; j < domain.nx; ++j) {
        const VesselState s = eval_state(v, domain.x(j), g.t_min);
        if (!s.valid) throw Error(ErrorKind::Singular, "cannot seed oracle: " + s.reason);
        y0[j] = beta(s);
    }
    try {
        check_boundary(y0);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, std::string("oracle refused, beta does not decay: ") + e.what());
    }

    CrossValidation cv;
    for (std::size_t j = 0; j < domain.nx; ++j) {
        const double xj = domain.x(j);
        if (xj >= g.x_min && xj <= g.x_max) cv.compared_nodes.push_back(j);
    }

    // Steps between grid times; dt is shrunk so each interval is an integer number of steps.
    const double grid_dt = g.dt();
    std::size_t per_slice = 1;
    double step = dt;
    if (g.nt > 1) {
        per_slice = static_cast<std::size_t>(std::ceil(grid_dt / dt - 1e-9));
        step = grid_dt / static_cast<double>(per_slice);
    }
    cv.field = splitstep_solve(y0, domain, step, per_slice * (g.nt - 1), per_slice, g.t_min);

    const double dx = domain.dx();
    CheckContext ctx;
    ctx.note = "max over grid times";
    for (std::size_t k = 0; k < g.nt; ++k) {
        const auto& snap = cv.field.snapshots[k];
        const double t = g.t(k);
        std::vector<cplx> vessel_vals;
        double l2 = 0.0;
        for (std::size_t j : cv.compared_nodes) {
            const VesselState s = eval_state(v, domain.x(j), t);
            if (!s.valid) throw Error(ErrorKind::Singular, "vessel invalid inside the comparison window: " + s.reason);
            const cplx b = beta(s);
            vessel_vals.push_back(b);
            const double d = std::abs(b - snap.y[j]);
            cv.max_diff = std::max(cv.max_diff, d);
            l2 += d * d * dx;
        }
        cv.l2_diff = std::max(cv.l2_diff, std::sqrt(l2));
        cv.vessel_values.push_back(std::move(vessel_vals));
    }
    CheckContext c1 = ctx;
    c1.t = g.t_max;
    cv.report.add("oracle.max_diff", cv.max_diff, opts.max_threshold, c1);
    cv.report.add("oracle.l2_diff", cv.l2_diff, opts.l2_threshold, c1);
    const double m0 = cv.field.mass_series.front();
    double drift = 0.0;
    for (double m : cv.field.mass_series) drift = std::max(drift, std::abs(m - m0) / std::max(m0, 1e-300));
    cv.report.add("oracle.mass_drift", m0 > 0.0 ? drift : 0.0, 1e-10, c1);
    return cv;
}

void write_snapshot_csv(std::ostream& os, const PeriodicDomain& d, const Snapshot& s) {
    os << "x,re,im\n";
    for (std::size_t j = 0; j < s.y.size(); ++j) {
        os << format_double(d.x(j)) << ',' << format_double(s.y[j].real()) << ','
           << format_double(s.y[j].imag()) << '\n';
    }
}

}  // namespace vnls
