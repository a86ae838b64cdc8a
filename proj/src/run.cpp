#include "vnls/run.hpp"

#include "vnls/csv.hpp"
#include "vnls/splitstep.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

namespace vnls {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class StageClock {
public:
    explicit StageClock(json& sink) : sink_(sink) {}

    template <class F>
    auto time(const std::string& stage, F&& fn) {
        const auto start = std::chrono::steady_clock::now();
        struct Record {
            json& sink;
            std::string stage;
            std::chrono::steady_clock::time_point start;
            ~Record() {
                sink[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
        } record{sink_, stage, start};
        return fn();
    }

private:
    json& sink_;
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::Config, "cannot open " + path.string() + " for writing");
    return os;
}

void write_beta_csv(const fs::path& path, const BetaField& f) {
    auto os = open_out(path);
    os << "x,t,re,im,abs,valid\n";
    const EvalGrid& g = f.grid;
    for (std::size_t j = 0; j < g.nt; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            const cplx b = f.at(i, j);
            os << format_double(g.x(i)) << ',' << format_double(g.t(j)) << ',' << format_double(b.real()) << ','
               << format_double(b.imag()) << ',' << format_double(std::abs(b)) << ',' << (f.valid(i, j) ? 1 : 0)
               << '\n';
        }
    }
}

void write_tau_csv(const fs::path& path, const FiniteVessel& v, const EvalGrid& g) {
    auto os = open_out(path);
    os << "x,t,re,im\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < g.nx; ++i) {
        cplx value(nan, nan);
        try {
            value = tau(v, g.x(i), g.t_min);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Singular) throw;
        }
        os << format_double(g.x(i)) << ',' << format_double(g.t_min) << ',' << format_double(value.real()) << ','
           << format_double(value.imag()) << '\n';
    }
}

void write_oracle_csv(const fs::path& path, const CrossValidation& cv, const EvalGrid& g) {
    auto os = open_out(path);
    os << "t,x,vessel_re,vessel_im,oracle_re,oracle_im,abs_diff\n";
    const PeriodicDomain& d = cv.field.domain;
    for (std::size_t k = 0; k < g.nt; ++k) {
        const auto& snap = cv.field.snapshots[k];
        for (std::size_t m = 0; m < cv.compared_nodes.size(); ++m) {
            const std::size_t j = cv.compared_nodes[m];
            const cplx a = cv.vessel_values[k][m];
            const cplx b = snap.y[j];
            os << format_double(g.t(k)) << ',' << format_double(d.x(j)) << ',' << format_double(a.real()) << ','
               << format_double(a.imag()) << ',' << format_double(b.real()) << ',' << format_double(b.imag())
               << ',' << format_double(std::abs(a - b)) << '\n';
        }
    }
}

std::vector<cplx> probe_lambdas(const FiniteVessel& v) {
    const double r = 4.0 * std::max(v.a_norm(), 0.25);
    std::vector<cplx> out;
    for (double phase : {0.3, 2.4, 4.5}) out.push_back(std::polar(r, phase));
    return out;
}

ResidualReport pde_suite(const FiniteVessel& v, const BetaField& f) {
    ResidualReport r;
    const EvalGrid& g = f.grid;
    CheckContext ctx;
    ctx.note = "max over interior nodes";
    if (g.nx < 5 || g.nt < 5) {
        r.add_unevaluable("pde", ctx, "grid needs nx, nt >= 5 for the fourth-order stencils");
        return r;
    }
    const PdeResidual p = pde_residual(f);
    double mag = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (f.valid_mask[k]) mag = std::max(mag, std::abs(f.values[k]));
    }
    const double h = std::max(g.dx(), g.dt());
    if (p.evaluated == 0) {
        r.add_unevaluable("pde", ctx, "no interior node has an unmasked stencil");
        return r;
    }
    ctx.note += "; evaluated " + std::to_string(p.evaluated) + ", skipped " + std::to_string(p.skipped);
    r.add("pde", p.max, stencil_threshold(h, v.a_norm(), 2, mag), ctx);
    return r;
}

json summarize(const ResidualReport& report, const std::vector<std::string>& suites) {
    json out = json::object();
    for (const auto& suite : suites) {
        json s;
        bool pass = true;
        std::size_t n = 0;
        json failures = json::array();
        for (const auto& e : report.entries) {
            if (e.check_id.substr(0, e.check_id.find('.')) != suite) continue;
            ++n;
            if (!e.pass) {
                pass = false;
                if (std::find(failures.begin(), failures.end(), e.check_id) == failures.end()) {
                    failures.push_back(e.check_id);
                }
            }
        }
        s["pass"] = pass && n > 0;
        s["entries"] = n;
        s["failures"] = failures;
        out[suite] = s;
    }
    return out;
}

}  // namespace

const char* to_string(Command c) noexcept {
    switch (c) {
        case Command::BuildCheck: return "build-check";
        case Command::Field: return "field";
        case Command::Verify: return "verify";
        case Command::Oracle: return "oracle";
    }
    return "unknown";
}

std::vector<std::pair<double, double>> check_points(const EvalGrid& g) {
    std::vector<std::pair<double, double>> pts;
    for (int k = 1; k <= 5; ++k) {
        const double fx = k / 6.0;
        const double ft = (k % 5 + 1) / 6.0;
        const double t = g.nt > 1 ? g.t_min + ft * (g.t_max - g.t_min) : g.t_min;
        pts.emplace_back(g.x_min + fx * (g.x_max - g.x_min), t);
    }
    return pts;
}

ResidualReport run_checks(const FiniteVessel& v, const EvalGrid& g, const std::vector<std::string>& ids,
                          const BetaField* field) {
    ResidualReport report;
    const auto pts = check_points(g);
    const auto lambdas = probe_lambdas(v);
    auto guarded = [&](const std::string& suite, CheckContext ctx, auto&& fn) {
        try {
            report.merge(fn());
        } catch (const Error& e) {
            report.add_unevaluable(suite, std::move(ctx), e.what());
        }
    };
    auto at = [](double x, double t) {
        CheckContext c;
        c.x = x;
        c.t = t;
        return c;
    };
    for (const auto& id : ids) {
        if (id == "algebraic") {
            for (auto [x, t] : pts) guarded(id, at(x, t), [&] { return algebraic_identities(v, x, t); });
        } else if (id == "ode") {
            for (auto [x, t] : pts) guarded(id, at(x, t), [&] { return ode_residuals(v, x, t); });
        } else if (id == "backlund") {
            const double mid = 0.5 * (g.x_min + g.x_max);
            const double half = (g.x_max - g.x_min) / 8.0;
            std::vector<double> xs(33);
            for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = mid - half + 2.0 * half * k / 32.0;
            for (cplx lam : lambdas) {
                CheckContext c;
                c.lambda = lam;
                guarded(id, c, [&] { return backlund_residual(v, lam, xs, g.t_min); });
            }
        } else if (id == "spectral") {
            for (cplx lam : lambdas) {
                for (auto [x, t] : pts) {
                    CheckContext c = at(x, t);
                    c.lambda = lam;
                    guarded(id, c, [&] { return spectral_identities(v, lam, {x}, t); });
                }
            }
        } else if (id == "tau") {
            for (auto [x, t] : pts) guarded(id, at(x, t), [&] { return tau_identity_residual(v, x, t, tau_step(v)); });
        } else if (id == "moments") {
            for (auto [x, t] : pts) guarded(id, at(x, t), [&] { return moment_recursion_residual(v, x, t, 3); });
        } else if (id == "bilinear") {
            for (auto [x, t] : pts) guarded(id, at(x, t), [&] { return moment_bilinear_residual(v, x, t, 4); });
        } else if (id == "pde") {
            if (!field) throw Error(ErrorKind::Config, "pde check needs the beta field");
            guarded(id, {}, [&] { return pde_suite(v, *field); });
        } else if (id != "oracle") {
            throw Error(ErrorKind::Config, "unknown check id \"" + id + "\"");
        }
    }
    return report;
}

RunManifest run(const RunConfig& cfg, Command command, const fs::path& out_dir) {
    RunManifest m;
    json& j = m.json;
    j["tool"] = "vessel-nls";
    j["version"] = kVersion;
    j["command"] = to_string(command);
    j["config"] = cfg.source;
    j["grid"] = {{"x", {cfg.grid.x_min, cfg.grid.x_max, cfg.grid.nx}},
                 {"t", {cfg.grid.t_min, cfg.grid.t_max, cfg.grid.nt}}};
    j["artifacts"] = json::array();
    j["timings"] = json::object();
    j["error"] = nullptr;
    StageClock clock(j["timings"]);

    std::vector<std::string> suites;
    switch (command) {
        case Command::BuildCheck:
            for (const auto& id : cfg.checks) {
                if (id != "pde" && id != "oracle") suites.push_back(id);
            }
            break;
        case Command::Field: break;
        case Command::Verify: suites = cfg.checks; break;
        case Command::Oracle: suites = {"oracle"}; break;
    }
    j["checks_selected"] = suites;

    fs::create_directories(out_dir);
    auto emit = [&](const std::string& name) { j["artifacts"].push_back(name); return out_dir / name; };
    ResidualReport report;
    try {
        const FiniteVessel v = clock.time("build", [&] { return make_vessel(cfg.vessel); });
        j["vessel"] = {{"kind", v.kind() == VesselKind::Diagonal ? "diagonal" : "general"},
                       {"dim", v.dim()},
                       {"a_norm", v.a_norm()},
                       {"degenerate_pairs", v.degenerate_pairs().size()}};

        std::optional<BetaField> field;
        if (command != Command::BuildCheck) {
            field = clock.time("field", [&] { return beta_field(v, cfg.grid); });
            std::size_t masked = 0;
            for (char c : field->valid_mask) masked += c ? 0 : 1;
            j["field"] = {{"nodes", field->values.size()}, {"masked", masked}};
            write_beta_csv(emit("beta.csv"), *field);
            if (cfg.write_tau) clock.time("tau", [&] { write_tau_csv(emit("tau.csv"), v, cfg.grid); return 0; });
        }

        if (!suites.empty()) {
            report = clock.time("checks", [&] { return run_checks(v, cfg.grid, suites, field ? &*field : nullptr); });
        }
        if (std::find(suites.begin(), suites.end(), "oracle") != suites.end()) {
            const OracleSpec spec = cfg.oracle.value_or(OracleSpec{});
            clock.time("oracle", [&] {
                try {
                    OracleOptions opts;
                    opts.padding = spec.padding;
                    opts.nx = spec.nx;
                    const CrossValidation cv = cross_validate(v, cfg.grid, spec.dt, opts);
                    report.merge(cv.report);
                    write_oracle_csv(emit("oracle.csv"), cv, cfg.grid);
                    std::ofstream snap = open_out(emit("oracle_final.csv"));
                    write_snapshot_csv(snap, cv.field.domain, cv.field.snapshots.back());
                } catch (const Error& e) {
                    CheckContext c;
                    c.note = to_string(e.kind());
                    report.add_unevaluable("oracle", c, e.what());
                }
                return 0;
            });
        }
        report.apply_overrides(cfg.thresholds);
        if (!suites.empty()) {
            auto os = open_out(emit("residuals.json"));
            os << to_json(report).dump(2) << '\n';
        }
        j["checks"] = summarize(report, suites);
        m.pass = report.all_pass();
        for (const auto& s : suites) m.pass = m.pass && j["checks"][s]["pass"].get<bool>();
        m.exit_code = m.pass ? 0 : 1;
    } catch (const Error& e) {
        std::string message = e.what();
        if (e.kind() == ErrorKind::Singular) message = "singular X: " + message;
        j["error"] = {{"kind", to_string(e.kind())}, {"message", message}};
        m.pass = false;
        m.exit_code = 2;
    }
    j["artifacts"].push_back("manifest.json");
    j["summary"] = {{"pass", m.pass}, {"exit_code", m.exit_code}};
    auto os = open_out(out_dir / "manifest.json");
    os << j.dump(2) << '\n';
    return m;
}

}  // namespace vnls
