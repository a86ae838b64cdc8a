#include "vnls/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace vnls {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::Config, path + ": " + what);
}

std::string at(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t index) {
    return path + "[" + std::to_string(index) + "]";
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(at(path, key), "unknown field");
        }
    }
}

const json& required(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(at(path, key), "missing required field");
    return j.at(key);
}

double real_of(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double real_field(const json& j, const std::string& path, const char* key, double fallback) {
    return j.contains(key) ? real_of(j.at(key), at(path, key)) : fallback;
}

std::size_t count_of(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected a non-negative integer");
    const auto v = j.get<long long>();
    if (v < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

cplx complex_of(const json& j, const std::string& path) {
    if (j.is_number()) return real_of(j, path);
    if (!j.is_array() || j.size() != 2) fail(path, "expected a complex number [re, im]");
    return {real_of(j[0], at(path, 0)), real_of(j[1], at(path, 1))};
}

Vec complex_vector(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of complex numbers");
    if (j.empty()) fail(path, "must not be empty");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = complex_of(j[k], at(path, k));
    return v;
}

Mat complex_matrix(const json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array()) fail(path, "expected an array of rows");
    if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows) {
        fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    }
    if (j.empty()) fail(path, "must not be empty");
    const auto n = static_cast<Eigen::Index>(j.size());
    Mat m(n, cols < 0 ? n : cols);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::string row_path = at(path, static_cast<std::size_t>(r));
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
            fail(row_path, "expected a row of " + std::to_string(m.cols()) + " complex numbers");
        }
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = complex_of(row[static_cast<std::size_t>(c)], at(row_path, static_cast<std::size_t>(c)));
        }
    }
    return m;
}

DiagonalSpec parse_diagonal(const json& j, const std::string& path) {
    only_keys(j, path, {"mu", "b1", "b2", "x0"});
    DiagonalSpec d;
    d.mu = complex_vector(required(j, path, "mu"), at(path, "mu"));
    d.b1 = complex_vector(required(j, path, "b1"), at(path, "b1"));
    d.b2 = complex_vector(required(j, path, "b2"), at(path, "b2"));
    d.x0 = real_field(j, path, "x0", 0.0);
    for (const char* key : {"b1", "b2"}) {
        const Vec& b = std::string(key) == "b1" ? d.b1 : d.b2;
        if (b.size() != d.mu.size()) {
            fail(at(path, key), "length " + std::to_string(b.size()) + " differs from mu length " +
                                    std::to_string(d.mu.size()));
        }
    }
    for (Eigen::Index k = 0; k < d.mu.size(); ++k) {
        const std::string p = at(at(path, "mu"), static_cast<std::size_t>(k));
        if (d.mu(k) == cplx(0.0)) fail(p, "spectral point must be separated from zero");
        if (d.b1(k) == cplx(0.0) && d.b2(k) == cplx(0.0)) {
            fail(at(at(path, "b1"), static_cast<std::size_t>(k)), "b1 and b2 vanish together");
        }
    }
    return d;
}

CurveVesselSpec parse_curve(const json& j, const std::string& path) {
    only_keys(j, path, {"family", "params", "b1_expr", "b2_expr", "quadrature_n", "panels", "x0"});
    const json& fam = required(j, path, "family");
    if (!fam.is_string()) fail(at(path, "family"), "expected one of segment, arc, samples");
    const std::string family = fam.get<std::string>();
    const std::string pp = at(path, "params");
    const json& params = required(j, path, "params");
    CurveVesselSpec c{CurveSpec::segment(0.0, 1.0), Expression::parse("1"), Expression::parse("1")};
    if (family == "segment") {
        only_keys(params, pp, {"from", "to"});
        c.curve = CurveSpec::segment(complex_of(required(params, pp, "from"), at(pp, "from")),
                                     complex_of(required(params, pp, "to"), at(pp, "to")));
    } else if (family == "arc") {
        only_keys(params, pp, {"center", "radius", "angle_a", "angle_b"});
        const double radius = real_of(required(params, pp, "radius"), at(pp, "radius"));
        if (!(radius > 0.0)) fail(at(pp, "radius"), "must be positive");
        const double a = real_of(required(params, pp, "angle_a"), at(pp, "angle_a"));
        const double b = real_of(required(params, pp, "angle_b"), at(pp, "angle_b"));
        if (!(a < b)) fail(at(pp, "angle_b"), "must exceed angle_a");
        c.curve = CurveSpec::arc(complex_of(required(params, pp, "center"), at(pp, "center")), radius, a, b);
    } else if (family == "samples") {
        only_keys(params, pp, {"nodes"});
        const Vec nodes = complex_vector(required(params, pp, "nodes"), at(pp, "nodes"));
        if (nodes.size() < 2) fail(at(pp, "nodes"), "need at least two nodes");
        c.curve = CurveSpec::samples(std::vector<cplx>(nodes.data(), nodes.data() + nodes.size()));
    } else {
        fail(at(path, "family"), "expected one of segment, arc, samples; got \"" + family + "\"");
    }
    for (const char* key : {"b1_expr", "b2_expr"}) {
        const json& e = required(j, path, key);
        if (!e.is_string()) fail(at(path, key), "expected an expression string");
        try {
            (std::string(key) == "b1_expr" ? c.b1 : c.b2) = Expression::parse(e.get<std::string>());
        } catch (const Error& err) {
            fail(at(path, key), err.what());
        }
    }
    if (j.contains("quadrature_n")) c.quadrature_n = static_cast<int>(count_of(j["quadrature_n"], at(path, "quadrature_n")));
    if (j.contains("panels")) c.panels = static_cast<int>(count_of(j["panels"], at(path, "panels")));
    if (c.quadrature_n < 1) fail(at(path, "quadrature_n"), "must be at least 1");
    if (c.panels < 1) fail(at(path, "panels"), "must be at least 1");
    c.x0 = real_field(j, path, "x0", 0.0);
    return c;
}

RealizedSpec parse_realized(const json& j, const std::string& path) {
    only_keys(j, path, {"A", "B0", "X0", "x0"});
    RealizedSpec r;
    r.a = complex_matrix(required(j, path, "A"), at(path, "A"), -1, -1);
    r.b0 = complex_matrix(required(j, path, "B0"), at(path, "B0"), r.a.rows(), 2);
    r.x0_op = complex_matrix(required(j, path, "X0"), at(path, "X0"), r.a.rows(), r.a.rows());
    r.x0 = real_field(j, path, "x0", 0.0);
    return r;
}

void parse_axis(const json& j, const std::string& path, double& lo, double& hi, std::size_t& n) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected [min, max, count]");
    lo = real_of(j[0], at(path, 0));
    hi = real_of(j[1], at(path, 1));
    n = count_of(j[2], at(path, 2));
}

}  // namespace

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> ids = {"algebraic", "ode",     "backlund", "spectral", "tau",
                                                 "moments",   "bilinear", "pde",     "oracle"};
    return ids;
}

RunConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("$", std::string("malformed JSON: ") + e.what());
    }
    only_keys(root, "$", {"vessel", "grid", "checks", "thresholds", "oracle", "output"});
    RunConfig cfg;
    cfg.source = root;

    const json& vessel = required(root, "", "vessel");
    only_keys(vessel, "vessel", {"diagonal", "curve", "realized"});
    std::vector<std::string> present;
    for (const char* key : {"diagonal", "curve", "realized"}) {
        if (vessel.contains(key)) present.push_back(at("vessel", key));
    }
    if (present.empty()) fail("vessel", "exactly one of diagonal, curve, realized is required");
    if (present.size() > 1) {
        std::string names;
        for (const auto& p : present) names += (names.empty() ? "" : ", ") + p;
        fail("vessel", "conflicting vessel variants: " + names);
    }
    if (vessel.contains("diagonal")) {
        cfg.vessel = parse_diagonal(vessel["diagonal"], "vessel.diagonal");
    } else if (vessel.contains("curve")) {
        cfg.vessel = parse_curve(vessel["curve"], "vessel.curve");
    } else {
        cfg.vessel = parse_realized(vessel["realized"], "vessel.realized");
    }

    const json& grid = required(root, "", "grid");
    only_keys(grid, "grid", {"x", "t"});
    parse_axis(required(grid, "grid", "x"), "grid.x", cfg.grid.x_min, cfg.grid.x_max, cfg.grid.nx);
    if (grid.contains("t")) parse_axis(grid["t"], "grid.t", cfg.grid.t_min, cfg.grid.t_max, cfg.grid.nt);
    try {
        cfg.grid.validate();
    } catch (const Error& e) {
        fail("grid", e.what());
    }

    if (root.contains("checks")) {
        const json& checks = root["checks"];
        if (!checks.is_array()) fail("checks", "expected an array of check ids");
        for (std::size_t k = 0; k < checks.size(); ++k) {
            const std::string p = at("checks", k);
            std::string id;
            if (checks[k].is_string()) {
                id = checks[k].get<std::string>();
            } else {
                only_keys(checks[k], p, {"id", "threshold"});
                const json& jid = required(checks[k], p, "id");
                if (!jid.is_string()) fail(at(p, "id"), "expected a string");
                id = jid.get<std::string>();
                if (checks[k].contains("threshold")) {
                    const double thr = real_of(checks[k]["threshold"], at(p, "threshold"));
                    if (!(thr > 0.0)) fail(at(p, "threshold"), "must be positive");
                    cfg.thresholds[id] = thr;
                }
            }
            const auto& known = known_checks();
            if (std::find(known.begin(), known.end(), id) == known.end()) fail(p, "unknown check id \"" + id + "\"");
            if (std::find(cfg.checks.begin(), cfg.checks.end(), id) == cfg.checks.end()) cfg.checks.push_back(id);
        }
    } else {
        cfg.checks = known_checks();
    }

    if (root.contains("thresholds")) {
        const json& t = root["thresholds"];
        if (!t.is_object()) fail("thresholds", "expected an object of check id -> threshold");
        for (const auto& [key, value] : t.items()) {
            const double thr = real_of(value, at("thresholds", key));
            if (!(thr > 0.0)) fail(at("thresholds", key), "must be positive");
            const std::string suite = key.substr(0, key.find('.'));
            const auto& known = known_checks();
            if (std::find(known.begin(), known.end(), suite) == known.end()) {
                fail(at("thresholds", key), "unknown check id");
            }
            cfg.thresholds[key] = thr;
        }
    }

    if (root.contains("oracle")) {
        const json& o = root["oracle"];
        only_keys(o, "oracle", {"dt", "padding", "nx"});
        OracleSpec spec;
        spec.dt = real_field(o, "oracle", "dt", spec.dt);
        spec.padding = real_field(o, "oracle", "padding", spec.padding);
        if (o.contains("nx")) spec.nx = count_of(o["nx"], "oracle.nx");
        if (!(spec.dt > 0.0)) fail("oracle.dt", "must be positive");
        if (!(spec.padding >= 1.0)) fail("oracle.padding", "must be at least 1");
        if (spec.nx < 8 || (spec.nx & (spec.nx - 1)) != 0) fail("oracle.nx", "must be a power of two >= 8");
        cfg.oracle = spec;
    }

    if (root.contains("output")) {
        const json& o = root["output"];
        only_keys(o, "output", {"dir", "tau"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) fail("output.dir", "expected a path string");
            cfg.output_dir = o["dir"].get<std::string>();
        }
        if (o.contains("tau")) {
            if (!o["tau"].is_boolean()) fail("output.tau", "expected a boolean");
            cfg.write_tau = o["tau"].get<bool>();
        }
    }
    return cfg;
}

FiniteVessel make_vessel(const VesselSpec& spec) {
    if (const auto* d = std::get_if<DiagonalSpec>(&spec)) {
        return build_diagonal(d->mu, d->b1, d->b2, d->x0);
    }
    if (const auto* c = std::get_if<CurveVesselSpec>(&spec)) {
        const auto rule = QuadratureRule::gauss_legendre(c->curve.a, c->curve.b, c->quadrature_n, c->panels);
        return build_curve(c->curve, c->b1, c->b2, rule, c->x0);
    }
    const auto& r = std::get<RealizedSpec>(spec);
    return build_realized(r.a, r.b0, r.x0_op, r.x0);
}

EvalGrid parse_grid(const std::string& text) {
    auto parse_axis_text = [&](const std::string& part, double& lo, double& hi, std::size_t& n) {
        std::vector<std::string> fields;
        std::stringstream ss(part);
        std::string f;
        while (std::getline(ss, f, ':')) fields.push_back(f);
        if (fields.size() != 3) fail("--grid", "expected min:max:count, got \"" + part + "\"");
        auto num = [&](const std::string& s) {
            double v = 0.0;
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) fail("--grid", "malformed number \"" + s + "\"");
            return v;
        };
        lo = num(fields[0]);
        hi = num(fields[1]);
        std::size_t count = 0;
        const auto [p, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), count);
        if (ec != std::errc() || p != fields[2].data() + fields[2].size()) {
            fail("--grid", "malformed count \"" + fields[2] + "\"");
        }
        n = count;
    };
    EvalGrid g{0.0, 1.0, 2, 0.0, 0.0, 1};
    const auto comma = text.find(',');
    parse_axis_text(text.substr(0, comma), g.x_min, g.x_max, g.nx);
    if (comma != std::string::npos) parse_axis_text(text.substr(comma + 1), g.t_min, g.t_max, g.nt);
    try {
        g.validate();
    } catch (const Error& e) {
        fail("--grid", e.what());
    }
    return g;
}

}  // namespace vnls
