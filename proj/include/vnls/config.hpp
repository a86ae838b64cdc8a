#pragma once

#include "vnls/build.hpp"
#include "vnls/expr.hpp"
#include "vnls/field.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vnls {

struct DiagonalSpec {
    Vec mu, b1, b2;
    double x0 = 0.0;
};

struct CurveVesselSpec {
    CurveSpec curve;
    Expression b1, b2;
    int quadrature_n = 16;
    int panels = 1;
    double x0 = 0.0;
};

struct RealizedSpec {
    Mat a, b0, x0_op;
    double x0 = 0.0;
};

using VesselSpec = std::variant<DiagonalSpec, CurveVesselSpec, RealizedSpec>;

struct OracleSpec {
    double dt = 1e-3;
    double padding = 4.0;
    std::size_t nx = 2048;
};

struct RunConfig {
    VesselSpec vessel;
    EvalGrid grid;
    std::vector<std::string> checks;
    std::map<std::string, double> thresholds;
    std::optional<OracleSpec> oracle;
    std::string output_dir = "out";
    bool write_tau = true;
    nlohmann::json source;
};

/// Check suites understood by run and the config's "checks" list.
const std::vector<std::string>& known_checks();

/// Parses a JSON config. Complex numbers are [re, im] pairs or bare reals. Every
/// violation is an Error(Config) whose message starts with the JSON path.
RunConfig parse_config(std::string_view text);

/// Builds the vessel described by the config (may throw Config or Singular).
FiniteVessel make_vessel(const VesselSpec& spec);

/// Parses "x0:x1:nx,t0:t1:nt" (the t part is optional).
EvalGrid parse_grid(const std::string& text);

}  // namespace vnls
