#pragma once

#include "vnls/config.hpp"
#include "vnls/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace vnls {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { BuildCheck, Field, Verify, Oracle };

const char* to_string(Command c) noexcept;

struct RunManifest {
    nlohmann::json json;
    bool pass = false;
    int exit_code = 1;  // 0 pass, 1 failed checks, 2 construction or evaluation error
};

/// Deterministic sample points for the pointwise checks: interior (x, t) nodes at the
/// fractions 1/6 .. 5/6 of the grid ranges.
std::vector<std::pair<double, double>> check_points(const EvalGrid& g);

/// Runs the named suites on `v`. The pde suite needs `field`; "oracle" is handled by run.
ResidualReport run_checks(const FiniteVessel& v, const EvalGrid& g, const std::vector<std::string>& ids,
                          const BetaField* field);

/// Writes the artifacts of `command` into `out_dir` and returns the manifest (also
/// written as manifest.json). Data files carry no volatile fields; timings live in the
/// manifest only.
RunManifest run(const RunConfig& cfg, Command command, const std::filesystem::path& out_dir);

}  // namespace vnls
