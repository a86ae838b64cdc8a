#pragma once

#include "vnls/field.hpp"
#include "vnls/verify.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace vnls {

/// Periodic domain [x_min, x_max) sampled at nx equispaced nodes (right end excluded).
struct PeriodicDomain {
    double x_min = -1.0;
    double x_max = 1.0;
    std::size_t nx = 0;

    double dx() const { return (x_max - x_min) / static_cast<double>(nx); }
    double x(std::size_t j) const { return x_min + dx() * static_cast<double>(j); }
};

struct Snapshot {
    double t = 0.0;
    std::vector<cplx> y;
};

/// Time series produced by the split-step solver.
struct OracleField {
    PeriodicDomain domain;
    double dt = 0.0;
    std::vector<Snapshot> snapshots;
    std::vector<double> mass_series;  // trapezoid integral of |y|^2 per snapshot
};

/// Strang-split Fourier stepping for i y_t + y_xx + 2|y|^2 y = 0: half nonlinear phase,
/// exact linear step in Fourier space, half nonlinear phase.
///
/// Preconditions: nx a power of two, y0.size() == nx, boundary magnitude of y0 below
/// 1e-8 * max|y0| unless require_decay is false (genuinely periodic data such as plane
/// waves). Snapshots are taken at t0 and every `snapshot_every` steps.
OracleField splitstep_solve(const std::vector<cplx>& y0, PeriodicDomain domain, double dt,
                            std::size_t n_steps, std::size_t snapshot_every, double t0 = 0.0,
                            bool require_decay = true);

struct OracleOptions {
    double padding = 4.0;   // oracle domain length / grid x-range
    std::size_t nx = 2048;
    double max_threshold = 1e-4;
    double l2_threshold = 1e-4;
};

struct CrossValidation {
    ResidualReport report;
    OracleField field;
    std::vector<std::size_t> compared_nodes;  // oracle node indices inside [x_min, x_max]
    std::vector<std::vector<cplx>> vessel_values;  // per grid t, at compared nodes
    double max_diff = 0.0;
    double l2_diff = 0.0;   // max over t of the discrete L2 norm in x
};

/// Seeds the oracle with beta(., t_min) from the vessel on a padded periodic domain
/// and compares with the vessel at every grid time on oracle nodes inside the grid.
CrossValidation cross_validate(const FiniteVessel& v, const EvalGrid& g, double dt,
                               OracleOptions opts = {});

/// CSV with header "x,re,im" for one snapshot.
void write_snapshot_csv(std::ostream& os, const PeriodicDomain& d, const Snapshot& s);

}  // namespace vnls
