#pragma once

#include "vnls/vessel.hpp"

#include <cstddef>
#include <vector>

namespace vnls {

/// Uniform rectangular (x, t) grid. nt == 1 is a stationary slice at t_min.
struct EvalGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t nx = 2;
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t nt = 1;

    /// Throws Error(Config) when the invariants do not hold.
    void validate() const;

    double x(std::size_t i) const;
    double t(std::size_t j) const;
    double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double dt() const { return nt > 1 ? (t_max - t_min) / static_cast<double>(nt - 1) : 0.0; }
};

/// beta sampled on an EvalGrid; storage is x-fastest (index i + nx * j).
struct BetaField {
    EvalGrid grid;
    std::vector<cplx> values;
    std::vector<char> valid_mask;

    cplx at(std::size_t i, std::size_t j) const { return values[i + grid.nx * j]; }
    bool valid(std::size_t i, std::size_t j) const { return valid_mask[i + grid.nx * j] != 0; }
};

/// Evaluates beta at every node. Nodes where X is singular or the exponent cap
/// trips are masked (value 0, mask false). Nodes are evaluated in parallel.
BetaField beta_field(const FiniteVessel& v, const EvalGrid& g);

}  // namespace vnls
