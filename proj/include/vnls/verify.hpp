#pragma once

#include "vnls/field.hpp"
#include "vnls/vessel.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vnls {

struct CheckContext {
    std::optional<double> x;
    std::optional<double> t;
    std::optional<cplx> lambda;
    std::optional<int> n;
    std::string note;
};

struct ResidualEntry {
    std::string check_id;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool evaluable = true;
    CheckContext context;
};

/// Named residuals with thresholds; pass <=> evaluable && residual <= threshold.
struct ResidualReport {
    std::vector<ResidualEntry> entries;

    void add(std::string id, double residual, double threshold, CheckContext ctx = {});
    void add_unevaluable(std::string id, CheckContext ctx, std::string why);
    void merge(const ResidualReport& other);

    bool all_pass() const;
    /// Largest residual over entries whose id equals `id` (or -inf when absent).
    double max_residual(const std::string& id) const;
    const ResidualEntry* find(const std::string& id) const;

    /// Replaces thresholds for matching ids (exact or prefix before '.') and
    /// recomputes pass flags.
    void apply_overrides(const std::map<std::string, double>& overrides);
};

/// Array of {check_id, residual, threshold, pass, context}; non-finite residuals become null.
nlohmann::json to_json(const ResidualReport& report);

/// Threshold used by every finite-difference check: truncation term 100 h^4 scaled by
/// the growth rate of the differentiated quantity, plus a rounding floor.
double stencil_threshold(double h, double rate, int derivative_order, double magnitude);

/// Fourth-order central first and second derivative stencils on (f(-2h), f(-h), f(0), f(h), f(2h)).
template <class T>
T central_d1(const T& m2, const T& m1, const T& p1, const T& p2, double h) {
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
}
template <class T>
T central_d2(const T& m2, const T& m1, const T& c0, const T& p1, const T& p2, double h) {
    return (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
}

/// Hermiticity of X and the zero-diagonal / anti-self-adjoint structure of gamma_*.
ResidualReport algebraic_identities(const FiniteVessel& v, double x, double t);

/// B_x + A B s2, X_x - B s2 B^*, B_t - i A B_x, X_t - i(A B s2 B^* - B s2 B^* A^*), and the
/// Lyapunov residual at (x, t).
ResidualReport ode_residuals(const FiniteVessel& v, double x, double t, double h = 1e-3);

struct BacklundOptions {
    cplx c1{1.0, 0.0};
    cplx c2{0.0, 0.0};
    double h = 1e-3;
};

/// Max over x_grid of |lambda s2 y - y_x + gamma_* y| with y = S(lambda) u and u the
/// closed-form solution of the input equation.
ResidualReport backlund_residual(const FiniteVessel& v, cplx lambda, const std::vector<double>& x_grid,
                                 double t, BacklundOptions opts = {});

/// Max over x_list of |S(-conj lambda)^* S(lambda) - I| and |det S(lambda, x) - det S(lambda, x0)|.
ResidualReport spectral_identities(const FiniteVessel& v, cplx lambda, const std::vector<double>& x_list,
                                   double t);

/// |(log tau)_x - (H0_11 - H0_22)/2| and |(log tau)_xx - |beta|^2|.
ResidualReport tau_identity_residual(const FiniteVessel& v, double x, double t, double h = 1e-3);

/// Step for the tau stencils: 1e-3, shrunk so that h ||A|| <= 2e-3.
double tau_step(const FiniteVessel& v);

/// x- and t-recursions between consecutive moments for n < n_max, their entrywise
/// forms, and the structure of (H_0)_x.
ResidualReport moment_recursion_residual(const FiniteVessel& v, double x, double t, int n_max,
                                         double h = 1e-3);

/// Coefficients of 1/lambda^{n+1} in S(lambda) S(-conj lambda)^* - I up to n_max, in both
/// product orders, plus the symmetry residual at 8 points on |lambda| = 4 ||A||.
ResidualReport moment_bilinear_residual(const FiniteVessel& v, double x, double t, int n_max = 4);

struct PdeResidual {
    std::size_t nx = 0;
    std::size_t nt = 0;
    std::vector<double> values;  // NaN on boundary and skipped nodes
    double max = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;     // interior nodes with a masked stencil neighbor
};

/// |i beta_t + beta_xx + 2 |beta|^2 beta| at interior nodes, fourth order in x and t.
PdeResidual pde_residual(const BetaField& f);

}  // namespace vnls
