#include "vnls/field.hpp"

#include "vnls/parallel.hpp"

#include <cmath>

namespace vnls {

void EvalGrid::validate() const {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(t_min) && std::isfinite(t_max))) {
        throw Error(ErrorKind::Config, "grid bounds must be finite");
    }
    if (!(x_min < x_max)) throw Error(ErrorKind::Config, "grid requires x_min < x_max");
    if (nx < 2) throw Error(ErrorKind::Config, "grid requires nx >= 2");
    if (nt < 1) throw Error(ErrorKind::Config, "grid requires nt >= 1");
    if (nt > 1 && !(t_min < t_max)) throw Error(ErrorKind::Config, "grid requires t_min < t_max when nt > 1");
}

double EvalGrid::x(std::size_t i) const {
    return x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(nx - 1);
}

double EvalGrid::t(std::size_t j) const {
    if (nt == 1) return t_min;
    return t_min + (t_max - t_min) * static_cast<double>(j) / static_cast<double>(nt - 1);
}

BetaField beta_field(const FiniteVessel& v, const EvalGrid& g) {
    g.validate();
    BetaField f;
    f.grid = g;
    const std::size_t total = g.nx * g.nt;
    f.values.assign(total, cplx(0.0));
    f.valid_mask.assign(total, 0);
    parallel_for(total, [&](std::size_t idx) {
        const std::size_t i = idx % g.nx;
        const std::size_t j = idx / g.nx;
        try {
            const VesselState s = eval_state(v, g.x(i), g.t(j));
            if (!s.valid) return;
            const cplx b = beta(s);
            if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) return;
            f.values[idx] = b;
            f.valid_mask[idx] = 1;
        } catch (const Error&) {
            // masked
        }
    });
    return f;
}

}  // namespace vnls
