#include "vnls/params.hpp"

namespace vnls {

VesselParams make_params() {
    VesselParams p;
    p.sigma1 = Mat2::Identity();
    p.sigma2 << cplx(0.5, 0.0), cplx(0.0, 0.0),
                cplx(0.0, 0.0), cplx(-0.5, 0.0);
    p.gamma = Mat2::Zero();
    return p;
}

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Range: return "range";
        case ErrorKind::Singular: return "singular";
        case ErrorKind::Spectral: return "spectral";
        case ErrorKind::Unevaluable: return "unevaluable";
        case ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

}  // namespace vnls
