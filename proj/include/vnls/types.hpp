#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace vnls {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;

enum class ErrorKind {
    Config,       // invalid inputs or configuration
    Range,        // exponent overflow guard tripped
    Singular,     // X not invertible (outside the interval of invertibility)
    Spectral,     // lambda too close to the spectrum of A
    Unevaluable,  // stencil leaves the validity window
    Numerical     // NaN/inf detected during a computation
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline constexpr cplx I_unit{0.0, 1.0};

}  // namespace vnls
