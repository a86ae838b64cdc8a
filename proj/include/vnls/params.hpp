#pragma once

#include "vnls/types.hpp"

namespace vnls {

/// The constant NLS parameter triple. sigma1 = I, sigma2 = diag(1,-1)/2, gamma = 0.
struct VesselParams {
    Mat2 sigma1;
    Mat2 sigma2;
    Mat2 gamma;
};

VesselParams make_params();

}  // namespace vnls
