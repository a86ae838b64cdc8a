#pragma once

namespace demo {

inline constexpr const char* one_soliton = R"({
  "vessel": {
    "diagonal": {"mu": [[0.5, 0]], "b1": [[1, 0]], "b2": [[1, 0]], "x0": 0}
  },
  "grid": {"x": [-8, 8, 321], "t": [0, 1, 101]},
  "checks": ["algebraic", "ode", "backlund", "spectral", "tau", "moments", "bilinear", "pde", "oracle"],
  "oracle": {"dt": 0.001, "padding": 4, "nx": 2048}
}
)";

inline constexpr const char* two_soliton = R"({
  "vessel": {
    "diagonal": {
      "mu": [[0.5, 0], [0.9, 0]],
      "b1": [[1, 0], [0.6, 0.8]],
      "b2": [[1, 0], [-0.3, 0.4]],
      "x0": 0
    }
  },
  "grid": {"x": [-10, 10, 401], "t": [0, 1, 51]},
  "checks": ["algebraic", "ode", "backlund", "spectral", "tau", "moments", "bilinear", "pde", "oracle"],
  "oracle": {"dt": 0.001, "padding": 4, "nx": 2048}
}
)";

}  // namespace demo
