#pragma once

#include <string>

namespace vnls {

/// Shortest decimal string that round-trips to the same binary64 value.
std::string format_double(double v);

}  // namespace vnls
