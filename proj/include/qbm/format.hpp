#pragma once

#include <cstdio>
#include <string>

namespace qbm {

/// 17 significant digits: enough to round-trip a double bit-exactly, so CSV
/// outputs are stable regression fixtures.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt(double x, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return buf;
}

}  // namespace qbm
