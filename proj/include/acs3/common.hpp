#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace acs3 {

inline constexpr double kPi = 3.14159265358979323846;

// Bad user input: grid dims, config keys, file formats. CLI exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated numerical contract: divergence, invariant breach, missing level.
// CLI exit code 1.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip-exact decimal form, used for every CSV/JSON number so
// repeated runs are byte-identical.
inline std::string fp(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

}  // namespace acs3
