#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dldn {

// All durations are kept as integer nanoseconds so that eligibility-time
// arithmetic is exact. File inputs are in microseconds and converted here.
using Nanoseconds = std::int64_t;
using Bytes = std::int64_t;
using BitsPerSecond = std::int64_t;

inline Nanoseconds us_to_ns(double us) {
    double ns = us * 1000.0;
    auto rounded = static_cast<Nanoseconds>(ns < 0 ? ns - 0.5 : ns + 0.5);
    if (ns < -9.0e18 || ns > 9.0e18) {
        throw std::invalid_argument("duration out of range: " + std::to_string(us) + " us");
    }
    double err = ns - static_cast<double>(rounded);
    if (err > 1e-6 || err < -1e-6) {
        throw std::invalid_argument("duration not representable in integer ns: " +
                                    std::to_string(us) + " us");
    }
    return rounded;
}

inline double ns_to_us(Nanoseconds ns) { return static_cast<double>(ns) / 1000.0; }

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    return (a + b - 1) / b;
}

} // namespace dldn
