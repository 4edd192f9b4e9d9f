#pragma once

#include <charconv>
#include <cstdint>
#include <string>

// Private helpers shared by the CSV/JSON writers. Not installed.

namespace srmac::detail {

/// Shortest decimal form that round-trips to the same double. Deterministic
/// across platforms, unlike iostream's locale- and precision-sensitive paths.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace srmac::detail
