#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace snell {

// Default absolute tolerance for matching externally supplied times (grid
// points, bounds) against stored grid times. Values closer than this are
// snapped to the stored time.
inline constexpr double kTimeTol = 1e-12;

// SplitMix64 step; used to derive independent per-stage seeds from a single
// 64-bit experiment seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Shortest decimal form that round-trips a double; used everywhere a number
// is written to CSV or JSON so that re-running a config reproduces identical
// bytes.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == x) {
        for (int prec = 1; prec <= 16; ++prec) {
            char shorter[32];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
            std::sscanf(shorter, "%lg", &back);
            if (back == x) return std::string(shorter);
        }
    }
    return std::string(buf);
}

}  // namespace snell
