#pragma once

#include <cstdint>
#include <random>

namespace mrw {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// seed of trial `index` in a campaign with master seed `master`
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

// uniform on the open interval (0,1), 53 bits
inline double uniform01(Engine& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace mrw
