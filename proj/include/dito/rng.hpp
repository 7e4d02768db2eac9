#pragma once

#include <cstdint>
#include <random>

namespace dito {

// mt19937_64's output sequence is fully specified by the standard. The helpers
// below map raw draws to values directly, so results do not depend on the
// standard library's distribution implementations.

// Uniform in [0, 1).
inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1).
inline double uniform_symmetric(std::mt19937_64& gen) {
    return 2.0 * uniform_unit(gen) - 1.0;
}

// Uniform integer in [0, bound). Modulo bias is irrelevant at the bounds used
// here (token counts, timesteps).
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
    return gen() % bound;
}

}  // namespace dito
