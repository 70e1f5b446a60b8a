#include "core/rng.hpp"

#include <cmath>
#include <numbers>

namespace xrmdn {

std::uint64_t next_u64(RngState& rng) {
    rng.counter += 1;
    std::uint64_t z = rng.seed + rng.counter * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double next_uniform(RngState& rng) {
    // 53 mantissa bits, offset by half a step so 0 and 1 are unreachable.
    return (static_cast<double>(next_u64(rng) >> 11) + 0.5) * 0x1.0p-53;
}

double next_normal(RngState& rng) {
    const double u1 = next_uniform(rng);
    const double u2 = next_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngState fork_rng(const RngState& rng, std::uint64_t tag) {
    RngState child;
    child.seed = (rng.seed ^ 0xA0761D6478BD642FULL) + (tag + 1) * 0xE7037ED1A0B428DBULL;
    child.counter = 0;
    return child;
}

}  // namespace xrmdn
