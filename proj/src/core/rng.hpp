#pragma once

#include <cstdint>

namespace xrmdn {

/// Counter-based pseudo-random generator state. Output i is a pure function
/// of (seed, i), so identical seeds give bit-identical streams on every
/// platform and independent substreams can be derived with fork_rng.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
};

[[nodiscard]] std::uint64_t next_u64(RngState& rng);

/// Uniform draw strictly inside (0, 1).
[[nodiscard]] double next_uniform(RngState& rng);

/// Standard normal draw (Box-Muller, two uniforms per call).
[[nodiscard]] double next_normal(RngState& rng);

/// Independent substream keyed by tag; the parent state is left untouched.
[[nodiscard]] RngState fork_rng(const RngState& rng, std::uint64_t tag);

}  // namespace xrmdn
