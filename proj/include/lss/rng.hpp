#pragma once

#include <cstdint>
#include <random>

namespace lss {

/// SplitMix64 step; advances `state` and returns the mixed output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent stream for one replica, keyed by (master_seed, replica_index).
/// Entry positions are not keyed: a replica consumes its stream sequentially.
inline std::mt19937_64 replica_engine(std::uint64_t master_seed, std::uint64_t replica_index) {
    std::uint64_t state = master_seed ^ (0xD1B54A32D192ED03ULL * (replica_index + 1));
    std::uint32_t words[8];
    for (int i = 0; i < 8; i += 2) {
        const std::uint64_t v = splitmix64(state);
        words[i] = static_cast<std::uint32_t>(v);
        words[i + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(std::begin(words), std::end(words));
    return std::mt19937_64(seq);
}

}  // namespace lss
