#pragma once

#include <cstdint>
#include <random>

namespace mdest::sim {

enum class Stream : std::uint64_t { groups = 1, units = 2 };

/// Independent engine for (seed, replication, stream); the same key always
/// yields the same sequence, whatever thread evaluates it.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t replication, Stream stream);

}  // namespace mdest::sim
