#pragma once

#include <cstdint>
#include <random>

namespace bhtbp {

/// Identifies one reproducible random stream. Streams with different ids
/// drawn from the same master seed are statistically independent, so trials
/// can be generated in any order or on any thread.
struct RngSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

using Engine = std::mt19937_64;

/// Counter-based stream derivation: the engine state is a pure function of
/// (master_seed, stream_id).
Engine make_engine(const RngSeed& seed);

/// Stream ids reserved per purpose so matrix, signal, and noise draws never
/// share a stream.
enum class StreamKind : std::uint64_t { kMatrix = 1, kSignal = 2, kNoise = 3 };

RngSeed derive_seed(std::uint64_t master_seed, StreamKind kind, std::uint64_t index = 0);

}  // namespace bhtbp
