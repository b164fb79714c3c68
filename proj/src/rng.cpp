#include "bhtbp/rng.hpp"

namespace bhtbp {
namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Engine make_engine(const RngSeed& seed) {
  const std::uint64_t a = mix(seed.master_seed);
  const std::uint64_t b = mix(a ^ mix(seed.stream_id + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

RngSeed derive_seed(std::uint64_t master_seed, StreamKind kind, std::uint64_t index) {
  return RngSeed{master_seed, (static_cast<std::uint64_t>(kind) << 56) ^ index};
}

}  // namespace bhtbp
