#pragma once

#include <cstdint>
#include <random>

namespace ranxrl {

// splitmix64; used to derive independent stream seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream concerns. Each (concern, index) pair gets its own generator so that
// disabling one consumer (e.g. the explainer) cannot shift any other stream.
enum class RngConcern : std::uint64_t {
  traffic = 1,
  channel = 2,
  exploration = 3,
  buffer_sampling = 4,
  background = 5,
  net_init = 6,
};

inline std::uint64_t derive_seed(std::uint64_t master, RngConcern concern,
                                 std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
  s = splitmix64(s + static_cast<std::uint64_t>(concern) * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s + index);
}

using Rng = std::mt19937_64;

}  // namespace ranxrl
