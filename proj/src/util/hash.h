#ifndef LETHE_UTIL_HASH_H_
#define LETHE_UTIL_HASH_H_

#include <cstdint>

namespace lethe {

// 64-bit mixer (splitmix64 finalizer). One digest per key; Bloom probe
// positions are derived from this single digest by double hashing.
inline uint64_t Hash64(uint64_t x, uint64_t seed = 0) {
  x += seed + 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace lethe

#endif  // LETHE_UTIL_HASH_H_
