#ifndef LETHE_FILTER_BLOOM_H_
#define LETHE_FILTER_BLOOM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "util/status.h"

namespace lethe {

// Per-page Bloom filter on the sort key. All probe positions derive from a
// single 64-bit digest per key (double hashing), so hash-computation counters
// reflect one digest per insert or probe.
class PageBloomFilter {
 public:
  PageBloomFilter() = default;

  static PageBloomFilter Build(std::span<const uint64_t> sort_keys,
                               double bits_per_entry,
                               uint64_t* hash_counter = nullptr);

  // MaybePresent -> true. A false return is definitive: no false negatives.
  bool MayContain(uint64_t sort_key, uint64_t* hash_counter = nullptr) const;

  uint32_t bits() const { return bits_; }
  uint32_t probes() const { return probes_; }
  uint64_t MemoryBytes() const { return data_.size(); }

  void AppendTo(std::string* dst) const;
  static Status ReadFrom(class ByteReader* r, PageBloomFilter* out);

 private:
  uint32_t bits_ = 0;
  uint32_t probes_ = 0;
  std::vector<uint8_t> data_;
};

}  // namespace lethe

#endif  // LETHE_FILTER_BLOOM_H_
