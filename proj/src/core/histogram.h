#ifndef LETHE_CORE_HISTOGRAM_H_
#define LETHE_CORE_HISTOGRAM_H_

#include <array>
#include <cstdint>

namespace lethe {

// Equi-width histogram over the 64-bit sort-key domain: 256 buckets of 2^56
// keys each. Backs the invalidation estimate for range tombstones.
class KeyHistogram {
 public:
  static constexpr uint32_t kBuckets = 256;
  static constexpr int kShift = 56;

  void Add(uint64_t sort_key, uint64_t count = 1) {
    buckets_[sort_key >> kShift] += count;
  }

  void Remove(uint64_t sort_key, uint64_t count = 1) {
    uint64_t& b = buckets_[sort_key >> kShift];
    b = b >= count ? b - count : 0;
  }

  void Merge(const KeyHistogram& o) {
    for (uint32_t i = 0; i < kBuckets; i++) buckets_[i] += o.buckets_[i];
  }

  void Subtract(const KeyHistogram& o) {
    for (uint32_t i = 0; i < kBuckets; i++) {
      buckets_[i] = buckets_[i] >= o.buckets_[i] ? buckets_[i] - o.buckets_[i] : 0;
    }
  }

  uint64_t Total() const {
    uint64_t t = 0;
    for (uint64_t b : buckets_) t += b;
    return t;
  }

  // Estimated number of keys in [lo, hi), assuming uniformity within buckets.
  double EstimateRange(uint64_t lo, uint64_t hi) const {
    if (hi <= lo) return 0.0;
    constexpr double kBucketWidth = 72057594037927936.0;  // 2^56
    double total = 0.0;
    uint32_t first = static_cast<uint32_t>(lo >> kShift);
    uint32_t last = static_cast<uint32_t>((hi - 1) >> kShift);
    for (uint32_t b = first; b <= last; b++) {
      uint64_t b_lo = static_cast<uint64_t>(b) << kShift;
      uint64_t span_lo = lo > b_lo ? lo - b_lo : 0;
      uint64_t span_hi;
      if (b == last && ((hi - 1) >> kShift) == b) {
        uint64_t off = hi - b_lo;
        span_hi = off < (1ull << kShift) ? off : (1ull << kShift);
      } else {
        span_hi = 1ull << kShift;
      }
      double frac = (static_cast<double>(span_hi) - static_cast<double>(span_lo)) /
                    kBucketWidth;
      total += frac * static_cast<double>(buckets_[b]);
      if (b == 255) break;
    }
    return total;
  }

  uint64_t bucket(uint32_t i) const { return buckets_[i]; }
  void set_bucket(uint32_t i, uint64_t v) { buckets_[i] = v; }

 private:
  std::array<uint64_t, kBuckets> buckets_{};
};

}  // namespace lethe

#endif  // LETHE_CORE_HISTOGRAM_H_
