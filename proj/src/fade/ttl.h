#ifndef LETHE_FADE_TTL_H_
#define LETHE_FADE_TTL_H_

#include <cstdint>
#include <vector>

#include "util/status.h"

namespace lethe {

// Per-level tombstone TTLs in logical seconds. Level i gets d[i] = T * d[i-1]
// with d[0] = D_th * (T - 1) / (T^K - 1), so the schedule sums to the delete
// persistence threshold exactly (the last entry absorbs rounding).
struct TtlSchedule {
  std::vector<uint64_t> d;
  uint64_t d_th = 0;
  uint32_t size_ratio = 0;

  // Budget Σ d[j] for j <= level, used to bound a file's total tombstone age.
  uint64_t CumulativeBudget(size_t level) const;
};

Status ComputeTtls(uint64_t d_th, uint32_t size_ratio, uint32_t ttl_levels,
                   TtlSchedule* out);

}  // namespace lethe

#endif  // LETHE_FADE_TTL_H_
