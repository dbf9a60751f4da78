#ifndef LETHE_FADE_PICKER_H_
#define LETHE_FADE_PICKER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core/options.h"
#include "db/version.h"
#include "fade/ttl.h"

namespace lethe {

struct CompactionPlan {
  enum class Trigger { kSaturation, kTtlExpiry };
  enum class Mode { kSO, kSD, kDD };  // smallest overlap / max invalidation
                                      // / expired tombstone deadline

  Trigger trigger = Trigger::kSaturation;
  Mode mode = Mode::kSO;
  uint32_t source_level = 0;  // 0-based (Level 1 == 0)
  uint32_t target_level = 0;  // == source_level for last-level self-rewrite
  uint64_t file_id = 0;
  std::vector<uint64_t> target_file_ids;
};

// Maps a file to its oldest-tombstone age a_f in logical seconds (0 when the
// file holds no tombstones). Supplied by the engine, which owns the
// seqnum-to-time ring.
using TombstoneAgeFn = std::function<uint64_t(const FileMetaData&)>;

// Deadline-expired files take priority over saturated levels. A file is
// expired when it holds tombstones and either outstayed its per-level TTL or
// its oldest tombstone exceeds the cumulative budget of its level, which
// guards against age resets from repeated early compaction.
std::optional<CompactionPlan> EvaluateTriggers(const TreeVersion& tree,
                                               const Options& opts,
                                               const TtlSchedule& ttls,
                                               uint64_t now,
                                               const TombstoneAgeFn& age_of);

// Byte capacity of 0-based disk level i: M * T^(i+1).
uint64_t LevelCapacityBytes(const Options& opts, size_t level);

// Files of `level` whose sort range intersects [lo, hi].
std::vector<uint64_t> OverlappingFileIds(const TreeVersion& tree, size_t level,
                                         uint64_t lo, uint64_t hi);

}  // namespace lethe

#endif  // LETHE_FADE_PICKER_H_
