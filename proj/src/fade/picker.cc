#include "fade/picker.h"

#include <algorithm>

namespace lethe {

namespace {

uint64_t TombstoneCount(const FileMetaData& m) {
  return m.point_tombstones + m.range_tombstones.size();
}

}  // namespace

uint64_t LevelCapacityBytes(const Options& opts, size_t level) {
  uint64_t cap = opts.buffer_capacity_bytes;
  for (size_t i = 0; i <= level; i++) {
    if (cap > UINT64_MAX / opts.size_ratio) return UINT64_MAX;
    cap *= opts.size_ratio;
  }
  return cap;
}

std::vector<uint64_t> OverlappingFileIds(const TreeVersion& tree, size_t level,
                                         uint64_t lo, uint64_t hi) {
  std::vector<uint64_t> ids;
  if (level >= tree.levels.size()) return ids;
  for (const auto& f : tree.levels[level]) {
    const FileMetaData& m = f->meta();
    if (m.max_sort_key >= lo && m.min_sort_key <= hi) {
      ids.push_back(m.file_id);
    }
  }
  return ids;
}

std::optional<CompactionPlan> EvaluateTriggers(const TreeVersion& tree,
                                               const Options& opts,
                                               const TtlSchedule& ttls,
                                               uint64_t now,
                                               const TombstoneAgeFn& age_of) {
  size_t deepest = tree.DeepestNonEmptyLevel();
  if (deepest == SIZE_MAX) return std::nullopt;

  // Deadline pass: any tombstone-bearing file past its residence TTL or its
  // cumulative age budget must move on, saturated or not.
  const TableFile* best = nullptr;
  size_t best_level = 0;
  uint64_t best_age = 0;
  if (opts.fade_enabled) {
    for (size_t i = 0; i < tree.levels.size(); i++) {
      for (const auto& f : tree.levels[i]) {
        const FileMetaData& m = f->meta();
        if (!m.HasTombstones()) continue;
        uint64_t age = age_of(m);
        uint64_t residence =
            now >= m.level_arrival_time ? now - m.level_arrival_time : 0;
        bool over_ttl = m.ttl > 0 && residence > m.ttl;
        bool over_budget = age > ttls.CumulativeBudget(i);
        if (!over_ttl && !over_budget) continue;
        bool better =
            best == nullptr || age > best_age ||
            (age == best_age &&
             (i < best_level ||
              (i == best_level &&
               TombstoneCount(m) > TombstoneCount(best->meta()))));
        if (better) {
          best = f.get();
          best_level = i;
          best_age = age;
        }
      }
    }
  }
  if (best != nullptr) {
    CompactionPlan plan;
    plan.trigger = CompactionPlan::Trigger::kTtlExpiry;
    plan.mode = CompactionPlan::Mode::kDD;
    plan.source_level = static_cast<uint32_t>(best_level);
    plan.file_id = best->meta().file_id;
    if (best_level == deepest) {
      plan.target_level = static_cast<uint32_t>(best_level);  // self-rewrite
    } else {
      plan.target_level = static_cast<uint32_t>(best_level + 1);
      plan.target_file_ids =
          OverlappingFileIds(tree, best_level + 1, best->meta().min_sort_key,
                             best->meta().max_sort_key);
    }
    return plan;
  }

  // Saturation pass, smallest over-capacity level first.
  for (size_t i = 0; i < tree.levels.size(); i++) {
    if (tree.levels[i].empty()) continue;
    if (tree.LevelBytes(i) <= LevelCapacityBytes(opts, i)) continue;

    const TableFile* pick = nullptr;
    size_t pick_overlap = 0;
    for (const auto& f : tree.levels[i]) {
      const FileMetaData& m = f->meta();
      if (opts.selection == Options::Selection::kOverlap || !opts.fade_enabled) {
        size_t overlap =
            OverlappingFileIds(tree, i + 1, m.min_sort_key, m.max_sort_key)
                .size();
        bool better =
            pick == nullptr || overlap < pick_overlap ||
            (overlap == pick_overlap &&
             TombstoneCount(m) > TombstoneCount(pick->meta()));
        if (better) {
          pick = f.get();
          pick_overlap = overlap;
        }
      } else {
        bool better = pick == nullptr;
        if (!better) {
          const FileMetaData& pm = pick->meta();
          if (m.invalidation_estimate != pm.invalidation_estimate) {
            better = m.invalidation_estimate > pm.invalidation_estimate;
          } else if (age_of(m) != age_of(pm)) {
            better = age_of(m) > age_of(pm);
          } else {
            better = TombstoneCount(m) > TombstoneCount(pm);
          }
        }
        if (better) pick = f.get();
      }
    }

    CompactionPlan plan;
    plan.trigger = CompactionPlan::Trigger::kSaturation;
    plan.mode = (opts.selection == Options::Selection::kDelete &&
                 opts.fade_enabled)
                    ? CompactionPlan::Mode::kSD
                    : CompactionPlan::Mode::kSO;
    plan.source_level = static_cast<uint32_t>(i);
    plan.target_level = static_cast<uint32_t>(i + 1);
    plan.file_id = pick->meta().file_id;
    plan.target_file_ids = OverlappingFileIds(
        tree, i + 1, pick->meta().min_sort_key, pick->meta().max_sort_key);
    return plan;
  }
  return std::nullopt;
}

}  // namespace lethe
