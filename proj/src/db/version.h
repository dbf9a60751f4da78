#ifndef LETHE_DB_VERSION_H_
#define LETHE_DB_VERSION_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "table/table_file.h"

namespace lethe {

// Immutable snapshot of the on-disk tree. levels[0] is disk Level 1; files
// within a level are sorted by min_sort_key with pairwise-disjoint ranges.
// Mutations build a new version (copy-on-write of the level vectors).
struct TreeVersion {
  uint64_t version_number = 0;
  std::vector<std::vector<std::shared_ptr<TableFile>>> levels;

  std::shared_ptr<TableFile> FindFile(uint64_t file_id) const {
    for (const auto& level : levels) {
      for (const auto& f : level) {
        if (f->meta().file_id == file_id) return f;
      }
    }
    return nullptr;
  }

  uint64_t LevelBytes(size_t level) const {
    uint64_t n = 0;
    if (level < levels.size()) {
      for (const auto& f : levels[level]) n += f->meta().entry_bytes;
    }
    return n;
  }

  size_t DeepestNonEmptyLevel() const {  // 0-based; SIZE_MAX when empty
    for (size_t i = levels.size(); i > 0; i--) {
      if (!levels[i - 1].empty()) return i - 1;
    }
    return SIZE_MAX;
  }
};

}  // namespace lethe

#endif  // LETHE_DB_VERSION_H_
