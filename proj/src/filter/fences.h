#ifndef LETHE_FILTER_FENCES_H_
#define LETHE_FILTER_FENCES_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "util/status.h"

namespace lethe {

// One min sort key per delete tile, strictly increasing. Binary search gives
// the unique tile whose sort-key range may contain a key.
class SortKeyFences {
 public:
  void Add(uint64_t tile_min_sort_key) { minima_.push_back(tile_min_sort_key); }

  // Tile index, or nullopt when the key precedes the first tile.
  std::optional<size_t> LocateTile(uint64_t sort_key) const;

  size_t NumTiles() const { return minima_.size(); }
  uint64_t TileMin(size_t i) const { return minima_[i]; }
  const std::vector<uint64_t>& minima() const { return minima_; }

 private:
  std::vector<uint64_t> minima_;
};

// Per-tile delete-key fences: the min delete key of each page, non-decreasing,
// plus the tile's max delete key so the last page can be dropped without a
// read like any other.
class DeleteKeyFences {
 public:
  DeleteKeyFences() = default;
  DeleteKeyFences(std::vector<uint64_t> page_minima, uint64_t tile_max)
      : page_minima_(std::move(page_minima)), tile_max_(tile_max) {}

  // Pages whose whole delete-key span sits inside [d_lo, d_hi). Page p's span
  // is [min_p, min_{p+1}); the last page is closed by tile_max, inclusively,
  // so it qualifies only when tile_max < d_hi.
  Status FullDropCandidates(uint64_t d_lo, uint64_t d_hi,
                            std::vector<size_t>* out) const;

  size_t NumPages() const { return page_minima_.size(); }
  uint64_t PageMin(size_t i) const { return page_minima_[i]; }
  uint64_t tile_max() const { return tile_max_; }
  const std::vector<uint64_t>& page_minima() const { return page_minima_; }

 private:
  std::vector<uint64_t> page_minima_;
  uint64_t tile_max_ = 0;
};

}  // namespace lethe

#endif  // LETHE_FILTER_FENCES_H_
