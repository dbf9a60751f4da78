#include "filter/fences.h"

#include <algorithm>

namespace lethe {

std::optional<size_t> SortKeyFences::LocateTile(uint64_t sort_key) const {
  auto it = std::upper_bound(minima_.begin(), minima_.end(), sort_key);
  if (it == minima_.begin()) return std::nullopt;
  return static_cast<size_t>(it - minima_.begin()) - 1;
}

Status DeleteKeyFences::FullDropCandidates(uint64_t d_lo, uint64_t d_hi,
                                           std::vector<size_t>* out) const {
  if (d_lo >= d_hi) {
    return Status::InvalidArgument("empty delete-key range");
  }
  out->clear();
  for (size_t p = 0; p < page_minima_.size(); p++) {
    if (page_minima_[p] < d_lo) continue;
    bool last = (p + 1 == page_minima_.size());
    if (last ? tile_max_ < d_hi : page_minima_[p + 1] <= d_hi) {
      out->push_back(p);
    }
  }
  return Status::OK();
}

}  // namespace lethe
