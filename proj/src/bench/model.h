#ifndef LETHE_BENCH_MODEL_H_
#define LETHE_BENCH_MODEL_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lethe {

// Reference semantics for the engine: a plain last-writer-wins live set.
// Tombstones and layout are engine internals; the model tracks only what a
// reader should observe.
class ModelOracle {
 public:
  struct Row {
    uint64_t delete_key = 0;
    std::string value;
  };

  void Put(uint64_t sort_key, uint64_t delete_key, std::string value) {
    live_[sort_key] = Row{delete_key, std::move(value)};
  }

  void Delete(uint64_t sort_key) { live_.erase(sort_key); }

  void RangeDelete(uint64_t lo, uint64_t hi) {
    auto it = live_.lower_bound(lo);
    while (it != live_.end() && it->first < hi) it = live_.erase(it);
  }

  void SecondaryRangeDelete(uint64_t d_lo, uint64_t d_hi) {
    for (auto it = live_.begin(); it != live_.end();) {
      if (it->second.delete_key >= d_lo && it->second.delete_key < d_hi) {
        it = live_.erase(it);
      } else {
        ++it;
      }
    }
  }

  bool Get(uint64_t sort_key, std::string* value) const {
    auto it = live_.find(sort_key);
    if (it == live_.end()) return false;
    if (value) *value = it->second.value;
    return true;
  }

  // Live (sort_key, row) pairs with sort_key in [lo, hi), ascending.
  std::vector<std::pair<uint64_t, Row>> Scan(uint64_t lo, uint64_t hi) const {
    std::vector<std::pair<uint64_t, Row>> out;
    for (auto it = live_.lower_bound(lo); it != live_.end() && it->first < hi;
         ++it) {
      out.emplace_back(it->first, it->second);
    }
    return out;
  }

  // Live pairs with delete_key in [d_lo, d_hi), ordered by delete key then
  // sort key, matching the engine's secondary lookup order.
  std::vector<std::pair<uint64_t, Row>> SecondaryLookup(uint64_t d_lo,
                                                        uint64_t d_hi) const {
    std::vector<std::pair<uint64_t, Row>> out;
    for (const auto& [key, row] : live_) {
      if (row.delete_key >= d_lo && row.delete_key < d_hi) {
        out.emplace_back(key, row);
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second.delete_key != b.second.delete_key) {
        return a.second.delete_key < b.second.delete_key;
      }
      return a.first < b.first;
    });
    return out;
  }

  size_t LiveCount() const { return live_.size(); }

 private:
  std::map<uint64_t, Row> live_;
};

}  // namespace lethe

#endif  // LETHE_BENCH_MODEL_H_
