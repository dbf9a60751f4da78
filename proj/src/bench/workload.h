#ifndef LETHE_BENCH_WORKLOAD_H_
#define LETHE_BENCH_WORKLOAD_H_

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "util/status.h"

namespace lethe {

// Operation mix in the style of YCSB-A plus deletes. Fractions must sum
// to 1; deletes are only issued against previously inserted keys.
struct WorkloadSpec {
  uint64_t total_ops = 100000;

  double frac_update = 0.5;
  double frac_point_lookup = 0.5;
  double frac_empty_lookup = 0.0;
  double frac_short_range = 0.0;
  double frac_long_range = 0.0;
  double frac_point_delete = 0.0;
  double frac_range_delete = 0.0;
  double frac_secondary_delete = 0.0;

  uint64_t key_domain = 1ull << 20;
  double range_delete_selectivity = 0.001;    // sort-key span fraction
  double secondary_selectivity = 0.0625;      // delete-key span fraction
  double short_range_selectivity = 0.0001;
  double long_range_selectivity = 0.01;

  enum class Correlation { kIndependent, kEqual };
  Correlation correlation = Correlation::kIndependent;
  uint64_t seed = 42;

  Status Validate() const;
};

struct WorkloadOp {
  enum class Type {
    kPut,
    kPointLookup,
    kEmptyLookup,
    kShortRange,
    kLongRange,
    kPointDelete,
    kRangeDelete,
    kSecondaryDelete,
  };
  Type type = Type::kPut;
  uint64_t key = 0;   // sort key, or range lo
  uint64_t key2 = 0;  // range hi (exclusive) for range ops
  uint64_t delete_key = 0;
};

// Deterministic generator: identical (spec, seed) yields an identical
// stream. Tracks the inserted key set so deletes and point lookups target
// keys that exist.
class WorkloadGenerator {
 public:
  explicit WorkloadGenerator(const WorkloadSpec& spec);

  bool Next(WorkloadOp* op);
  Status GenerateAll(std::vector<WorkloadOp>* out);

 private:
  uint64_t UniformKey();
  uint64_t PickInsertedKey();
  void RemoveInsertedKey(uint64_t key);

  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  uint64_t emitted_ = 0;
  std::vector<uint64_t> inserted_;
  std::unordered_map<uint64_t, size_t> inserted_pos_;
  std::unordered_map<uint64_t, uint64_t> delete_keys_;  // sort -> delete key
};

}  // namespace lethe

#endif  // LETHE_BENCH_WORKLOAD_H_
