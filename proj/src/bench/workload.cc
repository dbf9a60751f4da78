#include "bench/workload.h"

#include <algorithm>
#include <cmath>

namespace lethe {

Status WorkloadSpec::Validate() const {
  double fractions[] = {frac_update,       frac_point_lookup,
                        frac_empty_lookup, frac_short_range,
                        frac_long_range,   frac_point_delete,
                        frac_range_delete, frac_secondary_delete};
  double sum = 0;
  for (double f : fractions) {
    if (f < 0) return Status::InvalidArgument("negative workload fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    return Status::InvalidArgument("workload fractions must sum to 1");
  }
  if (key_domain == 0 || total_ops == 0) {
    return Status::InvalidArgument("empty workload");
  }
  return Status::OK();
}

WorkloadGenerator::WorkloadGenerator(const WorkloadSpec& spec)
    : spec_(spec), rng_(spec.seed) {}

uint64_t WorkloadGenerator::UniformKey() {
  return std::uniform_int_distribution<uint64_t>(0, spec_.key_domain - 1)(rng_);
}

uint64_t WorkloadGenerator::PickInsertedKey() {
  std::uniform_int_distribution<size_t> d(0, inserted_.size() - 1);
  return inserted_[d(rng_)];
}

void WorkloadGenerator::RemoveInsertedKey(uint64_t key) {
  auto it = inserted_pos_.find(key);
  if (it == inserted_pos_.end()) return;
  size_t pos = it->second;
  uint64_t last = inserted_.back();
  inserted_[pos] = last;
  inserted_pos_[last] = pos;
  inserted_.pop_back();
  inserted_pos_.erase(it);
}

bool WorkloadGenerator::Next(WorkloadOp* op) {
  if (emitted_ >= spec_.total_ops) return false;
  emitted_++;

  double span = static_cast<double>(spec_.key_domain);
  auto range_len = [&](double sel) {
    uint64_t len = static_cast<uint64_t>(std::llround(sel * span));
    return len == 0 ? uint64_t{1} : len;
  };

  double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  double acc = spec_.frac_update;
  // Reads and deletes need existing keys; fall back to inserts while the
  // tree is empty so the stream stays full length.
  bool have_keys = !inserted_.empty();

  if (roll < acc || !have_keys) {
    op->type = WorkloadOp::Type::kPut;
    op->key = UniformKey();
    op->delete_key = spec_.correlation == WorkloadSpec::Correlation::kEqual
                         ? op->key
                         : UniformKey();
    if (inserted_pos_.emplace(op->key, inserted_.size()).second) {
      inserted_.push_back(op->key);
    }
    delete_keys_[op->key] = op->delete_key;
    return true;
  }
  if (roll < (acc += spec_.frac_point_lookup)) {
    op->type = WorkloadOp::Type::kPointLookup;
    op->key = PickInsertedKey();
    return true;
  }
  if (roll < (acc += spec_.frac_empty_lookup)) {
    op->type = WorkloadOp::Type::kEmptyLookup;
    // Outside the insert domain, so the lookup is guaranteed zero-result.
    op->key = spec_.key_domain + UniformKey();
    return true;
  }
  if (roll < (acc += spec_.frac_short_range)) {
    op->type = WorkloadOp::Type::kShortRange;
    op->key = UniformKey();
    op->key2 = op->key + range_len(spec_.short_range_selectivity);
    return true;
  }
  if (roll < (acc += spec_.frac_long_range)) {
    op->type = WorkloadOp::Type::kLongRange;
    op->key = UniformKey();
    op->key2 = op->key + range_len(spec_.long_range_selectivity);
    return true;
  }
  if (roll < (acc += spec_.frac_point_delete)) {
    op->type = WorkloadOp::Type::kPointDelete;
    op->key = PickInsertedKey();
    RemoveInsertedKey(op->key);
    return true;
  }
  if (roll < (acc += spec_.frac_range_delete)) {
    op->type = WorkloadOp::Type::kRangeDelete;
    op->key = UniformKey();
    op->key2 = op->key + range_len(spec_.range_delete_selectivity);
    for (uint64_t k : std::vector<uint64_t>(inserted_)) {
      if (k >= op->key && k < op->key2) RemoveInsertedKey(k);
    }
    return true;
  }
  op->type = WorkloadOp::Type::kSecondaryDelete;
  op->key = UniformKey();
  op->key2 = op->key + range_len(spec_.secondary_selectivity);
  for (uint64_t k : std::vector<uint64_t>(inserted_)) {
    auto it = delete_keys_.find(k);
    if (it != delete_keys_.end() && it->second >= op->key &&
        it->second < op->key2) {
      RemoveInsertedKey(k);
    }
  }
  return true;
}

Status WorkloadGenerator::GenerateAll(std::vector<WorkloadOp>* out) {
  Status s = spec_.Validate();
  if (!s.ok()) return s;
  out->clear();
  out->reserve(spec_.total_ops);
  WorkloadOp op;
  while (Next(&op)) out->push_back(op);
  return Status::OK();
}

}  // namespace lethe
