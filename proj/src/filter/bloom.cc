#include "filter/bloom.h"

#include <cmath>

#include "util/coding.h"
#include "util/hash.h"

namespace lethe {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

PageBloomFilter PageBloomFilter::Build(std::span<const uint64_t> sort_keys,
                                       double bits_per_entry,
                                       uint64_t* hash_counter) {
  PageBloomFilter f;
  f.probes_ = static_cast<uint32_t>(std::lround(bits_per_entry * kLn2));
  if (f.probes_ < 1) f.probes_ = 1;
  if (sort_keys.empty()) {
    return f;  // zero bits; every query is negative
  }
  f.bits_ = static_cast<uint32_t>(
      std::ceil(bits_per_entry * static_cast<double>(sort_keys.size())));
  if (f.bits_ < 8) f.bits_ = 8;
  f.data_.assign((f.bits_ + 7) / 8, 0);
  for (uint64_t key : sort_keys) {
    uint64_t digest = Hash64(key);
    if (hash_counter != nullptr) (*hash_counter)++;
    uint64_t h1 = digest;
    uint64_t h2 = (digest >> 32) | 1;
    for (uint32_t i = 0; i < f.probes_; i++) {
      uint64_t bit = (h1 + i * h2) % f.bits_;
      f.data_[bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
    }
  }
  return f;
}

bool PageBloomFilter::MayContain(uint64_t sort_key,
                                 uint64_t* hash_counter) const {
  if (bits_ == 0) return false;
  uint64_t digest = Hash64(sort_key);
  if (hash_counter != nullptr) (*hash_counter)++;
  uint64_t h1 = digest;
  uint64_t h2 = (digest >> 32) | 1;
  for (uint32_t i = 0; i < probes_; i++) {
    uint64_t bit = (h1 + i * h2) % bits_;
    if ((data_[bit / 8] & (1u << (bit % 8))) == 0) return false;
  }
  return true;
}

void PageBloomFilter::AppendTo(std::string* dst) const {
  PutFixed32(dst, bits_);
  PutFixed32(dst, probes_);
  dst->append(reinterpret_cast<const char*>(data_.data()), data_.size());
}

Status PageBloomFilter::ReadFrom(ByteReader* r, PageBloomFilter* out) {
  PageBloomFilter f;
  if (!r->GetFixed32(&f.bits_) || !r->GetFixed32(&f.probes_)) {
    return Status::Corruption("short bloom filter");
  }
  size_t nbytes = (f.bits_ + 7) / 8;
  std::string_view raw;
  if (!r->GetBytes(nbytes, &raw)) {
    return Status::Corruption("truncated bloom filter");
  }
  f.data_.assign(raw.begin(), raw.end());
  *out = std::move(f);
  return Status::OK();
}

}  // namespace lethe
