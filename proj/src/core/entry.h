#ifndef LETHE_CORE_ENTRY_H_
#define LETHE_CORE_ENTRY_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "util/coding.h"
#include "util/status.h"

namespace lethe {

enum class EntryKind : uint8_t {
  kPut = 0,
  kPointTombstone = 1,
  kRangeTombstone = 2,
};

// Point tombstones carry this sentinel as their delete key. It sorts them to
// the tail of a delete tile and keeps secondary range deletes (whose ranges
// are half-open below UINT64_MAX) from ever purging a tombstone before it has
// propagated.
constexpr uint64_t kTombstoneDeleteKey = UINT64_MAX;

// Wire format: sort_key(8) delete_key(8) seqnum(8) kind(1) value_len(4) value.
constexpr uint32_t kEntryHeaderSize = 29;

struct Entry {
  uint64_t sort_key = 0;
  uint64_t delete_key = 0;
  uint64_t seqnum = 0;
  EntryKind kind = EntryKind::kPut;
  std::string value;  // empty for tombstones

  uint64_t EncodedSize() const { return kEntryHeaderSize + value.size(); }

  bool operator==(const Entry& o) const {
    return sort_key == o.sort_key && delete_key == o.delete_key &&
           seqnum == o.seqnum && kind == o.kind && value == o.value;
  }
};

// Range tombstone over sort keys [lo, hi). Stored in a per-file block,
// separate from the point entries.
struct RangeTombstone {
  uint64_t lo = 0;
  uint64_t hi = 0;
  uint64_t seqnum = 0;

  bool Covers(uint64_t sort_key) const { return lo <= sort_key && sort_key < hi; }
  // lo(8) hi(8) seqnum(8) + the same header footprint as a point entry.
  uint64_t EncodedSize() const { return kEntryHeaderSize + 16; }
};

inline void AppendEntry(std::string* dst, const Entry& e) {
  PutFixed64(dst, e.sort_key);
  PutFixed64(dst, e.delete_key);
  PutFixed64(dst, e.seqnum);
  dst->push_back(static_cast<char>(e.kind));
  PutFixed32(dst, static_cast<uint32_t>(e.value.size()));
  dst->append(e.value);
}

inline bool ReadEntry(ByteReader* r, Entry* e) {
  uint8_t kind;
  uint32_t len;
  std::string_view v;
  if (!r->GetFixed64(&e->sort_key) || !r->GetFixed64(&e->delete_key) ||
      !r->GetFixed64(&e->seqnum) || !r->GetByte(&kind) ||
      !r->GetFixed32(&len) || !r->GetBytes(len, &v)) {
    return false;
  }
  if (kind > 2) return false;
  e->kind = static_cast<EntryKind>(kind);
  e->value.assign(v);
  return true;
}

}  // namespace lethe

#endif  // LETHE_CORE_ENTRY_H_
