#ifndef LETHE_WAL_WAL_H_
#define LETHE_WAL_WAL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/entry.h"
#include "util/status.h"

namespace lethe {

// Write-ahead log as a set of append-only segments (wal_<id>.log). Records
// are length-prefixed, CRC-protected Entry encodings; range deletes travel
// as RangeTombstone-kind entries whose value holds the [lo, hi) pair.
//
// Purge keeps no segment older than the delete persistence threshold: an
// over-age segment has its not-yet-durable suffix copied to a fresh segment
// and is deleted, so tombstones cannot hide in old logs past their deadline.
class Wal {
 public:
  struct Segment {
    uint64_t id = 0;
    uint64_t creation_time = 0;  // logical seconds
    uint64_t min_seqnum = UINT64_MAX;
    uint64_t max_seqnum = 0;
    std::string path;
  };

  static Status Open(const std::string& dir, uint64_t now,
                     std::unique_ptr<Wal>* out);
  ~Wal();

  Status Append(const Entry& e);
  Status Sync();

  // Starts a new active segment; called after each flush so durable data
  // ages out of the log at segment granularity.
  Status Rotate(uint64_t now);

  // Deletes segments whose every record has seqnum <= durable_seqnum.
  Status DeleteObsolete(uint64_t durable_seqnum);

  // Rewrites segments older than max_age_s, carrying only records newer
  // than durable_seqnum forward. Returns how many segments were purged.
  Status Purge(uint64_t now, uint64_t max_age_s, uint64_t durable_seqnum,
               uint64_t* purged);

  // All records across live segments, ordered by seqnum.
  Status Replay(std::vector<Entry>* out) const;

  const std::vector<Segment>& segments() const { return segments_; }

  static Entry MakeRangeDeleteRecord(const RangeTombstone& rt);
  static bool ParseRangeDeleteRecord(const Entry& e, RangeTombstone* rt);

 private:
  Wal() = default;
  Status OpenSegment(uint64_t now);
  Status AppendTo(int fd, const Entry& e);
  static Status ReadSegment(const std::string& path, Segment* seg,
                            std::vector<Entry>* records);

  std::string dir_;
  std::vector<Segment> segments_;  // last one is active
  int active_fd_ = -1;
  uint64_t next_id_ = 1;
};

}  // namespace lethe

#endif  // LETHE_WAL_WAL_H_
