#ifndef LETHE_DB_DB_H_
#define LETHE_DB_DB_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/entry.h"
#include "core/metrics.h"
#include "core/options.h"
#include "db/version.h"
#include "fade/picker.h"
#include "fade/ttl.h"
#include "wal/wal.h"

namespace lethe {

enum class DeleteResult {
  kInserted,
  kSuppressedBlind,  // no filter admitted an older version anywhere on disk
};

struct SecondaryDeleteStats {
  uint64_t full_drops = 0;
  uint64_t partial_edits = 0;
  uint64_t pages_read = 0;
  uint64_t buffer_removed = 0;
  uint64_t tombstones_converted = 0;
};

struct FileSnapshotRow {
  uint64_t file_id = 0;
  uint32_t level = 0;  // 1-based for reporting
  uint64_t num_entries = 0;
  uint64_t entry_bytes = 0;
  uint64_t point_tombstones = 0;
  uint64_t range_tombstones = 0;
  double b = 0.0;
  uint64_t a = 0;          // oldest tombstone age, logical seconds
  uint64_t ttl = 0;
  uint64_t residence = 0;  // logical seconds at current level
};

// Single-process embedded LSM engine. Writes are serialized by the caller;
// reads work against the current tree version. The logical clock advances by
// one second per `ingest_per_second` write operations.
class DB {
 public:
  static Status Open(const std::string& dir, const Options& opts,
                     std::unique_ptr<DB>* out);
  ~DB();

  Status Put(uint64_t sort_key, uint64_t delete_key, std::string value);
  Status Delete(uint64_t sort_key, DeleteResult* result = nullptr);
  Status RangeDelete(uint64_t sort_lo, uint64_t sort_hi);

  Status Get(uint64_t sort_key, std::string* value,
             LookupStats* stats = nullptr);
  Status RangeScan(uint64_t sort_lo, uint64_t sort_hi,
                   std::vector<Entry>* out);

  // Physical purge of every entry with delete_key in [d_lo, d_hi).
  Status SecondaryRangeDelete(uint64_t d_lo, uint64_t d_hi,
                              SecondaryDeleteStats* stats = nullptr);
  Status SecondaryRangeLookup(uint64_t d_lo, uint64_t d_hi,
                              std::vector<Entry>* out);

  Status Flush();
  // Runs the compaction loop until no trigger fires.
  Status MaintainUntilQuiescent();
  Status PurgeWal(uint64_t* segments_purged = nullptr);
  Status Close();

  // Advances the logical clock without ingesting, for deadline tests.
  void SkipTime(uint64_t seconds);
  uint64_t Now() const;

  Status ComputeSpaceAmp(double* ratio);
  Status Snapshot(std::vector<FileSnapshotRow>* rows);

  // Diagnostics for harnesses. Tombstone ages derive from the seqnum-to-time
  // samples, so counts are exact at logical-second granularity.
  Status CountTombstonesOlderThan(uint64_t age_s, uint64_t* count);
  uint64_t LiveTombstoneCount() const;
  uint64_t SeqnumAge(uint64_t seqnum) const;

  const Metrics& metrics() const { return metrics_; }
  Metrics* mutable_metrics() { return &metrics_; }
  const Options& options() const { return opts_; }
  const TreeVersion& tree() const { return *current_; }
  const TtlSchedule& ttls() const { return ttls_; }
  uint64_t BufferEntryCount() const { return buffer_.size(); }
  uint64_t BufferBytes() const { return buffer_bytes_; }
  uint64_t TombstoneAge(const FileMetaData& m) const;
  uint64_t MetadataOverheadBytes() const;

 private:
  DB() = default;

  Status ReplayManifest();
  Status AppendManifestRecord(const std::string& payload);
  Status LogAddFile(uint32_t level, uint64_t file_id);
  Status LogRemoveFile(uint64_t file_id);
  Status LogMoveFile(uint64_t file_id, uint32_t to_level, uint64_t arrival);
  Status LogClockTick(uint64_t time, uint64_t seqnum);

  Status IngestTick();
  void NoteClockSample();
  Status WriteWal(const Entry& e);
  std::string TablePath(uint64_t file_id) const;

  // Merge shared by flush and compaction: newest-first inputs, last-writer
  // wins, range-tombstone shadowing, optional tombstone drop at last level.
  static void MergeEntries(std::vector<std::vector<Entry>> inputs,
                           const std::vector<RangeTombstone>& rts,
                           bool drop_tombstones, std::vector<Entry>* out);

  Status BuildLevelFiles(const std::vector<Entry>& entries,
                         std::vector<RangeTombstone> rts, uint32_t level,
                         std::vector<std::shared_ptr<TableFile>>* out);
  Status ExecuteCompaction(const CompactionPlan& plan);
  void InstallVersion(std::shared_ptr<TreeVersion> next);
  void RecomputeTtls();
  void RefreshInvalidationEstimates();
  bool DiskMayContain(uint64_t sort_key, uint32_t below_level);
  Status CheckOpen() const;

  Options opts_;
  std::string dir_;
  Metrics metrics_;
  bool open_ = false;

  // Write buffer: latest entry per sort key plus pending range tombstones.
  std::map<uint64_t, Entry> buffer_;
  std::vector<RangeTombstone> buffer_rts_;
  uint64_t buffer_bytes_ = 0;

  std::shared_ptr<TreeVersion> current_;
  TtlSchedule ttls_;
  std::unique_ptr<Wal> wal_;
  int manifest_fd_ = -1;

  uint64_t next_seqnum_ = 1;
  uint64_t next_file_id_ = 1;
  uint64_t durable_seqnum_ = 0;  // every seqnum <= this is in a table file
  uint64_t ops_ingested_ = 0;
  uint64_t clock_offset_s_ = 0;
  uint64_t last_wal_purge_time_ = 0;

  // Sparse seqnum-to-logical-time samples backing tombstone age queries.
  std::vector<std::pair<uint64_t, uint64_t>> time_ring_;  // (seqnum, time)
};

}  // namespace lethe

#endif  // LETHE_DB_DB_H_
