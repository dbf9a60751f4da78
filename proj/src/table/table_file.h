#ifndef LETHE_TABLE_TABLE_FILE_H_
#define LETHE_TABLE_TABLE_FILE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/entry.h"
#include "core/histogram.h"
#include "core/metrics.h"
#include "core/options.h"
#include "filter/bloom.h"
#include "filter/fences.h"
#include "util/status.h"

namespace lethe {

// Metadata for one delete tile: h consecutive page slots sorted on the
// delete key, covering a contiguous sort-key chunk of the file.
struct TileMeta {
  uint32_t first_page = 0;
  uint32_t num_pages = 0;
  uint64_t min_sort_key = 0;
  std::vector<uint64_t> page_min_delete_keys;
  uint64_t tile_max_delete_key = 0;
  std::vector<uint8_t> live;  // one flag per page slot

  DeleteKeyFences Fences() const {
    return DeleteKeyFences(page_min_delete_keys, tile_max_delete_key);
  }
  uint32_t NumLivePages() const;
};

struct FileMetaData {
  uint64_t file_id = 0;
  uint32_t level = 0;
  uint64_t min_sort_key = 0;
  uint64_t max_sort_key = 0;
  uint64_t min_delete_key = UINT64_MAX;
  uint64_t max_delete_key = 0;
  uint64_t num_entries = 0;
  uint64_t entry_bytes = 0;          // encoded entry payload bytes
  uint64_t point_tombstones = 0;     // exact count
  std::vector<RangeTombstone> range_tombstones;
  std::optional<uint64_t> age_anchor_seqnum;  // oldest tombstone, if any
  double invalidation_estimate = 0.0;  // point tombstones + estimated
                                       // range-delete coverage
  uint64_t level_arrival_time = 0;   // logical seconds
  uint64_t ttl = 0;                  // logical seconds; 0 = no deadline
  KeyHistogram histogram;            // live puts only

  bool HasTombstones() const {
    return point_tombstones > 0 || !range_tombstones.empty();
  }
};

// One immutable on-disk file. Layout: [pages][range-tombstone block][footer]
// [footer_len u64][format version u32][magic u64]. Pages never move after
// build; secondary range deletes rewrite individual page slots and replace
// the footer in place.
class TableFile {
 public:
  ~TableFile();
  TableFile(const TableFile&) = delete;
  TableFile& operator=(const TableFile&) = delete;

  // Writes a new file. entries must be sorted ascending by sort_key with at
  // most one version per key (the caller merges); fails with UnsortedInput
  // otherwise. meta_in supplies identity and clock fields (file_id, level,
  // level_arrival_time, ttl); content fields are computed here.
  static Status Build(const std::string& path, const Options& opts,
                      const std::vector<Entry>& entries,
                      std::vector<RangeTombstone> range_tombstones,
                      FileMetaData meta_in, Metrics* metrics,
                      std::unique_ptr<TableFile>* out);

  static Status Open(const std::string& path, const Options& opts,
                     std::unique_ptr<TableFile>* out);

  // Point lookup inside this file. Consults fences and per-page filters;
  // reads at most the filter-positive live pages of one tile. Does not apply
  // range tombstones; the caller owns cross-file shadowing rules.
  Status Get(uint64_t sort_key, Entry* out, bool* found, LookupStats* stats,
             Metrics* metrics) const;

  Status ReadPage(uint32_t page_index, std::vector<Entry>* entries) const;

  // Emits the full live contents sorted by sort_key (merges the per-tile
  // delete-key interleaving back into key order).
  Status ReadAllSorted(std::vector<Entry>* out, uint64_t* pages_read) const;

  // Live entries of one tile, sorted by sort_key.
  Status ReadTileSorted(size_t tile_index, std::vector<Entry>* out,
                        uint64_t* pages_read) const;

  // Page-slot surgery for secondary range deletes. Callers must finish with
  // WriteFooter to publish the new metadata.
  Status RewritePage(uint32_t page_index, const std::vector<Entry>& entries);
  void MarkPageDropped(size_t tile_index, size_t slot);
  void ReplacePageFilter(uint32_t page_index, PageBloomFilter filter);
  Status WriteFooter();

  // Recomputes the delete-key aggregates that page drops can shrink.
  void RefreshDerivedMeta();

  const FileMetaData& meta() const { return meta_; }
  FileMetaData* mutable_meta() { return &meta_; }
  const std::vector<TileMeta>& tiles() const { return tiles_; }
  std::vector<TileMeta>* mutable_tiles() { return &tiles_; }
  const SortKeyFences& sort_fences() const { return sort_fences_; }
  const PageBloomFilter& filter(uint32_t page_index) const {
    return filters_[page_index];
  }
  uint32_t num_pages() const { return num_pages_; }
  uint64_t LiveEntryCount() const;
  uint64_t LivePageBytes() const;
  uint64_t MetadataBytes() const;  // fence overhead vs classic layout
  const std::string& path() const { return path_; }

  // Fixed entry capacity of one page at the configured entry size.
  static uint32_t EntriesPerPage(const Options& opts);

 private:
  TableFile() = default;

  Status PwriteAll(uint64_t offset, const char* data, size_t n);
  Status PreadAll(uint64_t offset, char* data, size_t n) const;
  void SerializeFooter(std::string* out) const;
  static Status ParseFooter(std::string_view footer, TableFile* f);

  std::string path_;
  int fd_ = -1;
  uint32_t page_size_ = 0;
  uint32_t num_pages_ = 0;
  uint64_t footer_offset_ = 0;  // end of page + tombstone-block region
  bool sync_ = false;

  FileMetaData meta_;
  std::vector<TileMeta> tiles_;
  std::vector<PageBloomFilter> filters_;  // per page slot
  SortKeyFences sort_fences_;

  // Per-page entry counts kept in memory so live-entry accounting survives
  // partial page edits without rereads.
  std::vector<uint32_t> page_entry_counts_;
  std::vector<uint64_t> page_entry_bytes_;
};

}  // namespace lethe

#endif  // LETHE_TABLE_TABLE_FILE_H_
