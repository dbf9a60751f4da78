#ifndef LETHE_CORE_OPTIONS_H_
#define LETHE_CORE_OPTIONS_H_

#include <cstdint>

namespace lethe {

// Engine configuration. Defaults follow the classical setup: 4KB pages,
// 1KB entries, 256 pages per file, size ratio 10, 1MB write buffer,
// 10 bits per entry, ingestion clock of 1024 ops per logical second.
struct Options {
  enum class Selection { kOverlap, kDelete };  // SO vs SD saturation mode

  uint32_t page_size_bytes = 4096;
  uint32_t entry_size_bytes = 1024;   // encoded size of one key-value entry
  uint32_t pages_per_file = 256;      // P
  uint32_t pages_per_delete_tile = 1; // h; must divide pages_per_file
  uint32_t size_ratio = 10;           // T
  uint64_t buffer_capacity_bytes = 1ull << 20;  // M
  double bits_per_entry = 10.0;       // Bloom filter budget (m/N)
  uint64_t ingest_per_second = 1024;  // I: ops per logical second

  bool fade_enabled = true;
  uint64_t delete_persistence_threshold_s = 3600;  // D_th, logical seconds
  Selection selection = Selection::kOverlap;

  bool wal_enabled = false;
  uint64_t wal_purge_interval_s = 600;
  bool sync_files = false;  // fsync data/manifest/WAL writes

  // Run compactions to quiescence inside the write path. Keeps runs
  // deterministic; turn off to drive maintenance explicitly.
  bool auto_compact = true;
};

}  // namespace lethe

#endif  // LETHE_CORE_OPTIONS_H_
