#ifndef LETHE_CORE_METRICS_H_
#define LETHE_CORE_METRICS_H_

#include <cstdint>

namespace lethe {

// Engine-wide monotone counters. Query-path page reads are separated from
// compaction reads so per-query cost and the CPU/I-O trade-off can be
// reported on counters rather than wall-clock time.
struct Metrics {
  // Write path
  uint64_t flushes = 0;
  uint64_t compactions = 0;        // rewriting merges
  uint64_t trivial_moves = 0;      // manifest-only relinks
  uint64_t bytes_ingested = 0;     // entry bytes at first flush
  uint64_t bytes_written = 0;      // entry bytes in every file write
  uint64_t bytes_compacted = 0;    // entry bytes read by compactions
  uint64_t pages_written = 0;

  // Read path
  uint64_t pages_read = 0;             // query-driven page reads
  uint64_t compaction_pages_read = 0;
  uint64_t filter_probes = 0;
  uint64_t hash_computations = 0;      // one per digest

  // Secondary range deletes
  uint64_t full_page_drops = 0;
  uint64_t partial_page_edits = 0;
  uint64_t srd_pages_read = 0;

  // Ingest
  uint64_t puts = 0;
  uint64_t point_deletes = 0;
  uint64_t blind_deletes_suppressed = 0;
  uint64_t range_deletes = 0;

  // (total written - ingested) / ingested; 0 before any flush.
  double WriteAmplification() const {
    if (bytes_ingested == 0) return 0.0;
    return static_cast<double>(bytes_written - bytes_ingested) /
           static_cast<double>(bytes_ingested);
  }

  uint64_t TotalPageIO() const {
    return pages_read + compaction_pages_read + srd_pages_read + pages_written;
  }
};

// Per-lookup statistics.
struct LookupStats {
  uint64_t filter_probes = 0;
  uint64_t hash_computations = 0;
  uint64_t pages_read = 0;
  uint32_t levels_touched = 0;
  bool found = false;
};

}  // namespace lethe

#endif  // LETHE_CORE_METRICS_H_
