#ifndef LETHE_BENCH_DRIVER_H_
#define LETHE_BENCH_DRIVER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bench/model.h"
#include "bench/workload.h"
#include "core/metrics.h"
#include "core/options.h"
#include "db/db.h"
#include "util/status.h"

namespace lethe {

struct ExperimentConfig {
  std::string dir;
  Options options;
  WorkloadSpec workload;

  uint32_t num_snapshots = 8;

  // Point lookups issued against live keys at every snapshot to sample the
  // per-query page cost. Probe counters are rolled back afterwards so they
  // do not leak into the cumulative I/O series.
  uint64_t probe_queries_per_snapshot = 0;

  // Random Get spot checks against the in-memory model at every snapshot.
  uint64_t verify_samples_per_snapshot = 0;

  // Logical seconds skipped after the load, followed by maintenance, so
  // time-triggered compactions can fire before the final snapshot.
  uint64_t settle_seconds = 0;
};

struct IntervalStats {
  uint64_t ops_done = 0;
  uint64_t logical_time_s = 0;
  Metrics metrics;  // cumulative counters at snapshot time
  double write_amp = 0.0;
  double space_amp = 0.0;  // -1 when the tree holds no live data
  uint64_t live_tombstones = 0;
  uint64_t expired_tombstones = 0;  // older than the persistence threshold
  uint64_t num_files = 0;
  uint64_t metadata_bytes = 0;
  double probe_pages_per_query = 0.0;
  double probe_filter_probes_per_query = 0.0;
};

struct ExperimentResult {
  std::vector<IntervalStats> intervals;
  Metrics final_metrics;
  uint64_t model_live_count = 0;
  uint64_t verify_mismatches = 0;
};

// Applies one workload op to the engine and mirrors it into the model.
Status ApplyOp(DB* db, ModelOracle* model, const WorkloadOp& op,
               const std::string& value);

// Runs the workload against a fresh engine in cfg.dir, snapshotting the
// counters num_snapshots times at even op intervals. The directory must be
// empty or absent. The open handle is returned through db_out when non-null
// so callers can keep measuring; otherwise the engine is closed.
Status RunExperiment(const ExperimentConfig& cfg, ExperimentResult* result,
                     std::unique_ptr<DB>* db_out = nullptr,
                     ModelOracle* model_out = nullptr);

// Value payload sized so the encoded entry matches opts.entry_size_bytes.
std::string MakeValue(const Options& opts);

// One row per interval, '#'-prefixed schema header, version tag first.
Status WriteCsv(const ExperimentResult& result, const std::string& path);

}  // namespace lethe

#endif  // LETHE_BENCH_DRIVER_H_
