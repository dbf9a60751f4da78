#ifndef LETHE_TUNER_COST_MODEL_H_
#define LETHE_TUNER_COST_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "util/status.h"

namespace lethe {

// Analytical model inputs. Workload fractions describe the operation mix:
// empty point queries, point queries, short range queries, long range
// queries, secondary range deletes, and inserts.
struct CostModelParams {
  double n = 1e8;              // total entries N
  double b = 4;                // entries per page B
  double p = 256;              // pages per file P
  double t = 10;               // size ratio T
  double l = 0;                // levels L; 0 derives ceil(log_T(N*E/M))
  double bits_per_entry = 10;  // filter budget m/N
  double fpr_override = -1;    // >= 0 forces the false positive rate
  double s = 0.01;             // long-range-query selectivity
  double lambda = 0.1;         // tombstone size / entry size
  double entry_size = 1024;    // E bytes
  double buffer_bytes = 1048576.0;  // M bytes
  double ingest_rate = 1024;   // I entries per second
  double d_th = 3600;          // delete persistence threshold, seconds

  double f_epq = 0;
  double f_pq = 0;
  double f_srq = 0;
  double f_lrq = 0;
  double f_srd = 0;
  double f_i = 0;

  double Fpr() const;
  double Levels() const;
  Status Validate() const;
};

// Expected I/Os per operation for the mix at delete-tile size h. At h=1 this
// collapses to the classic-layout cost.
Status WorkloadCost(const CostModelParams& params, double h, double* cost);

struct OptimalH {
  double bound = 1.0;  // closed-form break-even tile size
  uint32_t h = 1;      // recommendation clamped to [1, P]
};

// Closed-form solve for the largest tile size that does not lose to the
// classic layout on this mix. By default the recommendation is the nearest
// power of two below the bound so it divides P; exact mode floors instead.
Status ComputeOptimalH(const CostModelParams& params, bool exact_mode,
                       OptimalH* out);

// Analytical reference points for the classic leveling/tiering columns,
// evaluated with asymptotic constants fixed at 1.
struct MetricRow {
  std::string name;
  double leveling = 0;
  double tiering = 0;
};

std::vector<MetricRow> ExpectedMetrics(const CostModelParams& params);

}  // namespace lethe

#endif  // LETHE_TUNER_COST_MODEL_H_
