#include "tuner/cost_model.h"

#include <cmath>

namespace lethe {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double CostModelParams::Fpr() const {
  if (fpr_override >= 0) return fpr_override;
  return std::exp(-bits_per_entry * kLn2 * kLn2);
}

double CostModelParams::Levels() const {
  if (l > 0) return l;
  double ratio = n * entry_size / buffer_bytes;
  if (ratio <= 1.0 || t <= 1.0) return 1.0;
  return std::ceil(std::log(ratio) / std::log(t));
}

Status CostModelParams::Validate() const {
  if (n < 1 || b < 1 || t < 2 || p < 1) {
    return Status::InvalidArgument("need N, B >= 1, T >= 2, P >= 1");
  }
  double fractions[] = {f_epq, f_pq, f_srq, f_lrq, f_srd, f_i};
  double sum = 0;
  for (double f : fractions) {
    if (f < 0) return Status::InvalidArgument("negative workload fraction");
    sum += f;
  }
  if (sum > 1.0 + 1e-9) {
    return Status::InvalidArgument("workload fractions sum above 1");
  }
  return Status::OK();
}

Status WorkloadCost(const CostModelParams& params, double h, double* cost) {
  Status s = params.Validate();
  if (!s.ok()) return s;
  if (h < 1) return Status::InvalidArgument("h must be >= 1");

  double fpr = params.Fpr();
  double levels = params.Levels();
  double pages = params.n / params.b;
  double insert = (params.t <= 1.0 || pages <= 1.0)
                      ? 0.0
                      : std::log(pages) / std::log(params.t);

  *cost = params.f_epq * fpr * h +
          params.f_pq * (1.0 + fpr * h) +
          params.f_srq * levels * h +
          params.f_lrq * params.s * pages +
          params.f_srd * pages / h +
          params.f_i * insert;
  return Status::OK();
}

Status ComputeOptimalH(const CostModelParams& params, bool exact_mode,
                       OptimalH* out) {
  Status s = params.Validate();
  if (!s.ok()) return s;
  *out = OptimalH();
  if (params.f_srd <= 0) return Status::OK();

  double pages = params.n / params.b;
  double denom = (params.f_epq + params.f_pq) / params.f_srd * params.Fpr() +
                 params.f_srq / params.f_srd * params.Levels();
  double bound = denom <= 0 ? params.p : pages / denom;
  out->bound = bound;

  double clamped = std::min(bound, params.p);
  if (clamped < 1.0) clamped = 1.0;
  if (exact_mode) {
    out->h = static_cast<uint32_t>(std::floor(clamped));
  } else {
    uint32_t h = 1;
    while (2ull * h <= static_cast<uint64_t>(clamped)) h *= 2;
    out->h = h;
  }
  return Status::OK();
}

std::vector<MetricRow> ExpectedMetrics(const CostModelParams& params) {
  double t = params.t;
  double levels = params.Levels();
  double n = params.n;
  double lambda = params.lambda;
  double fpr = params.Fpr();
  double pages = n / params.b;
  double pb = params.p * params.b;

  std::vector<MetricRow> rows;
  rows.push_back({"space_amp_no_deletes", 1.0 / t, t});
  rows.push_back({"space_amp_with_deletes",
                  ((1.0 - lambda) * n + 1.0) / (lambda * t),
                  n / (1.0 - lambda)});
  rows.push_back({"write_amp", levels * t, levels});
  rows.push_back({"delete_persistence_latency",
                  std::pow(t, levels - 1.0) * pb / params.ingest_rate,
                  std::pow(t, levels) * pb / params.ingest_rate});
  rows.push_back({"zero_result_point_lookup", fpr, fpr * t});
  rows.push_back({"point_lookup", 1.0, 1.0 + fpr * t});
  rows.push_back({"short_range_lookup", levels, levels * t});
  rows.push_back({"long_range_lookup", params.s * pages,
                  t * params.s * pages});
  rows.push_back({"insert_update", levels * t / params.b,
                  levels / params.b});
  rows.push_back({"secondary_range_delete", pages, pages});
  return rows;
}

}  // namespace lethe
