#include "fade/ttl.h"

#include <cmath>

namespace lethe {

uint64_t TtlSchedule::CumulativeBudget(size_t level) const {
  uint64_t sum = 0;
  for (size_t i = 0; i < d.size() && i <= level; i++) sum += d[i];
  return sum;
}

Status ComputeTtls(uint64_t d_th, uint32_t size_ratio, uint32_t ttl_levels,
                   TtlSchedule* out) {
  if (d_th == 0 || size_ratio < 2 || ttl_levels < 1) {
    return Status::InvalidArgument("ttl schedule needs D_th > 0, T >= 2, K >= 1");
  }
  out->d_th = d_th;
  out->size_ratio = size_ratio;
  out->d.assign(ttl_levels, 0);

  double t = static_cast<double>(size_ratio);
  double d0 = static_cast<double>(d_th) * (t - 1.0) /
              (std::pow(t, static_cast<double>(ttl_levels)) - 1.0);
  uint64_t sum = 0;
  for (uint32_t i = 0; i + 1 < ttl_levels; i++) {
    uint64_t di = static_cast<uint64_t>(std::llround(d0 * std::pow(t, i)));
    if (di == 0) di = 1;
    out->d[i] = di;
    sum += di;
  }
  out->d[ttl_levels - 1] = d_th > sum ? d_th - sum : 1;
  return Status::OK();
}

}  // namespace lethe
