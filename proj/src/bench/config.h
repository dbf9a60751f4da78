#ifndef LETHE_BENCH_CONFIG_H_
#define LETHE_BENCH_CONFIG_H_

#include <map>
#include <string>

#include "core/options.h"
#include "util/status.h"

namespace lethe {

// Line-oriented key=value files; '#' starts a comment, blank lines ignored.
Status ParseConfigFile(const std::string& path,
                       std::map<std::string, std::string>* out);

// Applies engine keys (fade.*, wal.*, layout and tree geometry) to opts.
// Unknown keys are left for the caller; malformed values fail.
Status ApplyEngineConfig(const std::map<std::string, std::string>& cfg,
                         Options* opts);

}  // namespace lethe

#endif  // LETHE_BENCH_CONFIG_H_
