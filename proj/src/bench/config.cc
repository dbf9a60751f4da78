#include "bench/config.h"

#include <cstdint>
#include <fstream>

namespace lethe {

Status ParseConfigFile(const std::string& path,
                       std::map<std::string, std::string>* out) {
  std::ifstream in(path);
  if (!in) return Status::IOError("cannot open config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    size_t end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      return Status::InvalidArgument("config line " + std::to_string(lineno) +
                                     " is not key=value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      size_t b = s.find_first_not_of(" \t");
      size_t e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    (*out)[key] = value;
  }
  return Status::OK();
}

namespace {

Status ParseBool(const std::string& v, bool* out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    *out = true;
    return Status::OK();
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    *out = false;
    return Status::OK();
  }
  return Status::InvalidArgument("bad boolean: " + v);
}

Status ParseU64(const std::string& v, uint64_t* out) {
  try {
    size_t pos = 0;
    *out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
  } catch (const std::exception&) {
    return Status::InvalidArgument("bad integer: " + v);
  }
  return Status::OK();
}

}  // namespace

Status ApplyEngineConfig(const std::map<std::string, std::string>& cfg,
                         Options* opts) {
  Status s;
  uint64_t u;
  for (const auto& [key, value] : cfg) {
    if (key == "fade.enabled") {
      s = ParseBool(value, &opts->fade_enabled);
    } else if (key == "fade.d_th_s") {
      s = ParseU64(value, &opts->delete_persistence_threshold_s);
    } else if (key == "fade.selection") {
      if (value == "so") {
        opts->selection = Options::Selection::kOverlap;
      } else if (value == "sd") {
        opts->selection = Options::Selection::kDelete;
      } else {
        s = Status::InvalidArgument("fade.selection must be so or sd");
      }
    } else if (key == "wal.enabled") {
      s = ParseBool(value, &opts->wal_enabled);
    } else if (key == "wal.purge_interval_s") {
      s = ParseU64(value, &opts->wal_purge_interval_s);
    } else if (key == "layout.pages_per_tile") {
      if ((s = ParseU64(value, &u)).ok()) {
        opts->pages_per_delete_tile = static_cast<uint32_t>(u);
      }
    } else if (key == "layout.pages_per_file") {
      if ((s = ParseU64(value, &u)).ok()) {
        opts->pages_per_file = static_cast<uint32_t>(u);
      }
    } else if (key == "layout.page_size_bytes") {
      if ((s = ParseU64(value, &u)).ok()) {
        opts->page_size_bytes = static_cast<uint32_t>(u);
      }
    } else if (key == "layout.entry_size_bytes") {
      if ((s = ParseU64(value, &u)).ok()) {
        opts->entry_size_bytes = static_cast<uint32_t>(u);
      }
    } else if (key == "tree.size_ratio") {
      if ((s = ParseU64(value, &u)).ok()) {
        opts->size_ratio = static_cast<uint32_t>(u);
      }
    } else if (key == "tree.buffer_bytes") {
      s = ParseU64(value, &opts->buffer_capacity_bytes);
    } else if (key == "tree.bits_per_entry") {
      try {
        opts->bits_per_entry = std::stod(value);
      } catch (const std::exception&) {
        s = Status::InvalidArgument("bad float: " + value);
      }
    } else if (key == "clock.ingest_per_second") {
      s = ParseU64(value, &opts->ingest_per_second);
    } else if (key == "io.sync_files") {
      s = ParseBool(value, &opts->sync_files);
    } else if (key == "compaction.auto") {
      s = ParseBool(value, &opts->auto_compact);
    }
    if (!s.ok()) return s;
  }
  return Status::OK();
}

}  // namespace lethe
