// lethekv: workload driver and inspection tool for the lethe engine.
//
//   lethekv load     bulk-load puts into a database directory
//   lethekv run      run a mixed workload, emit a CSV metrics series
//   lethekv snapshot print per-file state of an existing database
//   lethekv tune     closed-form delete-tile size recommendation
//   lethekv srd      issue a secondary range delete, print counters
//   lethekv get      point lookup
//   lethekv scan     range scan on the sort key
//   lethekv report   space amp, metadata sizes, analytical reference table
//
// The database directory comes from --dir or the LETHEKV_DIR env var.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "bench/config.h"
#include "bench/driver.h"
#include "core/options.h"
#include "db/db.h"
#include "tuner/cost_model.h"
#include "util/status.h"

namespace {

using lethe::DB;
using lethe::Options;
using lethe::Status;

int Fail(const Status& s) {
  std::fprintf(stderr, "error: %s\n", s.ToString().c_str());
  return 1;
}

std::string DefaultDir() {
  const char* env = std::getenv("LETHEKV_DIR");
  return env ? env : "";
}

Status LoadOptions(const std::string& config_path, Options* opts) {
  if (config_path.empty()) return Status::OK();
  std::map<std::string, std::string> cfg;
  Status s = lethe::ParseConfigFile(config_path, &cfg);
  if (!s.ok()) return s;
  return lethe::ApplyEngineConfig(cfg, opts);
}

// Desk-scale geometry shared by the experiment subcommands.
void ApplyDeskProfile(Options* opts) {
  opts->entry_size_bytes = 256;
  opts->buffer_capacity_bytes = 64 << 10;
  opts->size_ratio = 4;
  opts->pages_per_file = 16;
}

void ApplyFullProfile(Options* opts) {
  opts->entry_size_bytes = 1024;
  opts->buffer_capacity_bytes = 1 << 20;
  opts->size_ratio = 10;
  opts->pages_per_file = 256;
}

Status OpenDb(const std::string& dir, const std::string& config_path,
              std::unique_ptr<DB>* db) {
  if (dir.empty()) {
    return Status::InvalidArgument("no database directory (--dir/LETHEKV_DIR)");
  }
  Options opts;
  Status s = LoadOptions(config_path, &opts);
  if (!s.ok()) return s;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return Status::IOError("mkdir " + dir + ": " + ec.message());
  return DB::Open(dir, opts, db);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lethekv workload driver"};
  app.require_subcommand(1);

  std::string dir = DefaultDir();
  std::string config_path;
  app.add_option("--dir", dir, "database directory (env LETHEKV_DIR)");
  app.add_option("--config", config_path, "key=value engine config file");

  // load
  auto* load = app.add_subcommand("load", "bulk-load random puts");
  uint64_t load_keys = 100000;
  uint64_t seed = 42;
  std::string correlation = "independent";
  bool desk = false, full_scale = false;
  load->add_option("--keys", load_keys, "number of puts");
  load->add_option("--seed", seed, "RNG seed");
  load->add_option("--correlation", correlation,
                   "delete-key correlation: independent|equal");
  load->add_flag("--desk", desk, "desk-scale geometry profile");
  load->add_flag("--full-scale", full_scale, "full-scale geometry profile");
  uint32_t load_tile_h = 1;
  load->add_option("--tile", load_tile_h, "pages per delete tile");

  // run
  auto* run = app.add_subcommand("run", "run a mixed workload, emit CSV");
  std::string mode = "lethe";
  std::string out_path;
  uint64_t run_ops = 100000;
  double delete_pct = 10.0;
  double d_th_pct = 25.0;
  uint32_t snapshots = 8;
  uint64_t probe_queries = 0;
  uint64_t verify = 0;
  uint32_t tile_h = 1;
  run->add_option("--mode", mode, "classic (fade off, h=1) or lethe");
  run->add_option("--ops", run_ops, "total operations");
  run->add_option("--deletes", delete_pct, "point-delete percentage");
  run->add_option("--d-th-pct", d_th_pct, "persistence threshold, % of run");
  run->add_option("--snapshots", snapshots, "metrics samples per run");
  run->add_option("--probe-queries", probe_queries,
                  "point lookups sampled per snapshot");
  run->add_option("--verify", verify, "model spot checks per snapshot");
  run->add_option("--tile", tile_h, "pages per delete tile (lethe mode)");
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--out", out_path, "CSV path (default stdout)");
  run->add_flag("--desk", desk, "desk-scale geometry profile");
  run->add_flag("--full-scale", full_scale, "full-scale geometry profile");
  bool no_settle = false;
  run->add_flag("--no-settle", no_settle,
                "skip the post-load drain to quiescence");

  // snapshot
  auto* snap = app.add_subcommand("snapshot", "per-file state of a database");

  // tune
  auto* tune = app.add_subcommand("tune", "delete-tile size recommendation");
  lethe::CostModelParams params;
  bool exact = false, grid = false;
  tune->add_option("--n", params.n, "total entries N");
  tune->add_option("--b", params.b, "entries per page B");
  tune->add_option("--p", params.p, "pages per file P");
  tune->add_option("--t", params.t, "size ratio T");
  tune->add_option("--l", params.l, "levels L (0 = derive)");
  tune->add_option("--bits-per-entry", params.bits_per_entry, "filter budget");
  tune->add_option("--fpr", params.fpr_override, "force false positive rate");
  tune->add_option("--s", params.s, "long range selectivity");
  tune->add_option("--f-epq", params.f_epq, "empty point query fraction");
  tune->add_option("--f-pq", params.f_pq, "point query fraction");
  tune->add_option("--f-srq", params.f_srq, "short range query fraction");
  tune->add_option("--f-lrq", params.f_lrq, "long range query fraction");
  tune->add_option("--f-srd", params.f_srd, "secondary range delete fraction");
  tune->add_option("--f-i", params.f_i, "insert fraction");
  tune->add_flag("--exact", exact, "floor the bound instead of power-of-two");
  tune->add_flag("--grid", grid, "also print h,cost CSV over powers of two");

  // srd
  auto* srd = app.add_subcommand("srd", "secondary range delete");
  uint64_t d_lo = 0, d_hi = 0;
  srd->add_option("--dlo", d_lo, "delete-key range start")->required();
  srd->add_option("--dhi", d_hi, "delete-key range end, exclusive")->required();

  // get
  auto* get = app.add_subcommand("get", "point lookup");
  uint64_t get_key = 0;
  get->add_option("key", get_key, "sort key")->required();

  // scan
  auto* scan = app.add_subcommand("scan", "range scan on the sort key");
  uint64_t scan_lo = 0, scan_hi = 0;
  scan->add_option("lo", scan_lo, "range start")->required();
  scan->add_option("hi", scan_hi, "range end, exclusive")->required();

  // report
  auto* report = app.add_subcommand("report", "summary metrics");
  bool report_metadata = false, report_model = false;
  report->add_flag("--metadata", report_metadata, "metadata overhead bytes");
  report->add_flag("--model", report_model,
                   "analytical leveling/tiering reference table");

  CLI11_PARSE(app, argc, argv);

  Status s;

  if (*tune) {
    lethe::OptimalH opt;
    s = lethe::ComputeOptimalH(params, exact, &opt);
    if (!s.ok()) return Fail(s);
    std::printf("bound=%.4f\n", opt.bound);
    std::printf("h=%u\n", opt.h);
    if (grid) {
      std::printf("h,cost\n");
      for (double h = 1; h <= params.p; h *= 2) {
        double cost = 0;
        s = lethe::WorkloadCost(params, h, &cost);
        if (!s.ok()) return Fail(s);
        std::printf("%.0f,%.8f\n", h, cost);
      }
    }
    return 0;
  }

  if (*load) {
    Options opts;
    if (desk) ApplyDeskProfile(&opts);
    if (full_scale) ApplyFullProfile(&opts);
    opts.pages_per_delete_tile = load_tile_h;
    s = LoadOptions(config_path, &opts);
    if (!s.ok()) return Fail(s);
    if (dir.empty()) return Fail(Status::InvalidArgument("no --dir"));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::unique_ptr<DB> db;
    s = DB::Open(dir, opts, &db);
    if (!s.ok()) return Fail(s);

    lethe::WorkloadSpec spec;
    spec.total_ops = load_keys;
    spec.frac_update = 1.0;
    spec.frac_point_lookup = 0.0;
    spec.seed = seed;
    spec.correlation = correlation == "equal"
                           ? lethe::WorkloadSpec::Correlation::kEqual
                           : lethe::WorkloadSpec::Correlation::kIndependent;
    lethe::WorkloadGenerator gen(spec);
    const std::string value = lethe::MakeValue(opts);
    lethe::WorkloadOp op;
    while (gen.Next(&op)) {
      s = lethe::ApplyOp(db.get(), nullptr, op, value);
      if (!s.ok()) return Fail(s);
    }
    s = db->Close();
    if (!s.ok()) return Fail(s);
    std::printf("loaded %" PRIu64 " puts into %s\n", load_keys, dir.c_str());
    return 0;
  }

  if (*run) {
    lethe::ExperimentConfig cfg;
    cfg.dir = dir;
    if (desk) ApplyDeskProfile(&cfg.options);
    if (full_scale) ApplyFullProfile(&cfg.options);
    s = LoadOptions(config_path, &cfg.options);
    if (!s.ok()) return Fail(s);
    if (dir.empty()) return Fail(Status::InvalidArgument("no --dir"));
    if (mode == "classic") {
      cfg.options.fade_enabled = false;
      cfg.options.pages_per_delete_tile = 1;
    } else if (mode == "lethe") {
      cfg.options.fade_enabled = true;
      cfg.options.pages_per_delete_tile = tile_h;
    } else {
      return Fail(Status::InvalidArgument("mode must be classic or lethe"));
    }

    cfg.workload.total_ops = run_ops;
    double del = delete_pct / 100.0;
    cfg.workload.frac_point_delete = del;
    cfg.workload.frac_update = 1.0 - del - 0.25;
    cfg.workload.frac_point_lookup = 0.25;
    cfg.workload.seed = seed;
    cfg.num_snapshots = snapshots;
    cfg.probe_queries_per_snapshot = probe_queries;
    cfg.verify_samples_per_snapshot = verify;

    // Map the threshold percentage through the logical clock: run duration
    // in seconds is total_ops / ingest_per_second.
    double run_s = static_cast<double>(run_ops) /
                   static_cast<double>(cfg.options.ingest_per_second);
    cfg.options.delete_persistence_threshold_s =
        static_cast<uint64_t>(run_s * d_th_pct / 100.0) + 1;
    cfg.settle_seconds =
        no_settle ? 0 : cfg.options.delete_persistence_threshold_s;

    lethe::ExperimentResult result;
    s = lethe::RunExperiment(cfg, &result);
    if (!s.ok()) return Fail(s);
    if (out_path.empty()) out_path = "/dev/stdout";
    s = lethe::WriteCsv(result, out_path);
    if (!s.ok()) return Fail(s);
    if (result.verify_mismatches > 0) {
      std::fprintf(stderr, "verify mismatches: %" PRIu64 "\n",
                   result.verify_mismatches);
      return 1;
    }
    return 0;
  }

  // Remaining subcommands operate on an existing database.
  std::unique_ptr<DB> db;
  s = OpenDb(dir, config_path, &db);
  if (!s.ok()) return Fail(s);

  if (*snap) {
    std::vector<lethe::FileSnapshotRow> rows;
    s = db->Snapshot(&rows);
    if (!s.ok()) return Fail(s);
    std::printf("file_id,level,entries,bytes,point_tombstones,"
                "range_tombstones,b,age_s,ttl_s,residence_s\n");
    for (const auto& r : rows) {
      std::printf("%" PRIu64 ",%u,%" PRIu64 ",%" PRIu64 ",%" PRIu64
                  ",%" PRIu64 ",%.4f,%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n",
                  r.file_id, r.level, r.num_entries, r.entry_bytes,
                  r.point_tombstones, r.range_tombstones, r.b, r.a, r.ttl,
                  r.residence);
    }
  } else if (*srd) {
    lethe::SecondaryDeleteStats stats;
    s = db->SecondaryRangeDelete(d_lo, d_hi, &stats);
    if (!s.ok()) return Fail(s);
    std::printf("full_drops,partial_edits,pages_read,buffer_removed,"
                "tombstones_converted\n");
    std::printf("%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                "\n",
                stats.full_drops, stats.partial_edits, stats.pages_read,
                stats.buffer_removed, stats.tombstones_converted);
  } else if (*get) {
    std::string value;
    s = db->Get(get_key, &value);
    if (s.IsNotFound()) {
      std::printf("not found\n");
    } else if (!s.ok()) {
      return Fail(s);
    } else {
      std::printf("%s\n", value.c_str());
    }
  } else if (*scan) {
    std::vector<lethe::Entry> out;
    s = db->RangeScan(scan_lo, scan_hi, &out);
    if (!s.ok()) return Fail(s);
    for (const auto& e : out) {
      std::printf("%" PRIu64 ",%" PRIu64 ",%s\n", e.sort_key, e.delete_key,
                  e.value.c_str());
    }
  } else if (*report) {
    if (report_model) {
      std::printf("metric,leveling,tiering\n");
      for (const auto& row : lethe::ExpectedMetrics(params)) {
        std::printf("%s,%.6g,%.6g\n", row.name.c_str(), row.leveling,
                    row.tiering);
      }
    } else {
      double ratio = 0;
      s = db->ComputeSpaceAmp(&ratio);
      if (s.IsEmptyTree()) {
        ratio = 0;
      } else if (!s.ok()) {
        return Fail(s);
      }
      std::printf("space_amp=%.6f\n", ratio);
      std::printf("live_tombstones=%" PRIu64 "\n", db->LiveTombstoneCount());
      std::printf("write_amp=%.6f\n", db->metrics().WriteAmplification());
      std::printf("metadata_bytes=%" PRIu64 "\n", db->MetadataOverheadBytes());
      if (report_metadata) {
        uint64_t tiles = 0;
        for (const auto& level : db->tree().levels) {
          for (const auto& f : level) tiles += f->tiles().size();
        }
        std::printf("delete_tiles=%" PRIu64 "\n", tiles);
      }
    }
  }

  s = db->Close();
  if (!s.ok()) return Fail(s);
  return 0;
}
