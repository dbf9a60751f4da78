#include "bench/driver.h"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <random>

#include "core/entry.h"

namespace lethe {

std::string MakeValue(const Options& opts) {
  size_t len = opts.entry_size_bytes > kEntryHeaderSize
                   ? opts.entry_size_bytes - kEntryHeaderSize
                   : 1;
  std::string v(len, 'x');
  for (size_t i = 0; i < len; i++) v[i] = static_cast<char>('a' + i % 23);
  return v;
}

Status ApplyOp(DB* db, ModelOracle* model, const WorkloadOp& op,
               const std::string& value) {
  Status s;
  switch (op.type) {
    case WorkloadOp::Type::kPut:
      s = db->Put(op.key, op.delete_key, value);
      if (s.ok() && model) model->Put(op.key, op.delete_key, value);
      return s;
    case WorkloadOp::Type::kPointLookup:
    case WorkloadOp::Type::kEmptyLookup: {
      std::string v;
      s = db->Get(op.key, &v);
      return s.IsNotFound() ? Status::OK() : s;
    }
    case WorkloadOp::Type::kShortRange:
    case WorkloadOp::Type::kLongRange: {
      std::vector<Entry> out;
      return db->RangeScan(op.key, op.key2, &out);
    }
    case WorkloadOp::Type::kPointDelete:
      s = db->Delete(op.key);
      if (s.ok() && model) model->Delete(op.key);
      return s;
    case WorkloadOp::Type::kRangeDelete:
      s = db->RangeDelete(op.key, op.key2);
      if (s.ok() && model) model->RangeDelete(op.key, op.key2);
      return s;
    case WorkloadOp::Type::kSecondaryDelete:
      s = db->SecondaryRangeDelete(op.key, op.key2);
      if (s.ok() && model) model->SecondaryRangeDelete(op.key, op.key2);
      return s;
  }
  return Status::InvalidArgument("unknown op");
}

namespace {

uint64_t CountFiles(const DB& db) {
  uint64_t n = 0;
  for (const auto& level : db.tree().levels) n += level.size();
  return n;
}

// Probes and verification run under a saved copy of the counters so the
// cumulative series reflects the workload alone.
Status ProbeQueries(DB* db, const ModelOracle& model, uint64_t count,
                    uint64_t seed, IntervalStats* out) {
  auto live = model.Scan(0, UINT64_MAX);
  if (live.empty() || count == 0) return Status::OK();
  Metrics saved = *db->mutable_metrics();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, live.size() - 1);
  uint64_t pages = 0, probes = 0;
  for (uint64_t i = 0; i < count; i++) {
    std::string v;
    LookupStats stats;
    Status s = db->Get(live[pick(rng)].first, &v, &stats);
    if (!s.ok()) return s;
    pages += stats.pages_read;
    probes += stats.filter_probes;
  }
  out->probe_pages_per_query = static_cast<double>(pages) / count;
  out->probe_filter_probes_per_query = static_cast<double>(probes) / count;
  *db->mutable_metrics() = saved;
  return Status::OK();
}

Status VerifySamples(DB* db, const ModelOracle& model, uint64_t count,
                     uint64_t key_domain, uint64_t seed,
                     uint64_t* mismatches) {
  Metrics saved = *db->mutable_metrics();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint64_t> pick(0, key_domain - 1);
  auto live = model.Scan(0, UINT64_MAX);
  for (uint64_t i = 0; i < count; i++) {
    // Alternate between uniform keys and known-live keys so both presence
    // and absence get exercised.
    uint64_t key;
    if (!live.empty() && (i & 1)) {
      key = live[pick(rng) % live.size()].first;
    } else {
      key = pick(rng);
    }
    std::string got, want;
    Status s = db->Get(key, &got);
    bool db_found = s.ok();
    if (!db_found && !s.IsNotFound()) return s;
    bool model_found = model.Get(key, &want);
    if (db_found != model_found || (db_found && got != want)) (*mismatches)++;
  }
  *db->mutable_metrics() = saved;
  return Status::OK();
}

Status TakeSnapshot(DB* db, const ModelOracle& model,
                    const ExperimentConfig& cfg, uint64_t ops_done,
                    uint64_t probe_seed, ExperimentResult* result) {
  IntervalStats stats;
  stats.ops_done = ops_done;
  stats.logical_time_s = db->Now();
  stats.metrics = db->metrics();
  stats.write_amp = stats.metrics.WriteAmplification();

  Metrics saved = *db->mutable_metrics();
  double ratio = 0;
  Status s = db->ComputeSpaceAmp(&ratio);
  if (s.ok()) {
    stats.space_amp = ratio;
  } else if (s.IsEmptyTree()) {
    stats.space_amp = -1;
  } else {
    return s;
  }
  *db->mutable_metrics() = saved;

  stats.live_tombstones = db->LiveTombstoneCount();
  s = db->CountTombstonesOlderThan(cfg.options.delete_persistence_threshold_s,
                                   &stats.expired_tombstones);
  if (!s.ok()) return s;
  stats.num_files = CountFiles(*db);
  stats.metadata_bytes = db->MetadataOverheadBytes();

  s = ProbeQueries(db, model, cfg.probe_queries_per_snapshot, probe_seed,
                   &stats);
  if (!s.ok()) return s;
  if (cfg.verify_samples_per_snapshot > 0) {
    s = VerifySamples(db, model, cfg.verify_samples_per_snapshot,
                      cfg.workload.key_domain, probe_seed ^ 0x5eedbeef,
                      &result->verify_mismatches);
    if (!s.ok()) return s;
  }
  result->intervals.push_back(std::move(stats));
  return Status::OK();
}

}  // namespace

Status RunExperiment(const ExperimentConfig& cfg, ExperimentResult* result,
                     std::unique_ptr<DB>* db_out, ModelOracle* model_out) {
  Status s = cfg.workload.Validate();
  if (!s.ok()) return s;
  if (cfg.num_snapshots == 0) {
    return Status::InvalidArgument("need at least one snapshot");
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.dir, ec);
  if (ec) return Status::IOError("mkdir " + cfg.dir + ": " + ec.message());

  std::unique_ptr<DB> db;
  s = DB::Open(cfg.dir, cfg.options, &db);
  if (!s.ok()) return s;

  ModelOracle model;
  WorkloadGenerator gen(cfg.workload);
  const std::string value = MakeValue(cfg.options);

  uint64_t interval = cfg.workload.total_ops / cfg.num_snapshots;
  if (interval == 0) interval = 1;

  WorkloadOp op;
  uint64_t done = 0;
  uint32_t snapshots = 0;
  while (gen.Next(&op)) {
    s = ApplyOp(db.get(), &model, op, value);
    if (!s.ok()) return s;
    done++;
    if (done % interval == 0 && snapshots + 1 < cfg.num_snapshots) {
      s = TakeSnapshot(db.get(), model, cfg, done, cfg.workload.seed + done,
                       result);
      if (!s.ok()) return s;
      snapshots++;
    }
  }

  if (cfg.settle_seconds > 0) {
    db->SkipTime(cfg.settle_seconds);
    s = db->MaintainUntilQuiescent();
    if (!s.ok()) return s;
  }

  s = TakeSnapshot(db.get(), model, cfg, done, cfg.workload.seed + done + 1,
                   result);
  if (!s.ok()) return s;

  result->final_metrics = db->metrics();
  result->model_live_count = model.LiveCount();

  if (model_out) *model_out = std::move(model);
  if (db_out) {
    *db_out = std::move(db);
    return Status::OK();
  }
  return db->Close();
}

Status WriteCsv(const ExperimentResult& result, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) return Status::IOError("cannot write " + path);
  std::fprintf(f, "# lethekv-csv-v1\n");
  std::fprintf(f,
               "ops,logical_time_s,flushes,compactions,trivial_moves,"
               "bytes_ingested,bytes_written,write_amp,pages_written,"
               "pages_read,compaction_pages_read,srd_pages_read,"
               "filter_probes,hash_computations,full_page_drops,"
               "partial_page_edits,space_amp,live_tombstones,"
               "expired_tombstones,num_files,metadata_bytes,"
               "probe_pages_per_query,probe_filter_probes_per_query\n");
  for (const IntervalStats& s : result.intervals) {
    const Metrics& m = s.metrics;
    std::fprintf(f,
                 "%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                 ",%" PRIu64 ",%" PRIu64 ",%.6f,%" PRIu64 ",%" PRIu64
                 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                 ",%" PRIu64 ",%.6f,%" PRIu64 ",%" PRIu64 ",%" PRIu64
                 ",%" PRIu64 ",%.4f,%.4f\n",
                 s.ops_done, s.logical_time_s, m.flushes, m.compactions,
                 m.trivial_moves, m.bytes_ingested, m.bytes_written,
                 s.write_amp, m.pages_written, m.pages_read,
                 m.compaction_pages_read, m.srd_pages_read, m.filter_probes,
                 m.hash_computations, m.full_page_drops, m.partial_page_edits,
                 s.space_amp, s.live_tombstones, s.expired_tombstones,
                 s.num_files, s.metadata_bytes, s.probe_pages_per_query,
                 s.probe_filter_probes_per_query);
  }
  std::fclose(f);
  return Status::OK();
}

}  // namespace lethe
