#include "db/db.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <unordered_map>
#include <unordered_set>

#include "util/coding.h"
#include "util/crc32.h"

namespace fs = std::filesystem;

namespace lethe {

namespace {

constexpr uint64_t kManifestMagic = 0x74666d656874656cull;  // "lethemft"

enum ManifestRecordType : uint8_t {
  kAddFile = 1,
  kRemoveFile = 2,
  kMoveFile = 3,
  kClockTick = 4,
  kSeqWatermark = 5,
};

Status PosixError(const std::string& context) {
  return Status::IOError(context + ": " + std::strerror(errno));
}

Status WriteAllFd(int fd, const char* data, size_t n) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      return PosixError("manifest write");
    }
    data += w;
    n -= static_cast<size_t>(w);
  }
  return Status::OK();
}

bool SortKeyLess(const Entry& a, const Entry& b) {
  return a.sort_key < b.sort_key;
}

}  // namespace

DB::~DB() {
  if (open_) Close();
  if (manifest_fd_ >= 0) ::close(manifest_fd_);
}

std::string DB::TablePath(uint64_t file_id) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f_%06llu.tbl",
                static_cast<unsigned long long>(file_id));
  return dir_ + "/" + buf;
}

Status DB::CheckOpen() const {
  if (!open_) return Status::InvalidArgument("db is closed");
  return Status::OK();
}

uint64_t DB::Now() const {
  return clock_offset_s_ + ops_ingested_ / opts_.ingest_per_second;
}

void DB::SkipTime(uint64_t seconds) { clock_offset_s_ += seconds; }

Status DB::Open(const std::string& dir, const Options& opts,
                std::unique_ptr<DB>* out) {
  if (opts.pages_per_delete_tile == 0 ||
      opts.pages_per_file % opts.pages_per_delete_tile != 0) {
    return Status::InvalidArgument("pages per tile must divide pages per file");
  }
  if (opts.entry_size_bytes < kEntryHeaderSize ||
      TableFile::EntriesPerPage(opts) == 0) {
    return Status::InvalidArgument("entry size incompatible with page size");
  }
  if (opts.size_ratio < 2 || opts.ingest_per_second == 0 ||
      opts.delete_persistence_threshold_s == 0) {
    return Status::InvalidArgument("bad engine parameters");
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return Status::IOError("mkdir " + dir + ": " + ec.message());

  auto db = std::unique_ptr<DB>(new DB());
  db->opts_ = opts;
  db->dir_ = dir;
  db->current_ = std::make_shared<TreeVersion>();

  Status s = db->ReplayManifest();
  if (!s.ok()) return s;
  db->RecomputeTtls();
  db->RefreshInvalidationEstimates();

  if (opts.wal_enabled) {
    s = Wal::Open(dir, db->Now(), &db->wal_);
    if (!s.ok()) return s;
    std::vector<Entry> records;
    s = db->wal_->Replay(&records);
    if (!s.ok()) return s;
    for (const Entry& e : records) {
      if (e.seqnum <= db->durable_seqnum_) continue;
      db->next_seqnum_ = std::max(db->next_seqnum_, e.seqnum + 1);
      RangeTombstone rt;
      if (Wal::ParseRangeDeleteRecord(e, &rt)) {
        db->buffer_rts_.push_back(rt);
        db->buffer_bytes_ += rt.EncodedSize();
        auto it = db->buffer_.lower_bound(rt.lo);
        while (it != db->buffer_.end() && it->first < rt.hi) {
          db->buffer_bytes_ -= it->second.EncodedSize();
          it = db->buffer_.erase(it);
        }
      } else {
        auto it = db->buffer_.find(e.sort_key);
        if (it != db->buffer_.end()) {
          db->buffer_bytes_ -= it->second.EncodedSize();
          it->second = e;
        } else {
          it = db->buffer_.emplace(e.sort_key, e).first;
        }
        db->buffer_bytes_ += e.EncodedSize();
      }
    }
  }

  db->last_wal_purge_time_ = db->Now();
  db->open_ = true;
  *out = std::move(db);
  return Status::OK();
}

Status DB::Close() {
  if (!open_) return Status::OK();
  Status s = Flush();
  open_ = false;
  if (manifest_fd_ >= 0) {
    ::close(manifest_fd_);
    manifest_fd_ = -1;
  }
  wal_.reset();
  return s;
}

// ---------------------------------------------------------------------------
// Manifest

Status DB::AppendManifestRecord(const std::string& payload) {
  std::string rec;
  PutFixed32(&rec, static_cast<uint32_t>(payload.size()));
  PutFixed32(&rec, crc32::Value(payload.data(), payload.size()));
  rec.append(payload);
  Status s = WriteAllFd(manifest_fd_, rec.data(), rec.size());
  if (!s.ok()) return s;
  if (opts_.sync_files && ::fsync(manifest_fd_) != 0) {
    return PosixError("fsync manifest");
  }
  return Status::OK();
}

Status DB::LogAddFile(uint32_t level, uint64_t file_id) {
  std::string p;
  p.push_back(static_cast<char>(kAddFile));
  PutFixed32(&p, level);
  PutFixed64(&p, file_id);
  return AppendManifestRecord(p);
}

Status DB::LogRemoveFile(uint64_t file_id) {
  std::string p;
  p.push_back(static_cast<char>(kRemoveFile));
  PutFixed64(&p, file_id);
  return AppendManifestRecord(p);
}

Status DB::LogMoveFile(uint64_t file_id, uint32_t to_level, uint64_t arrival) {
  std::string p;
  p.push_back(static_cast<char>(kMoveFile));
  PutFixed64(&p, file_id);
  PutFixed32(&p, to_level);
  PutFixed64(&p, arrival);
  return AppendManifestRecord(p);
}

Status DB::LogClockTick(uint64_t time, uint64_t seqnum) {
  std::string p;
  p.push_back(static_cast<char>(kClockTick));
  PutFixed64(&p, time);
  PutFixed64(&p, seqnum);
  return AppendManifestRecord(p);
}

Status DB::ReplayManifest() {
  std::string path = dir_ + "/MANIFEST";
  bool existed = fs::exists(path);

  if (existed) {
    std::string data;
    {
      std::error_code ec;
      uintmax_t size = fs::file_size(path, ec);
      if (ec) return Status::IOError("stat manifest: " + ec.message());
      data.resize(size);
      int fd = ::open(path.c_str(), O_RDONLY);
      if (fd < 0) return PosixError("open " + path);
      size_t off = 0;
      while (off < data.size()) {
        ssize_t r = ::read(fd, data.data() + off, data.size() - off);
        if (r < 0 && errno == EINTR) continue;
        if (r <= 0) {
          ::close(fd);
          return PosixError("read " + path);
        }
        off += static_cast<size_t>(r);
      }
      ::close(fd);
    }
    if (data.size() < 8 || DecodeFixed64(data.data()) != kManifestMagic) {
      return Status::Corruption("bad manifest header");
    }

    struct FileState {
      uint32_t level;
      std::optional<uint64_t> arrival;
    };
    std::map<uint64_t, FileState> live;

    ByteReader r(std::string_view(data).substr(8));
    while (r.remaining() > 0) {
      uint32_t len, crc;
      std::string_view payload;
      if (!r.GetFixed32(&len) || !r.GetFixed32(&crc) ||
          !r.GetBytes(len, &payload)) {
        return Status::Corruption("truncated manifest record");
      }
      if (crc32::Value(payload.data(), payload.size()) != crc) {
        return Status::Corruption("manifest record checksum mismatch");
      }
      ByteReader pr(payload);
      uint8_t type;
      if (!pr.GetByte(&type)) return Status::Corruption("empty record");
      switch (type) {
        case kAddFile: {
          uint32_t level;
          uint64_t id;
          if (!pr.GetFixed32(&level) || !pr.GetFixed64(&id)) {
            return Status::Corruption("bad add record");
          }
          live[id] = FileState{level, std::nullopt};
          next_file_id_ = std::max(next_file_id_, id + 1);
          break;
        }
        case kRemoveFile: {
          uint64_t id;
          if (!pr.GetFixed64(&id)) return Status::Corruption("bad remove");
          live.erase(id);
          break;
        }
        case kMoveFile: {
          uint64_t id, arrival;
          uint32_t level;
          if (!pr.GetFixed64(&id) || !pr.GetFixed32(&level) ||
              !pr.GetFixed64(&arrival)) {
            return Status::Corruption("bad move record");
          }
          auto it = live.find(id);
          if (it != live.end()) it->second = FileState{level, arrival};
          break;
        }
        case kClockTick: {
          uint64_t time, seq;
          if (!pr.GetFixed64(&time) || !pr.GetFixed64(&seq)) {
            return Status::Corruption("bad tick record");
          }
          time_ring_.emplace_back(seq, time);
          clock_offset_s_ = std::max(clock_offset_s_, time);
          break;
        }
        case kSeqWatermark: {
          uint64_t seq;
          if (!pr.GetFixed64(&seq)) return Status::Corruption("bad watermark");
          durable_seqnum_ = std::max(durable_seqnum_, seq);
          break;
        }
        default:
          return Status::Corruption("unknown manifest record type");
      }
    }
    next_seqnum_ = durable_seqnum_ + 1;

    for (const auto& [id, state] : live) {
      std::unique_ptr<TableFile> f;
      Status s = TableFile::Open(TablePath(id), opts_, &f);
      if (!s.ok()) return s;
      f->mutable_meta()->level = state.level;
      if (state.arrival) f->mutable_meta()->level_arrival_time = *state.arrival;
      if (current_->levels.size() <= state.level) {
        current_->levels.resize(state.level + 1);
      }
      current_->levels[state.level].push_back(std::move(f));
    }
    for (auto& level : current_->levels) {
      std::sort(level.begin(), level.end(),
                [](const auto& a, const auto& b) {
                  return a->meta().min_sort_key < b->meta().min_sort_key;
                });
    }
  }

  manifest_fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (manifest_fd_ < 0) return PosixError("open " + path);
  if (!existed) {
    std::string header;
    PutFixed64(&header, kManifestMagic);
    Status s = WriteAllFd(manifest_fd_, header.data(), header.size());
    if (!s.ok()) return s;
  }
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Clock and tombstone ages

void DB::NoteClockSample() {
  uint64_t now = Now();
  if (time_ring_.empty() || now > time_ring_.back().second) {
    time_ring_.emplace_back(next_seqnum_, now);
    LogClockTick(now, next_seqnum_);
  }
}

Status DB::IngestTick() {
  ops_ingested_++;
  NoteClockSample();
  if (wal_ && Now() - last_wal_purge_time_ >= opts_.wal_purge_interval_s) {
    last_wal_purge_time_ = Now();
    return PurgeWal(nullptr);
  }
  return Status::OK();
}

uint64_t DB::TombstoneAge(const FileMetaData& m) const {
  if (!m.age_anchor_seqnum) return 0;
  uint64_t anchor = *m.age_anchor_seqnum;
  // Latest sample at or before the anchor gives its insertion second.
  uint64_t t = 0;
  auto it = std::upper_bound(
      time_ring_.begin(), time_ring_.end(), anchor,
      [](uint64_t a, const std::pair<uint64_t, uint64_t>& p) {
        return a < p.first;
      });
  if (it != time_ring_.begin()) t = std::prev(it)->second;
  uint64_t now = Now();
  return now >= t ? now - t : 0;
}

// ---------------------------------------------------------------------------
// Write path

Status DB::WriteWal(const Entry& e) {
  if (!wal_) return Status::OK();
  return wal_->Append(e);
}

Status DB::Put(uint64_t sort_key, uint64_t delete_key, std::string value) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  s = IngestTick();
  if (!s.ok()) return s;

  Entry e;
  e.sort_key = sort_key;
  e.delete_key = delete_key;
  e.seqnum = next_seqnum_++;
  e.kind = EntryKind::kPut;
  e.value = std::move(value);
  s = WriteWal(e);
  if (!s.ok()) return s;

  auto it = buffer_.find(sort_key);
  if (it != buffer_.end()) {
    buffer_bytes_ -= it->second.EncodedSize();
    buffer_bytes_ += e.EncodedSize();
    it->second = std::move(e);
  } else {
    buffer_bytes_ += e.EncodedSize();
    buffer_.emplace(sort_key, std::move(e));
  }
  metrics_.puts++;
  if (buffer_bytes_ >= opts_.buffer_capacity_bytes) return Flush();
  return Status::OK();
}

bool DB::DiskMayContain(uint64_t sort_key, uint32_t min_level) {
  for (size_t i = min_level; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      const FileMetaData& m = f->meta();
      if (sort_key < m.min_sort_key || sort_key > m.max_sort_key) continue;
      auto tile = f->sort_fences().LocateTile(sort_key);
      if (!tile) continue;
      const TileMeta& tm = f->tiles()[*tile];
      for (uint32_t slot = 0; slot < tm.num_pages; slot++) {
        if (!tm.live[slot]) continue;
        metrics_.filter_probes++;
        if (f->filter(tm.first_page + slot)
                .MayContain(sort_key, &metrics_.hash_computations)) {
          return true;
        }
      }
    }
  }
  return false;
}

Status DB::Delete(uint64_t sort_key, DeleteResult* result) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  s = IngestTick();
  if (!s.ok()) return s;

  auto it = buffer_.find(sort_key);
  if (it == buffer_.end() && !DiskMayContain(sort_key, 0)) {
    // No filter anywhere admits an older version: the delete is blind and
    // the tombstone would be pure overhead.
    metrics_.blind_deletes_suppressed++;
    if (result) *result = DeleteResult::kSuppressedBlind;
    return Status::OK();
  }

  Entry e;
  e.sort_key = sort_key;
  e.delete_key = kTombstoneDeleteKey;
  e.seqnum = next_seqnum_++;
  e.kind = EntryKind::kPointTombstone;
  s = WriteWal(e);
  if (!s.ok()) return s;

  if (it != buffer_.end()) {
    buffer_bytes_ -= it->second.EncodedSize();
    buffer_bytes_ += e.EncodedSize();
    it->second = std::move(e);
  } else {
    buffer_bytes_ += e.EncodedSize();
    buffer_.emplace(sort_key, std::move(e));
  }
  metrics_.point_deletes++;
  if (result) *result = DeleteResult::kInserted;
  if (buffer_bytes_ >= opts_.buffer_capacity_bytes) return Flush();
  return Status::OK();
}

Status DB::RangeDelete(uint64_t sort_lo, uint64_t sort_hi) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  if (sort_lo >= sort_hi) {
    return Status::InvalidArgument("range delete needs lo < hi");
  }
  s = IngestTick();
  if (!s.ok()) return s;

  RangeTombstone rt;
  rt.lo = sort_lo;
  rt.hi = sort_hi;
  rt.seqnum = next_seqnum_++;
  s = WriteWal(Wal::MakeRangeDeleteRecord(rt));
  if (!s.ok()) return s;

  // In-place supersession of covered buffer entries.
  auto it = buffer_.lower_bound(sort_lo);
  while (it != buffer_.end() && it->first < sort_hi) {
    buffer_bytes_ -= it->second.EncodedSize();
    it = buffer_.erase(it);
  }
  buffer_bytes_ += rt.EncodedSize();
  buffer_rts_.push_back(rt);
  metrics_.range_deletes++;
  if (buffer_bytes_ >= opts_.buffer_capacity_bytes) return Flush();
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Merge machinery

void DB::MergeEntries(std::vector<std::vector<Entry>> inputs,
                      const std::vector<RangeTombstone>& rts,
                      bool drop_tombstones, std::vector<Entry>* out) {
  std::map<uint64_t, Entry> merged;
  for (auto& input : inputs) {
    for (Entry& e : input) {
      auto it = merged.find(e.sort_key);
      if (it == merged.end()) {
        merged.emplace(e.sort_key, std::move(e));
      } else if (e.seqnum > it->second.seqnum) {
        it->second = std::move(e);
      }
    }
  }
  out->clear();
  out->reserve(merged.size());
  for (auto& [key, e] : merged) {
    bool shadowed = false;
    for (const RangeTombstone& rt : rts) {
      if (rt.seqnum > e.seqnum && rt.Covers(key)) {
        shadowed = true;
        break;
      }
    }
    if (shadowed) continue;
    if (drop_tombstones && e.kind == EntryKind::kPointTombstone) continue;
    out->push_back(std::move(e));
  }
}

Status DB::BuildLevelFiles(const std::vector<Entry>& entries,
                           std::vector<RangeTombstone> rts, uint32_t level,
                           std::vector<std::shared_ptr<TableFile>>* out) {
  out->clear();
  if (entries.empty() && rts.empty()) return Status::OK();

  const uint64_t per_file =
      static_cast<uint64_t>(TableFile::EntriesPerPage(opts_)) *
      opts_.pages_per_file;
  size_t num_files =
      entries.empty() ? 1 : (entries.size() + per_file - 1) / per_file;

  // Each output file owns a half-open slice of the key space; range
  // tombstones are clipped to the slice so coverage is partitioned exactly
  // and level disjointness is preserved.
  uint64_t ttl = ttls_.d.empty()
                     ? 0
                     : (level < ttls_.d.size() ? ttls_.d[level]
                                               : ttls_.d.back());
  for (size_t i = 0; i < num_files; i++) {
    size_t begin = i * per_file;
    size_t end = std::min<size_t>(begin + per_file, entries.size());
    std::vector<Entry> slice(entries.begin() + begin, entries.begin() + end);

    uint64_t space_lo = (i == 0) ? 0 : entries[begin].sort_key;
    uint64_t space_hi =
        (i + 1 == num_files) ? UINT64_MAX : entries[end].sort_key;  // excl.

    std::vector<RangeTombstone> file_rts;
    for (const RangeTombstone& rt : rts) {
      RangeTombstone piece = rt;
      piece.lo = std::max(rt.lo, space_lo);
      piece.hi = std::min(rt.hi, space_hi);
      if (piece.lo < piece.hi) file_rts.push_back(piece);
    }

    FileMetaData meta;
    meta.file_id = next_file_id_++;
    meta.level = level;
    meta.level_arrival_time = Now();
    meta.ttl = ttl;
    std::unique_ptr<TableFile> f;
    Status s = TableFile::Build(TablePath(meta.file_id), opts_, slice,
                                std::move(file_rts), std::move(meta),
                                &metrics_, &f);
    if (!s.ok()) return s;
    out->push_back(std::move(f));
  }
  return Status::OK();
}

void DB::InstallVersion(std::shared_ptr<TreeVersion> next) {
  next->version_number = current_->version_number + 1;
  for (auto& level : next->levels) {
    std::sort(level.begin(), level.end(), [](const auto& a, const auto& b) {
      return a->meta().min_sort_key < b->meta().min_sort_key;
    });
  }
  while (!next->levels.empty() && next->levels.back().empty()) {
    next->levels.pop_back();
  }
  current_ = std::move(next);
}

void DB::RecomputeTtls() {
  size_t deepest = current_->DeepestNonEmptyLevel();
  uint32_t k = 1;
  if (deepest != SIZE_MAX && deepest >= 1) k = static_cast<uint32_t>(deepest);
  ComputeTtls(opts_.delete_persistence_threshold_s, opts_.size_ratio, k,
              &ttls_);
  for (auto& level : current_->levels) {
    for (const auto& f : level) {
      uint32_t l = f->meta().level;
      f->mutable_meta()->ttl =
          l < ttls_.d.size() ? ttls_.d[l] : ttls_.d.back();
    }
  }
}

void DB::RefreshInvalidationEstimates() {
  std::vector<KeyHistogram> level_hist(current_->levels.size());
  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      level_hist[i].Merge(f->meta().histogram);
    }
  }
  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      FileMetaData* m = f->mutable_meta();
      double rd = 0.0;
      for (const RangeTombstone& rt : m->range_tombstones) {
        for (size_t j = i + 1; j < level_hist.size(); j++) {
          rd += level_hist[j].EstimateRange(rt.lo, rt.hi);
        }
      }
      m->invalidation_estimate = static_cast<double>(m->point_tombstones) + rd;
    }
  }
}

Status DB::Flush() {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  if (buffer_.empty() && buffer_rts_.empty()) return Status::OK();

  metrics_.bytes_ingested += buffer_bytes_;

  std::vector<Entry> fresh;
  fresh.reserve(buffer_.size());
  for (auto& [key, e] : buffer_) fresh.push_back(e);

  uint64_t lo = UINT64_MAX, hi = 0;
  if (!fresh.empty()) {
    lo = fresh.front().sort_key;
    hi = fresh.back().sort_key;
  }
  for (const RangeTombstone& rt : buffer_rts_) {
    lo = std::min(lo, rt.lo);
    hi = std::max(hi, rt.hi - 1);
  }

  // Level 1 stays range-disjoint: overlapping files are merged into the
  // flush output.
  std::vector<std::shared_ptr<TableFile>> overlap;
  if (!current_->levels.empty()) {
    for (const auto& f : current_->levels[0]) {
      const FileMetaData& m = f->meta();
      if (m.max_sort_key >= lo && m.min_sort_key <= hi) overlap.push_back(f);
    }
  }

  std::vector<std::vector<Entry>> inputs;
  inputs.push_back(std::move(fresh));
  std::vector<RangeTombstone> rts = buffer_rts_;
  for (const auto& f : overlap) {
    std::vector<Entry> contents;
    uint64_t pages = 0;
    s = f->ReadAllSorted(&contents, &pages);
    if (!s.ok()) return s;
    metrics_.compaction_pages_read += pages;
    metrics_.bytes_compacted += f->meta().entry_bytes;
    inputs.push_back(std::move(contents));
    const auto& frts = f->meta().range_tombstones;
    rts.insert(rts.end(), frts.begin(), frts.end());
  }

  bool target_is_last = true;
  for (size_t i = 1; i < current_->levels.size(); i++) {
    if (!current_->levels[i].empty()) target_is_last = false;
  }

  std::vector<Entry> merged;
  MergeEntries(std::move(inputs), rts, target_is_last, &merged);
  if (target_is_last) rts.clear();

  std::vector<std::shared_ptr<TableFile>> outputs;
  s = BuildLevelFiles(merged, std::move(rts), 0, &outputs);
  if (!s.ok()) return s;

  durable_seqnum_ = next_seqnum_ - 1;
  {
    std::string p;
    p.push_back(static_cast<char>(kSeqWatermark));
    PutFixed64(&p, durable_seqnum_);
    s = AppendManifestRecord(p);
    if (!s.ok()) return s;
  }
  for (const auto& f : overlap) {
    s = LogRemoveFile(f->meta().file_id);
    if (!s.ok()) return s;
  }
  for (const auto& f : outputs) {
    s = LogAddFile(0, f->meta().file_id);
    if (!s.ok()) return s;
  }

  auto next = std::make_shared<TreeVersion>(*current_);
  if (next->levels.empty()) next->levels.resize(1);
  auto& l1 = next->levels[0];
  for (const auto& f : overlap) {
    l1.erase(std::remove(l1.begin(), l1.end(), f), l1.end());
  }
  for (const auto& f : outputs) l1.push_back(f);
  InstallVersion(std::move(next));

  for (const auto& f : overlap) ::unlink(f->path().c_str());

  buffer_.clear();
  buffer_rts_.clear();
  buffer_bytes_ = 0;
  metrics_.flushes++;

  if (wal_) {
    s = wal_->Rotate(Now());
    if (!s.ok()) return s;
    s = wal_->DeleteObsolete(durable_seqnum_);
    if (!s.ok()) return s;
  }

  RecomputeTtls();
  RefreshInvalidationEstimates();
  if (opts_.auto_compact) return MaintainUntilQuiescent();
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Compaction

Status DB::ExecuteCompaction(const CompactionPlan& plan) {
  auto source = current_->FindFile(plan.file_id);
  if (!source) return Status::InvalidArgument("plan file not live");
  std::vector<std::shared_ptr<TableFile>> targets;
  for (uint64_t id : plan.target_file_ids) {
    auto f = current_->FindFile(id);
    if (!f) return Status::InvalidArgument("plan target not live");
    targets.push_back(std::move(f));
  }

  // Deepest level that still holds data once the inputs move.
  std::unordered_set<uint64_t> input_ids{plan.file_id};
  for (uint64_t id : plan.target_file_ids) input_ids.insert(id);
  size_t deepest_other = 0;
  bool any_other = false;
  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      if (input_ids.count(f->meta().file_id)) continue;
      deepest_other = std::max(deepest_other, i);
      any_other = true;
    }
  }
  bool target_is_last =
      !any_other || plan.target_level >= deepest_other;

  // Zero-overlap moves skip the rewrite unless the file carries tombstones
  // into what becomes the last level, where they must be resolved.
  bool can_move = targets.empty() &&
                  plan.target_level != plan.source_level &&
                  !(target_is_last && source->meta().HasTombstones());
  if (can_move) {
    Status s = LogMoveFile(plan.file_id, plan.target_level, Now());
    if (!s.ok()) return s;
    auto next = std::make_shared<TreeVersion>(*current_);
    auto& src = next->levels[plan.source_level];
    src.erase(std::remove(src.begin(), src.end(), source), src.end());
    if (next->levels.size() <= plan.target_level) {
      next->levels.resize(plan.target_level + 1);
    }
    FileMetaData* m = source->mutable_meta();
    m->level = plan.target_level;
    m->level_arrival_time = Now();
    next->levels[plan.target_level].push_back(source);
    InstallVersion(std::move(next));
    metrics_.trivial_moves++;
    RecomputeTtls();
    RefreshInvalidationEstimates();
    return Status::OK();
  }

  std::vector<std::vector<Entry>> inputs;
  std::vector<RangeTombstone> rts;
  std::vector<std::shared_ptr<TableFile>> all_inputs{source};
  all_inputs.insert(all_inputs.end(), targets.begin(), targets.end());
  for (const auto& f : all_inputs) {
    std::vector<Entry> contents;
    uint64_t pages = 0;
    Status s = f->ReadAllSorted(&contents, &pages);
    if (!s.ok()) return s;
    metrics_.compaction_pages_read += pages;
    metrics_.bytes_compacted += f->meta().entry_bytes;
    inputs.push_back(std::move(contents));
    const auto& frts = f->meta().range_tombstones;
    rts.insert(rts.end(), frts.begin(), frts.end());
  }

  std::vector<Entry> merged;
  MergeEntries(std::move(inputs), rts, target_is_last, &merged);
  if (target_is_last) rts.clear();

  std::vector<std::shared_ptr<TableFile>> outputs;
  Status s = BuildLevelFiles(merged, std::move(rts), plan.target_level,
                             &outputs);
  if (!s.ok()) return s;

  for (const auto& f : all_inputs) {
    s = LogRemoveFile(f->meta().file_id);
    if (!s.ok()) return s;
  }
  for (const auto& f : outputs) {
    s = LogAddFile(plan.target_level, f->meta().file_id);
    if (!s.ok()) return s;
  }

  auto next = std::make_shared<TreeVersion>(*current_);
  for (auto& level : next->levels) {
    level.erase(std::remove_if(level.begin(), level.end(),
                               [&](const auto& f) {
                                 return input_ids.count(f->meta().file_id) > 0;
                               }),
                level.end());
  }
  if (next->levels.size() <= plan.target_level) {
    next->levels.resize(plan.target_level + 1);
  }
  for (const auto& f : outputs) next->levels[plan.target_level].push_back(f);
  InstallVersion(std::move(next));

  for (const auto& f : all_inputs) ::unlink(f->path().c_str());
  metrics_.compactions++;
  RecomputeTtls();
  RefreshInvalidationEstimates();
  return Status::OK();
}

Status DB::MaintainUntilQuiescent() {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  TombstoneAgeFn age_of = [this](const FileMetaData& m) {
    return TombstoneAge(m);
  };
  for (int iter = 0; iter < 100000; iter++) {
    auto plan = EvaluateTriggers(*current_, opts_, ttls_, Now(), age_of);
    if (!plan) return Status::OK();
    s = ExecuteCompaction(*plan);
    if (!s.ok()) return s;
  }
  return Status::InvalidArgument("compaction loop did not quiesce");
}

Status DB::PurgeWal(uint64_t* segments_purged) {
  if (segments_purged) *segments_purged = 0;
  if (!wal_) return Status::OK();
  return wal_->Purge(Now(), opts_.delete_persistence_threshold_s,
                     durable_seqnum_, segments_purged);
}

// ---------------------------------------------------------------------------
// Read path

Status DB::Get(uint64_t sort_key, std::string* value, LookupStats* stats) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  LookupStats local;
  LookupStats* st = stats ? stats : &local;
  *st = LookupStats();

  uint64_t shadow_seq = 0;
  for (const RangeTombstone& rt : buffer_rts_) {
    if (rt.Covers(sort_key)) shadow_seq = std::max(shadow_seq, rt.seqnum);
  }
  auto it = buffer_.find(sort_key);
  if (it != buffer_.end() && it->second.seqnum > shadow_seq) {
    if (it->second.kind == EntryKind::kPointTombstone) {
      return Status::NotFound();
    }
    *value = it->second.value;
    st->found = true;
    return Status::OK();
  }
  if (shadow_seq > 0) return Status::NotFound();

  for (size_t i = 0; i < current_->levels.size(); i++) {
    const TableFile* hit = nullptr;
    for (const auto& f : current_->levels[i]) {
      const FileMetaData& m = f->meta();
      if (sort_key >= m.min_sort_key && sort_key <= m.max_sort_key) {
        hit = f.get();
        break;
      }
    }
    if (hit == nullptr) continue;
    st->levels_touched++;
    for (const RangeTombstone& rt : hit->meta().range_tombstones) {
      if (rt.Covers(sort_key)) shadow_seq = std::max(shadow_seq, rt.seqnum);
    }
    Entry e;
    bool found = false;
    s = hit->Get(sort_key, &e, &found, st, &metrics_);
    if (!s.ok()) return s;
    if (found) {
      if (e.seqnum <= shadow_seq) return Status::NotFound();
      if (e.kind == EntryKind::kPointTombstone) return Status::NotFound();
      *value = std::move(e.value);
      st->found = true;
      return Status::OK();
    }
    // A covering range tombstone at this level outranks anything deeper.
    if (shadow_seq > 0) return Status::NotFound();
  }
  return Status::NotFound();
}

Status DB::RangeScan(uint64_t sort_lo, uint64_t sort_hi,
                     std::vector<Entry>* out) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  if (sort_lo >= sort_hi) {
    return Status::InvalidArgument("range scan needs lo < hi");
  }
  out->clear();

  std::map<uint64_t, Entry> merged;
  std::vector<RangeTombstone> rts = buffer_rts_;

  for (auto it = buffer_.lower_bound(sort_lo);
       it != buffer_.end() && it->first < sort_hi; ++it) {
    merged.emplace(it->first, it->second);
  }

  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      const FileMetaData& m = f->meta();
      if (m.min_sort_key >= sort_hi || m.max_sort_key < sort_lo) continue;
      const auto& frts = m.range_tombstones;
      rts.insert(rts.end(), frts.begin(), frts.end());

      const auto& tiles = f->tiles();
      for (size_t t = 0; t < tiles.size(); t++) {
        uint64_t t_lo = tiles[t].min_sort_key;
        uint64_t t_hi = (t + 1 < tiles.size()) ? tiles[t + 1].min_sort_key - 1
                                               : m.max_sort_key;
        if (t_lo >= sort_hi || t_hi < sort_lo) continue;
        std::vector<Entry> contents;
        s = f->ReadTileSorted(t, &contents, &metrics_.pages_read);
        if (!s.ok()) return s;
        for (Entry& e : contents) {
          if (e.sort_key < sort_lo || e.sort_key >= sort_hi) continue;
          auto it = merged.find(e.sort_key);
          if (it == merged.end()) {
            merged.emplace(e.sort_key, std::move(e));
          } else if (e.seqnum > it->second.seqnum) {
            it->second = std::move(e);
          }
        }
      }
    }
  }

  for (auto& [key, e] : merged) {
    if (e.kind != EntryKind::kPut) continue;
    bool shadowed = false;
    for (const RangeTombstone& rt : rts) {
      if (rt.seqnum > e.seqnum && rt.Covers(key)) {
        shadowed = true;
        break;
      }
    }
    if (!shadowed) out->push_back(std::move(e));
  }
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Secondary (delete-key) operations

Status DB::SecondaryRangeDelete(uint64_t d_lo, uint64_t d_hi,
                                SecondaryDeleteStats* stats) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  if (d_lo >= d_hi) {
    return Status::InvalidArgument("secondary delete needs lo < hi");
  }
  SecondaryDeleteStats local;
  SecondaryDeleteStats* st = stats ? stats : &local;
  *st = SecondaryDeleteStats();

  // Buffer pass. A removed entry whose key may still have an older version
  // on disk becomes a point tombstone so that version cannot resurface.
  for (auto it = buffer_.begin(); it != buffer_.end();) {
    Entry& e = it->second;
    if (e.kind != EntryKind::kPut || e.delete_key < d_lo ||
        e.delete_key >= d_hi) {
      ++it;
      continue;
    }
    buffer_bytes_ -= e.EncodedSize();
    st->buffer_removed++;
    if (DiskMayContain(it->first, 0)) {
      e.kind = EntryKind::kPointTombstone;
      e.delete_key = kTombstoneDeleteKey;
      e.value.clear();
      buffer_bytes_ += e.EncodedSize();
      st->tombstones_converted++;
      ++it;
    } else {
      it = buffer_.erase(it);
    }
  }

  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      FileMetaData* m = f->mutable_meta();
      if (m->min_delete_key >= d_hi || m->max_delete_key < d_lo) continue;
      bool touched = false;

      auto& tiles = *f->mutable_tiles();
      for (size_t t = 0; t < tiles.size(); t++) {
        TileMeta& tm = tiles[t];
        uint64_t t_lo = tm.min_sort_key;
        uint64_t t_hi = (t + 1 < tiles.size()) ? tiles[t + 1].min_sort_key - 1
                                               : m->max_sort_key;

        // A full drop is only safe sight-unseen when no deeper file can hold
        // an older, out-of-range version of a dropped key. Otherwise the
        // candidate pages are read and removals become tombstones.
        bool risky = false;
        for (size_t j = i + 1; j < current_->levels.size() && !risky; j++) {
          for (const auto& g : current_->levels[j]) {
            const FileMetaData& gm = g->meta();
            if (gm.max_sort_key < t_lo || gm.min_sort_key > t_hi) continue;
            if (!(gm.min_delete_key >= d_lo && gm.max_delete_key < d_hi)) {
              risky = true;
              break;
            }
          }
        }

        std::vector<size_t> candidates;
        tm.Fences().FullDropCandidates(d_lo, d_hi, &candidates);

        for (uint32_t slot = 0; slot < tm.num_pages; slot++) {
          if (!tm.live[slot]) continue;
          uint32_t page = tm.first_page + slot;
          bool last = (slot + 1 == tm.num_pages);
          uint64_t span_lo = tm.page_min_delete_keys[slot];
          uint64_t next_min =
              last ? tm.tile_max_delete_key : tm.page_min_delete_keys[slot + 1];

          bool candidate =
              std::find(candidates.begin(), candidates.end(), slot) !=
              candidates.end();
          // Duplicate delete keys can straddle the page boundary; a span
          // ending exactly at d_hi is not provably inside the range.
          if (candidate && !last && next_min == d_hi) candidate = false;

          if (candidate && !risky) {
            f->MarkPageDropped(t, slot);
            st->full_drops++;
            metrics_.full_page_drops++;
            touched = true;
            continue;
          }

          bool intersects = span_lo < d_hi &&
                            (last ? tm.tile_max_delete_key >= d_lo
                                  : next_min > d_lo);
          if (!intersects) continue;

          std::vector<Entry> contents;
          s = f->ReadPage(page, &contents);
          if (!s.ok()) return s;
          st->pages_read++;
          metrics_.srd_pages_read++;

          std::vector<Entry> kept;
          std::vector<Entry> removed;
          for (Entry& e : contents) {
            if (e.kind == EntryKind::kPut && e.delete_key >= d_lo &&
                e.delete_key < d_hi) {
              removed.push_back(std::move(e));
            } else {
              kept.push_back(std::move(e));
            }
          }
          if (removed.empty()) continue;

          for (Entry& e : removed) {
            m->histogram.Remove(e.sort_key);
            if (DiskMayContain(e.sort_key, static_cast<uint32_t>(i + 1))) {
              e.kind = EntryKind::kPointTombstone;
              e.delete_key = kTombstoneDeleteKey;
              e.value.clear();
              m->point_tombstones++;
              m->invalidation_estimate += 1.0;
              if (!m->age_anchor_seqnum || e.seqnum < *m->age_anchor_seqnum) {
                m->age_anchor_seqnum = e.seqnum;
              }
              kept.push_back(std::move(e));
              st->tombstones_converted++;
            }
          }
          std::sort(kept.begin(), kept.end(), SortKeyLess);

          if (kept.empty()) {
            f->MarkPageDropped(t, slot);
            st->full_drops++;
            metrics_.full_page_drops++;
          } else {
            s = f->RewritePage(page, kept);
            if (!s.ok()) return s;
            std::vector<uint64_t> keys;
            keys.reserve(kept.size());
            for (const Entry& e : kept) keys.push_back(e.sort_key);
            f->ReplacePageFilter(
                page, PageBloomFilter::Build(keys, opts_.bits_per_entry,
                                             &metrics_.hash_computations));
            st->partial_edits++;
            metrics_.partial_page_edits++;
          }
          touched = true;
        }
      }

      if (touched) {
        f->RefreshDerivedMeta();
        s = f->WriteFooter();
        if (!s.ok()) return s;
      }
    }
  }

  auto next = std::make_shared<TreeVersion>(*current_);
  InstallVersion(std::move(next));
  return Status::OK();
}

Status DB::SecondaryRangeLookup(uint64_t d_lo, uint64_t d_hi,
                                std::vector<Entry>* out) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  if (d_lo >= d_hi) {
    return Status::InvalidArgument("secondary lookup needs lo < hi");
  }
  out->clear();

  auto covered_by_buffer_rt = [&](uint64_t key, uint64_t seq) {
    for (const RangeTombstone& rt : buffer_rts_) {
      if (rt.seqnum > seq && rt.Covers(key)) return true;
    }
    return false;
  };

  for (const auto& [key, e] : buffer_) {
    if (e.kind != EntryKind::kPut) continue;
    if (e.delete_key < d_lo || e.delete_key >= d_hi) continue;
    if (!covered_by_buffer_rt(key, e.seqnum)) out->push_back(e);
  }

  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      const FileMetaData& m = f->meta();
      if (m.min_delete_key >= d_hi || m.max_delete_key < d_lo) continue;

      const auto& tiles = f->tiles();
      for (size_t t = 0; t < tiles.size(); t++) {
        const TileMeta& tm = tiles[t];
        for (uint32_t slot = 0; slot < tm.num_pages; slot++) {
          if (!tm.live[slot]) continue;
          bool last = (slot + 1 == tm.num_pages);
          uint64_t span_lo = tm.page_min_delete_keys[slot];
          bool intersects =
              span_lo < d_hi &&
              (last ? tm.tile_max_delete_key >= d_lo
                    : tm.page_min_delete_keys[slot + 1] > d_lo);
          if (!intersects) continue;

          std::vector<Entry> contents;
          s = f->ReadPage(tm.first_page + slot, &contents);
          if (!s.ok()) return s;
          metrics_.pages_read++;

          for (Entry& e : contents) {
            if (e.kind != EntryKind::kPut || e.delete_key < d_lo ||
                e.delete_key >= d_hi) {
              continue;
            }
            // Liveness: no newer version or covering tombstone above.
            if (buffer_.count(e.sort_key) > 0) continue;
            if (covered_by_buffer_rt(e.sort_key, e.seqnum)) continue;
            bool dead = false;
            for (size_t j = 0; j <= i && !dead; j++) {
              for (const auto& g : current_->levels[j]) {
                const FileMetaData& gm = g->meta();
                if (e.sort_key < gm.min_sort_key ||
                    e.sort_key > gm.max_sort_key) {
                  continue;
                }
                for (const RangeTombstone& rt : gm.range_tombstones) {
                  if (rt.seqnum > e.seqnum && rt.Covers(e.sort_key)) {
                    dead = true;
                    break;
                  }
                }
                if (dead || g.get() == f.get()) break;
                if (j < i) {
                  Entry shallow;
                  bool found = false;
                  s = g->Get(e.sort_key, &shallow, &found, nullptr, &metrics_);
                  if (!s.ok()) return s;
                  if (found) dead = true;
                }
                break;
              }
            }
            if (!dead) out->push_back(std::move(e));
          }
        }
      }
    }
  }

  std::sort(out->begin(), out->end(), [](const Entry& a, const Entry& b) {
    if (a.delete_key != b.delete_key) return a.delete_key < b.delete_key;
    return a.sort_key < b.sort_key;
  });
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Reporting

Status DB::ComputeSpaceAmp(double* ratio) {
  Status s = CheckOpen();
  if (!s.ok()) return s;

  uint64_t total = buffer_bytes_;
  for (const auto& level : current_->levels) {
    for (const auto& f : level) {
      total += f->LivePageBytes();
      for (const RangeTombstone& rt : f->meta().range_tombstones) {
        total += rt.EncodedSize();
      }
    }
  }
  if (total == 0) return Status::EmptyTree("no entries");

  // The unique-live scan is diagnostic; keep it out of the query counters.
  Metrics saved = metrics_;
  std::vector<Entry> live;
  s = RangeScan(0, UINT64_MAX, &live);
  metrics_ = saved;
  if (!s.ok()) return s;

  uint64_t live_bytes = 0;
  for (const Entry& e : live) live_bytes += e.EncodedSize();
  {
    auto it = buffer_.find(UINT64_MAX);
    if (it != buffer_.end() && it->second.kind == EntryKind::kPut) {
      live_bytes += it->second.EncodedSize();
    }
  }
  if (live_bytes == 0) return Status::EmptyTree("no live entries");
  *ratio = static_cast<double>(total - live_bytes) /
           static_cast<double>(live_bytes);
  return Status::OK();
}

Status DB::Snapshot(std::vector<FileSnapshotRow>* rows) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  rows->clear();
  uint64_t now = Now();
  for (size_t i = 0; i < current_->levels.size(); i++) {
    for (const auto& f : current_->levels[i]) {
      const FileMetaData& m = f->meta();
      FileSnapshotRow row;
      row.file_id = m.file_id;
      row.level = static_cast<uint32_t>(i + 1);
      row.num_entries = m.num_entries;
      row.entry_bytes = m.entry_bytes;
      row.point_tombstones = m.point_tombstones;
      row.range_tombstones = m.range_tombstones.size();
      row.b = m.invalidation_estimate;
      row.a = TombstoneAge(m);
      row.ttl = m.ttl;
      row.residence = now >= m.level_arrival_time
                          ? now - m.level_arrival_time
                          : 0;
      rows->push_back(row);
    }
  }
  return Status::OK();
}

uint64_t DB::SeqnumAge(uint64_t seqnum) const {
  uint64_t t = 0;
  auto it = std::upper_bound(
      time_ring_.begin(), time_ring_.end(), seqnum,
      [](uint64_t a, const std::pair<uint64_t, uint64_t>& p) {
        return a < p.first;
      });
  if (it != time_ring_.begin()) t = std::prev(it)->second;
  uint64_t now = Now();
  return now >= t ? now - t : 0;
}

uint64_t DB::LiveTombstoneCount() const {
  uint64_t n = buffer_rts_.size();
  for (const auto& [key, e] : buffer_) {
    if (e.kind == EntryKind::kPointTombstone) n++;
  }
  for (const auto& level : current_->levels) {
    for (const auto& f : level) {
      n += f->meta().point_tombstones + f->meta().range_tombstones.size();
    }
  }
  return n;
}

Status DB::CountTombstonesOlderThan(uint64_t age_s, uint64_t* count) {
  Status s = CheckOpen();
  if (!s.ok()) return s;
  *count = 0;
  for (const auto& [key, e] : buffer_) {
    if (e.kind == EntryKind::kPointTombstone && SeqnumAge(e.seqnum) > age_s) {
      (*count)++;
    }
  }
  for (const RangeTombstone& rt : buffer_rts_) {
    if (SeqnumAge(rt.seqnum) > age_s) (*count)++;
  }
  for (const auto& level : current_->levels) {
    for (const auto& f : level) {
      if (!f->meta().HasTombstones()) continue;
      std::vector<Entry> contents;
      s = f->ReadAllSorted(&contents, nullptr);
      if (!s.ok()) return s;
      for (const Entry& e : contents) {
        if (e.kind == EntryKind::kPointTombstone &&
            SeqnumAge(e.seqnum) > age_s) {
          (*count)++;
        }
      }
      for (const RangeTombstone& rt : f->meta().range_tombstones) {
        if (SeqnumAge(rt.seqnum) > age_s) (*count)++;
      }
    }
  }
  return Status::OK();
}

uint64_t DB::MetadataOverheadBytes() const {
  // Interweaving overhead vs the classic layout: one sort key per tile plus
  // h delete-key fences replacing the h per-page sort-key fences. With equal
  // key widths that is sizeof(S) per delete tile.
  uint64_t total = 0;
  for (const auto& level : current_->levels) {
    for (const auto& f : level) {
      for (const TileMeta& t : f->tiles()) {
        total += sizeof(uint64_t) +
                 t.num_pages * (sizeof(uint64_t) - sizeof(uint64_t));
      }
    }
  }
  return total;
}

}  // namespace lethe
