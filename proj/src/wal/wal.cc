#include "wal/wal.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include "util/coding.h"
#include "util/crc32.h"

namespace fs = std::filesystem;

namespace lethe {

namespace {

constexpr size_t kSegmentHeaderSize = 16;  // id(8) creation_time(8)

Status PosixError(const std::string& context) {
  return Status::IOError(context + ": " + std::strerror(errno));
}

std::string SegmentPath(const std::string& dir, uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "wal_%06llu.log",
                static_cast<unsigned long long>(id));
  return dir + "/" + buf;
}

Status WriteAll(int fd, const char* data, size_t n) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      return PosixError("wal write");
    }
    data += w;
    n -= static_cast<size_t>(w);
  }
  return Status::OK();
}

}  // namespace

Entry Wal::MakeRangeDeleteRecord(const RangeTombstone& rt) {
  Entry e;
  e.sort_key = rt.lo;
  e.delete_key = kTombstoneDeleteKey;
  e.seqnum = rt.seqnum;
  e.kind = EntryKind::kRangeTombstone;
  PutFixed64(&e.value, rt.lo);
  PutFixed64(&e.value, rt.hi);
  return e;
}

bool Wal::ParseRangeDeleteRecord(const Entry& e, RangeTombstone* rt) {
  if (e.kind != EntryKind::kRangeTombstone || e.value.size() != 16) {
    return false;
  }
  rt->lo = DecodeFixed64(e.value.data());
  rt->hi = DecodeFixed64(e.value.data() + 8);
  rt->seqnum = e.seqnum;
  return true;
}

Wal::~Wal() {
  if (active_fd_ >= 0) ::close(active_fd_);
}

Status Wal::Open(const std::string& dir, uint64_t now,
                 std::unique_ptr<Wal>* out) {
  auto w = std::unique_ptr<Wal>(new Wal());
  w->dir_ = dir;

  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& de : fs::directory_iterator(dir, ec)) {
    std::string name = de.path().filename().string();
    if (name.rfind("wal_", 0) == 0 && name.size() > 8 &&
        name.substr(name.size() - 4) == ".log") {
      paths.push_back(de.path().string());
    }
  }
  if (ec) return Status::IOError("scan " + dir + ": " + ec.message());
  std::sort(paths.begin(), paths.end());

  for (const std::string& p : paths) {
    Segment seg;
    Status s = ReadSegment(p, &seg, nullptr);
    if (!s.ok()) return s;
    w->next_id_ = std::max(w->next_id_, seg.id + 1);
    w->segments_.push_back(std::move(seg));
  }
  Status s = w->OpenSegment(now);
  if (!s.ok()) return s;
  *out = std::move(w);
  return Status::OK();
}

Status Wal::OpenSegment(uint64_t now) {
  if (active_fd_ >= 0) {
    ::close(active_fd_);
    active_fd_ = -1;
  }
  Segment seg;
  seg.id = next_id_++;
  seg.creation_time = now;
  seg.path = SegmentPath(dir_, seg.id);
  active_fd_ = ::open(seg.path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (active_fd_ < 0) return PosixError("open " + seg.path);

  std::string header;
  PutFixed64(&header, seg.id);
  PutFixed64(&header, seg.creation_time);
  Status s = WriteAll(active_fd_, header.data(), header.size());
  if (!s.ok()) return s;
  segments_.push_back(std::move(seg));
  return Status::OK();
}

Status Wal::AppendTo(int fd, const Entry& e) {
  std::string payload;
  AppendEntry(&payload, e);
  std::string rec;
  PutFixed32(&rec, static_cast<uint32_t>(payload.size()));
  PutFixed32(&rec, crc32::Value(payload.data(), payload.size()));
  rec.append(payload);
  return WriteAll(fd, rec.data(), rec.size());
}

Status Wal::Append(const Entry& e) {
  if (active_fd_ < 0) return Status::IOError("wal closed");
  Status s = AppendTo(active_fd_, e);
  if (!s.ok()) return s;
  Segment& seg = segments_.back();
  seg.min_seqnum = std::min(seg.min_seqnum, e.seqnum);
  seg.max_seqnum = std::max(seg.max_seqnum, e.seqnum);
  return Status::OK();
}

Status Wal::Sync() {
  if (active_fd_ >= 0 && ::fsync(active_fd_) != 0) {
    return PosixError("fsync wal");
  }
  return Status::OK();
}

Status Wal::Rotate(uint64_t now) { return OpenSegment(now); }

Status Wal::DeleteObsolete(uint64_t durable_seqnum) {
  for (size_t i = 0; i + 1 < segments_.size();) {
    const Segment& seg = segments_[i];
    bool empty = seg.min_seqnum == UINT64_MAX;
    if (empty || seg.max_seqnum <= durable_seqnum) {
      if (::unlink(seg.path.c_str()) != 0) {
        return PosixError("unlink " + seg.path);
      }
      segments_.erase(segments_.begin() + i);
    } else {
      i++;
    }
  }
  return Status::OK();
}

Status Wal::Purge(uint64_t now, uint64_t max_age_s, uint64_t durable_seqnum,
                  uint64_t* purged) {
  if (purged) *purged = 0;
  // The active segment is excluded; it is rotated at flush time.
  for (size_t i = 0; i + 1 < segments_.size();) {
    Segment seg = segments_[i];
    uint64_t age = now >= seg.creation_time ? now - seg.creation_time : 0;
    if (age <= max_age_s) {
      i++;
      continue;
    }
    std::vector<Entry> records;
    Segment parsed;
    Status s = ReadSegment(seg.path, &parsed, &records);
    if (!s.ok()) return s;

    std::vector<Entry> carry;
    for (const Entry& e : records) {
      if (e.seqnum > durable_seqnum) carry.push_back(e);
    }
    if (!carry.empty()) {
      Segment fresh;
      fresh.id = next_id_++;
      fresh.creation_time = now;
      fresh.path = SegmentPath(dir_, fresh.id);
      int fd = ::open(fresh.path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      if (fd < 0) return PosixError("open " + fresh.path);
      std::string header;
      PutFixed64(&header, fresh.id);
      PutFixed64(&header, fresh.creation_time);
      s = WriteAll(fd, header.data(), header.size());
      for (const Entry& e : carry) {
        if (!s.ok()) break;
        s = AppendTo(fd, e);
        fresh.min_seqnum = std::min(fresh.min_seqnum, e.seqnum);
        fresh.max_seqnum = std::max(fresh.max_seqnum, e.seqnum);
      }
      if (s.ok() && ::fsync(fd) != 0) s = PosixError("fsync " + fresh.path);
      ::close(fd);
      if (!s.ok()) return s;
      // Insert before the active segment to keep replay order by id.
      segments_.insert(segments_.end() - 1, std::move(fresh));
    }
    if (::unlink(seg.path.c_str()) != 0) {
      return PosixError("unlink " + seg.path);
    }
    segments_.erase(segments_.begin() + i);
    if (purged) (*purged)++;
  }
  return Status::OK();
}

Status Wal::ReadSegment(const std::string& path, Segment* seg,
                        std::vector<Entry>* records) {
  std::string data;
  {
    std::error_code ec;
    uintmax_t size = fs::file_size(path, ec);
    if (ec) return Status::IOError("stat " + path + ": " + ec.message());
    data.resize(size);
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) return PosixError("open " + path);
    size_t off = 0;
    Status s = Status::OK();
    while (off < data.size()) {
      ssize_t r = ::read(fd, data.data() + off, data.size() - off);
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) {
        s = PosixError("read " + path);
        break;
      }
      off += static_cast<size_t>(r);
    }
    ::close(fd);
    if (!s.ok()) return s;
  }
  if (data.size() < kSegmentHeaderSize) {
    return Status::Corruption("short wal segment " + path);
  }
  seg->path = path;
  seg->id = DecodeFixed64(data.data());
  seg->creation_time = DecodeFixed64(data.data() + 8);
  seg->min_seqnum = UINT64_MAX;
  seg->max_seqnum = 0;

  ByteReader r(std::string_view(data).substr(kSegmentHeaderSize));
  while (r.remaining() > 0) {
    uint32_t len, crc;
    std::string_view payload;
    if (!r.GetFixed32(&len) || !r.GetFixed32(&crc) ||
        !r.GetBytes(len, &payload)) {
      return Status::Corruption("truncated wal record in " + path);
    }
    if (crc32::Value(payload.data(), payload.size()) != crc) {
      return Status::Corruption("wal record checksum mismatch in " + path);
    }
    ByteReader er(payload);
    Entry e;
    if (!ReadEntry(&er, &e) || er.remaining() != 0) {
      return Status::Corruption("bad wal record in " + path);
    }
    seg->min_seqnum = std::min(seg->min_seqnum, e.seqnum);
    seg->max_seqnum = std::max(seg->max_seqnum, e.seqnum);
    if (records) records->push_back(std::move(e));
  }
  return Status::OK();
}

Status Wal::Replay(std::vector<Entry>* out) const {
  out->clear();
  for (const Segment& seg : segments_) {
    std::vector<Entry> records;
    Segment parsed;
    Status s = ReadSegment(seg.path, &parsed, &records);
    if (!s.ok()) return s;
    out->insert(out->end(), records.begin(), records.end());
  }
  std::sort(out->begin(), out->end(),
            [](const Entry& a, const Entry& b) { return a.seqnum < b.seqnum; });
  return Status::OK();
}

}  // namespace lethe
