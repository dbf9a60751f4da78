#include "table/table_file.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "core/page.h"
#include "util/coding.h"

namespace lethe {

namespace {

constexpr uint64_t kTableMagic = 0x31766b656874656cull;  // "lethekv1"
constexpr uint32_t kFormatVersion = 1;
constexpr size_t kTrailerSize = 8 + 4 + 8;

Status PosixError(const std::string& context) {
  return Status::IOError(context + ": " + std::strerror(errno));
}

}  // namespace

uint32_t TileMeta::NumLivePages() const {
  uint32_t n = 0;
  for (uint8_t v : live) n += v;
  return n;
}

uint32_t TableFile::EntriesPerPage(const Options& opts) {
  return PageCapacity(opts.page_size_bytes, opts.entry_size_bytes);
}

TableFile::~TableFile() {
  if (fd_ >= 0) ::close(fd_);
}

Status TableFile::PwriteAll(uint64_t offset, const char* data, size_t n) {
  while (n > 0) {
    ssize_t w = ::pwrite(fd_, data, n, static_cast<off_t>(offset));
    if (w < 0) {
      if (errno == EINTR) continue;
      return PosixError("pwrite " + path_);
    }
    data += w;
    offset += static_cast<uint64_t>(w);
    n -= static_cast<size_t>(w);
  }
  return Status::OK();
}

Status TableFile::PreadAll(uint64_t offset, char* data, size_t n) const {
  while (n > 0) {
    ssize_t r = ::pread(fd_, data, n, static_cast<off_t>(offset));
    if (r < 0) {
      if (errno == EINTR) continue;
      return PosixError("pread " + path_);
    }
    if (r == 0) return Status::Corruption("unexpected EOF in " + path_);
    data += r;
    offset += static_cast<uint64_t>(r);
    n -= static_cast<size_t>(r);
  }
  return Status::OK();
}

Status TableFile::Build(const std::string& path, const Options& opts,
                        const std::vector<Entry>& entries,
                        std::vector<RangeTombstone> range_tombstones,
                        FileMetaData meta_in, Metrics* metrics,
                        std::unique_ptr<TableFile>* out) {
  for (size_t i = 1; i < entries.size(); i++) {
    if (entries[i - 1].sort_key >= entries[i].sort_key) {
      return Status::UnsortedInput("build input not strictly sorted");
    }
  }

  auto f = std::unique_ptr<TableFile>(new TableFile());
  f->path_ = path;
  f->page_size_ = opts.page_size_bytes;
  f->sync_ = opts.sync_files;
  f->fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
  if (f->fd_ < 0) return PosixError("open " + path);

  const uint32_t per_page = EntriesPerPage(opts);
  const uint32_t per_tile = per_page * opts.pages_per_delete_tile;
  FileMetaData& m = f->meta_;
  m = std::move(meta_in);
  m.min_sort_key = entries.empty() ? UINT64_MAX : entries.front().sort_key;
  m.max_sort_key = entries.empty() ? 0 : entries.back().sort_key;
  // The advertised sort range covers range tombstones too, so overlap-driven
  // merges always carry a tombstone into every file it may shadow.
  for (const RangeTombstone& rt : range_tombstones) {
    m.min_sort_key = std::min(m.min_sort_key, rt.lo);
    m.max_sort_key = std::max(m.max_sort_key, rt.hi - 1);
  }
  m.min_delete_key = UINT64_MAX;
  m.max_delete_key = 0;
  m.num_entries = entries.size();
  m.entry_bytes = 0;
  m.point_tombstones = 0;
  m.age_anchor_seqnum.reset();
  m.histogram = KeyHistogram();
  std::sort(range_tombstones.begin(), range_tombstones.end(),
            [](const RangeTombstone& a, const RangeTombstone& b) {
              return a.lo < b.lo;
            });
  m.range_tombstones = std::move(range_tombstones);

  for (const Entry& e : entries) {
    m.entry_bytes += e.EncodedSize();
    if (e.delete_key < m.min_delete_key) m.min_delete_key = e.delete_key;
    if (e.delete_key > m.max_delete_key) m.max_delete_key = e.delete_key;
    if (e.kind == EntryKind::kPointTombstone) {
      m.point_tombstones++;
      if (!m.age_anchor_seqnum || e.seqnum < *m.age_anchor_seqnum) {
        m.age_anchor_seqnum = e.seqnum;
      }
    } else {
      m.histogram.Add(e.sort_key);
    }
  }
  for (const RangeTombstone& rt : m.range_tombstones) {
    if (!m.age_anchor_seqnum || rt.seqnum < *m.age_anchor_seqnum) {
      m.age_anchor_seqnum = rt.seqnum;
    }
  }
  m.invalidation_estimate = static_cast<double>(m.point_tombstones);

  // Tile pass: chunk on sort key, re-sort each chunk on delete key, cut
  // pages, then re-sort each page on sort key.
  std::string page_buf;
  uint32_t page_index = 0;
  for (size_t base = 0; base < entries.size(); base += per_tile) {
    size_t tile_n = std::min<size_t>(per_tile, entries.size() - base);
    std::vector<Entry> tile(entries.begin() + base,
                            entries.begin() + base + tile_n);

    TileMeta tm;
    tm.first_page = page_index;
    tm.min_sort_key = tile.front().sort_key;
    tm.tile_max_delete_key = 0;
    for (const Entry& e : tile) {
      tm.tile_max_delete_key = std::max(tm.tile_max_delete_key, e.delete_key);
    }
    std::stable_sort(tile.begin(), tile.end(),
                     [](const Entry& a, const Entry& b) {
                       return a.delete_key < b.delete_key;
                     });

    for (size_t p = 0; p < tile.size(); p += per_page) {
      size_t page_n = std::min<size_t>(per_page, tile.size() - p);
      std::vector<Entry> page(tile.begin() + p, tile.begin() + p + page_n);
      tm.page_min_delete_keys.push_back(page.front().delete_key);
      std::stable_sort(page.begin(), page.end(),
                       [](const Entry& a, const Entry& b) {
                         return a.sort_key < b.sort_key;
                       });

      Status s = EncodePage(page, f->page_size_, &page_buf);
      if (!s.ok()) return s;
      s = f->PwriteAll(static_cast<uint64_t>(page_index) * f->page_size_,
                       page_buf.data(), page_buf.size());
      if (!s.ok()) return s;

      std::vector<uint64_t> keys;
      keys.reserve(page.size());
      uint64_t bytes = 0;
      for (const Entry& e : page) {
        keys.push_back(e.sort_key);
        bytes += e.EncodedSize();
      }
      uint64_t* hash_ctr = metrics ? &metrics->hash_computations : nullptr;
      f->filters_.push_back(
          PageBloomFilter::Build(keys, opts.bits_per_entry, hash_ctr));
      f->page_entry_counts_.push_back(static_cast<uint32_t>(page.size()));
      f->page_entry_bytes_.push_back(bytes);
      tm.live.push_back(1);
      tm.num_pages++;
      if (metrics) {
        metrics->pages_written++;
        metrics->bytes_written += bytes;
      }
      page_index++;
    }
    f->sort_fences_.Add(tm.min_sort_key);
    f->tiles_.push_back(std::move(tm));
  }
  f->num_pages_ = page_index;

  // Range-tombstone block sits between the pages and the footer.
  std::string rt_block;
  for (const RangeTombstone& rt : m.range_tombstones) {
    PutFixed64(&rt_block, rt.lo);
    PutFixed64(&rt_block, rt.hi);
    PutFixed64(&rt_block, rt.seqnum);
    if (metrics) metrics->bytes_written += rt.EncodedSize();
  }
  uint64_t pages_end = static_cast<uint64_t>(f->num_pages_) * f->page_size_;
  Status s = f->PwriteAll(pages_end, rt_block.data(), rt_block.size());
  if (!s.ok()) return s;
  f->footer_offset_ = pages_end + rt_block.size();

  s = f->WriteFooter();
  if (!s.ok()) return s;
  *out = std::move(f);
  return Status::OK();
}

void TableFile::SerializeFooter(std::string* out) const {
  out->clear();
  const FileMetaData& m = meta_;
  PutFixed64(out, m.file_id);
  PutFixed32(out, m.level);
  PutFixed64(out, m.min_sort_key);
  PutFixed64(out, m.max_sort_key);
  PutFixed64(out, m.min_delete_key);
  PutFixed64(out, m.max_delete_key);
  PutFixed64(out, m.num_entries);
  PutFixed64(out, m.entry_bytes);
  PutFixed64(out, m.point_tombstones);
  out->push_back(m.age_anchor_seqnum ? 1 : 0);
  PutFixed64(out, m.age_anchor_seqnum.value_or(0));
  uint64_t b_bits;
  std::memcpy(&b_bits, &m.invalidation_estimate, 8);
  PutFixed64(out, b_bits);
  PutFixed64(out, m.level_arrival_time);
  PutFixed64(out, m.ttl);
  PutFixed64(out, m.range_tombstones.size());
  for (uint32_t i = 0; i < KeyHistogram::kBuckets; i++) {
    PutFixed64(out, m.histogram.bucket(i));
  }

  PutFixed32(out, page_size_);
  PutFixed32(out, num_pages_);
  PutFixed32(out, static_cast<uint32_t>(tiles_.size()));
  for (const TileMeta& t : tiles_) {
    PutFixed32(out, t.first_page);
    PutFixed32(out, t.num_pages);
    PutFixed64(out, t.min_sort_key);
    PutFixed64(out, t.tile_max_delete_key);
    for (uint64_t v : t.page_min_delete_keys) PutFixed64(out, v);
    for (uint8_t v : t.live) out->push_back(static_cast<char>(v));
  }
  for (uint32_t p = 0; p < num_pages_; p++) {
    filters_[p].AppendTo(out);
    PutFixed32(out, page_entry_counts_[p]);
    PutFixed64(out, page_entry_bytes_[p]);
  }
}

Status TableFile::WriteFooter() {
  std::string footer;
  SerializeFooter(&footer);
  PutFixed64(&footer, footer.size());
  PutFixed32(&footer, kFormatVersion);
  PutFixed64(&footer, kTableMagic);

  if (::ftruncate(fd_, static_cast<off_t>(footer_offset_)) != 0) {
    return PosixError("ftruncate " + path_);
  }
  Status s = PwriteAll(footer_offset_, footer.data(), footer.size());
  if (!s.ok()) return s;
  if (sync_ && ::fsync(fd_) != 0) return PosixError("fsync " + path_);
  return Status::OK();
}

Status TableFile::ParseFooter(std::string_view footer, TableFile* f) {
  ByteReader r(footer);
  FileMetaData& m = f->meta_;
  uint8_t has_anchor = 0;
  uint64_t anchor = 0, b_bits = 0, rt_count = 0;
  uint32_t level = 0;
  if (!r.GetFixed64(&m.file_id) || !r.GetFixed32(&level) ||
      !r.GetFixed64(&m.min_sort_key) || !r.GetFixed64(&m.max_sort_key) ||
      !r.GetFixed64(&m.min_delete_key) || !r.GetFixed64(&m.max_delete_key) ||
      !r.GetFixed64(&m.num_entries) || !r.GetFixed64(&m.entry_bytes) ||
      !r.GetFixed64(&m.point_tombstones) || !r.GetByte(&has_anchor) ||
      !r.GetFixed64(&anchor) || !r.GetFixed64(&b_bits) ||
      !r.GetFixed64(&m.level_arrival_time) || !r.GetFixed64(&m.ttl) ||
      !r.GetFixed64(&rt_count)) {
    return Status::Corruption("short table footer");
  }
  m.level = level;
  if (has_anchor) m.age_anchor_seqnum = anchor;
  std::memcpy(&m.invalidation_estimate, &b_bits, 8);
  for (uint32_t i = 0; i < KeyHistogram::kBuckets; i++) {
    uint64_t v;
    if (!r.GetFixed64(&v)) return Status::Corruption("short footer histogram");
    m.histogram.set_bucket(i, v);
  }

  uint32_t num_tiles = 0;
  if (!r.GetFixed32(&f->page_size_) || !r.GetFixed32(&f->num_pages_) ||
      !r.GetFixed32(&num_tiles)) {
    return Status::Corruption("short footer geometry");
  }
  f->tiles_.resize(num_tiles);
  for (TileMeta& t : f->tiles_) {
    if (!r.GetFixed32(&t.first_page) || !r.GetFixed32(&t.num_pages) ||
        !r.GetFixed64(&t.min_sort_key) ||
        !r.GetFixed64(&t.tile_max_delete_key)) {
      return Status::Corruption("short tile meta");
    }
    t.page_min_delete_keys.resize(t.num_pages);
    for (uint64_t& v : t.page_min_delete_keys) {
      if (!r.GetFixed64(&v)) return Status::Corruption("short tile fences");
    }
    t.live.resize(t.num_pages);
    for (uint8_t& v : t.live) {
      if (!r.GetByte(&v)) return Status::Corruption("short tile bitmap");
    }
    f->sort_fences_.Add(t.min_sort_key);
  }
  f->filters_.resize(f->num_pages_);
  f->page_entry_counts_.resize(f->num_pages_);
  f->page_entry_bytes_.resize(f->num_pages_);
  for (uint32_t p = 0; p < f->num_pages_; p++) {
    Status s = PageBloomFilter::ReadFrom(&r, &f->filters_[p]);
    if (!s.ok()) return s;
    if (!r.GetFixed32(&f->page_entry_counts_[p]) ||
        !r.GetFixed64(&f->page_entry_bytes_[p])) {
      return Status::Corruption("short page accounting");
    }
  }
  (void)rt_count;
  return Status::OK();
}

Status TableFile::Open(const std::string& path, const Options& opts,
                       std::unique_ptr<TableFile>* out) {
  auto f = std::unique_ptr<TableFile>(new TableFile());
  f->path_ = path;
  f->sync_ = opts.sync_files;
  f->fd_ = ::open(path.c_str(), O_RDWR);
  if (f->fd_ < 0) return PosixError("open " + path);
  struct stat st;
  if (::fstat(f->fd_, &st) != 0) return PosixError("fstat " + path);
  uint64_t size = static_cast<uint64_t>(st.st_size);
  if (size < kTrailerSize) return Status::Corruption("table too small: " + path);

  char trailer[kTrailerSize];
  Status s = f->PreadAll(size - kTrailerSize, trailer, kTrailerSize);
  if (!s.ok()) return s;
  uint64_t footer_len = DecodeFixed64(trailer);
  uint32_t version = DecodeFixed32(trailer + 8);
  uint64_t magic = DecodeFixed64(trailer + 12);
  if (magic != kTableMagic) return Status::Corruption("bad magic: " + path);
  if (version != kFormatVersion) {
    return Status::Corruption("unsupported table version");
  }
  if (footer_len + kTrailerSize > size) {
    return Status::Corruption("bad footer length");
  }

  std::string footer(footer_len, '\0');
  f->footer_offset_ = size - kTrailerSize - footer_len;
  s = f->PreadAll(f->footer_offset_, footer.data(), footer.size());
  if (!s.ok()) return s;
  s = ParseFooter(footer, f.get());
  if (!s.ok()) return s;

  // Reload the range-tombstone block that sits just before the footer.
  uint64_t pages_end = static_cast<uint64_t>(f->num_pages_) * f->page_size_;
  uint64_t rt_bytes = f->footer_offset_ - pages_end;
  if (rt_bytes > 0) {
    std::string block(rt_bytes, '\0');
    s = f->PreadAll(pages_end, block.data(), block.size());
    if (!s.ok()) return s;
    ByteReader r(block);
    std::vector<RangeTombstone> rts;
    RangeTombstone rt;
    while (r.GetFixed64(&rt.lo)) {
      if (!r.GetFixed64(&rt.hi) || !r.GetFixed64(&rt.seqnum)) {
        return Status::Corruption("truncated range-tombstone block");
      }
      rts.push_back(rt);
    }
    f->meta_.range_tombstones = std::move(rts);
  } else {
    f->meta_.range_tombstones.clear();
  }
  *out = std::move(f);
  return Status::OK();
}

Status TableFile::ReadPage(uint32_t page_index,
                           std::vector<Entry>* entries) const {
  std::string buf(page_size_, '\0');
  Status s = PreadAll(static_cast<uint64_t>(page_index) * page_size_,
                      buf.data(), buf.size());
  if (!s.ok()) return s;
  return DecodePage(buf, entries, nullptr);
}

Status TableFile::Get(uint64_t sort_key, Entry* out, bool* found,
                      LookupStats* stats, Metrics* metrics) const {
  *found = false;
  if (sort_key < meta_.min_sort_key || sort_key > meta_.max_sort_key) {
    return Status::OK();
  }
  auto tile_idx = sort_fences_.LocateTile(sort_key);
  if (!tile_idx) return Status::OK();
  const TileMeta& tile = tiles_[*tile_idx];

  std::vector<Entry> page;
  for (uint32_t slot = 0; slot < tile.num_pages; slot++) {
    if (!tile.live[slot]) continue;
    uint32_t p = tile.first_page + slot;
    uint64_t* hash_ctr = metrics ? &metrics->hash_computations : nullptr;
    bool maybe = filters_[p].MayContain(sort_key, hash_ctr);
    if (metrics) metrics->filter_probes++;
    if (stats) {
      stats->filter_probes++;
      stats->hash_computations++;
    }
    if (!maybe) continue;

    Status s = ReadPage(p, &page);
    if (!s.ok()) return s;
    if (metrics) metrics->pages_read++;
    if (stats) stats->pages_read++;
    auto it = std::lower_bound(page.begin(), page.end(), sort_key,
                               [](const Entry& e, uint64_t k) {
                                 return e.sort_key < k;
                               });
    if (it != page.end() && it->sort_key == sort_key) {
      *out = *it;
      *found = true;
      return Status::OK();
    }
  }
  return Status::OK();
}

Status TableFile::ReadTileSorted(size_t tile_index, std::vector<Entry>* out,
                                 uint64_t* pages_read) const {
  out->clear();
  const TileMeta& tile = tiles_[tile_index];
  std::vector<Entry> page;
  for (uint32_t slot = 0; slot < tile.num_pages; slot++) {
    if (!tile.live[slot]) continue;
    Status s = ReadPage(tile.first_page + slot, &page);
    if (!s.ok()) return s;
    if (pages_read) (*pages_read)++;
    out->insert(out->end(), page.begin(), page.end());
  }
  std::sort(out->begin(), out->end(), [](const Entry& a, const Entry& b) {
    return a.sort_key < b.sort_key;
  });
  return Status::OK();
}

Status TableFile::ReadAllSorted(std::vector<Entry>* out,
                                uint64_t* pages_read) const {
  out->clear();
  std::vector<Entry> tile;
  for (size_t t = 0; t < tiles_.size(); t++) {
    Status s = ReadTileSorted(t, &tile, pages_read);
    if (!s.ok()) return s;
    out->insert(out->end(), tile.begin(), tile.end());
  }
  return Status::OK();
}

Status TableFile::RewritePage(uint32_t page_index,
                              const std::vector<Entry>& entries) {
  std::string buf;
  Status s = EncodePage(entries, page_size_, &buf);
  if (!s.ok()) return s;
  s = PwriteAll(static_cast<uint64_t>(page_index) * page_size_, buf.data(),
                buf.size());
  if (!s.ok()) return s;
  page_entry_counts_[page_index] = static_cast<uint32_t>(entries.size());
  uint64_t bytes = 0;
  for (const Entry& e : entries) bytes += e.EncodedSize();
  page_entry_bytes_[page_index] = bytes;
  return Status::OK();
}

void TableFile::MarkPageDropped(size_t tile_index, size_t slot) {
  TileMeta& t = tiles_[tile_index];
  t.live[slot] = 0;
  uint32_t p = t.first_page + static_cast<uint32_t>(slot);
  page_entry_counts_[p] = 0;
  page_entry_bytes_[p] = 0;
  filters_[p] = PageBloomFilter();
}

void TableFile::ReplacePageFilter(uint32_t page_index, PageBloomFilter filter) {
  filters_[page_index] = std::move(filter);
}

void TableFile::RefreshDerivedMeta() {
  meta_.num_entries = 0;
  meta_.entry_bytes = 0;
  for (uint32_t p = 0; p < num_pages_; p++) {
    meta_.num_entries += page_entry_counts_[p];
    meta_.entry_bytes += page_entry_bytes_[p];
  }
}

uint64_t TableFile::LiveEntryCount() const {
  uint64_t n = 0;
  for (uint32_t c : page_entry_counts_) n += c;
  return n;
}

uint64_t TableFile::LivePageBytes() const {
  uint64_t n = 0;
  for (uint64_t b : page_entry_bytes_) n += b;
  return n;
}

uint64_t TableFile::MetadataBytes() const {
  // One sort key per tile plus h delete-key minima and one tile max, less
  // the single fence a classic layout would keep per page.
  uint64_t bytes = 0;
  for (const TileMeta& t : tiles_) {
    bytes += 8 + 8 * t.num_pages + 8;
  }
  return bytes;
}

}  // namespace lethe
