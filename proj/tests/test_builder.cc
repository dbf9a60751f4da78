#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>

#include "core/metrics.h"
#include "doctest.h"
#include "table/table_file.h"

using namespace lethe;

namespace {

int g_dir_counter = 0;

std::string FreshDir() {
  std::string dir = "/tmp/lethe_builder_test_" + std::to_string(::getpid()) +
                    "_" + std::to_string(g_dir_counter++);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Geometry with exactly 4 entries per page: (4096 - 40) / 1000 = 4.
Options SmallOptions(uint32_t h) {
  Options opts;
  opts.entry_size_bytes = 1000;
  opts.pages_per_delete_tile = h;
  opts.pages_per_file = 16;
  return opts;
}

Entry MakePut(uint64_t sort, uint64_t del, uint64_t seq) {
  Entry e;
  e.sort_key = sort;
  e.delete_key = del;
  e.seqnum = seq;
  e.kind = EntryKind::kPut;
  e.value = std::string(1000 - kEntryHeaderSize, 'v');
  return e;
}

std::unique_ptr<TableFile> BuildFile(const Options& opts,
                                     const std::vector<Entry>& entries) {
  std::string path = FreshDir() + "/f.tbl";
  FileMetaData meta;
  meta.file_id = 1;
  Metrics metrics;
  std::unique_ptr<TableFile> f;
  REQUIRE(TableFile::Build(path, opts, entries, {}, meta, &metrics, &f).ok());
  return f;
}

}  // namespace

TEST_CASE("two stage sort hand trace") {
  // h=2, 4 entries per page, 8 entries whose delete keys run opposite to
  // the sort keys. The first page of the tile must hold the 4 smallest
  // delete keys, which are the 4 largest sort keys, page itself sorted on
  // the sort key again.
  Options opts = SmallOptions(2);
  REQUIRE(TableFile::EntriesPerPage(opts) == 4);

  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 8; i++) {
    entries.push_back(MakePut(i, (7 - i) * 10, i + 1));
  }
  auto f = BuildFile(opts, entries);
  REQUIRE(f->num_pages() == 2);
  REQUIRE(f->tiles().size() == 1);

  std::vector<Entry> page0, page1;
  REQUIRE(f->ReadPage(0, &page0).ok());
  REQUIRE(f->ReadPage(1, &page1).ok());
  REQUIRE(page0.size() == 4);
  REQUIRE(page1.size() == 4);
  for (size_t i = 0; i < 4; i++) {
    CHECK(page0[i].sort_key == 4 + i);  // delete keys 30..0
    CHECK(page1[i].sort_key == i);      // delete keys 70..40
  }

  const TileMeta& tile = f->tiles()[0];
  CHECK(tile.min_sort_key == 0);
  CHECK(tile.page_min_delete_keys == std::vector<uint64_t>{0, 40});
  CHECK(tile.tile_max_delete_key == 70);
}

TEST_CASE("multiset preservation over random builds") {
  std::mt19937_64 rng(55);
  for (int iter = 0; iter < 20; iter++) {
    uint32_t h = 1u << (rng() % 3);
    Options opts = SmallOptions(h);
    std::vector<Entry> entries;
    uint64_t key = 0;
    size_t n = 1 + rng() % 60;
    for (size_t i = 0; i < n; i++) {
      key += 1 + rng() % 9;
      entries.push_back(MakePut(key, rng() % 1000, i + 1));
    }
    auto f = BuildFile(opts, entries);

    std::vector<Entry> merged;
    REQUIRE(f->ReadAllSorted(&merged, nullptr).ok());
    REQUIRE(merged.size() == entries.size());
    for (size_t i = 0; i < merged.size(); i++) {
      CHECK(merged[i] == entries[i]);
    }
    CHECK(f->LiveEntryCount() == entries.size());
  }
}

TEST_CASE("h equal one is the classic layout") {
  Options opts = SmallOptions(1);
  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 40; i++) {
    entries.push_back(MakePut(i * 3, 1000 - i, i + 1));
  }
  auto f = BuildFile(opts, entries);
  CHECK(f->tiles().size() == f->num_pages());

  // Concatenated pages are globally sorted on the sort key.
  uint64_t prev = 0;
  bool first = true;
  for (uint32_t p = 0; p < f->num_pages(); p++) {
    std::vector<Entry> page;
    REQUIRE(f->ReadPage(p, &page).ok());
    for (const Entry& e : page) {
      if (!first) CHECK(e.sort_key > prev);
      prev = e.sort_key;
      first = false;
    }
  }
}

TEST_CASE("correlated keys leave the layout untouched") {
  // delete_key == sort_key: the tile-internal re-sort is the identity, so
  // any h produces the classic page sequence.
  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 64; i++) {
    entries.push_back(MakePut(i * 7, i * 7, i + 1));
  }
  for (uint32_t h : {1u, 2u, 4u, 8u}) {
    Options opts = SmallOptions(h);
    auto f = BuildFile(opts, entries);
    size_t idx = 0;
    for (uint32_t p = 0; p < f->num_pages(); p++) {
      std::vector<Entry> page;
      REQUIRE(f->ReadPage(p, &page).ok());
      for (const Entry& e : page) {
        CHECK(e.sort_key == entries[idx].sort_key);
        idx++;
      }
    }
    CHECK(idx == entries.size());
  }
}

TEST_CASE("unsorted and duplicate input rejected") {
  Options opts = SmallOptions(2);
  std::string path = FreshDir() + "/f.tbl";
  FileMetaData meta;
  Metrics metrics;
  std::unique_ptr<TableFile> f;
  std::vector<Entry> bad = {MakePut(5, 0, 1), MakePut(5, 1, 2)};
  CHECK(TableFile::Build(path, opts, bad, {}, meta, &metrics, &f)
            .IsUnsortedInput());
  bad = {MakePut(9, 0, 1), MakePut(2, 1, 2)};
  CHECK(TableFile::Build(path, opts, bad, {}, meta, &metrics, &f)
            .IsUnsortedInput());
}

TEST_CASE("file meta aggregates") {
  Options opts = SmallOptions(2);
  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 10; i++) {
    Entry e = MakePut(i, i + 100, i + 1);
    if (i < 2) {
      e.kind = EntryKind::kPointTombstone;
      e.value.clear();
      e.delete_key = kTombstoneDeleteKey;
    }
    entries.push_back(e);
  }
  auto f = BuildFile(opts, entries);
  CHECK(f->meta().num_entries == 10);
  CHECK(f->meta().point_tombstones == 2);
  CHECK(f->meta().age_anchor_seqnum == uint64_t{1});
  CHECK(f->meta().min_sort_key == 0);
  CHECK(f->meta().max_sort_key == 9);
  // Histogram counts live puts only.
  CHECK(f->meta().histogram.Total() == 8);
}

TEST_CASE("open round trips the footer") {
  Options opts = SmallOptions(4);
  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 50; i++) {
    entries.push_back(MakePut(i * 2, 5000 - i * 11, i + 1));
  }
  std::string path = FreshDir() + "/f.tbl";
  FileMetaData meta;
  meta.file_id = 42;
  meta.level = 3;
  meta.ttl = 77;
  Metrics metrics;
  std::unique_ptr<TableFile> f;
  REQUIRE(TableFile::Build(path, opts, entries, {}, meta, &metrics, &f).ok());

  std::unique_ptr<TableFile> g;
  REQUIRE(TableFile::Open(path, opts, &g).ok());
  CHECK(g->meta().file_id == 42);
  CHECK(g->meta().level == 3);
  CHECK(g->meta().ttl == 77);
  CHECK(g->meta().num_entries == 50);
  CHECK(g->num_pages() == f->num_pages());
  CHECK(g->tiles().size() == f->tiles().size());

  std::vector<Entry> a, b;
  REQUIRE(f->ReadAllSorted(&a, nullptr).ok());
  REQUIRE(g->ReadAllSorted(&b, nullptr).ok());
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); i++) CHECK(a[i] == b[i]);
}

TEST_CASE("metadata footprint follows the fence layout") {
  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 64; i++) {
    entries.push_back(MakePut(i, 64 - i, i + 1));
  }
  for (uint32_t h : {1u, 2u, 4u, 8u}) {
    Options opts = SmallOptions(h);
    auto f = BuildFile(opts, entries);
    uint64_t expect = 0;
    for (const TileMeta& t : f->tiles()) {
      expect += 8 + 8 * t.num_pages + 8;  // sort key + page minima + tile max
    }
    CHECK(f->MetadataBytes() == expect);
  }
}
