#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>

#include "db/db.h"
#include "doctest.h"

using namespace lethe;

namespace {

int g_dir_counter = 0;

std::string FreshDir() {
  std::string dir = "/tmp/lethe_db_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(g_dir_counter++);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// 1024-byte encoded entries; manual flush control by default.
Options TestOptions() {
  Options opts;
  opts.entry_size_bytes = 1024;
  opts.pages_per_file = 4;
  opts.size_ratio = 2;
  opts.buffer_capacity_bytes = 1 << 20;
  opts.auto_compact = false;
  opts.ingest_per_second = 1;  // one logical second per op
  return opts;
}

std::string Value(char fill = 'v') {
  return std::string(1024 - kEntryHeaderSize, fill);
}

std::unique_ptr<DB> OpenDb(const std::string& dir, const Options& opts) {
  std::unique_ptr<DB> db;
  REQUIRE(DB::Open(dir, opts, &db).ok());
  return db;
}

}  // namespace

TEST_CASE("last writer wins in the buffer") {
  auto db = OpenDb(FreshDir(), TestOptions());
  REQUIRE(db->Put(7, 0, "v1").ok());
  REQUIRE(db->Put(7, 0, "v2").ok());
  std::string v;
  REQUIRE(db->Get(7, &v).ok());
  CHECK(v == "v2");
  CHECK(db->BufferEntryCount() == 1);
}

TEST_CASE("get on an empty tree reads nothing") {
  auto db = OpenDb(FreshDir(), TestOptions());
  std::string v;
  LookupStats stats;
  CHECK(db->Get(42, &v, &stats).IsNotFound());
  CHECK(stats.pages_read == 0);
}

TEST_CASE("operations after close fail") {
  auto db = OpenDb(FreshDir(), TestOptions());
  REQUIRE(db->Put(1, 0, "v").ok());
  REQUIRE(db->Close().ok());
  CHECK(db->Put(2, 0, "v").IsInvalidArgument());
  std::string v;
  CHECK(db->Get(1, &v).IsInvalidArgument());
}

TEST_CASE("buffer capacity triggers exactly one flush") {
  Options opts = TestOptions();
  opts.buffer_capacity_bytes = 10 * 1024;
  auto db = OpenDb(FreshDir(), opts);
  for (uint64_t i = 0; i < 10; i++) {
    REQUIRE(db->Put(i, i, Value()).ok());
  }
  CHECK(db->metrics().flushes == 1);
  CHECK(db->BufferEntryCount() == 0);
  for (uint64_t i = 0; i < 10; i++) {
    std::string v;
    CHECK(db->Get(i, &v).ok());
  }
}

TEST_CASE("empty flush is a no-op") {
  auto db = OpenDb(FreshDir(), TestOptions());
  REQUIRE(db->Flush().ok());
  CHECK(db->metrics().flushes == 0);
}

TEST_CASE("blind deletes are suppressed") {
  auto db = OpenDb(FreshDir(), TestOptions());
  REQUIRE(db->Put(1, 0, Value()).ok());
  REQUIRE(db->Flush().ok());

  DeleteResult res;
  REQUIRE(db->Delete(999, &res).ok());
  CHECK(res == DeleteResult::kSuppressedBlind);
  CHECK(db->LiveTombstoneCount() == 0);
  CHECK(db->metrics().blind_deletes_suppressed == 1);

  // A key that is live on disk always admits its tombstone.
  REQUIRE(db->Delete(1, &res).ok());
  CHECK(res == DeleteResult::kInserted);
  std::string v;
  CHECK(db->Get(1, &v).IsNotFound());
}

TEST_CASE("double delete keeps a single buffer tombstone") {
  auto db = OpenDb(FreshDir(), TestOptions());
  REQUIRE(db->Put(5, 0, Value()).ok());
  DeleteResult res;
  REQUIRE(db->Delete(5, &res).ok());
  REQUIRE(db->Delete(5, &res).ok());
  CHECK(db->BufferEntryCount() == 1);
  CHECK(db->LiveTombstoneCount() == 1);
}

TEST_CASE("range delete semantics") {
  auto db = OpenDb(FreshDir(), TestOptions());
  CHECK(db->RangeDelete(10, 10).IsInvalidArgument());
  CHECK(db->RangeDelete(20, 10).IsInvalidArgument());

  for (uint64_t i = 0; i < 30; i++) REQUIRE(db->Put(i, i, Value()).ok());
  REQUIRE(db->Flush().ok());
  REQUIRE(db->RangeDelete(10, 20).ok());

  std::string v;
  CHECK(db->Get(15, &v).IsNotFound());
  CHECK(db->Get(25, &v).ok());

  std::vector<Entry> out;
  REQUIRE(db->RangeScan(0, UINT64_MAX, &out).ok());
  CHECK(out.size() == 20);

  // Overlapping range deletes behave as the union of the ranges.
  REQUIRE(db->RangeDelete(15, 27).ok());
  REQUIRE(db->RangeScan(0, UINT64_MAX, &out).ok());
  CHECK(out.size() == 13);
  CHECK(db->Get(26, &v).IsNotFound());
  CHECK(db->Get(27, &v).ok());
}

TEST_CASE("delete everything leaves an empty scan") {
  auto db = OpenDb(FreshDir(), TestOptions());
  for (uint64_t i = 0; i < 20; i++) REQUIRE(db->Put(i * 5, i, Value()).ok());
  REQUIRE(db->Flush().ok());
  REQUIRE(db->RangeDelete(0, UINT64_MAX).ok());
  std::vector<Entry> out;
  REQUIRE(db->RangeScan(0, UINT64_MAX, &out).ok());
  CHECK(out.empty());
}

TEST_CASE("reopen replays the manifest") {
  std::string dir = FreshDir();
  Options opts = TestOptions();
  {
    auto db = OpenDb(dir, opts);
    for (uint64_t i = 0; i < 40; i++) {
      REQUIRE(db->Put(i, i + 100, Value()).ok());
      if (i % 10 == 9) REQUIRE(db->Flush().ok());
    }
    REQUIRE(db->Close().ok());
  }
  auto db = OpenDb(dir, opts);
  for (uint64_t i = 0; i < 40; i++) {
    std::string v;
    CHECK(db->Get(i, &v).ok());
  }
  std::vector<Entry> out;
  REQUIRE(db->RangeScan(0, UINT64_MAX, &out).ok());
  CHECK(out.size() == 40);
}

TEST_CASE("wal recovers an unflushed buffer after a crash") {
  std::string dir = FreshDir();
  Options opts = TestOptions();
  opts.wal_enabled = true;
  {
    std::unique_ptr<DB> db;
    REQUIRE(DB::Open(dir, opts, &db).ok());
    REQUIRE(db->Put(1, 0, "hello").ok());
    REQUIRE(db->Put(2, 0, "world").ok());
    REQUIRE(db->Delete(1).ok());
    REQUIRE(db->RangeDelete(100, 200).ok());
    db.release();  // simulated crash: no Close, no flush
  }
  auto db = OpenDb(dir, opts);
  std::string v;
  CHECK(db->Get(1, &v).IsNotFound());
  REQUIRE(db->Get(2, &v).ok());
  CHECK(v == "world");
  CHECK(db->Get(150, &v).IsNotFound());
}

TEST_CASE("space amplification arithmetic") {
  SUBCASE("unique keys, no deletes") {
    auto db = OpenDb(FreshDir(), TestOptions());
    for (uint64_t i = 0; i < 12; i++) REQUIRE(db->Put(i, i, Value()).ok());
    REQUIRE(db->Flush().ok());
    double amp = -1;
    REQUIRE(db->ComputeSpaceAmp(&amp).ok());
    CHECK(amp == doctest::Approx(0.0));
  }

  SUBCASE("one superseded update") {
    // Two copies of one 1024-byte entry, one unique: (2048-1024)/1024 = 1.
    auto db = OpenDb(FreshDir(), TestOptions());
    REQUIRE(db->Put(1, 0, Value('a')).ok());
    REQUIRE(db->Flush().ok());
    REQUIRE(db->Put(1, 0, Value('b')).ok());
    double amp = -1;
    REQUIRE(db->ComputeSpaceAmp(&amp).ok());
    CHECK(amp == doctest::Approx(1.0));
  }

  SUBCASE("superseding tombstone counts as superfluous bytes") {
    // Live 1024B entry plus a 29-byte tombstone shadowing a 1024B entry:
    // (1024 + 1024 + 29 - 1024) / 1024.
    auto db = OpenDb(FreshDir(), TestOptions());
    REQUIRE(db->Put(1, 0, Value('a')).ok());
    REQUIRE(db->Put(5, 0, Value('c')).ok());
    REQUIRE(db->Flush().ok());
    REQUIRE(db->Delete(1).ok());
    double amp = -1;
    REQUIRE(db->ComputeSpaceAmp(&amp).ok());
    CHECK(amp == doctest::Approx((1024.0 + 29.0) / 1024.0));
  }

  SUBCASE("empty tree reports as such") {
    auto db = OpenDb(FreshDir(), TestOptions());
    double amp = -1;
    CHECK(db->ComputeSpaceAmp(&amp).IsEmptyTree());
  }
}

TEST_CASE("tombstones are purged when merging with the last level") {
  auto db = OpenDb(FreshDir(), TestOptions());
  for (uint64_t i = 0; i < 10; i++) REQUIRE(db->Put(i, i, Value()).ok());
  REQUIRE(db->Flush().ok());
  REQUIRE(db->Delete(3).ok());
  REQUIRE(db->Flush().ok());  // single disk level: merge drops the tombstone
  CHECK(db->LiveTombstoneCount() == 0);
  std::string v;
  CHECK(db->Get(3, &v).IsNotFound());
  std::vector<Entry> out;
  REQUIRE(db->RangeScan(0, UINT64_MAX, &out).ok());
  CHECK(out.size() == 9);
}

TEST_CASE("tombstones persist while deeper levels hold data") {
  Options opts = TestOptions();
  opts.buffer_capacity_bytes = 4 * 1024;
  opts.auto_compact = true;
  opts.fade_enabled = false;
  auto db = OpenDb(FreshDir(), opts);
  for (uint64_t i = 0; i < 60; i++) REQUIRE(db->Put(i, i, Value()).ok());
  REQUIRE(db->Flush().ok());
  REQUIRE(db->MaintainUntilQuiescent().ok());
  REQUIRE(db->tree().DeepestNonEmptyLevel() > 0);

  REQUIRE(db->Delete(0).ok());
  REQUIRE(db->Flush().ok());
  CHECK(db->LiveTombstoneCount() >= 1);
  std::string v;
  CHECK(db->Get(0, &v).IsNotFound());
}

TEST_CASE("secondary range delete and lookup") {
  Options opts = TestOptions();
  opts.pages_per_delete_tile = 2;
  opts.pages_per_file = 8;
  auto db = OpenDb(FreshDir(), opts);
  // Delete keys run opposite to sort keys so tiles interleave.
  for (uint64_t i = 0; i < 24; i++) {
    REQUIRE(db->Put(i, 1000 - i * 10, Value()).ok());
  }
  REQUIRE(db->Flush().ok());

  std::vector<Entry> hits;
  REQUIRE(db->SecondaryRangeLookup(800, 950, &hits).ok());
  CHECK(hits.size() == 15);  // delete keys 800, 810, ..., 940
  for (size_t i = 1; i < hits.size(); i++) {
    CHECK(hits[i - 1].delete_key <= hits[i].delete_key);
  }

  SecondaryDeleteStats stats;
  REQUIRE(db->SecondaryRangeDelete(800, 950, &stats).ok());
  CHECK(stats.full_drops + stats.partial_edits > 0);

  REQUIRE(db->SecondaryRangeLookup(800, 950, &hits).ok());
  CHECK(hits.empty());
  std::vector<Entry> out;
  REQUIRE(db->RangeScan(0, UINT64_MAX, &out).ok());
  CHECK(out.size() == 9);
  for (const Entry& e : out) {
    CHECK((e.delete_key < 800 || e.delete_key >= 950));
  }

  CHECK(db->SecondaryRangeDelete(10, 10, &stats).IsInvalidArgument());
}

TEST_CASE("secondary delete also clears the buffer") {
  auto db = OpenDb(FreshDir(), TestOptions());
  REQUIRE(db->Put(1, 100, Value()).ok());
  REQUIRE(db->Put(2, 200, Value()).ok());
  SecondaryDeleteStats stats;
  REQUIRE(db->SecondaryRangeDelete(50, 150, &stats).ok());
  CHECK(stats.buffer_removed == 1);
  std::string v;
  CHECK(db->Get(1, &v).IsNotFound());
  CHECK(db->Get(2, &v).ok());
}

TEST_CASE("metadata overhead is one extra fence per tile") {
  Options opts = TestOptions();
  opts.pages_per_delete_tile = 2;
  opts.pages_per_file = 8;
  auto db = OpenDb(FreshDir(), opts);
  for (uint64_t i = 0; i < 24; i++) {
    REQUIRE(db->Put(i, 1000 - i, Value()).ok());
  }
  REQUIRE(db->Flush().ok());
  uint64_t tiles = 0;
  for (const auto& level : db->tree().levels) {
    for (const auto& f : level) tiles += f->tiles().size();
  }
  CHECK(tiles > 0);
  CHECK(db->MetadataOverheadBytes() == 8 * tiles);
}

TEST_CASE("logical clock advances with ingestion") {
  Options opts = TestOptions();
  opts.ingest_per_second = 4;
  auto db = OpenDb(FreshDir(), opts);
  CHECK(db->Now() == 0);
  for (uint64_t i = 0; i < 8; i++) REQUIRE(db->Put(i, i, "v").ok());
  CHECK(db->Now() == 2);
  db->SkipTime(100);
  CHECK(db->Now() == 102);
}
