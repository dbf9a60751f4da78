#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <map>

#include "doctest.h"
#include "fade/picker.h"

using namespace lethe;

namespace {

int g_dir_counter = 0;

std::string FreshDir() {
  std::string dir = "/tmp/lethe_picker_test_" + std::to_string(::getpid()) +
                    "_" + std::to_string(g_dir_counter++);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Options TestOptions() {
  Options opts;
  opts.entry_size_bytes = 100;
  opts.buffer_capacity_bytes = 1000;
  opts.size_ratio = 2;
  opts.pages_per_file = 16;
  return opts;
}

struct FileSpec {
  uint64_t file_id = 0;
  uint32_t level = 0;
  uint64_t lo = 0;
  uint64_t hi = 0;       // inclusive upper sort key
  uint64_t entries = 10;
  uint64_t tombstones = 0;
  uint64_t arrival = 0;
  uint64_t ttl = 0;
  double b = 0;
};

class TreeBuilder {
 public:
  TreeBuilder() : dir_(FreshDir()), opts_(TestOptions()) {
    tree_.levels.resize(8);
  }

  void Add(const FileSpec& spec) {
    std::vector<Entry> entries;
    uint64_t step = spec.entries > 1 ? (spec.hi - spec.lo) / (spec.entries - 1)
                                     : 1;
    if (step == 0) step = 1;
    for (uint64_t i = 0; i < spec.entries; i++) {
      Entry e;
      e.sort_key = spec.lo + i * step;
      e.seqnum = next_seq_++;
      if (i < spec.tombstones) {
        e.kind = EntryKind::kPointTombstone;
        e.delete_key = kTombstoneDeleteKey;
      } else {
        e.kind = EntryKind::kPut;
        e.delete_key = e.sort_key;
        e.value = std::string(100 - kEntryHeaderSize, 'x');
      }
      entries.push_back(e);
    }
    FileMetaData meta;
    meta.file_id = spec.file_id;
    meta.level = spec.level;
    meta.level_arrival_time = spec.arrival;
    meta.ttl = spec.ttl;
    Metrics metrics;
    std::unique_ptr<TableFile> f;
    std::string path = dir_ + "/" + std::to_string(spec.file_id) + ".tbl";
    REQUIRE(TableFile::Build(path, opts_, entries, {}, meta, &metrics, &f)
                .ok());
    f->mutable_meta()->invalidation_estimate = spec.b;
    tree_.levels[spec.level].push_back(std::move(f));
  }

  void SetAge(uint64_t file_id, uint64_t age) { ages_[file_id] = age; }

  TombstoneAgeFn AgeFn() const {
    return [this](const FileMetaData& m) {
      auto it = ages_.find(m.file_id);
      return it == ages_.end() ? uint64_t{0} : it->second;
    };
  }

  const TreeVersion& tree() const { return tree_; }
  const Options& opts() const { return opts_; }

 private:
  std::string dir_;
  Options opts_;
  TreeVersion tree_;
  uint64_t next_seq_ = 1;
  std::map<uint64_t, uint64_t> ages_;
};

TtlSchedule MakeTtls(uint64_t d_th, uint32_t t, uint32_t k) {
  TtlSchedule s;
  REQUIRE(ComputeTtls(d_th, t, k, &s).ok());
  return s;
}

}  // namespace

TEST_CASE("quiet tree yields no plan") {
  TreeBuilder b;
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 100, .entries = 5});
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 10,
                               b.AgeFn());
  CHECK(!plan.has_value());
}

TEST_CASE("expired ttl fires without saturation") {
  TreeBuilder b;
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 100, .entries = 5,
         .tombstones = 1, .arrival = 0, .ttl = 20});
  b.Add({.file_id = 2, .level = 1, .lo = 0, .hi = 100, .entries = 5});
  b.SetAge(1, 25);
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 25,
                               b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->mode == CompactionPlan::Mode::kDD);
  CHECK(plan->trigger == CompactionPlan::Trigger::kTtlExpiry);
  CHECK(plan->file_id == 1);
  CHECK(plan->source_level == 0);
  CHECK(plan->target_level == 1);
  CHECK(plan->target_file_ids == std::vector<uint64_t>{2});
}

TEST_CASE("deadline takes priority over saturation") {
  TreeBuilder b;
  // Level 0 saturated (3 files x 10 entries x 100B = 3000B > 2000B cap),
  // but file 9's tombstone deadline expired at a deeper level.
  for (uint64_t id = 1; id <= 3; id++) {
    b.Add({.file_id = id, .level = 0, .lo = id * 1000, .hi = id * 1000 + 900,
           .entries = 10});
  }
  b.Add({.file_id = 9, .level = 1, .lo = 0, .hi = 100, .entries = 5,
         .tombstones = 2, .arrival = 0, .ttl = 10});
  b.Add({.file_id = 10, .level = 2, .lo = 0, .hi = 100, .entries = 5});
  b.SetAge(9, 50);
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 3), 50,
                               b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->mode == CompactionPlan::Mode::kDD);
  CHECK(plan->file_id == 9);
}

TEST_CASE("fade disabled ignores deadlines") {
  TreeBuilder b;
  Options opts = b.opts();
  opts.fade_enabled = false;
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 100, .entries = 5,
         .tombstones = 1, .arrival = 0, .ttl = 20});
  b.SetAge(1, 1000);
  auto plan =
      EvaluateTriggers(b.tree(), opts, MakeTtls(100, 2, 2), 1000, b.AgeFn());
  CHECK(!plan.has_value());
}

TEST_CASE("deadline ties break toward oldest then shallowest then fullest") {
  TreeBuilder b;
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 50, .entries = 5,
         .tombstones = 1, .arrival = 0, .ttl = 5});
  b.Add({.file_id = 2, .level = 1, .lo = 0, .hi = 50, .entries = 5,
         .tombstones = 1, .arrival = 0, .ttl = 5});
  b.Add({.file_id = 3, .level = 1, .lo = 100, .hi = 150, .entries = 5,
         .tombstones = 3, .arrival = 0, .ttl = 5});

  SUBCASE("oldest tombstone wins") {
    b.SetAge(1, 30);
    b.SetAge(2, 40);
    b.SetAge(3, 10);
    auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 50,
                                 b.AgeFn());
    REQUIRE(plan.has_value());
    CHECK(plan->file_id == 2);
  }
  SUBCASE("equal age prefers the smaller level") {
    b.SetAge(1, 30);
    b.SetAge(2, 30);
    b.SetAge(3, 30);
    auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 50,
                                 b.AgeFn());
    REQUIRE(plan.has_value());
    CHECK(plan->file_id == 1);
  }
  SUBCASE("within a level the most tombstones win") {
    b.SetAge(2, 30);
    b.SetAge(3, 30);
    auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 50,
                                 b.AgeFn());
    REQUIRE(plan.has_value());
    CHECK(plan->file_id == 3);
  }
}

TEST_CASE("expired file at the deepest level self-rewrites") {
  TreeBuilder b;
  b.Add({.file_id = 1, .level = 2, .lo = 0, .hi = 100, .entries = 5,
         .tombstones = 1, .arrival = 0, .ttl = 10});
  b.SetAge(1, 500);
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 500,
                               b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->source_level == 2);
  CHECK(plan->target_level == 2);
  CHECK(plan->target_file_ids.empty());
}

TEST_CASE("overlap selection picks the least entangled file") {
  TreeBuilder b;
  // Candidate A [0,900] overlaps three target files; B [5000,5900] one.
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 900, .entries = 11});
  b.Add({.file_id = 2, .level = 0, .lo = 5000, .hi = 5900, .entries = 11});
  b.Add({.file_id = 11, .level = 1, .lo = 0, .hi = 300, .entries = 5});
  b.Add({.file_id = 12, .level = 1, .lo = 400, .hi = 600, .entries = 5});
  b.Add({.file_id = 13, .level = 1, .lo = 700, .hi = 1000, .entries = 5});
  b.Add({.file_id = 14, .level = 1, .lo = 5500, .hi = 6000, .entries = 5});
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 10,
                               b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->trigger == CompactionPlan::Trigger::kSaturation);
  CHECK(plan->mode == CompactionPlan::Mode::kSO);
  CHECK(plan->file_id == 2);
  CHECK(plan->target_file_ids == std::vector<uint64_t>{14});
}

TEST_CASE("overlap ties break toward the most tombstones") {
  TreeBuilder b;
  // Tombstones are header-only, so file 2 carries extra puts to keep the
  // level saturated.
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 900, .entries = 11});
  b.Add({.file_id = 2, .level = 0, .lo = 5000, .hi = 5900, .entries = 15,
         .tombstones = 4});
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 10,
                               b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->file_id == 2);
}

TEST_CASE("delete driven selection picks the highest estimated yield") {
  TreeBuilder b;
  Options opts = b.opts();
  opts.selection = Options::Selection::kDelete;
  b.Add({.file_id = 1, .level = 0, .lo = 0, .hi = 900, .entries = 11,
         .b = 2.0});
  b.Add({.file_id = 2, .level = 0, .lo = 5000, .hi = 5900, .entries = 11,
         .b = 9.0});
  auto plan =
      EvaluateTriggers(b.tree(), opts, MakeTtls(100, 2, 2), 10, b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->mode == CompactionPlan::Mode::kSD);
  CHECK(plan->file_id == 2);
}

TEST_CASE("saturation reports the smallest saturated level") {
  TreeBuilder b;
  for (uint64_t id = 1; id <= 3; id++) {
    b.Add({.file_id = id, .level = 0, .lo = id * 1000, .hi = id * 1000 + 900,
           .entries = 10});
  }
  for (uint64_t id = 11; id <= 16; id++) {
    b.Add({.file_id = id, .level = 1, .lo = id * 1000, .hi = id * 1000 + 900,
           .entries = 10});
  }
  auto plan = EvaluateTriggers(b.tree(), b.opts(), MakeTtls(100, 2, 2), 10,
                               b.AgeFn());
  REQUIRE(plan.has_value());
  CHECK(plan->source_level == 0);
}

TEST_CASE("level capacity doubles per level") {
  Options opts = TestOptions();
  CHECK(LevelCapacityBytes(opts, 0) == 2000);
  CHECK(LevelCapacityBytes(opts, 1) == 4000);
  CHECK(LevelCapacityBytes(opts, 2) == 8000);
}
