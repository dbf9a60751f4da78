#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "core/page.h"
#include "doctest.h"

using namespace lethe;

namespace {

Entry MakePut(uint64_t sort, uint64_t del, uint64_t seq, std::string value) {
  Entry e;
  e.sort_key = sort;
  e.delete_key = del;
  e.seqnum = seq;
  e.kind = EntryKind::kPut;
  e.value = std::move(value);
  return e;
}

}  // namespace

TEST_CASE("empty page encodes with sentinel extremes") {
  std::string page;
  REQUIRE(EncodePage({}, 4096, &page).ok());
  CHECK(page.size() == 4096);

  std::vector<Entry> out;
  PageHeader hdr;
  REQUIRE(DecodePage(page, &out, &hdr).ok());
  CHECK(out.empty());
  CHECK(hdr.entry_count == 0);
  CHECK(hdr.min_sort_key == UINT64_MAX);
  CHECK(hdr.max_sort_key == 0);
}

TEST_CASE("singleton header extremes") {
  std::string page;
  REQUIRE(EncodePage({MakePut(5, 9, 1, "v")}, 4096, &page).ok());
  std::vector<Entry> out;
  PageHeader hdr;
  REQUIRE(DecodePage(page, &out, &hdr).ok());
  CHECK(hdr.min_sort_key == 5);
  CHECK(hdr.max_sort_key == 5);
  CHECK(hdr.min_delete_key == 9);
  CHECK(hdr.max_delete_key == 9);
}

TEST_CASE("page capacity accounts for the header") {
  // Four 1KB entries exceed a 4KB page once the header is paid for.
  CHECK(PageCapacity(4096, 1024) == 3);
  std::vector<Entry> entries;
  for (uint64_t i = 0; i < 4; i++) {
    entries.push_back(MakePut(i, i, i + 1, std::string(1024 - kEntryHeaderSize, 'x')));
  }
  std::string page;
  CHECK(EncodePage(entries, 4096, &page).IsOverflow());
  entries.pop_back();
  CHECK(EncodePage(entries, 4096, &page).ok());
}

TEST_CASE("unsorted input rejected") {
  std::string page;
  CHECK(EncodePage({MakePut(7, 0, 1, "a"), MakePut(3, 0, 2, "b")}, 4096, &page)
            .IsUnsortedInput());
}

TEST_CASE("round trip identity over random pages") {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 200; iter++) {
    uint32_t n = rng() % 16;
    std::vector<Entry> entries;
    uint64_t key = rng() % 1000;
    for (uint32_t i = 0; i < n; i++) {
      key += 1 + rng() % 50;
      Entry e = MakePut(key, rng(), rng() % 100000,
                        std::string(rng() % 100, 'a' + i % 26));
      if (rng() % 4 == 0) {
        e.kind = EntryKind::kPointTombstone;
        e.value.clear();
        e.delete_key = kTombstoneDeleteKey;
      }
      entries.push_back(e);
    }
    std::string page;
    REQUIRE(EncodePage(entries, 4096, &page).ok());
    std::vector<Entry> out;
    PageHeader hdr;
    REQUIRE(DecodePage(page, &out, &hdr).ok());
    REQUIRE(out.size() == entries.size());
    for (size_t i = 0; i < out.size(); i++) CHECK(out[i] == entries[i]);

    // Header extremes equal recomputed extremes.
    uint64_t mn = UINT64_MAX, mx = 0;
    for (const Entry& e : entries) {
      mn = std::min(mn, e.sort_key);
      mx = std::max(mx, e.sort_key);
    }
    if (!entries.empty()) {
      CHECK(hdr.min_sort_key == mn);
      CHECK(hdr.max_sort_key == mx);
    }
  }
}

TEST_CASE("corruption detected") {
  std::string page;
  REQUIRE(EncodePage({MakePut(1, 2, 3, "payload")}, 4096, &page).ok());

  SUBCASE("flipped payload byte") {
    page[100] ^= 0x40;
    std::vector<Entry> out;
    PageHeader hdr;
    CHECK(DecodePage(page, &out, &hdr).IsCorruption());
  }
  SUBCASE("zero filled buffer") {
    std::string zeros(4096, '\0');
    std::vector<Entry> out;
    PageHeader hdr;
    CHECK(DecodePage(zeros, &out, &hdr).IsCorruption());
  }
  SUBCASE("truncated buffer") {
    page.resize(1000);
    std::vector<Entry> out;
    PageHeader hdr;
    CHECK(!DecodePage(page, &out, &hdr).ok());
  }
}
