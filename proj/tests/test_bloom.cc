#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "filter/bloom.h"
#include "util/coding.h"

using namespace lethe;

TEST_CASE("probe count at 10 bits per entry") {
  std::vector<uint64_t> keys = {1, 2, 3};
  PageBloomFilter f = PageBloomFilter::Build(keys, 10.0);
  // round(10 * ln 2) = 7
  CHECK(f.probes() == 7);
}

TEST_CASE("empty filter is always negative") {
  PageBloomFilter f = PageBloomFilter::Build({}, 10.0);
  for (uint64_t k = 0; k < 1000; k++) CHECK(!f.MayContain(k));
}

TEST_CASE("no false negatives") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 50; iter++) {
    std::vector<uint64_t> keys;
    for (int i = 0; i < 64; i++) keys.push_back(rng());
    PageBloomFilter f = PageBloomFilter::Build(keys, 10.0);
    for (uint64_t k : keys) CHECK(f.MayContain(k));
  }
}

TEST_CASE("one hash computation per probe or insert") {
  std::vector<uint64_t> keys = {10, 20, 30, 40};
  uint64_t hashes = 0;
  PageBloomFilter f = PageBloomFilter::Build(keys, 10.0, &hashes);
  CHECK(hashes == keys.size());
  hashes = 0;
  f.MayContain(10, &hashes);
  f.MayContain(99, &hashes);
  CHECK(hashes == 2);
}

TEST_CASE("measured FPR tracks the analytical rate") {
  // Expected rate at 10 bits/entry: e^(-10 ln^2 2) ~= 0.0082.
  std::mt19937_64 rng(99);
  std::vector<uint64_t> keys;
  for (int i = 0; i < 1000; i++) keys.push_back(rng() % 2000000);
  PageBloomFilter f = PageBloomFilter::Build(keys, 10.0);

  uint64_t positives = 0, trials = 100000;
  for (uint64_t i = 0; i < trials; i++) {
    uint64_t absent = 2000000 + i;  // outside the inserted domain
    if (f.MayContain(absent)) positives++;
  }
  double measured = static_cast<double>(positives) / trials;
  double expected = std::exp(-10.0 * std::pow(std::log(2.0), 2.0));
  CHECK(measured > expected * 0.8);
  CHECK(measured < expected * 1.2);
}

TEST_CASE("serialization round trip") {
  std::mt19937_64 rng(5);
  std::vector<uint64_t> keys;
  for (int i = 0; i < 30; i++) keys.push_back(rng());
  PageBloomFilter f = PageBloomFilter::Build(keys, 10.0);

  std::string buf;
  f.AppendTo(&buf);
  ByteReader r(buf);
  PageBloomFilter g;
  REQUIRE(PageBloomFilter::ReadFrom(&r, &g).ok());
  CHECK(g.bits() == f.bits());
  CHECK(g.probes() == f.probes());
  for (uint64_t k : keys) CHECK(g.MayContain(k));
  for (uint64_t k = 0; k < 5000; k++) {
    CHECK(f.MayContain(k) == g.MayContain(k));
  }
}
