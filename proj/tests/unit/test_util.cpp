#include <doctest.h>

#include <atomic>
#include <set>
#include <stdexcept>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"

using namespace drivesense;

TEST_CASE("mix_seed separates streams and is stable") {
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 4; ++b) seen.insert(mix_seed(7, a, b));
  CHECK(seen.size() == 200);
  CHECK(mix_seed(0, 1) != mix_seed(1, 0));
}

TEST_CASE("stable_hash is FNV-1a") {
  CHECK(stable_hash("") == 0xcbf29ce484222325ull);
  CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("parallel_for visits every index once for any job count") {
  for (unsigned jobs : {1u, 2u, 8u}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("parallel_for rethrows a task exception") {
  CHECK_THROWS_AS(parallel_for(20, 4,
                               [](std::size_t i) {
                                 if (i == 13) fail(ErrorKind::Model, "boom");
                               }),
                  Error);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(parse_double(format_double(v)).value() == v);
  }
}

TEST_CASE("number parsing") {
  CHECK(parse_double(" 1.5 ").value() == 1.5);
  CHECK(parse_double("+2").value() == 2.0);
  CHECK_FALSE(parse_double("abc").has_value());
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK_FALSE(parse_double("").has_value());
  CHECK(parse_int("-42").value() == -42);
  CHECK_FALSE(parse_int("4.2").has_value());
}

TEST_CASE("split keeps empty fields") {
  const auto parts = split("a,,b", ',');
  REQUIRE(parts.size() == 3);
  CHECK(parts[1].empty());
  CHECK(trim("  x \t") == "x");
}

TEST_CASE("error kinds carry through") {
  try {
    fail(ErrorKind::Taxonomy, "nope");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Taxonomy);
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
}
