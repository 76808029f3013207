/*
 * Copyright (c) 2026, the pxlin authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <random>

#include "doctest.h"
#include "pxlin/relation.hpp"

using namespace pxlin;

namespace {

// Brute-force oracle: all permutations of X, filtered by rel-compatibility.
std::vector<std::vector<size_t>> enumerations_by_brute_force(
    const Relation& rel, const IndexSet& xs) {
  std::vector<size_t> elems = xs.elements();
  std::sort(elems.begin(), elems.end());
  std::vector<std::vector<size_t>> out;
  do {
    bool ok = true;
    for (size_t i = 0; i < elems.size(); ++i)
      for (size_t j = 0; j < elems.size(); ++j)
        if (rel.test(elems[i], elems[j]) && i >= j) ok = false;
    if (ok) out.push_back(elems);
  } while (std::next_permutation(elems.begin(), elems.end()));
  return out;
}

}  // namespace

TEST_CASE("closure contains composed pairs") {
  Relation r(3);
  r.add(0, 1);
  r.add(1, 2);
  Relation c = r.transitive_closure();
  CHECK(c.test(0, 2));
  CHECK(c.test(0, 1));
  CHECK(!c.test(2, 0));
}

TEST_CASE("restrict keeps only pairs inside the set") {
  Relation r(3);
  r.add(0, 1);
  r.add(1, 2);
  Relation s = r.restricted(IndexSet::of(3, {0, 1}));
  CHECK(s.test(0, 1));
  CHECK(!s.test(1, 2));
  CHECK(s.pair_count() == 1);
}

TEST_CASE("inverse and compose") {
  Relation r(3);
  r.add(0, 1);
  Relation inv = r.inverse();
  CHECK(inv.test(1, 0));
  Relation r2(3);
  r2.add(1, 2);
  CHECK(compose(r, r2).test(0, 2));
}

TEST_CASE("immediate of a total order has n-1 pairs") {
  // Oracle: for each n <= 6, build the total order an check by brute force.
  for (size_t n = 1; n <= 6; ++n) {
    std::vector<size_t> seq(n);
    for (size_t i = 0; i < n; ++i) seq[i] = i;
    Relation total = Relation::chain(n, seq);
    Relation imm = total.immediate();
    CHECK(imm.pair_count() == n - 1);
    for (size_t i = 0; i + 1 < n; ++i) CHECK(imm.test(i, i + 1));
    CHECK(imm.transitive_closure() == total);
  }
}

TEST_CASE("enumerate: singleton, empty relation") {
  Relation r(1);
  auto all = enumerate_all(r, IndexSet::of(1, {0}));
  REQUIRE(all.size() == 1);
  CHECK(all[0] == std::vector<size_t>{0});
}

TEST_CASE("enumerate: total order has the unique sorting enumeration") {
  // b < a < c encoded as 1 < 0 < 2.
  Relation r(3);
  r.add(1, 0);
  r.add(0, 2);
  r.add(1, 2);
  auto all = enumerate_all(r, IndexSet::full(3));
  REQUIRE(all.size() == 1);
  CHECK(all[0] == std::vector<size_t>({1, 0, 2}));
  CHECK(enumerate_one(r, IndexSet::full(3)) == std::vector<size_t>({1, 0, 2}));
}

TEST_CASE("enumerate: one constraint over three elements") {
  Relation r(3);
  r.add(0, 1);
  auto all = enumerate_all(r, IndexSet::full(3));
  auto expect = enumerations_by_brute_force(r, IndexSet::full(3));
  CHECK(all.size() == 3);  // frozen from the brute-force oracle
  CHECK(all.size() == expect.size());
  for (const auto& e : all) {
    auto pos = [&](size_t x) {
      return std::find(e.begin(), e.end(), x) - e.begin();
    };
    CHECK(pos(0) < pos(1));
  }
}

TEST_CASE("enumerate matches permutation filtering on random relations") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 1 + rng() % 5;
    Relation r(n);
    for (size_t a = 0; a < n; ++a)
      for (size_t b = 0; b < n; ++b)
        if (a != b && rng() % 4 == 0) r.add(a, b);
    IndexSet xs = IndexSet::full(n);
    bool cyclic = !r.restricted(xs).acyclic();
    if (cyclic) {
      CHECK_THROWS_AS(enumerate_all(r, xs), CycleError);
      continue;
    }
    auto got = enumerate_all(r, xs);
    auto expect = enumerations_by_brute_force(r, xs);
    std::sort(got.begin(), got.end());
    std::sort(expect.begin(), expect.end());
    CHECK(got == expect);
    CHECK(count_enumerations_up_to(r, xs, 1000) == expect.size());
  }
}

TEST_CASE("enumerate_all refuses oversized sets instead of truncating") {
  Relation r(12);
  CHECK_THROWS_AS(enumerate_all(r, IndexSet::full(12)), BoundExceeded);
  CHECK_NOTHROW(enumerate_one(r, IndexSet::full(12)));
}

TEST_CASE("cycle detection") {
  Relation r(2);
  r.add(0, 1);
  r.add(1, 0);
  CHECK_THROWS_AS(enumerate_one(r, IndexSet::full(2)), CycleError);
  CHECK(!r.acyclic());
}

TEST_CASE("sampled enumeration respects the relation") {
  Relation r(5);
  r.add(0, 3);
  r.add(1, 4);
  std::mt19937 rng(7);
  for (int i = 0; i < 20; ++i) {
    auto e = enumerate_sampled(r, IndexSet::full(5),
                               [&](size_t k) { return rng() % k; });
    auto pos = [&](size_t x) {
      return std::find(e.begin(), e.end(), x) - e.begin();
    };
    CHECK(pos(0) < pos(3));
    CHECK(pos(1) < pos(4));
  }
}
