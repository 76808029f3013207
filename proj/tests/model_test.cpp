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

#include <random>

#include "doctest.h"
#include "pxlin/graph.hpp"
#include "pxlin/model.hpp"

using namespace pxlin;

namespace {

Event write_event(uint32_t id, Addr a, Field f, Value v) {
  Event e;
  e.id = id;
  e.act = Action::write({a, f}, v);
  return e;
}

}  // namespace

TEST_CASE("values: zero and the unmarked null pointer coincide") {
  CHECK(Value::ptr(false, kNullAddr) == Value::zero());
  CHECK(Value::zero().is_next());
  CHECK(Value::zero().next_addr() == kNullAddr);
  CHECK(Value::ptr(true, kNullAddr) != Value::zero());
  CHECK(Value::ptr(false, Addr{3}).next_addr() == Addr{3});
}

TEST_CASE("values: key ordering with sentinels") {
  CHECK(key_less(Value::neg_inf(), Value::integer(0)));
  CHECK(key_less(Value::integer(41), Value::integer(42)));
  CHECK(key_less(Value::integer(1000), Value::pos_inf()));
  CHECK(!key_less(Value::pos_inf(), Value::pos_inf()));
  CHECK(!key_less(Value::integer(2), Value::integer(2)));
}

TEST_CASE("mem_of: empty sequence gives the empty map") {
  CHECK(mem_of({}, layout_link_free_basic()).empty());
}

TEST_CASE("mem_of: last write wins") {
  Addr x{1};
  std::vector<Event> es{
      write_event(0, x, Field::Key, Value::integer(1)),
      write_event(1, x, Field::Key, Value::integer(2)),
  };
  Memory m = mem_of(es, layout_link_free_basic());
  CHECK(m.get({x, Field::Key}) == Value::integer(2));
  CHECK(m.size() == 1);
}

TEST_CASE("mem_of: allocation zero-fills every field of the layout") {
  Addr x{1};
  Event e;
  e.act = Action::alloc(x);
  Memory m = mem_of({e}, layout_link_free_basic());
  CHECK(m.size() == 3);
  for (Field f : layout_link_free_basic().fields)
    CHECK(m.get({x, f}) == Value::zero());
}

TEST_CASE("mem_of: a write overwritten later is irrelevant") {
  // Property over random small sequences: dropping a write whose location is
  // later overwritten leaves the memory unchanged.
  std::mt19937 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Event> seq;
    for (uint32_t i = 0; i < 8; ++i) {
      Addr a{static_cast<uint32_t>(1 + rng() % 2)};
      Field f = rng() % 2 ? Field::Key : Field::Valid;
      seq.push_back(write_event(i, a, f, Value::integer(rng() % 4)));
    }
    size_t drop = rng() % 7;
    bool overwritten = false;
    for (size_t j = drop + 1; j < seq.size(); ++j)
      if (seq[j].act.loc == seq[drop].act.loc) overwritten = true;
    if (!overwritten) continue;
    std::vector<Event> without = seq;
    without.erase(without.begin() + drop);
    CHECK(mem_of(seq, layout_link_free_basic()) ==
          mem_of(without, layout_link_free_basic()));
  }
}

TEST_CASE("memory <-> init events coercion is the identity") {
  Memory m;
  m.set({Addr{1}, Field::Key}, Value::integer(5));
  m.set({Addr{1}, Field::Nxt}, Value::ptr(false, Addr{2}));
  m.set({Addr{2}, Field::Key}, Value::pos_inf());
  std::vector<Event> inits = init_events_of(m);
  CHECK(inits.size() == 3);
  CHECK(mem_of(inits, layout_link_free_basic()) == m);
}

TEST_CASE("graph_wellformed: empty graph passes") {
  ExecutionGraph g;
  g.init = IndexSet(0);
  g.persisted = IndexSet(0);
  g.po = Relation(0);
  g.rf = Relation(0);
  g.mo = Relation(0);
  g.nvo = Relation(0);
  WellformedReport rep = graph_wellformed(g);
  // The recovery-presence clause is the only one an empty graph can trip.
  for (const auto& v : rep.violations) CHECK(v.clause == "recovery-present");
}

TEST_CASE("graph_wellformed: duplicate init locations are flagged") {
  ExecutionGraph g;
  Event a = write_event(0, Addr{1}, Field::Key, Value::integer(1));
  Event b = write_event(1, Addr{1}, Field::Key, Value::integer(2));
  g.events = {a, b};
  g.init = IndexSet::full(2);
  g.persisted = IndexSet::full(2);
  g.po = Relation(2);
  g.rf = Relation(2);
  g.mo = Relation(2);
  g.mo.add(0, 1);
  g.nvo = Relation(2);
  g.nvo.add(0, 1);
  WellformedReport rep = graph_wellformed(g);
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.clause == "init-disjoint") found = true;
  CHECK(found);
}
