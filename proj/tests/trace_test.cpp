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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pxlin/px86.hpp"
#include "pxlin/trace.hpp"
#include "test_util.hpp"

using namespace pxlin;
using namespace pxlin::testutil;

#ifndef PXLIN_TEST_TRACE_DIR
#define PXLIN_TEST_TRACE_DIR "tests/traces"
#endif

namespace {

trace::ParsedTrace load(const char* name) {
  std::ifstream f(std::string(PXLIN_TEST_TRACE_DIR) + "/" + name);
  REQUIRE(f.good());
  return trace::read_chain(f);
}

void check_graph_equal(const ExecutionGraph& a, const ExecutionGraph& b) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.ev(i).act == b.ev(i).act);
    CHECK(a.ev(i).cid == b.ev(i).cid);
    CHECK(a.ev(i).tid == b.ev(i).tid);
    CHECK(a.ev(i).tag == b.ev(i).tag);
  }
  CHECK(a.init == b.init);
  CHECK(a.persisted == b.persisted);
  CHECK(a.po == b.po);
  CHECK(a.rf == b.rf);
  CHECK(a.mo == b.mo);
  CHECK(a.nvo == b.nvo);
  REQUIRE(a.tso.has_value() == b.tso.has_value());
  if (a.tso) CHECK(*a.tso == *b.tso);
  CHECK(a.head == b.head);
  CHECK(a.calls == b.calls);
}

}  // namespace

TEST_CASE("round trip: simulator chain survives write/read unchanged") {
  sim::ChainConfig cfg = chain_config(
      prog::ImplId::LinkFreeOpt,
      {era({{insv(1, 1), del(1)}, {cont(1)}}, crash_free()), era({{del(1)}})});
  for (uint64_t seed : {3u, 11u}) {
    Chain chain = sim::run_chain_random(cfg, seed);
    std::stringstream ss;
    trace::write_chain(ss, chain, cfg.impl);
    trace::ParsedTrace parsed = trace::read_chain(ss);
    CHECK(parsed.impl == cfg.impl);
    REQUIRE(parsed.chain.eras.size() == chain.eras.size());
    for (size_t i = 0; i < chain.eras.size(); ++i)
      check_graph_equal(chain.eras[i], parsed.chain.eras[i]);
    CHECK(chain_wellformed(parsed.chain).ok());
  }
}

TEST_CASE("hand-written flush litmus: red flush present is rejected") {
  trace::ParsedTrace t = load("fig3b.trace");
  REQUIRE(t.chain.eras.size() == 1);
  const ExecutionGraph& g = t.chain.eras[0];
  CHECK(graph_wellformed(g).ok());
  auto rep = px86::check_px86(g, px86::ModelVariant::Strong);
  CHECK(!rep.pass());
  REQUIRE(rep.find("nvo-fl-d"));
  CHECK(!rep.find("nvo-fl-d")->pass);
  for (const auto& a : rep.axioms)
    if (a.name != "nvo-fl-d") CHECK(a.pass);
}

TEST_CASE("hand-written flush litmus: red flush removed is accepted") {
  trace::ParsedTrace t = load("fig3c.trace");
  REQUIRE(t.chain.eras.size() == 1);
  const ExecutionGraph& g = t.chain.eras[0];
  CHECK(graph_wellformed(g).ok());
  CHECK(px86::check_px86(g, px86::ModelVariant::Strong).pass());
}

TEST_CASE("witness search on the litmus pair without recorded tso") {
  trace::ParsedTrace b = load("fig3b.trace");
  trace::ParsedTrace c = load("fig3c.trace");
  b.chain.eras[0].tso.reset();
  c.chain.eras[0].tso.reset();
  CHECK(!px86::search_tso(b.chain.eras[0], px86::ModelVariant::Strong)
             .has_value());
  auto found = px86::search_tso(c.chain.eras[0], px86::ModelVariant::Strong);
  REQUIRE(found.has_value());
  CHECK(px86::check_px86(c.chain.eras[0], px86::ModelVariant::Strong, *found)
            .pass());
}

TEST_CASE("parse errors carry line positions") {
  std::stringstream bad1("era 0\nevent 0 0 - R\n");
  CHECK_THROWS_AS(trace::read_chain(bad1), trace::ParseError);
  std::stringstream bad2("impl: no-such-impl\n");
  CHECK_THROWS_AS(trace::read_chain(bad2), trace::ParseError);
  std::stringstream bad3("event 0 0 - MF\n");  // before any era
  CHECK_THROWS_AS(trace::read_chain(bad3), trace::ParseError);
  try {
    std::stringstream bad4("era 0\nhead 1\nevent 0 0 - W 1.bogus 3\n");
    trace::read_chain(bad4);
    FAIL("expected a parse error");
  } catch (const trace::ParseError& e) {
    CHECK(e.line_no == 3);
    CHECK(e.byte_offset > 0);
  }
}

TEST_CASE("values serialize canonically") {
  using trace::detail::value_from;
  using trace::detail::value_str;
  CHECK(value_str(Value::integer(7)) == "7");
  CHECK(value_str(Value::pos_inf()) == "+inf");
  CHECK(value_str(Value::ptr(true, Addr{3})) == "1:3");
  CHECK(value_from("0:null") == Value::zero());
  CHECK(value_from("1:9") == Value::ptr(true, Addr{9}));
  CHECK(value_from("-inf") == Value::neg_inf());
  CHECK(!value_from("junk").has_value());
}
