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
#include "grammar.hpp"
#include "pxlin/simulator.hpp"
#include "test_util.hpp"

using namespace pxlin;
using namespace pxlin::prog;
using namespace pxlin::testutil;

namespace {

/// Action-type/tag trace of one call on a single-threaded run.
struct Step {
  ActionType type;
  Line tag;
  bool operator==(const Step&) const = default;
};

std::vector<Step> call_steps(const ExecutionGraph& g, int32_t cid) {
  std::vector<Step> out;
  for (const Event& e : g.events)
    if (e.cid == CallId::call(cid)) out.push_back({e.act.type, e.tag});
  return out;
}

ExecutionGraph single_thread_run(ImplId impl, std::vector<Call> ops,
                                 MutationFlags mut = {}) {
  sim::ChainConfig cfg = chain_config(impl, {era({std::move(ops)})}, mut);
  Chain chain = sim::run_chain_random(cfg, 1);
  return chain.eras[0];
}

}  // namespace

TEST_CASE("spawn: contains is unknown outside the optimized variant") {
  CHECK_THROWS_AS(
      spawn(ImplId::LinkFreeBasic, {OpKind::Contains, 1, {}}, Addr{1}, {}),
      UnknownOp);
  CHECK_THROWS_AS(
      spawn(ImplId::HarrisDurable, {OpKind::Contains, 1, {}}, Addr{1}, {}),
      UnknownOp);
  CHECK_NOTHROW(
      spawn(ImplId::LinkFreeOpt, {OpKind::Contains, 1, {}}, Addr{1}, {}));
  // The optimized insert needs a value.
  CHECK_THROWS_AS(
      spawn(ImplId::LinkFreeOpt, {OpKind::Insert, 1, {}}, Addr{1}, {}),
      UnknownOp);
}

TEST_CASE("golden: basic insert on the empty list") {
  ExecutionGraph g = single_thread_run(ImplId::LinkFreeBasic, {ins(1)});
  std::vector<Step> expect{
      {ActionType::Read, Line::FindAdvance},   // <_,c> = h.nxt
      {ActionType::Read, Line::FindCCheck},    // c.nxt == <0,_>
      {ActionType::Read, Line::FindCKey},      // c.key >= k (tail)
      {ActionType::Read, Line::FindPCheck},    // p.nxt == <0,_>
      {ActionType::Read, Line::InsKeyCheck},   // c.key == k?
      {ActionType::Alloc, Line::NewNode},
      {ActionType::Write, Line::NewNode},      // n.key
      {ActionType::Write, Line::NewNode},      // n.nxt
      {ActionType::Update, Line::InsCas},      // CAS(p.nxt)
      {ActionType::Write, Line::MakeValid},    // n.valid = 1
      {ActionType::Flush, Line::FlushIns},     // flush(n)
      {ActionType::Ret, Line::RetLine},
  };
  CHECK(call_steps(g, 0) == expect);
}

TEST_CASE("golden: basic delete of an absent key returns false") {
  ExecutionGraph g = single_thread_run(ImplId::LinkFreeBasic, {del(1)});
  std::vector<Step> expect{
      {ActionType::Read, Line::FindAdvance},
      {ActionType::Read, Line::FindCCheck},
      {ActionType::Read, Line::FindCKey},
      {ActionType::Read, Line::FindPCheck},
      {ActionType::Read, Line::DelKeyCheck},
      {ActionType::Ret, Line::RetLine},
  };
  CHECK(call_steps(g, 0) == expect);
  auto hist = returned_calls(g);
  REQUIRE(hist.size() == 1);
  CHECK(!hist[0].second);
}

TEST_CASE("golden: basic delete after insert marks and trims") {
  ExecutionGraph g = single_thread_run(ImplId::LinkFreeBasic, {ins(2), del(2)});
  std::vector<Step> expect{
      {ActionType::Read, Line::FindAdvance},
      {ActionType::Read, Line::FindCCheck},  // node 2
      {ActionType::Read, Line::FindCKey},
      {ActionType::Read, Line::FindPCheck},
      {ActionType::Read, Line::DelKeyCheck},
      {ActionType::Read, Line::DelNxtRead},
      {ActionType::Write, Line::MakeValid},
      {ActionType::Update, Line::DelMarkCas},
      {ActionType::Flush, Line::TrimFlush},
      {ActionType::Read, Line::TrimNxtRead},
      {ActionType::Update, Line::TrimCas},
      {ActionType::Ret, Line::RetLine},
  };
  CHECK(call_steps(g, 1) == expect);
}

TEST_CASE("golden: harris insert flushes node, origin and predecessor") {
  ExecutionGraph g = single_thread_run(ImplId::HarrisDurable, {ins(1)});
  std::vector<Step> expect{
      {ActionType::Read, Line::FindAdvance},
      {ActionType::Read, Line::FindCCheck},
      {ActionType::Read, Line::FindCKey},
      {ActionType::Read, Line::FindPCheck},
      {ActionType::Read, Line::InsKeyCheck},
      {ActionType::Alloc, Line::NewNode},
      {ActionType::Write, Line::NewNode},   // key
      {ActionType::Write, Line::NewNode},   // nxt
      {ActionType::Write, Line::OrigWrite}, // n.orig = p
      {ActionType::Flush, Line::FlushIns},  // flush(n)
      {ActionType::Read, Line::OrigRead},   // p.orig
      {ActionType::Flush, Line::OrigFlush}, // flush(p.orig)
      {ActionType::Update, Line::InsCas},
      {ActionType::Flush, Line::FlushIns},  // flush(p)
      {ActionType::Ret, Line::RetLine},
  };
  CHECK(call_steps(g, 0) == expect);
}

TEST_CASE("golden: optimized contains true helps persist") {
  ExecutionGraph g =
      single_thread_run(ImplId::LinkFreeOpt, {insv(2, 1), cont(2)});
  std::vector<Step> expect{
      {ActionType::Read, Line::ContAdvance},  // h.nxt
      {ActionType::Read, Line::ContKey},      // node 2
      {ActionType::Read, Line::ContMarkCheck},
      {ActionType::Read, Line::MakeValidRead},  // already valid
      {ActionType::Read, Line::FlushInsRead},   // already flushed
      {ActionType::Ret, Line::RetLine},
  };
  CHECK(call_steps(g, 1) == expect);
  auto hist = returned_calls(g);
  CHECK(hist[1].second == true);
}

TEST_CASE("mutations excise exactly the named steps") {
  MutationFlags m1;
  m1.skip_flush_ins = true;
  ExecutionGraph g1 = single_thread_run(ImplId::LinkFreeBasic, {ins(1)}, m1);
  for (const Step& s : call_steps(g1, 0)) CHECK(s.tag != Line::FlushIns);

  MutationFlags m2;
  m2.skip_valid = true;
  ExecutionGraph g2 = single_thread_run(ImplId::LinkFreeBasic, {ins(1)}, m2);
  for (const Step& s : call_steps(g2, 0)) CHECK(s.tag != Line::MakeValid);

  MutationFlags m3;
  m3.skip_flush_del = true;
  ExecutionGraph g3 =
      single_thread_run(ImplId::LinkFreeBasic, {ins(1), del(1)}, m3);
  for (const Step& s : call_steps(g3, 1)) CHECK(s.tag != Line::TrimFlush);
}

TEST_CASE("grammar: sampled optimized traces are accepted") {
  sim::ChainConfig cfg = chain_config(
      ImplId::LinkFreeOpt,
      {era({{insv(1, 1), del(1), cont(2)}, {insv(2, 2), insv(1, 2), del(2)}},
           crash_free()),
       era({{cont(1), del(1)}, {insv(2, 1)}})});
  for (uint64_t seed = 0; seed < 150; ++seed) {
    Chain chain = sim::run_chain_random(cfg, seed);
    for (const ExecutionGraph& g : chain.eras)
      for (int32_t c = 0; c < static_cast<int32_t>(g.calls.size()); ++c) {
        std::string why;
        if (!grammar_accepts(g, c, &why))
          FAIL_CHECK("seed ", seed, " call ", c, ": ", why);
      }
  }
}

TEST_CASE("grammar: a foreign action sequence is rejected") {
  // A delete trace that never reads the victim's link is not in the grammar.
  Call c{OpKind::Delete, 1, {}};
  std::vector<Action> acts{
      Action::read({Addr{2}, Field::Nxt}, Value::ptr(false, Addr{1})),
      Action::read({Addr{1}, Field::Nxt}, Value::zero()),
      Action::read({Addr{1}, Field::Key}, Value::pos_inf()),
      Action::read({Addr{1}, Field::Key}, Value::integer(1)),  // "found"
      Action::update({Addr{1}, Field::Nxt}, Value::zero(),
                     Value::ptr(true, kNullAddr)),
  };
  OptGrammar m(c, false, false, acts);
  std::string why;
  CHECK(!m.accepted(&why));
  CHECK(!why.empty());
}

TEST_CASE("faithful programs never fault") {
  // Memory safety, empirically: no Err events under any schedule sampled,
  // crashes included.
  for (ImplId impl :
       {ImplId::HarrisDurable, ImplId::LinkFreeBasic, ImplId::LinkFreeOpt}) {
    sim::ChainConfig cfg = chain_config(
        impl,
        {era({{impl == ImplId::LinkFreeOpt ? insv(1, 1) : ins(1),
               del(1)},
              {impl == ImplId::LinkFreeOpt ? insv(2, 1) : ins(2), del(2)}},
             crash_free()),
         era({{del(1)}, {impl == ImplId::LinkFreeOpt ? insv(1, 2) : ins(1)}})});
    for (uint64_t seed = 0; seed < 150; ++seed) {
      Chain chain = sim::run_chain_random(cfg, seed);
      for (const ExecutionGraph& g : chain.eras)
        for (const Event& e : g.events)
          if (e.act.type == ActionType::Err)
            FAIL_CHECK(impl_name(impl), " seed ", seed, " emitted Err");
    }
  }
}

TEST_CASE("strategy hooks describe each implementation") {
  CHECK(!strategy_hooks(ImplId::HarrisDurable).master_checkable);
  CHECK(strategy_hooks(ImplId::LinkFreeBasic).master_checkable);
  CHECK(strategy_hooks(ImplId::LinkFreeBasic).failed_insert_fixed_lp);
  CHECK(strategy_hooks(ImplId::LinkFreeBasic).hindsight_failed_deletes);
  CHECK(strategy_hooks(ImplId::LinkFreeOpt).has_contains);
}
