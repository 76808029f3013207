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

#ifndef PXLIN_GRAPH_HPP_
#define PXLIN_GRAPH_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pxlin/model.hpp"
#include "pxlin/relation.hpp"

namespace pxlin {

/// An execution graph. Event ids equal their index in `events`.
struct ExecutionGraph {
  uint32_t era = 0;
  NodeLayout layout = layout_link_free_basic();
  CacheLineMode cl_mode = CacheLineMode::Node;
  Addr head;  // entry address of the era's structure, set by recovery

  std::vector<Event> events;
  std::vector<Call> calls;  // indexed by CallId::index()
  IndexSet init;
  IndexSet persisted;
  Relation po, rf, mo, nvo;
  std::optional<Relation> tso;  // witness recorded by the simulator

  size_t size() const { return events.size(); }
  const Event& ev(size_t i) const { return events[i]; }

  IndexSet select(bool (Action::*pred)() const) const {
    IndexSet s(size());
    for (size_t i = 0; i < size(); ++i)
      if ((events[i].act.*pred)()) s.insert(i);
    return s;
  }
  IndexSet reads() const { return select(&Action::is_read); }
  IndexSet writes() const { return select(&Action::is_write); }
  IndexSet updates() const { return select(&Action::is_update); }
  IndexSet uwrites() const { return select(&Action::is_uwrite); }
  IndexSet ureads() const { return select(&Action::is_uread); }
  IndexSet flushes() const { return select(&Action::is_flush); }
  IndexSet durables() const { return select(&Action::is_durable); }
  IndexSet rets() const {
    IndexSet s(size());
    for (size_t i = 0; i < size(); ++i)
      if (events[i].act.is_ret() && events[i].cid.is_call()) s.insert(i);
    return s;
  }
  IndexSet events_of(CallId c) const {
    IndexSet s(size());
    for (size_t i = 0; i < size(); ++i)
      if (events[i].cid == c) s.insert(i);
    return s;
  }
  IndexSet lib_events() const {
    IndexSet s(size());
    for (size_t i = 0; i < size(); ++i)
      if (!events[i].cid.is_client() && !events[i].act.is_ret()) s.insert(i);
    return s;
  }

  IndexSet on_location(Location loc) const {
    IndexSet s(size());
    for (size_t i = 0; i < size(); ++i)
      for (Location l : events[i].act.locations(layout))
        if (l == loc) s.insert(i);
    return s;
  }
  IndexSet on_cache_line(CacheLine cl) const {
    return on_cache_line(cl, cl_mode);
  }
  IndexSet on_cache_line(CacheLine cl, CacheLineMode mode) const {
    IndexSet s(size());
    for (size_t i = 0; i < size(); ++i) {
      const Action& a = events[i].act;
      if (a.is_flush()) {
        if (flush_line(a.addr, mode) == cl) s.insert(i);
        continue;
      }
      for (Location l : a.locations(layout))
        if (cache_line_of(l, mode) == cl) s.insert(i);
    }
    return s;
  }

  std::vector<Location> all_locations() const {
    std::vector<Location> locs;
    for (const Event& e : events)
      for (Location l : e.act.locations(layout)) locs.push_back(l);
    std::sort(locs.begin(), locs.end());
    locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
    return locs;
  }
  std::vector<CacheLine> all_cache_lines() const {
    return all_cache_lines(cl_mode);
  }
  std::vector<CacheLine> all_cache_lines(CacheLineMode mode) const {
    std::vector<CacheLine> cls;
    for (const Event& e : events) {
      if (e.act.is_flush())
        cls.push_back(flush_line(e.act.addr, mode));
      else
        for (Location l : e.act.locations(layout))
          cls.push_back(cache_line_of(l, mode));
    }
    std::sort(cls.begin(), cls.end());
    cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
    return cls;
  }

  std::optional<size_t> ret_of(CallId c) const {
    for (size_t i = 0; i < size(); ++i)
      if (events[i].cid == c && events[i].act.is_ret()) return i;
    return std::nullopt;
  }

  /// hb = (po | rf)+
  Relation derive_hb() const { return (po | rf).transitive_closure(); }

  /// Memory after an nvo-ordered replay of the persisted events.
  Memory persisted_memory() const {
    std::vector<size_t> order =
        enumerate_one(nvo.restricted(persisted), persisted);
    Memory m;
    for (size_t i : order) m.apply(events[i].act, layout);
    return m;
  }

  std::string describe_event(size_t i) const;
};

/// A sequence of consistent executions linked by persisted memory.
struct Chain {
  std::vector<ExecutionGraph> eras;
};

// ---------------------------------------------------------------------------
// Memory <-> initialisation events

/// Coerces a memory into the set of initialisation write events of a fresh
/// graph (one write per location, deterministic order).
inline std::vector<Event> init_events_of(const Memory& m) {
  std::vector<Event> out;
  uint32_t id = 0;
  for (const auto& [loc, val] : m.entries()) {
    Event e;
    e.id = id++;
    e.tid = 0;
    e.cid = CallId::client();
    e.act = Action::write(loc, val);
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Well-formedness

struct Violation {
  std::string clause;
  std::string detail;
  std::vector<size_t> witnesses;
};

struct WellformedReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every clause of the execution definition plus the library-execution
/// constraints (sequential calls, returns last, recovery first, client and
/// library locations disjoint).
inline WellformedReport graph_wellformed(const ExecutionGraph& g) {
  WellformedReport rep;
  auto fail = [&](std::string clause, std::string detail,
                  std::vector<size_t> ws = {}) {
    rep.violations.push_back({std::move(clause), std::move(detail), std::move(ws)});
  };
  const size_t n = g.size();
  const IndexSet writes = g.writes(), ureads = g.ureads(),
                 uwrites = g.uwrites(), durables = g.durables(),
                 flushes = g.flushes();

  // Init: writes, client-attributed, pairwise disjoint locations.
  {
    std::map<Location, size_t> seen;
    bool disjoint_ok = true;
    g.init.for_each([&](size_t i) {
      if (!g.ev(i).act.is_write())
        fail("init-writes", "initialisation event is not a write", {i});
      if (!g.ev(i).cid.is_client())
        fail("init-client", "initialisation event attributed to a call", {i});
      for (Location l : g.ev(i).act.locations(g.layout)) {
        auto [it, fresh] = seen.emplace(l, i);
        if (!fresh && disjoint_ok) {
          fail("init-disjoint", "two initialisation writes to one location",
               {it->second, i});
          disjoint_ok = false;
        }
      }
    });
  }

  // No double allocation.
  {
    std::map<uint32_t, size_t> alloc_of;
    for (size_t i = 0; i < n; ++i) {
      if (g.ev(i).act.type != ActionType::Alloc) continue;
      uint32_t a = g.ev(i).act.addr.id;
      auto [it, fresh] = alloc_of.emplace(a, i);
      if (!fresh) fail("no-double-alloc", "address allocated twice", {it->second, i});
      bool init_hit = false;
      g.init.for_each([&](size_t j) {
        if (j != i && g.ev(j).act.addr.id == a) init_hit = true;
      });
      if (init_hit && !g.init.contains(i))
        fail("no-double-alloc", "allocation of an initialised address", {i});
    }
  }

  // Persisted set.
  if (!g.persisted.subset_of(durables))
    fail("persisted-durable", "persisted set contains a non-durable event");
  {
    IndexSet must(n);
    must |= g.init;
    must |= flushes;
    if (!must.subset_of(g.persisted))
      fail("persisted-init-fl", "init or flush event not persisted");
  }

  // po.
  if (!g.po.strict_partial_order())
    fail("po-strict", "po is not a strict partial order");
  {
    bool ok = true;
    g.init.for_each([&](size_t i) {
      for (size_t j = 0; j < n; ++j)
        if (!g.init.contains(j) && !g.po.test(i, j)) ok = false;
    });
    if (!ok) fail("po-init-first", "init events do not po-precede the rest");
  }

  // rf: same location, matching values, total and functional on UReads.
  {
    std::vector<int> sources(n, 0);
    for (auto [a, b] : g.rf.pairs()) {
      if (!uwrites.contains(a) || !ureads.contains(b)) {
        fail("rf-typing", "rf edge not from a (u)write to a (u)read", {a, b});
        continue;
      }
      sources[b]++;
      bool loc_match = false;
      for (Location l : g.ev(a).act.locations(g.layout))
        if (l == g.ev(b).act.loc) loc_match = true;
      if (!loc_match) fail("rf-location", "rf edge on mismatched locations", {a, b});
      Value wv = g.ev(a).act.type == ActionType::Alloc
                     ? Value::zero()
                     : *g.ev(a).act.wval_of();
      if (wv != *g.ev(b).act.rval_of())
        fail("rf-value", "rf edge with mismatched values", {a, b});
    }
    bool total = true, functional = true;
    ureads.for_each([&](size_t b) {
      if (sources[b] == 0) total = false;
      if (sources[b] > 1) functional = false;
    });
    if (!total) fail("rf-total", "a read has no rf source");
    if (!functional) fail("rf-functional", "a read has several rf sources");
  }

  // mo: disjoint union of per-location strict total orders, init first.
  {
    for (auto [a, b] : g.mo.pairs()) {
      bool share = false;
      for (Location l : g.ev(a).act.locations(g.layout))
        for (Location l2 : g.ev(b).act.locations(g.layout))
          if (l == l2) share = true;
      if (!share || !uwrites.contains(a) || !uwrites.contains(b))
        fail("mo-typing", "mo edge between unrelated events", {a, b});
    }
    if (!g.mo.irreflexive()) fail("mo-strict", "mo is reflexive");
    for (Location loc : g.all_locations()) {
      IndexSet here = g.on_location(loc);
      here &= uwrites;
      Relation mo_loc = g.mo.restricted(here);
      if (!mo_loc.transitive() || !mo_loc.total_on(here)) {
        fail("mo-total", "mo is not a strict total order on a location");
        break;
      }
      bool init_first = true;
      g.init.for_each([&](size_t i) {
        if (!here.contains(i)) return;
        here.for_each([&](size_t j) {
          if (j != i && !g.init.contains(j) && !g.mo.test(i, j))
            init_first = false;
        });
      });
      if (!init_first) {
        fail("mo-init-first", "an init write is not mo-first on its location");
        break;
      }
    }
  }

  // nvo: strict total order on Durable, init first, Persisted downward closed.
  {
    Relation nvo_d = g.nvo.restricted(durables);
    if (!nvo_d.irreflexive() || !nvo_d.transitive() || !nvo_d.total_on(durables))
      fail("nvo-total", "nvo is not a strict total order on the durables");
    bool init_first = true;
    g.init.for_each([&](size_t i) {
      durables.for_each([&](size_t j) {
        if (j != i && !g.init.contains(j) && !g.nvo.test(i, j))
          init_first = false;
      });
    });
    if (!init_first) fail("nvo-init-first", "an init event is not nvo-first");
    bool closed = true;
    std::pair<size_t, size_t> w{0, 0};
    for (auto [a, b] : g.nvo.pairs())
      if (g.persisted.contains(b) && durables.contains(a) &&
          !g.persisted.contains(a)) {
        closed = false;
        w = {a, b};
      }
    if (!closed)
      fail("persisted-closed", "persisted set not nvo-downward closed",
           {w.first, w.second});
  }

  // Library-execution constraints.
  {
    // Calls are sequential: events of one call are po-totally ordered.
    std::map<int32_t, std::vector<size_t>> by_call;
    for (size_t i = 0; i < n; ++i)
      if (g.ev(i).cid.is_call() || g.ev(i).cid.is_recovery())
        by_call[g.ev(i).cid.v].push_back(i);
    for (auto& [cid, evs] : by_call) {
      for (size_t x : evs)
        for (size_t y : evs)
          if (x != y && !g.po.test(x, y) && !g.po.test(y, x))
            fail("calls-sequential", "two events of one call unordered by po",
                 {x, y});
      // Returns come last within the call.
      for (size_t x : evs)
        if (g.ev(x).act.is_ret())
          for (size_t y : evs)
            if (g.po.test(x, y))
              fail("returns-last", "an event po-follows its call's return",
                   {x, y});
    }
    // A call abandoned mid-way may not be po-followed (immediately) by
    // another call's events unless it returned.
    Relation ipo = g.po.immediate();
    for (auto [a, b] : ipo.pairs()) {
      const Event &ea = g.ev(a), &eb = g.ev(b);
      if (!ea.cid.is_call() || ea.cid == eb.cid) continue;
      if (g.init.contains(a) || ea.cid.is_recovery()) continue;
      if (eb.cid.is_client() || g.ev(b).cid.is_recovery()) continue;
      if (ea.tid != eb.tid) continue;
      if (!ea.act.is_ret())
        fail("returns-between-calls",
             "a call is interleaved po-immediately after a non-returned call",
             {a, b});
    }
    // Recovery po-precedes everything else and is nonempty. Pure client
    // graphs (litmus tests) carry no library structure to constrain.
    bool has_lib = false;
    for (size_t i = 0; i < n; ++i)
      if (!g.ev(i).cid.is_client()) has_lib = true;
    IndexSet rec = g.events_of(CallId::recovery());
    if (rec.empty()) {
      if (has_lib)
        fail("recovery-present", "no recovery events in the execution");
    } else {
      bool ok = true;
      rec.for_each([&](size_t r) {
        for (size_t j = 0; j < n; ++j)
          if (!g.init.contains(j) && !rec.contains(j) && !g.po.test(r, j))
            ok = false;
      });
      if (!ok) fail("recovery-first", "recovery does not po-precede the rest");
      // The recovery's return is po-preceded by a memory fence.
      rec.for_each([&](size_t r) {
        if (!g.ev(r).act.is_ret()) return;
        bool fenced = false;
        rec.for_each([&](size_t f) {
          if (g.ev(f).act.type == ActionType::MFence && g.po.test(f, r))
            fenced = true;
        });
        if (!fenced)
          fail("recovery-fenced", "recovery return without a prior fence", {r});
      });
    }
    // Client and library addresses are disjoint.
    for (size_t i = 0; i < n; ++i) {
      if (!g.ev(i).cid.is_client() || g.init.contains(i)) continue;
      for (size_t j = 0; j < n; ++j) {
        if (g.ev(j).cid.is_client()) continue;
        for (Location li : g.ev(i).act.locations(g.layout))
          for (Location lj : g.ev(j).act.locations(g.layout))
            if (li.addr == lj.addr)
              fail("client-lib-disjoint",
                   "client and library touch one address", {i, j});
      }
    }
  }

  return rep;
}

/// The chain-linking equations: era 0 starts empty, era i+1's init equals the
/// persisted memory of era i, and the final era is fully persisted.
inline WellformedReport chain_wellformed(const Chain& chain) {
  WellformedReport rep;
  auto fail = [&](std::string clause, std::string detail) {
    rep.violations.push_back({std::move(clause), std::move(detail), {}});
  };
  if (chain.eras.empty()) {
    fail("chain-nonempty", "chain has no eras");
    return rep;
  }
  if (!chain.eras.front().init.empty())
    fail("chain-era0", "era 0 has a nonempty init set");
  for (size_t i = 0; i + 1 < chain.eras.size(); ++i) {
    const ExecutionGraph& g = chain.eras[i];
    Memory frontier = g.persisted_memory();
    std::vector<Event> inits;
    chain.eras[i + 1].init.for_each(
        [&](size_t j) { inits.push_back(chain.eras[i + 1].ev(j)); });
    Memory next_init = mem_of(inits, chain.eras[i + 1].layout);
    if (!(frontier == next_init))
      fail("chain-link", "era init differs from prior persisted frontier");
  }
  const ExecutionGraph& last = chain.eras.back();
  if (!(last.persisted == last.durables()))
    fail("chain-final-drained", "final era is not fully persisted");
  return rep;
}

// ---------------------------------------------------------------------------

inline std::string ExecutionGraph::describe_event(size_t i) const {
  const Event& e = events[i];
  std::string s = "e" + std::to_string(e.id) + "/t" + std::to_string(e.tid);
  switch (e.act.type) {
    case ActionType::Read: s += " R"; break;
    case ActionType::Write: s += " W"; break;
    case ActionType::Update: s += " U"; break;
    case ActionType::MFence: s += " MF"; break;
    case ActionType::Flush: s += " FL"; break;
    case ActionType::Alloc: s += " A"; break;
    case ActionType::Ret: s += " RET"; break;
    case ActionType::Err: s += " ERR"; break;
  }
  return s;
}

}  // namespace pxlin

#endif  // PXLIN_GRAPH_HPP_
