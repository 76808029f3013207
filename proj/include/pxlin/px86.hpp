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

#ifndef PXLIN_PX86_HPP_
#define PXLIN_PX86_HPP_

#include <optional>
#include <string>
#include <vector>

#include "pxlin/graph.hpp"

namespace pxlin::px86 {

// ---------------------------------------------------------------------------
// Derived orders

/// ppo: program order minus write/flush -> read pairs, on non-return events.
inline Relation derive_ppo(const ExecutionGraph& g) {
  Relation ppo(g.size());
  IndexSet wfl = g.writes();
  wfl |= g.flushes();
  IndexSet rd = g.reads();
  IndexSet rets = g.rets();
  for (auto [a, b] : g.po.pairs()) {
    if (g.ev(a).act.is_ret() || g.ev(b).act.is_ret()) continue;
    if (wfl.contains(a) && rd.contains(b)) continue;
    ppo.add(a, b);
  }
  return ppo;
}

/// from-read: the read precedes every same-location write that overwrites
/// its source. The composition stays on the read's location (allocations
/// write many locations, so a bare rf^-1;mo would jump across fields), and
/// drops the identity pairs an update contributes by reading its own
/// mo-predecessor.
inline Relation derive_fr(const ExecutionGraph& g) {
  Relation fr(g.size());
  for (auto [w0, r] : g.rf.pairs()) {
    Location loc = g.ev(r).act.loc;
    g.mo.successors(w0).for_each([&](size_t w) {
      if (w == r) return;
      for (Location l : g.ev(w).act.locations(g.layout))
        if (l == loc) fr.add(r, w);
    });
  }
  return fr;
}

inline Relation derive_rfe(const ExecutionGraph& g) {
  Relation rfe(g.size());
  for (auto [a, b] : g.rf.pairs())
    if (!g.po.test(a, b)) rfe.add(a, b);
  return rfe;
}

/// ghb = (ppo | mo | fr | rfe)+, the global happens-before order used as the
/// volatile order in linearizability arguments.
inline Relation derive_ghb(const ExecutionGraph& g) {
  return (derive_ppo(g) | g.mo | derive_fr(g) | derive_rfe(g))
      .transitive_closure();
}

inline Relation derive_hb(const ExecutionGraph& g) { return g.derive_hb(); }

/// The volatile order used by the linearizability arguments: ghb padded with
/// the init-first and recovery-first edges a volatile order must carry (ghb
/// alone drops write->read pairs, including those out of the init events).
inline Relation derive_vo(const ExecutionGraph& g) {
  Relation vo = derive_ghb(g);
  IndexSet rec = g.events_of(CallId::recovery());
  for (size_t j = 0; j < g.size(); ++j) {
    if (g.init.contains(j)) continue;
    g.init.for_each([&](size_t i) { vo.add(i, j); });
    if (!rec.contains(j))
      rec.for_each([&](size_t r) { vo.add(r, j); });
  }
  return vo.transitive_closure();
}

// ---------------------------------------------------------------------------
// Axiom checking

enum class ModelVariant : uint8_t {
  Strong,  // nvo-cl: persistence follows tso per cache line
  Weak,    // nvo-loc + nvo-wu-fl, per the remark on Px86_sim
};

struct AxiomVerdict {
  std::string name;
  bool pass = true;
  std::optional<std::pair<size_t, size_t>> witness;
};

struct AxiomReport {
  std::vector<AxiomVerdict> axioms;
  bool pass() const {
    for (const auto& a : axioms)
      if (!a.pass) return false;
    return true;
  }
  const AxiomVerdict* find(const std::string& name) const {
    for (const auto& a : axioms)
      if (a.name == name) return &a;
    return nullptr;
  }
};

struct MissingTsoWitness : std::runtime_error {
  MissingTsoWitness()
      : std::runtime_error("graph carries no tso witness; run search_tso") {}
};

namespace detail {

inline void require_subset(AxiomReport& rep, const std::string& name,
                           const Relation& lhs, const Relation& rhs) {
  AxiomVerdict v{name, true, std::nullopt};
  if (auto w = lhs.first_not_in(rhs)) {
    v.pass = false;
    v.witness = *w;
  }
  rep.axioms.push_back(std::move(v));
}

inline Relation id_seq(const IndexSet& a, const Relation& r, const IndexSet& b) {
  Relation out(r.universe_size());
  for (auto [x, y] : r.pairs())
    if (a.contains(x) && b.contains(y)) out.add(x, y);
  return out;
}

}  // namespace detail

/// Evaluates every Px86 consistency clause against (g, tso). All clauses are
/// reported, not just the first failure, for counterexample triage.
inline AxiomReport check_px86(const ExecutionGraph& g, ModelVariant variant,
                              const std::optional<Relation>& tso_arg = {}) {
  const std::optional<Relation>& tso_opt = tso_arg ? tso_arg : g.tso;
  if (!tso_opt) throw MissingTsoWitness();
  const Relation& tso = *tso_opt;
  AxiomReport rep;
  const size_t n = g.size();
  const IndexSet reads = g.reads(), uwrites = g.uwrites(),
                 ureads = g.ureads(), flushes = g.flushes(),
                 durables = g.durables(), writes = g.writes();

  {
    AxiomVerdict v{"tso-order", true, std::nullopt};
    if (!tso.irreflexive() || !tso.transitive()) v.pass = false;
    rep.axioms.push_back(v);
  }
  {
    Relation want(n);
    g.init.for_each([&](size_t i) {
      for (size_t j = 0; j < n; ++j)
        if (!g.init.contains(j)) want.add(i, j);
    });
    detail::require_subset(rep, "tso-init", want, tso);
  }
  detail::require_subset(rep, "tso-mo", g.mo, tso);
  {
    AxiomVerdict v{"tso-total", true, std::nullopt};
    IndexSet nonreads = reads.complement();
    nonreads.for_each([&](size_t a) {
      nonreads.for_each([&](size_t b) {
        if (a < b && !tso.test(a, b) && !tso.test(b, a)) {
          v.pass = false;
          if (!v.witness) v.witness = {a, b};
        }
      });
    });
    rep.axioms.push_back(v);
  }
  detail::require_subset(rep, "tso-rf1", g.rf, tso | g.po);

  // tso-rf2: a (u)write tso-or-po-before a read of the same location is
  // tso-before-or-equal the write the read observes. The reflexive closure
  // on the right is forced: same-thread reads of one's own write (store
  // forwarding) produce the diagonal pair, which no strict order can hold.
  {
    AxiomVerdict v{"tso-rf2", true, std::nullopt};
    Relation tso_po = tso | g.po;
    for (auto [w2, r] : g.rf.pairs()) {
      Location loc = g.ev(r).act.loc;
      IndexSet wloc = g.on_location(loc);
      wloc &= uwrites;
      wloc.for_each([&](size_t w1) {
        if (!tso_po.test(w1, r)) return;
        if (w1 != w2 && !tso.test(w1, w2)) {
          v.pass = false;
          if (!v.witness) v.witness = {w1, w2};
        }
      });
    }
    rep.axioms.push_back(v);
  }
  {
    Relation want(n);
    for (auto [a, b] : g.po.pairs()) {
      bool a_in = uwrites.contains(a) || reads.contains(a);
      bool b_in = uwrites.contains(b) || reads.contains(b);
      if (!a_in || !b_in) continue;
      if (writes.contains(a) && reads.contains(b)) continue;
      want.add(a, b);
    }
    detail::require_subset(rep, "tso-po", want, tso);
  }
  {
    Relation want(n);
    for (auto [a, b] : g.po.pairs()) {
      bool amf = g.ev(a).act.type == ActionType::MFence;
      bool bmf = g.ev(b).act.type == ActionType::MFence;
      if (amf || bmf) want.add(a, b);
    }
    detail::require_subset(rep, "tso-mf", want, tso);
  }
  {
    Relation want(n);
    for (auto [a, b] : g.po.pairs()) {
      bool a_wufl = uwrites.contains(a) || flushes.contains(a);
      bool b_wufl = uwrites.contains(b) || flushes.contains(b);
      if ((a_wufl && flushes.contains(b)) || (flushes.contains(a) && b_wufl))
        want.add(a, b);
    }
    detail::require_subset(rep, "tso-fl-wufl", want, tso);
  }
  detail::require_subset(rep, "tso-r-fl",
                         detail::id_seq(reads, g.po, flushes), tso);

  if (variant == ModelVariant::Strong) {
    // The strong model's per-cache-line clause is a statement about the
    // hardware's node-sized lines, independent of any adversarial split map
    // the simulator may have used for its persistence queues.
    Relation want(n);
    for (CacheLine cl : g.all_cache_lines(CacheLineMode::Node)) {
      IndexSet here = g.on_cache_line(cl, CacheLineMode::Node);
      here &= durables;
      want |= detail::id_seq(here, tso, here);
    }
    detail::require_subset(rep, "nvo-cl", want, g.nvo);
  } else {
    Relation want(n);
    for (Location loc : g.all_locations()) {
      IndexSet here = g.on_location(loc);
      here &= durables;
      want |= detail::id_seq(here, tso, here);
    }
    detail::require_subset(rep, "nvo-loc", want, g.nvo);
    Relation want2(n);
    for (CacheLine cl : g.all_cache_lines()) {
      IndexSet uw = g.on_cache_line(cl);
      uw &= uwrites;
      IndexSet fl = g.on_cache_line(cl);
      fl &= flushes;
      want2 |= detail::id_seq(uw, tso, fl);
    }
    detail::require_subset(rep, "nvo-wu-fl", want2, g.nvo);
  }
  detail::require_subset(rep, "nvo-fl-d",
                         detail::id_seq(flushes, tso, durables), g.nvo);
  {
    AxiomVerdict v{"unbuf-fl", true, std::nullopt};
    if (!flushes.subset_of(g.persisted)) {
      v.pass = false;
      flushes.for_each([&](size_t f) {
        if (!g.persisted.contains(f) && !v.witness) v.witness = {f, f};
      });
    }
    rep.axioms.push_back(v);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Witness search for ingested traces without a recorded tso.

constexpr size_t kSearchTsoDefaultBound = 12;

/// Exhaustively searches for a strict order satisfying all axioms, by
/// enumerating linear extensions of the axiom-required baseline order.
/// Intended for externally written traces only; simulator output always
/// carries its own witness.
inline std::optional<Relation> search_tso(const ExecutionGraph& g,
                                          ModelVariant variant,
                                          size_t bound = kSearchTsoDefaultBound) {
  const size_t n = g.size();
  IndexSet nonreads = g.reads().complement();
  if (nonreads.count() > bound)
    throw BoundExceeded("search_tso: too many non-read events");

  // Pairs every witness must contain: the po-derived clauses, mo, the
  // init-first clause, external reads-from, and the po disjunct of tso-rf2.
  const IndexSet reads = g.reads(), uwrites = g.uwrites(),
                 flushes = g.flushes(), writes = g.writes();
  Relation required(n);
  g.init.for_each([&](size_t i) {
    for (size_t j = 0; j < n; ++j)
      if (!g.init.contains(j)) required.add(i, j);
  });
  for (auto [a, b] : g.mo.pairs()) required.add(a, b);
  for (auto [a, b] : g.po.pairs()) {
    bool amf = g.ev(a).act.type == ActionType::MFence;
    bool bmf = g.ev(b).act.type == ActionType::MFence;
    bool a_uwr = uwrites.contains(a) || reads.contains(a);
    bool b_uwr = uwrites.contains(b) || reads.contains(b);
    bool a_wufl = uwrites.contains(a) || flushes.contains(a);
    bool b_wufl = uwrites.contains(b) || flushes.contains(b);
    if (amf || bmf) required.add(a, b);
    if (a_uwr && b_uwr && !(writes.contains(a) && reads.contains(b)))
      required.add(a, b);
    if ((a_wufl && flushes.contains(b)) || (flushes.contains(a) && b_wufl))
      required.add(a, b);
    if (reads.contains(a) && flushes.contains(b)) required.add(a, b);
  }
  for (auto [w, r] : g.rf.pairs()) {
    if (!g.po.test(w, r)) required.add(w, r);
    // tso-rf2, po disjunct: a same-location write po-before the read must
    // not be ordered after the read's source.
    IndexSet wloc = g.on_location(g.ev(r).act.loc);
    wloc &= uwrites;
    wloc.for_each([&](size_t w1) {
      if (w1 != w && g.po.test(w1, r)) required.add(w1, w);
    });
  }
  Relation base = required.transitive_closure();
  if (!base.irreflexive()) return std::nullopt;

  // Lazily enumerate linear extensions of the baseline and check each.
  constexpr size_t kMaxExtensions = 200000;
  size_t tried = 0;
  std::vector<size_t> order;
  std::vector<char> used(n, 0);
  std::optional<Relation> found;
  std::function<bool()> go = [&]() -> bool {
    if (found) return true;
    if (order.size() == n) {
      if (++tried > kMaxExtensions)
        throw BoundExceeded("search_tso: extension count over limit");
      Relation tso = Relation::chain(n, order);
      if (check_px86(g, variant, tso).pass()) {
        found = tso;
        return true;
      }
      return false;
    }
    for (size_t cand = 0; cand < n; ++cand) {
      if (used[cand]) continue;
      bool ready = true;
      for (size_t other = 0; other < n; ++other)
        if (!used[other] && other != cand && base.test(other, cand))
          ready = false;
      if (!ready) continue;
      used[cand] = 1;
      order.push_back(cand);
      if (go()) return true;
      order.pop_back();
      used[cand] = 0;
    }
    return false;
  };
  go();
  return found;
}

}  // namespace pxlin::px86

#endif  // PXLIN_PX86_HPP_
