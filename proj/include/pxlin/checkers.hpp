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

#ifndef PXLIN_CHECKERS_HPP_
#define PXLIN_CHECKERS_HPP_

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pxlin/graph.hpp"
#include "pxlin/programs.hpp"
#include "pxlin/px86.hpp"
#include "pxlin/spec.hpp"

namespace pxlin::check {

/// Bounds shared by the specification-machine reasoning (key/value universes).
struct CheckContext {
  prog::ImplId impl = prog::ImplId::LinkFreeBasic;
  int keys = 2;
  int vals = 1;

  spec::KsvSpec quotient_spec() const {
    spec::KsvSpec s;
    for (int k = 1; k <= keys; ++k) s.keys.push_back(k);
    if (impl == prog::ImplId::LinkFreeOpt)
      for (int v = 1; v <= vals; ++v) s.vals.push_back(v);
    else
      s.vals.push_back(0);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Representation functions
//
// Abstract states carry, per key, the node address representing it (and the
// stored value for the optimized variant). Quotienting away the addresses
// gives the deterministic store the histories are checked against.

struct AbsState {
  struct Binding {
    Addr addr;
    std::optional<int> val;
    friend auto operator<=>(const Binding&, const Binding&) = default;
  };
  std::map<int, Binding> members;
  friend auto operator<=>(const AbsState&, const AbsState&) = default;

  spec::KsvSpec::State quotient() const {
    spec::KsvSpec::State out;
    for (const auto& [k, b] : members) out[k] = b.val.value_or(0);
    return out;
  }
  std::set<int> key_set() const {
    std::set<int> out;
    for (const auto& [k, b] : members) out.insert(k);
    return out;
  }
  bool has_addr(Addr a) const {
    for (const auto& [k, b] : members)
      if (b.addr == a) return true;
    return false;
  }
};

enum class RepKind : uint8_t { Durable, Volatile, Recovered };

namespace detail {

struct NodeView {
  Addr addr;
  Value key;
  bool marked = false;
  Addr nxt;
  std::optional<int> valid;  // absent for the harris layout
  std::optional<int> val;
  std::optional<int> del_fl;
};

/// Reads a node out of a memory. Sentinel-keyed nodes are recognised before
/// the completeness check so half-built sentinels stay ignorable.
inline std::optional<NodeView> read_node(const Memory& m, Addr a,
                                         const NodeLayout& layout,
                                         bool* is_sentinel,
                                         bool* malformed) {
  NodeView n;
  n.addr = a;
  auto key = m.get({a, Field::Key});
  *is_sentinel = key && !key->is_int();
  if (*is_sentinel) return std::nullopt;
  *malformed = false;
  for (Field f : layout.fields) {
    auto v = m.get({a, f});
    if (!v) {
      *malformed = true;
      return std::nullopt;
    }
    switch (f) {
      case Field::Key: n.key = *v; break;
      case Field::Nxt:
        if (!v->is_next()) {
          *malformed = true;
          return std::nullopt;
        }
        n.marked = v->mark();
        n.nxt = v->next_addr();
        break;
      case Field::Valid: n.valid = static_cast<int>(v->as_int()); break;
      case Field::Val: n.val = static_cast<int>(v->as_int()); break;
      case Field::DelFl: n.del_fl = static_cast<int>(v->as_int()); break;
      case Field::InsFl:
      case Field::Orig: break;
    }
  }
  return n;
}

}  // namespace detail

/// Decodes the durable representation: nodes partition into members (valid,
/// unmarked, one per real key), deleted (valid, marked) and garbage (invalid,
/// unmarked); anything else means the memory encodes no state.
inline std::optional<AbsState> durable_decode(const Memory& m,
                                              prog::ImplId impl) {
  const NodeLayout& layout = prog::layout_of(impl);
  const bool opt = impl == prog::ImplId::LinkFreeOpt;
  AbsState out;
  for (Addr a : m.addresses()) {
    bool sentinel = false, malformed = false;
    auto n = detail::read_node(m, a, layout, &sentinel, &malformed);
    if (sentinel) continue;  // sentinels never survive a crash logically
    if (malformed || !n) return std::nullopt;
    const bool valid = n->valid.value_or(1) == 1;
    if (valid && !n->marked) {
      // A member: its key must be a real one, represented uniquely.
      if (n->key.as_int() < 1) return std::nullopt;
      int k = static_cast<int>(n->key.as_int());
      if (out.members.count(k)) return std::nullopt;
      if (opt && n->del_fl.value_or(0) != 0) return std::nullopt;
      out.members[k] = {a, opt ? n->val : std::nullopt};
    } else if (valid && n->marked) {
      // deleted node: unconstrained otherwise
    } else if (!valid && !n->marked) {
      if (opt && n->del_fl.value_or(0) != 0) return std::nullopt;
    } else {
      return std::nullopt;  // invalid yet marked fits no class
    }
  }
  return out;
}

/// Decodes the volatile representation: a sorted linked list from the head,
/// members possibly interleaved with marked nodes; no lost valid members;
/// link sortedness holds wherever both endpoints are initialised.
inline std::optional<AbsState> volatile_decode(const Memory& m,
                                               prog::ImplId impl, Addr head) {
  const NodeLayout& layout = prog::layout_of(impl);
  const bool opt = impl == prog::ImplId::LinkFreeOpt;
  const bool has_valid = layout.has(Field::Valid);
  if (head.is_null()) return std::nullopt;

  AbsState out;
  std::set<uint32_t> chain;
  // Walk the list from the head.
  {
    auto hk = m.get({head, Field::Key});
    if (!hk || hk->kind() != Value::Kind::NegInf) return std::nullopt;
    Addr cur = head;
    Value last_key = Value::neg_inf();
    bool first = true;
    for (;;) {
      if (chain.count(cur.id)) return std::nullopt;  // cycle
      chain.insert(cur.id);
      auto key = m.get({cur, Field::Key});
      auto nxt = m.get({cur, Field::Nxt});
      if (!key || !nxt || !nxt->is_next()) return std::nullopt;
      if (!first && !(key_less(last_key, *key))) return std::nullopt;
      const bool marked = nxt->mark();
      if (marked) {
        if (has_valid) {
          auto valid = m.get({cur, Field::Valid});
          if (!valid || *valid != Value::integer(1)) return std::nullopt;
        }
      } else if (key->is_int()) {
        int k = static_cast<int>(key->as_int());
        if (k < 1 || out.members.count(k)) return std::nullopt;
        std::optional<int> val;
        if (opt) {
          auto v = m.get({cur, Field::Val});
          if (!v) return std::nullopt;
          val = static_cast<int>(v->as_int());
        }
        if (opt) {
          auto dfl = m.get({cur, Field::DelFl});
          if (!dfl || *dfl != Value::zero()) return std::nullopt;
        }
        out.members[k] = {cur, val};
      } else if (key->kind() == Value::Kind::PosInf) {
        break;  // reached the tail
      } else if (!first) {
        return std::nullopt;  // a second head in the chain
      }
      last_key = *key;
      if (nxt->next_addr().is_null()) return std::nullopt;  // no tail seen
      cur = nxt->next_addr();
      first = false;
    }
  }

  // Global constraints over the rest of the memory.
  for (Addr a : m.addresses()) {
    if (chain.count(a.id)) continue;
    auto key = m.get({a, Field::Key});
    auto nxt = m.get({a, Field::Nxt});
    // Sortedness wherever a non-tail key and an initialised target exist.
    if (key && nxt && key->is_key() && key->kind() != Value::Kind::PosInf &&
        nxt->is_next() && !nxt->next_addr().is_null()) {
      auto tkey = m.get({nxt->next_addr(), Field::Key});
      if (tkey && tkey->is_key() && !key_less(*key, *tkey))
        return std::nullopt;
    }
    if (!key || !key->is_int()) continue;  // stale sentinels: ignored
    if (!nxt || !nxt->is_next()) continue;
    if (has_valid && !nxt->mark()) {
      // An unmarked valid real-keyed node must be in the list.
      auto valid = m.get({a, Field::Valid});
      if (valid && *valid == Value::integer(1)) return std::nullopt;
    }
  }
  return out;
}

inline std::optional<AbsState> rep_decode(const Memory& m, prog::ImplId impl,
                                          Addr head, RepKind which) {
  if (impl == prog::ImplId::HarrisDurable)  // identity family
    return volatile_decode(m, impl, head);
  switch (which) {
    case RepKind::Durable: return durable_decode(m, impl);
    case RepKind::Volatile: return volatile_decode(m, impl, head);
    case RepKind::Recovered: {
      auto d = durable_decode(m, impl);
      auto v = volatile_decode(m, impl, head);
      if (!d || !v || !(*d == *v)) return std::nullopt;
      return d;
    }
  }
  return std::nullopt;
}

/// Membership in the representation family: M encodes S under the chosen
/// view. S is given as the key set (basic) or key->val map (optimized).
inline bool rep_member(const Memory& m, const AbsState& s, RepKind which,
                       prog::ImplId impl, Addr head = kNullAddr) {
  auto got = rep_decode(m, impl, head, which);
  if (!got) return false;
  if (impl == prog::ImplId::HarrisDurable || which != RepKind::Durable) {
    // Address-faithful comparison when the expectation carries addresses.
    AbsState want = s;
    bool with_addrs = true;
    for (auto& [k, b] : want.members)
      if (b.addr.is_null()) with_addrs = false;
    if (with_addrs) return *got == want;
  }
  return got->quotient() == s.quotient();
}

// ---------------------------------------------------------------------------
// Strategy extraction

struct StrategyAnnotation {
  Relation vo;
  std::map<int32_t, size_t> lp;
  std::map<int32_t, bool> r;
  std::map<int32_t, size_t> pt;
  std::set<int32_t> prd;
  std::set<int32_t> hres_needed;
  std::vector<std::string> problems;  // injectivity or shape violations
  bool ok() const { return problems.empty(); }
};

namespace detail {
inline std::vector<size_t> call_events_in_order(const ExecutionGraph& g,
                                                int32_t cid) {
  std::vector<size_t> out;
  for (size_t i = 0; i < g.size(); ++i)
    if (g.ev(i).cid == CallId::call(cid)) out.push_back(i);
  return out;
}
}  // namespace detail

/// Mechanically computes the linearization/persistency annotation the
/// proof-rule conditions are checked against: successful CASes as linearization
/// points, the first persisted validity write as an insert's persistency
/// point, failed operations at their last find read (or via hindsight for
/// the optimized variant's failed deletes and contains).
inline StrategyAnnotation extract_strategy(const ExecutionGraph& g,
                                           prog::ImplId /*impl*/ = {}) {
  StrategyAnnotation ann;
  ann.vo = px86::derive_vo(g);
  std::vector<size_t> nvo_seq =
      enumerate_one(g.nvo.restricted(g.durables()), g.durables());
  std::vector<size_t> nvo_pos(g.size(), SIZE_MAX);
  for (size_t i = 0; i < nvo_seq.size(); ++i) nvo_pos[nvo_seq[i]] = i;

  for (int32_t cid = 0; cid < static_cast<int32_t>(g.calls.size()); ++cid) {
    const Call& call = g.calls[cid];
    std::vector<size_t> evs = detail::call_events_in_order(g, cid);
    if (evs.empty()) continue;
    std::optional<size_t> ret_ev;
    std::optional<size_t> cas_ok;
    std::optional<size_t> last_find_read;
    for (size_t e : evs) {
      const Event& ev = g.ev(e);
      if (ev.act.is_ret()) ret_ev = e;
      if (ev.act.is_update() &&
          (ev.tag == Line::InsCas || ev.tag == Line::DelMarkCas))
        cas_ok = e;
      if (ev.tag == Line::FindCCheck && ev.act.is_read()) last_find_read = e;
    }
    const bool returned = ret_ev.has_value();
    const bool ret_val =
        returned && g.ev(*ret_ev).act.retval == Value::integer(1);

    switch (call.op) {
      case OpKind::Insert: {
        if (cas_ok) {
          ann.lp[cid] = *cas_ok;
          ann.r[cid] = true;
          // pt: the nvo-least persisted write of 1 to the new node's valid
          // field, issued by any call (helping counts).
          Addr n = g.ev(*cas_ok).act.wval.next_addr();
          std::optional<size_t> best;
          for (size_t i = 0; i < g.size(); ++i) {
            const Action& a = g.ev(i).act;
            if (a.type == ActionType::Write && a.loc == Location{n, Field::Valid} &&
                a.wval == Value::integer(1) && g.persisted.contains(i)) {
              if (!best || nvo_pos[i] < nvo_pos[*best]) best = i;
            }
          }
          if (best) ann.pt[cid] = *best;
        } else if (returned && !ret_val) {
          ann.r[cid] = false;
          ann.prd.insert(cid);
          if (last_find_read)
            ann.lp[cid] = *last_find_read;
          else
            ann.problems.push_back("failed insert without a find read");
        }
        break;
      }
      case OpKind::Delete: {
        if (cas_ok) {
          ann.lp[cid] = *cas_ok;
          ann.r[cid] = true;
          if (g.persisted.contains(*cas_ok)) ann.pt[cid] = *cas_ok;
        } else if (returned && !ret_val) {
          // Failed deletes linearize by hindsight in both variants: the
          // find's frontier read does not observe the key's node, so nothing
          // pins it against a racing same-key insert. The find's entry read
          // of the head is from-read-ordered before any such insert's CAS,
          // which guarantees a key-free index inside the call's window.
          ann.r[cid] = false;
          ann.prd.insert(cid);
          ann.hres_needed.insert(cid);
        }
        break;
      }
      case OpKind::Contains: {
        if (returned) {
          ann.r[cid] = ret_val;
          ann.prd.insert(cid);
          ann.hres_needed.insert(cid);
        }
        break;
      }
    }
  }

  // Structural invariants the definitions promise.
  std::set<size_t> seen;
  for (auto& [c, e] : ann.lp)
    if (!seen.insert(e).second) ann.problems.push_back("lp not injective");
  seen.clear();
  for (auto& [c, e] : ann.pt) {
    if (!seen.insert(e).second) ann.problems.push_back("pt not injective");
    if (!g.persisted.contains(e))
      ann.problems.push_back("pt outside the persisted set");
    if (!ann.lp.count(c)) ann.problems.push_back("pt without lp");
  }
  return ann;
}

// ---------------------------------------------------------------------------
// Strategy validation (the induction over enumerations)

enum class ValidateMode : uint8_t { FromRecEnd, FromInit };

struct ValidatePolicy {
  size_t exhaustive_limit = 5000;  // enumerate all if at most this many
  size_t samples = 100;            // otherwise: canonical + this many sampled
  uint64_t seed = 1;
};

struct ValidateReport {
  bool pass = true;
  bool sampled = false;
  size_t enumerations = 0;
  std::string why;
  bool hindsight_window_missing = false;
  std::map<int32_t, size_t> hres;  // indices in the canonical enumeration
  std::string policy_note;
};

namespace detail {

inline bool abs_transition_ok(const AbsState& q, const Call& call, bool ret,
                              const AbsState& q2) {
  const int k = call.key;
  const bool in = q.members.count(k) != 0;
  switch (call.op) {
    case OpKind::Insert:
      if (ret) {
        if (in) return false;
        auto it = q2.members.find(k);
        if (it == q2.members.end()) return false;
        if (q.has_addr(it->second.addr)) return false;  // address not fresh
        if (call.val && it->second.val != call.val) return false;
        AbsState q2_minus = q2;
        q2_minus.members.erase(k);
        return q2_minus == q;
      }
      return in && q2 == q;
    case OpKind::Delete:
      if (ret) {
        if (!in) return false;
        AbsState q_minus = q;
        q_minus.members.erase(k);
        return q2 == q_minus;
      }
      return !in && q2 == q;
    case OpKind::Contains:
      return ret == in && q2 == q;
  }
  return false;
}

struct WalkInput {
  const ExecutionGraph& g;
  prog::ImplId impl;
  RepKind rep;
  const std::map<int32_t, size_t>& lf;
  const std::map<int32_t, bool>& r;
  const std::set<int32_t>& hres_needed;
};

/// One induction pass over an enumeration: non-linearizing events must
/// preserve the decoded state, linearization events must enact a legal
/// transition, and hindsight calls need an enabling index inside their
/// window. Returns the failure reason, if any.
inline std::optional<std::string> walk_enumeration(
    const WalkInput& in, const std::vector<size_t>& seq, size_t start_after,
    std::map<int32_t, size_t>* hres_out) {
  const ExecutionGraph& g = in.g;
  std::map<size_t, int32_t> lf_inv;
  for (auto& [c, e] : in.lf) lf_inv[e] = c;

  // start_after == SIZE_MAX walks from the very beginning (empty memory).
  Memory m;
  if (start_after != SIZE_MAX)
    for (size_t i = 0; i <= start_after && i < seq.size(); ++i)
      m.apply(g.ev(seq[i]).act, g.layout);
  auto q = rep_decode(m, in.impl, g.head, in.rep);
  if (!q)
    return std::string("start memory encodes no state (unrepresentable)");

  // Hindsight windows: positions of each call's UReads in this enumeration.
  std::map<int32_t, std::pair<size_t, size_t>> window;
  for (int32_t c : in.hres_needed) {
    size_t lo = SIZE_MAX, hi = 0;
    for (size_t i = start_after + 1; i < seq.size(); ++i) {
      const Event& ev = g.ev(seq[i]);
      if (ev.cid == CallId::call(c) && ev.act.is_uread()) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    }
    if (lo != SIZE_MAX) window[c] = {lo, hi};
  }
  std::map<int32_t, size_t> hres;

  for (size_t i = start_after + 1; i < seq.size(); ++i) {
    const Event& ev = g.ev(seq[i]);
    m.apply(ev.act, g.layout);
    auto q2 = rep_decode(m, in.impl, g.head, in.rep);
    if (!q2)
      return "memory after " + g.describe_event(seq[i]) +
             " encodes no state (unrepresentable)";
    auto it = lf_inv.find(seq[i]);
    if (it != lf_inv.end()) {
      int32_t c = it->second;
      if (!abs_transition_ok(*q, g.calls[c], in.r.at(c), *q2))
        return "linearization event " + g.describe_event(seq[i]) +
               " does not enact a legal transition";
    } else if (!(*q2 == *q)) {
      return "event " + g.describe_event(seq[i]) +
             " changed the encoded state without linearizing";
    }
    q = q2;
    // Hindsight: record the first enabling index inside each window. Every
    // hindsight call is a reader, so the enabling condition is exactly the
    // membership its return value reports.
    for (auto& [c, w] : window) {
      if (hres.count(c) || i < w.first || i > w.second) continue;
      const bool in_set = q->members.count(g.calls[c].key) != 0;
      if (in_set == in.r.at(c)) hres[c] = i;
    }
  }
  for (auto& [c, w] : window)
    if (!hres.count(c))
      return "no hindsight index for call " + std::to_string(c);
  if (hres_out) *hres_out = hres;
  return std::nullopt;
}

}  // namespace detail

/// Checks that the strategy validates the execution: every rel-respecting
/// enumeration (all of them when few, a canonical one plus samples when not)
/// walks through representable states with legal transitions at the
/// linearization events.
inline ValidateReport validates(const ExecutionGraph& g, prog::ImplId impl,
                                RepKind rep,
                                const std::map<int32_t, size_t>& lf,
                                const std::map<int32_t, bool>& r,
                                const std::set<int32_t>& hres_needed,
                                const Relation& rel, const IndexSet& domain,
                                ValidateMode mode,
                                const ValidatePolicy& policy = {}) {
  ValidateReport rep_out;
  detail::WalkInput in{g, impl, rep, lf, r, hres_needed};

  // The enumerations all start with init (+ recovery, volatile mode).
  auto start_after_of = [&](const std::vector<size_t>& seq) -> size_t {
    size_t last = 0;
    bool any = false;
    for (size_t i = 0; i < seq.size(); ++i) {
      const Event& ev = g.ev(seq[i]);
      bool pre = g.init.contains(seq[i]) ||
                 (mode == ValidateMode::FromRecEnd && ev.cid.is_recovery());
      if (pre) {
        last = i;
        any = true;
      }
    }
    return any ? last : SIZE_MAX;  // SIZE_MAX: walk from the very beginning
  };
  auto run_one = [&](const std::vector<size_t>& seq,
                     std::map<int32_t, size_t>* hres_out) -> bool {
    auto why = detail::walk_enumeration(in, seq, start_after_of(seq), hres_out);
    if (why) {
      rep_out.pass = false;
      rep_out.why = *why;
      return false;
    }
    return true;
  };

  Relation rel_r = rel.restricted(domain);
  size_t count = count_enumerations_up_to(rel_r, domain,
                                          policy.exhaustive_limit + 1);
  if (count <= policy.exhaustive_limit) {
    auto all = enumerate_limit(rel_r, domain, count);
    rep_out.enumerations = all.size();
    rep_out.policy_note = "exhaustive";
    bool first = true;
    for (const auto& seq : all) {
      std::map<int32_t, size_t> hres;
      if (!run_one(seq, &hres)) {
        rep_out.hindsight_window_missing =
            rep_out.why.find("hindsight") != std::string::npos;
        return rep_out;
      }
      if (first) {
        rep_out.hres = hres;
        first = false;
      }
    }
  } else {
    rep_out.sampled = true;
    rep_out.policy_note =
        "sampled: canonical + " + std::to_string(policy.samples) +
        " (extension count exceeds " + std::to_string(policy.exhaustive_limit) +
        ")";
    std::vector<size_t> canonical = enumerate_one(rel_r, domain);
    std::map<int32_t, size_t> hres;
    if (!run_one(canonical, &hres)) {
      rep_out.hindsight_window_missing =
          rep_out.why.find("hindsight") != std::string::npos;
      return rep_out;
    }
    rep_out.hres = hres;
    rep_out.enumerations = 1;
    std::mt19937_64 rng(policy.seed);
    for (size_t s = 0; s < policy.samples; ++s) {
      auto seq = enumerate_sampled(rel_r, domain,
                                   [&](size_t k) { return rng() % k; });
      rep_out.enumerations++;
      if (!run_one(seq, nullptr)) {
        rep_out.hindsight_window_missing =
            rep_out.why.find("hindsight") != std::string::npos;
        return rep_out;
      }
    }
  }
  return rep_out;
}

// ---------------------------------------------------------------------------
// The proof-rule condition checker

struct MasterCondition {
  std::string id;
  bool pass = true;
  std::string detail;
};

struct MasterReport {
  bool precondition_ok = true;
  std::string note;
  std::vector<MasterCondition> conds;
  bool hindsight_window_missing = false;

  bool pass() const {
    if (!precondition_ok) return false;
    for (const auto& c : conds)
      if (!c.pass) return false;
    return true;
  }
  const MasterCondition* find(const std::string& id) const {
    for (const auto& c : conds)
      if (c.id == id) return &c;
    return nullptr;
  }
};

namespace detail {

inline spec::HistEntry entry_of(const ExecutionGraph& g, int32_t cid,
                                bool ret) {
  return {g.calls[cid], ret};
}

/// The linearized call sequence a vo-enumeration induces: calls at their
/// linearization events, hindsight calls spliced in at their indices.
inline std::vector<int32_t> linearized_calls(
    const std::vector<size_t>& seq,
    const std::map<int32_t, size_t>& lp,
    const std::map<int32_t, size_t>& hres) {
  std::map<size_t, int32_t> lp_inv;
  for (auto& [c, e] : lp) lp_inv[e] = c;
  std::map<size_t, std::vector<int32_t>> hres_at;
  for (auto& [c, i] : hres) hres_at[i].push_back(c);
  std::vector<int32_t> out;
  for (size_t i = 0; i < seq.size(); ++i) {
    auto h = hres_at.find(i);
    if (h != hres_at.end())
      for (int32_t c : h->second) out.push_back(c);
    auto it = lp_inv.find(seq[i]);
    if (it != lp_inv.end()) out.push_back(it->second);
  }
  return out;
}

}  // namespace detail

/// Checks each proof-rule condition literally against the extracted strategy,
/// reporting one verdict per condition with the offending calls on failure.
inline MasterReport master_check(const ExecutionGraph& g,
                                 const StrategyAnnotation& ann,
                                 const CheckContext& ctx,
                                 const ValidatePolicy& policy = {}) {
  MasterReport rep;
  const spec::KsvSpec qspec = ctx.quotient_spec();
  auto cond = [&](std::string id, bool pass, std::string detail = "") {
    rep.conds.push_back({std::move(id), pass, std::move(detail)});
  };

  // Executions whose recovery never returned prove nothing here; the
  // recovery-soundness harness covers crashes inside the recovery.
  {
    bool recovery_returned = false;
    for (size_t i = 0; i < g.size(); ++i)
      if (g.ev(i).cid.is_recovery() && g.ev(i).act.is_ret())
        recovery_returned = true;
    if (!recovery_returned) {
      rep.note = "recovery did not return: nothing to check";
      return rep;
    }
  }

  // Precondition: the initial memory encodes a durable state.
  std::vector<Event> init_events;
  g.init.for_each([&](size_t i) { init_events.push_back(g.ev(i)); });
  Memory init_mem = mem_of(init_events, g.layout);
  auto q0 = durable_decode(init_mem, ctx.impl);
  if (!q0) {
    rep.precondition_ok = false;
    rep.note = "initial memory encodes no durable state";
    return rep;
  }
  if (!ann.ok()) {
    rep.precondition_ok = false;
    rep.note = "strategy extraction failed: " + ann.problems.front();
    return rep;
  }

  std::set<int32_t> voided;  // linearized, neither persisted nor a reader
  for (auto& [c, e] : ann.lp)
    if (!ann.pt.count(c) && !ann.prd.count(c)) voided.insert(c);

  // (i) persisted calls have linearization points; hindsight covers exactly
  // the readers without one.
  {
    bool ok = true;
    std::string detail;
    for (auto& [c, e] : ann.pt)
      if (!ann.lp.count(c)) {
        ok = false;
        detail = "persisted call " + std::to_string(c) + " lacks lp";
      }
    std::set<int32_t> want_hres;
    for (int32_t c : ann.prd)
      if (!ann.lp.count(c)) want_hres.insert(c);
    if (ann.hres_needed != want_hres) {
      ok = false;
      detail = "hindsight domain differs from the readers without lp";
    }
    cond("i", ok, detail);
  }
  // (ii) persisted readers are identities.
  {
    bool ok = true;
    std::string detail;
    for (int32_t c : ann.prd) {
      bool r = ann.r.at(c);
      if (!spec::KsvSpec::is_reader(g.calls[c], r)) {
        ok = false;
        detail = "call " + std::to_string(c) + " in PRd is not a reader";
      }
    }
    cond("ii", ok, detail);
  }
  // (iii) vo preserves hb on linearization points.
  {
    Relation hb = g.derive_hb();
    bool ok = true;
    std::string detail;
    for (auto& [c1, e1] : ann.lp)
      for (auto& [c2, e2] : ann.lp)
        if (hb.test(e1, e2) && !ann.vo.test(e1, e2)) {
          ok = false;
          detail = "hb between lp(" + std::to_string(c1) + ") and lp(" +
                   std::to_string(c2) + ") not preserved";
        }
    cond("iii", ok, detail);
  }
  // (iv) lp(c) sits hb-between two events of the call (trivial when local).
  {
    bool ok = true;
    std::string detail;
    for (auto& [c, e] : ann.lp)
      if (!(g.ev(e).cid == CallId::call(c))) {
        ok = false;
        detail = "lp of call " + std::to_string(c) + " is not local";
      }
    cond("iv", ok, detail);
  }

  // (v) the volatile strategy validates, plus (viii) voidability of voided
  // calls, checked along the same enumeration sweep.
  {
    detail::WalkInput in{g, ctx.impl, RepKind::Volatile, ann.lp, ann.r,
                         ann.hres_needed};
    IndexSet domain = IndexSet::full(g.size());
    Relation rel_r = ann.vo.restricted(domain);
    size_t count =
        count_enumerations_up_to(rel_r, domain, policy.exhaustive_limit + 1);
    bool sampled = count > policy.exhaustive_limit;

    bool v_ok = true, viii_ok = true;
    std::string v_detail, viii_detail;
    size_t swept = 0;
    auto start_after_of = [&](const std::vector<size_t>& seq) {
      size_t last = SIZE_MAX;
      for (size_t i = 0; i < seq.size(); ++i)
        if (g.init.contains(seq[i]) || g.ev(seq[i]).cid.is_recovery())
          last = i;
      return last;
    };
    auto sweep_one = [&](const std::vector<size_t>& seq) -> bool {
      ++swept;
      std::map<int32_t, size_t> hres;
      auto why = detail::walk_enumeration(in, seq, start_after_of(seq), &hres);
      if (why) {
        v_ok = false;
        v_detail = *why;
        rep.hindsight_window_missing =
            why->find("hindsight") != std::string::npos;
        return false;
      }
      // (viii): each voided call is voidable against the persisted suffix.
      std::vector<int32_t> lin = detail::linearized_calls(seq, ann.lp, hres);
      for (size_t i = 0; i < lin.size() && viii_ok; ++i) {
        int32_t c = lin[i];
        if (!voided.count(c)) continue;
        spec::History h;
        for (size_t j = i + 1; j < lin.size(); ++j)
          if (ann.pt.count(lin[j]) || ann.prd.count(lin[j]))
            h.push_back(detail::entry_of(g, lin[j], ann.r.at(lin[j])));
        if (!spec::voidable_analytic(
                qspec, detail::entry_of(g, c, ann.r.at(c)), h)) {
          viii_ok = false;
          viii_detail = "voided call " + std::to_string(c) +
                        " not voidable against " + spec::to_string(h);
        }
      }
      return viii_ok;
    };
    if (!sampled) {
      for (auto& seq : enumerate_limit(rel_r, domain, count))
        if (!sweep_one(seq)) break;
    } else {
      std::mt19937_64 rng(policy.seed);
      if (sweep_one(enumerate_one(rel_r, domain))) {
        for (size_t s = 0; s < policy.samples; ++s)
          if (!sweep_one(enumerate_sampled(
                  rel_r, domain, [&](size_t k) { return rng() % k; })))
            break;
      }
    }
    std::string note = sampled ? " [sampled policy: canonical + " +
                                     std::to_string(policy.samples) + "]"
                               : " [exhaustive: " + std::to_string(swept) +
                                     " enumerations]";
    cond("v", v_ok, v_ok ? note : v_detail + note);
    cond("viii", viii_ok, viii_ok ? note : viii_detail);
  }

  // (vi) returned calls are persisted or persisted readers.
  {
    bool ok = true;
    std::string detail;
    g.rets().for_each([&](size_t e) {
      int32_t c = g.ev(e).cid.index();
      if (!ann.pt.count(c) && !ann.prd.count(c)) {
        ok = false;
        detail = "returned call " + std::to_string(c) +
                 " neither persisted nor a persisted reader";
      }
    });
    cond("vi", ok, detail);
  }
  // (vii) persisted pairs commute or persist in linearization order.
  {
    bool ok = true;
    std::string detail;
    for (auto& [c1, p1] : ann.pt)
      for (auto& [c2, p2] : ann.pt) {
        if (c1 == c2) continue;
        if (spec::commutes_analytic(qspec,
                                    detail::entry_of(g, c1, ann.r.at(c1)),
                                    detail::entry_of(g, c2, ann.r.at(c2))))
          continue;
        if (g.nvo.test(p1, p2) && !ann.vo.test(ann.lp.at(c1), ann.lp.at(c2))) {
          ok = false;
          detail = "calls " + std::to_string(c1) + "," + std::to_string(c2) +
                   ": persist order contradicts linearization order";
        }
      }
    cond("vii", ok, detail);
  }
  // (ix) assuming the nvo-induced history legal, the persistent strategy
  // validates from the initial durable state.
  {
    IndexSet pset = g.persisted;
    Relation nvo_p = g.nvo.restricted(pset);
    std::vector<size_t> seq = enumerate_one(nvo_p, pset);
    spec::History nvo_hist;
    std::map<size_t, int32_t> pt_inv;
    for (auto& [c, e] : ann.pt) pt_inv[e] = c;
    for (size_t e : seq)
      if (pt_inv.count(e))
        nvo_hist.push_back(detail::entry_of(g, pt_inv[e], ann.r.at(pt_inv[e])));
    if (!spec::legal_from(qspec, nvo_hist, q0->quotient())) {
      cond("ix", true, "hypothesis fails: nvo-induced history illegal");
    } else {
      detail::WalkInput in{g,     ctx.impl,      RepKind::Durable,
                           ann.pt, ann.r,        {}};
      size_t start = SIZE_MAX;
      for (size_t i = 0; i < seq.size(); ++i)
        if (g.init.contains(seq[i])) start = i;
      auto why = detail::walk_enumeration(in, seq, start, nullptr);
      cond("ix", !why, why ? *why : "");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// The durable-linearizability oracle

constexpr size_t kDlDefaultMaxReturns = 8;

struct DlReport {
  bool pass = false;
  std::string note;
  std::vector<spec::History> witness;  // one linearization per era
};

namespace detail {

struct EraCalls {
  // Calls with a return event, plus pending calls eligible for completion.
  std::vector<int32_t> returned;
  std::vector<int32_t> pending;
  std::map<int32_t, bool> ret_val;
  Relation order{0};  // hb-derived precedence between calls (by local index)
  const ExecutionGraph* g = nullptr;
};

inline EraCalls era_calls(const ExecutionGraph& g) {
  EraCalls out;
  out.g = &g;
  std::map<int32_t, size_t> first_event;
  std::map<int32_t, size_t> ret_event;
  for (size_t i = 0; i < g.size(); ++i) {
    const Event& e = g.ev(i);
    if (!e.cid.is_call()) continue;
    if (!first_event.count(e.cid.index())) first_event[e.cid.index()] = i;
    if (e.act.is_ret()) ret_event[e.cid.index()] = i;
  }
  for (auto& [c, fe] : first_event) {
    if (ret_event.count(c)) {
      out.returned.push_back(c);
      out.ret_val[c] =
          g.ev(ret_event[c]).act.retval == Value::integer(1);
    } else {
      out.pending.push_back(c);
    }
  }
  // Precedence: the abstract execution erases library events, so returns
  // are ordered by program order and client-to-client reads-from.
  Relation hbar(g.size());
  for (auto [a, b] : g.po.pairs()) hbar.add(a, b);
  for (auto [a, b] : g.rf.pairs())
    if (g.ev(a).cid.is_client() && g.ev(b).cid.is_client()) hbar.add(a, b);
  hbar = hbar.transitive_closure();

  std::vector<int32_t> all = out.returned;
  all.insert(all.end(), out.pending.begin(), out.pending.end());
  out.order = Relation(all.size());
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = 0; j < all.size(); ++j) {
      if (i == j) continue;
      if (!ret_event.count(all[i])) continue;  // pending: no successors
      size_t ri = ret_event[all[i]];
      bool before = false;
      for (size_t e = 0; e < g.size(); ++e)
        if (g.ev(e).cid == CallId::call(all[j]) && hbar.test(ri, e))
          before = true;
      if (before) out.order.add(i, j);
    }
  return out;
}

}  // namespace detail

/// Brute-force durable-linearizability check: per era, search over
/// completion subsets, synthesized return values and hb-respecting
/// linearizations for a concatenation that is legal from the empty store.
inline DlReport dl_check(const Chain& chain, const CheckContext& ctx,
                         size_t max_returns = kDlDefaultMaxReturns) {
  const spec::KsvSpec qspec = ctx.quotient_spec();
  using State = spec::KsvSpec::State;

  struct Node {
    State state;
    int parent = -1;
    spec::History hist;
  };
  std::vector<std::vector<Node>> levels;
  levels.push_back({{qspec.initial(), -1, {}}});

  for (const ExecutionGraph& g : chain.eras) {
    detail::EraCalls ec = detail::era_calls(g);
    if (ec.returned.size() + ec.pending.size() > max_returns)
      throw BoundExceeded("dl_check: too many calls in one era");
    std::vector<int32_t> all = ec.returned;
    all.insert(all.end(), ec.pending.begin(), ec.pending.end());

    // Enumerate era histories: completion subset x values x interleavings.
    std::vector<spec::History> eras_hists;
    const size_t n_pending = ec.pending.size();
    for (uint32_t drop_mask = 0; drop_mask < (1u << n_pending); ++drop_mask) {
      for (uint32_t val_mask = 0; val_mask < (1u << n_pending); ++val_mask) {
        // Skip value choices of dropped calls to avoid duplicates.
        if (val_mask & drop_mask) continue;
        IndexSet chosen(all.size());
        for (size_t i = 0; i < ec.returned.size(); ++i) chosen.insert(i);
        for (size_t p = 0; p < n_pending; ++p)
          if (!(drop_mask & (1u << p)))
            chosen.insert(ec.returned.size() + p);
        std::vector<std::vector<size_t>> orders;
        try {
          orders = enumerate_all(ec.order, chosen, max_returns);
        } catch (const CycleError&) {
          continue;
        }
        for (auto& ord : orders) {
          spec::History h;
          for (size_t idx : ord) {
            int32_t c = all[idx];
            bool v = idx < ec.returned.size()
                         ? ec.ret_val[c]
                         : (val_mask >> (idx - ec.returned.size())) & 1;
            h.push_back({g.calls[c], v});
          }
          eras_hists.push_back(std::move(h));
        }
      }
    }
    std::sort(eras_hists.begin(), eras_hists.end());
    eras_hists.erase(std::unique(eras_hists.begin(), eras_hists.end()),
                     eras_hists.end());

    // Extend the reachable-state frontier.
    std::vector<Node> next;
    std::set<State> seen;
    const auto& prev = levels.back();
    for (size_t pi = 0; pi < prev.size(); ++pi) {
      for (const spec::History& h : eras_hists) {
        for (const State& s : spec::legal_between(qspec, h, prev[pi].state)) {
          if (seen.count(s)) continue;
          seen.insert(s);
          next.push_back({s, static_cast<int>(pi), h});
        }
      }
    }
    if (next.empty()) {
      DlReport rep;
      rep.pass = false;
      rep.note = "no legal linearization concatenation up to era " +
                 std::to_string(levels.size() - 1);
      // Describe the returned calls per era for the counterexample.
      for (size_t e = 0; e < levels.size() && e < chain.eras.size(); ++e) {
        detail::EraCalls ecc = detail::era_calls(chain.eras[e]);
        spec::History returned;
        for (int32_t c : ecc.returned)
          returned.push_back({chain.eras[e].calls[c], ecc.ret_val[c]});
        rep.note += "; era " + std::to_string(e) + " returned: " +
                    spec::to_string(returned);
      }
      return rep;
    }
    levels.push_back(std::move(next));
  }

  DlReport rep;
  rep.pass = true;
  rep.note = "linearization witness found";
  // Reconstruct the per-era witness histories.
  int idx = 0;
  std::vector<spec::History> rev;
  for (size_t lvl = levels.size() - 1; lvl > 0; --lvl) {
    rev.push_back(levels[lvl][idx].hist);
    idx = levels[lvl][idx].parent;
  }
  rep.witness.assign(rev.rbegin(), rev.rend());
  return rep;
}

// ---------------------------------------------------------------------------
// Recovery soundness

struct RecoveryReport {
  bool precondition_ok = true;  // the memory encodes a durable state
  bool recovers = true;         // clause (a): ends in recovered(S)
  bool writes_irrelevant = true;  // clause (b): every write preserves durable
  std::string detail;
  AbsState state;
  bool pass() const { return precondition_ok && recovers && writes_irrelevant; }
};

using RecoveryFactory = std::function<std::unique_ptr<prog::ProgramBase>(
    prog::ImplId, std::vector<Addr>)>;

/// Runs the recovery sequentially from M (no weak effects are observable in
/// a sequential program) and checks both soundness clauses. The factory
/// seam exists so tests can subject deliberately broken recoveries to the
/// same harness.
inline RecoveryReport recovery_soundness(prog::ImplId impl, const Memory& m0,
                                         const RecoveryFactory& factory = {}) {
  RecoveryReport rep;
  auto s = durable_decode(m0, impl);
  if (!s) {
    rep.precondition_ok = false;
    rep.detail = "memory encodes no durable state";
    return rep;
  }
  rep.state = *s;

  // Sequential interpreter over a plain memory.
  Memory m = m0;
  const NodeLayout& layout = prog::layout_of(impl);
  uint32_t next_addr = 1;
  for (Addr a : m.addresses()) next_addr = std::max(next_addr, a.id + 1);
  std::vector<Addr> dir = m.addresses();
  auto rec = factory ? factory(impl, dir)
                     : prog::recovery_program(impl, dir, std::nullopt);
  std::vector<Action> writes;
  std::set<uint32_t> fresh;  // addresses the recovery itself allocated
  Addr head;
  prog::Request req = rec->start();
  for (int guard = 0; guard < 100000; ++guard) {
    using K = prog::Request::Kind;
    Value obs = Value::zero();
    bool done = false;
    switch (req.kind) {
      case K::Read: {
        auto v = m.get(req.loc);
        if (!v) {
          rep.recovers = false;
          rep.detail = "recovery read of an undefined location";
          return rep;
        }
        obs = *v;
        break;
      }
      case K::Write: {
        Action a = Action::write(req.loc, req.wval);
        m.apply(a, layout);
        writes.push_back(a);
        break;
      }
      case K::Alloc: {
        Addr a{next_addr++};
        fresh.insert(a.id);
        Action act = Action::alloc(a);
        m.apply(act, layout);
        writes.push_back(act);
        obs = Value::ptr(false, a);
        break;
      }
      case K::Cas: {
        rep.recovers = false;
        rep.detail = "recovery issued an update";
        return rep;
      }
      case K::MFence:
      case K::Flush:
        break;
      case K::Ret:
        head = req.retval.next_addr();
        done = true;
        break;
    }
    if (done) break;
    req = rec->advance(obs);
  }

  // Clause (a): the final memory encodes the recovered state S.
  if (!rep_member(m, *s, RepKind::Recovered, impl, head)) {
    rep.recovers = false;
    rep.detail = "final memory does not encode the recovered state";
  }

  // Clause (b), in its persistence-reachable form. Every commit-order
  // prefix of the recovery's writes must keep the durable state at S (that
  // is what a crash can expose), and toggling any write on a *surviving*
  // node must never matter. Writes building the freshly allocated sentinels
  // are exempt from toggling: their cache line persists in commit order, so
  // a validity bit without its key is not a reachable durable memory.
  for (size_t cut = 0; cut <= writes.size() && rep.writes_irrelevant; ++cut) {
    Memory pre = m0;
    for (size_t i = 0; i < cut; ++i) pre.apply(writes[i], layout);
    auto got = durable_decode(pre, impl);
    if (!got || !(*got == *s)) {
      rep.writes_irrelevant = false;
      rep.detail = "write prefix " + std::to_string(cut) +
                   " leaves a different durable state";
    }
  }
  for (size_t w = 0; w < writes.size() && rep.writes_irrelevant; ++w) {
    if (writes[w].type == ActionType::Alloc) continue;
    if (fresh.count(writes[w].loc.addr.id)) continue;
    for (size_t cut = 0; cut <= writes.size(); ++cut) {
      Memory with = m0, without = m0;
      for (size_t i = 0; i < cut; ++i) {
        with.apply(writes[i], layout);
        if (i != w) without.apply(writes[i], layout);
      }
      auto a = durable_decode(with, impl);
      auto b = durable_decode(without, impl);
      if (!(a.has_value() == b.has_value() && (!a || *a == *b))) {
        rep.writes_irrelevant = false;
        rep.detail = "recovery write #" + std::to_string(w) +
                     " affects the durable state";
        break;
      }
    }
  }
  return rep;
}

}  // namespace pxlin::check

#endif  // PXLIN_CHECKERS_HPP_
