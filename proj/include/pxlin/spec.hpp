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

#ifndef PXLIN_SPEC_HPP_
#define PXLIN_SPEC_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pxlin/model.hpp"

namespace pxlin::spec {

struct HistEntry {
  Call call;
  bool ret = false;
  friend auto operator<=>(const HistEntry&, const HistEntry&) = default;
};
using History = std::vector<HistEntry>;

inline std::string to_string(const HistEntry& e) {
  std::string s = op_name(e.call.op);
  s += "(" + std::to_string(e.call.key);
  if (e.call.val) s += "," + std::to_string(*e.call.val);
  s += ")=";
  s += e.ret ? "true" : "false";
  return s;
}
inline std::string to_string(const History& h) {
  std::string s;
  for (size_t i = 0; i < h.size(); ++i) {
    if (i) s += " ";
    s += to_string(h[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Specification machines
//
// Each machine provides: State, universe(), initial(), step(q, call, ret),
// is_reader(call, ret) and restricted_to_key(k) for the per-key analytic
// routes. step returns the set of successor states; empty means illegal.

/// Finite sets of keys.
struct KsSpec {
  using State = std::set<int>;
  std::vector<int> keys;

  static KsSpec over_keys(int k_max) {
    KsSpec s;
    for (int k = 1; k <= k_max; ++k) s.keys.push_back(k);
    return s;
  }

  State initial() const { return {}; }

  std::vector<State> universe() const {
    std::vector<State> out{{}};
    for (int k : keys) {
      size_t n = out.size();
      for (size_t i = 0; i < n; ++i) {
        State with = out[i];
        with.insert(k);
        out.push_back(std::move(with));
      }
    }
    return out;
  }

  std::vector<State> step(const State& q, const Call& c, bool ret) const {
    const bool in = q.count(c.key) != 0;
    switch (c.op) {
      case OpKind::Insert:
        if (ret && !in) {
          State q2 = q;
          q2.insert(c.key);
          return {q2};
        }
        if (!ret && in) return {q};
        return {};
      case OpKind::Delete:
        if (ret && in) {
          State q2 = q;
          q2.erase(c.key);
          return {q2};
        }
        if (!ret && !in) return {q};
        return {};
      case OpKind::Contains:
        return ret == in ? std::vector<State>{q} : std::vector<State>{};
    }
    return {};
  }

  static bool is_reader(const Call& c, bool ret) {
    return c.op == OpKind::Contains || !ret;
  }

  KsSpec restricted_to_key(int k) const { return KsSpec{{k}}; }
};

/// Key-value stores: partial maps key -> value. The deterministic quotient
/// of the address-annotated store below.
struct KsvSpec {
  using State = std::map<int, int>;
  std::vector<int> keys;
  std::vector<int> vals;

  static KsvSpec over(int k_max, int v_max) {
    KsvSpec s;
    for (int k = 1; k <= k_max; ++k) s.keys.push_back(k);
    for (int v = 1; v <= v_max; ++v) s.vals.push_back(v);
    return s;
  }

  State initial() const { return {}; }

  std::vector<State> universe() const {
    std::vector<State> out{{}};
    for (int k : keys) {
      size_t n = out.size();
      for (size_t i = 0; i < n; ++i)
        for (int v : vals) {
          State with = out[i];
          with[k] = v;
          out.push_back(std::move(with));
        }
    }
    return out;
  }

  std::vector<State> step(const State& q, const Call& c, bool ret) const {
    const bool in = q.count(c.key) != 0;
    switch (c.op) {
      case OpKind::Insert:
        if (ret && !in) {
          State q2 = q;
          q2[c.key] = c.val.value_or(0);
          return {q2};
        }
        if (!ret && in) return {q};
        return {};
      case OpKind::Delete:
        if (ret && in) {
          State q2 = q;
          q2.erase(c.key);
          return {q2};
        }
        if (!ret && !in) return {q};
        return {};
      case OpKind::Contains:
        return ret == in ? std::vector<State>{q} : std::vector<State>{};
    }
    return {};
  }

  static bool is_reader(const Call& c, bool ret) {
    return c.op == OpKind::Contains || !ret;
  }

  KsvSpec restricted_to_key(int k) const { return KsvSpec{{k}, vals}; }
};

/// Address-annotated key-value stores: key -> (address, value), with
/// insert picking an address fresh in the current state. Nondeterministic.
struct KvsSpec {
  struct Binding {
    uint32_t addr;
    int val;
    friend auto operator<=>(const Binding&, const Binding&) = default;
  };
  using State = std::map<int, Binding>;
  std::vector<int> keys;
  std::vector<int> vals;
  std::vector<uint32_t> pool;

  static KvsSpec over(int k_max, int v_max, uint32_t pool_size) {
    KvsSpec s;
    for (int k = 1; k <= k_max; ++k) s.keys.push_back(k);
    for (int v = 1; v <= v_max; ++v) s.vals.push_back(v);
    for (uint32_t a = 1; a <= pool_size; ++a) s.pool.push_back(a);
    return s;
  }

  State initial() const { return {}; }

  bool fresh_in(uint32_t addr, const State& q) const {
    for (const auto& [k, b] : q)
      if (b.addr == addr) return false;
    return true;
  }

  std::vector<State> universe() const {
    std::vector<State> out{{}};
    for (int k : keys) {
      size_t n = out.size();
      for (size_t i = 0; i < n; ++i)
        for (int v : vals)
          for (uint32_t a : pool) {
            if (!fresh_in(a, out[i])) continue;
            State with = out[i];
            with[k] = {a, v};
            out.push_back(std::move(with));
          }
    }
    return out;
  }

  std::vector<State> step(const State& q, const Call& c, bool ret) const {
    const bool in = q.count(c.key) != 0;
    switch (c.op) {
      case OpKind::Insert:
        if (ret && !in) {
          std::vector<State> out;
          for (uint32_t a : pool) {
            if (!fresh_in(a, q)) continue;
            State q2 = q;
            q2[c.key] = {a, c.val.value_or(0)};
            out.push_back(std::move(q2));
          }
          return out;
        }
        if (!ret && in) return {q};
        return {};
      case OpKind::Delete:
        if (ret && in) {
          State q2 = q;
          q2.erase(c.key);
          return {q2};
        }
        if (!ret && !in) return {q};
        return {};
      case OpKind::Contains:
        return ret == in ? std::vector<State>{q} : std::vector<State>{};
    }
    return {};
  }

  static bool is_reader(const Call& c, bool ret) {
    return c.op == OpKind::Contains || !ret;
  }

  /// Address erasure onto the deterministic quotient.
  static KsvSpec::State erase_addresses(const State& q) {
    KsvSpec::State out;
    for (const auto& [k, b] : q) out[k] = b.val;
    return out;
  }
};

// ---------------------------------------------------------------------------
// Generic history algebra

template <class Spec>
bool is_deterministic(const Spec& s) {
  std::vector<Call> calls;
  for (int k : s.keys) {
    calls.push_back({OpKind::Insert, k, 1});
    calls.push_back({OpKind::Delete, k, {}});
    calls.push_back({OpKind::Contains, k, {}});
  }
  for (const auto& q : s.universe())
    for (const Call& c : calls)
      for (bool ret : {false, true})
        if (s.step(q, c, ret).size() > 1) return false;
  return true;
}

namespace detail {
template <class State>
void dedup(std::vector<State>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}
}  // namespace detail

/// All states reachable from q by running h; empty iff h is illegal from q.
template <class Spec>
std::vector<typename Spec::State> legal_between(const Spec& s, const History& h,
                                                const typename Spec::State& q) {
  std::vector<typename Spec::State> cur{q};
  for (const HistEntry& e : h) {
    std::vector<typename Spec::State> next;
    for (const auto& st : cur)
      for (auto& st2 : s.step(st, e.call, e.ret)) next.push_back(std::move(st2));
    detail::dedup(next);
    if (next.empty()) return {};
    cur = std::move(next);
  }
  return cur;
}

template <class Spec>
bool legal_from(const Spec& s, const History& h, const typename Spec::State& q) {
  return !legal_between(s, h, q).empty();
}

/// Histories are equivalent when they admit the same state transitions from
/// every state of the (bounded) universe.
template <class Spec>
bool hist_equiv(const Spec& s, const History& h1, const History& h2) {
  for (const auto& q : s.universe())
    if (legal_between(s, h1, q) != legal_between(s, h2, q)) return false;
  return true;
}

template <class Spec>
bool commutes_brute(const Spec& s, const HistEntry& a, const HistEntry& b) {
  return hist_equiv(s, {a, b}, {b, a});
}

/// a is h-voidable: wherever a ++ h is legal, h alone is legal.
template <class Spec>
bool voidable_brute(const Spec& s, const HistEntry& a, const History& h) {
  History ah{a};
  ah.insert(ah.end(), h.begin(), h.end());
  for (const auto& q : s.universe())
    if (legal_from(s, ah, q) && !legal_from(s, h, q)) return false;
  return true;
}

/// a is h-appendable: wherever both a and h are legal, h ++ a is legal.
template <class Spec>
bool appendable_brute(const Spec& s, const HistEntry& a, const History& h) {
  History ha = h;
  ha.push_back(a);
  for (const auto& q : s.universe())
    if (legal_from(s, {a}, q) && legal_from(s, h, q) && !legal_from(s, ha, q))
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Analytic fast paths
//
// Legality in the set specifications factorises over keys: an op touches one
// key and its enabledness depends only on that key's slot. The analytic
// routes exploit this, evaluating on single-key sub-universes instead of the
// exponential full universe. The brute-force oracles above stay the ground
// truth; the test suite checks exhaustive agreement.

namespace detail {
inline History project_key(const History& h, int k) {
  History out;
  for (const HistEntry& e : h)
    if (e.call.key == k) out.push_back(e);
  return out;
}

template <class Spec>
bool satisfiable(const Spec& s, const History& h) {
  // h legal from some state <=> every per-key projection is.
  std::set<int> ks;
  for (const auto& e : h) ks.insert(e.call.key);
  for (int k : ks) {
    Spec sub = s.restricted_to_key(k);
    History hk = project_key(h, k);
    bool ok = false;
    for (const auto& q : sub.universe())
      if (legal_from(sub, hk, q)) ok = true;
    if (!ok) return false;
  }
  return true;
}
}  // namespace detail

template <class Spec>
bool commutes_analytic(const Spec& s, const HistEntry& a, const HistEntry& b) {
  if (a.call.key != b.call.key) return true;
  Spec sub = s.restricted_to_key(a.call.key);
  return commutes_brute(sub, a, b);
}

template <class Spec>
bool voidable_analytic(const Spec& s, const HistEntry& a, const History& h) {
  if (Spec::is_reader(a.call, a.ret)) return true;
  const int k = a.call.key;
  if (detail::project_key(h, k).empty()) return true;
  History ah{a};
  ah.insert(ah.end(), h.begin(), h.end());
  return !detail::satisfiable(s, ah);
}

template <class Spec>
bool appendable_analytic(const Spec& s, const HistEntry& a, const History& h) {
  const int k = a.call.key;
  // If some other key's projection is unsatisfiable, h is never legal.
  std::set<int> ks;
  for (const auto& e : h) ks.insert(e.call.key);
  for (int j : ks) {
    if (j == k) continue;
    Spec sub = s.restricted_to_key(j);
    History hj = detail::project_key(h, j);
    bool ok = false;
    for (const auto& q : sub.universe())
      if (legal_from(sub, hj, q)) ok = true;
    if (!ok) return true;
  }
  Spec sub = s.restricted_to_key(k);
  History hk = detail::project_key(h, k);
  History hka = hk;
  hka.push_back(a);
  for (const auto& q : sub.universe())
    if (legal_from(sub, {a}, q) && legal_from(sub, hk, q) &&
        !legal_from(sub, hka, q))
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Quotient agreement

/// h is legal in the address-annotated store iff it is legal in the quotient,
/// checked from every pair of corresponding states.
inline bool quotient_agrees(const KvsSpec& kvs, const KsvSpec& ksv,
                            const History& h) {
  for (const auto& q : kvs.universe()) {
    bool in_kvs = legal_from(kvs, h, q);
    bool in_ksv = legal_from(ksv, h, KvsSpec::erase_addresses(q));
    if (in_kvs != in_ksv) return false;
  }
  return true;
}

}  // namespace pxlin::spec

#endif  // PXLIN_SPEC_HPP_
