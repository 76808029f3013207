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

#ifndef PXLIN_RELATION_HPP_
#define PXLIN_RELATION_HPP_

#include <cassert>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pxlin {

struct CycleError : std::runtime_error {
  CycleError() : std::runtime_error("relation has a cycle on the given set") {}
};

struct BoundExceeded : std::runtime_error {
  explicit BoundExceeded(const char* what) : std::runtime_error(what) {}
};

/// Dense bitset over event indices 0..n-1.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  size_t universe_size() const { return n_; }

  void insert(size_t i) { words_[i >> 6] |= uint64_t{1} << (i & 63); }
  void erase(size_t i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
  bool contains(size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  size_t count() const {
    size_t c = 0;
    for (uint64_t w : words_) c += static_cast<size_t>(__builtin_popcountll(w));
    return c;
  }
  bool empty() const {
    for (uint64_t w : words_)
      if (w) return false;
    return true;
  }

  IndexSet& operator|=(const IndexSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  IndexSet& operator&=(const IndexSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  IndexSet& subtract(const IndexSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  IndexSet complement() const {
    IndexSet r(n_);
    for (size_t i = 0; i < n_; ++i)
      if (!contains(i)) r.insert(i);
    return r;
  }

  bool operator==(const IndexSet& o) const { return words_ == o.words_; }

  bool subset_of(const IndexSet& o) const {
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  template <class F>
  void for_each(F&& f) const {
    for (size_t w = 0; w < words_.size(); ++w) {
      uint64_t bits = words_[w];
      while (bits) {
        unsigned b = static_cast<unsigned>(__builtin_ctzll(bits));
        f(w * 64 + b);
        bits &= bits - 1;
      }
    }
  }

  std::vector<size_t> elements() const {
    std::vector<size_t> out;
    for_each([&](size_t i) { out.push_back(i); });
    return out;
  }

  static IndexSet full(size_t n) {
    IndexSet s(n);
    for (size_t i = 0; i < n; ++i) s.insert(i);
    return s;
  }
  static IndexSet of(size_t n, std::initializer_list<size_t> xs) {
    IndexSet s(n);
    for (size_t x : xs) s.insert(x);
    return s;
  }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> words_;
  friend class Relation;
};

/// Binary relation on event indices, stored as one successor bitset per row.
class Relation {
 public:
  Relation() = default;
  explicit Relation(size_t n) : n_(n), rows_(n, IndexSet(n)) {}

  size_t universe_size() const { return n_; }

  void add(size_t a, size_t b) { rows_[a].insert(b); }
  void remove(size_t a, size_t b) { rows_[a].erase(b); }
  bool test(size_t a, size_t b) const { return rows_[a].contains(b); }
  const IndexSet& successors(size_t a) const { return rows_[a]; }

  bool operator==(const Relation& o) const { return rows_ == o.rows_; }

  size_t pair_count() const {
    size_t c = 0;
    for (const auto& r : rows_) c += r.count();
    return c;
  }
  bool empty() const {
    for (const auto& r : rows_)
      if (!r.empty()) return false;
    return true;
  }

  std::vector<std::pair<size_t, size_t>> pairs() const {
    std::vector<std::pair<size_t, size_t>> out;
    for (size_t a = 0; a < n_; ++a)
      rows_[a].for_each([&](size_t b) { out.emplace_back(a, b); });
    return out;
  }

  Relation& operator|=(const Relation& o) {
    for (size_t i = 0; i < n_; ++i) rows_[i] |= o.rows_[i];
    return *this;
  }
  friend Relation operator|(Relation a, const Relation& b) {
    a |= b;
    return a;
  }

  /// r1 ; r2
  friend Relation compose(const Relation& r1, const Relation& r2) {
    Relation out(r1.n_);
    for (size_t a = 0; a < r1.n_; ++a)
      r1.rows_[a].for_each([&](size_t m) { out.rows_[a] |= r2.rows_[m]; });
    return out;
  }

  Relation inverse() const {
    Relation out(n_);
    for (size_t a = 0; a < n_; ++a)
      rows_[a].for_each([&](size_t b) { out.add(b, a); });
    return out;
  }

  Relation restricted(const IndexSet& xs) const {
    Relation out(n_);
    xs.for_each([&](size_t a) {
      out.rows_[a] = rows_[a];
      out.rows_[a] &= xs;
    });
    return out;
  }

  /// Pairs with no interposed element: {(x,y) in r | !exists z. x r z r y}.
  Relation immediate() const {
    Relation out(n_);
    for (size_t a = 0; a < n_; ++a) {
      rows_[a].for_each([&](size_t b) {
        bool interposed = false;
        rows_[a].for_each([&](size_t z) {
          if (z != b && rows_[z].contains(b)) interposed = true;
        });
        if (!interposed) out.add(a, b);
      });
    }
    return out;
  }

  Relation transitive_closure() const {
    Relation out = *this;
    for (size_t k = 0; k < n_; ++k) {
      for (size_t i = 0; i < n_; ++i)
        if (out.rows_[i].contains(k)) out.rows_[i] |= out.rows_[k];
    }
    return out;
  }

  bool irreflexive() const {
    for (size_t i = 0; i < n_; ++i)
      if (rows_[i].contains(i)) return false;
    return true;
  }
  bool transitive() const {
    for (size_t a = 0; a < n_; ++a) {
      bool ok = true;
      rows_[a].for_each([&](size_t b) {
        if (!rows_[b].subset_of(rows_[a])) ok = false;
      });
      if (!ok) return false;
    }
    return true;
  }
  bool acyclic() const { return transitive_closure().irreflexive(); }
  bool strict_partial_order() const { return irreflexive() && transitive(); }

  bool total_on(const IndexSet& xs) const {
    bool ok = true;
    xs.for_each([&](size_t a) {
      xs.for_each([&](size_t b) {
        if (a != b && !test(a, b) && !test(b, a)) ok = false;
      });
    });
    return ok;
  }

  bool subset_of(const Relation& o) const {
    for (size_t a = 0; a < n_; ++a)
      if (!rows_[a].subset_of(o.rows_[a])) return false;
    return true;
  }

  /// First (a,b) in *this and not in o, if any. Used for axiom witnesses.
  std::optional<std::pair<size_t, size_t>> first_not_in(const Relation& o) const {
    for (size_t a = 0; a < n_; ++a) {
      for (size_t w = 0; w < rows_[a].words_.size(); ++w) {
        uint64_t bad = rows_[a].words_[w] & ~o.rows_[a].words_[w];
        if (bad) {
          size_t b = w * 64 + static_cast<size_t>(__builtin_ctzll(bad));
          return std::make_pair(a, b);
        }
      }
    }
    return std::nullopt;
  }

  /// Builds the strict total order a0 < a1 < ... from a sequence.
  static Relation chain(size_t n, const std::vector<size_t>& seq) {
    Relation out(n);
    for (size_t i = 0; i < seq.size(); ++i)
      for (size_t j = i + 1; j < seq.size(); ++j) out.add(seq[i], seq[j]);
    return out;
  }

 private:
  size_t n_ = 0;
  std::vector<IndexSet> rows_;
};

/// One enumeration of X respecting rel (ties broken by smallest index).
/// Throws CycleError when rel is cyclic within X.
inline std::vector<size_t> enumerate_one(const Relation& rel, const IndexSet& xs) {
  std::vector<size_t> elems = xs.elements();
  std::vector<size_t> indeg(rel.universe_size(), 0);
  for (size_t a : elems)
    rel.successors(a).for_each([&](size_t b) {
      if (xs.contains(b)) indeg[b]++;
    });
  std::vector<size_t> out;
  std::vector<char> taken(rel.universe_size(), 0);
  for (size_t step = 0; step < elems.size(); ++step) {
    size_t pick = SIZE_MAX;
    for (size_t a : elems)
      if (!taken[a] && indeg[a] == 0) {
        pick = a;
        break;
      }
    if (pick == SIZE_MAX) throw CycleError();
    taken[pick] = 1;
    out.push_back(pick);
    rel.successors(pick).for_each([&](size_t b) {
      if (xs.contains(b)) indeg[b]--;
    });
  }
  return out;
}

constexpr size_t kEnumerateAllDefaultBound = 10;

/// All enumerations of X respecting rel. Refuses sets larger than
/// max_elems: oracles stay desk-scale, never silently truncated.
inline std::vector<std::vector<size_t>> enumerate_all(
    const Relation& rel, const IndexSet& xs,
    size_t max_elems = kEnumerateAllDefaultBound) {
  std::vector<size_t> elems = xs.elements();
  if (elems.size() > max_elems)
    throw BoundExceeded("enumerate_all: set larger than configured bound");
  // Detect cycles up front so the error is not order-dependent.
  (void)enumerate_one(rel, xs);

  std::vector<std::vector<size_t>> out;
  std::vector<size_t> cur;
  std::vector<char> used(elems.size(), 0);
  std::function<void()> go = [&] {
    if (cur.size() == elems.size()) {
      out.push_back(cur);
      return;
    }
    for (size_t i = 0; i < elems.size(); ++i) {
      if (used[i]) continue;
      size_t cand = elems[i];
      bool ready = true;
      for (size_t j = 0; j < elems.size(); ++j)
        if (!used[j] && j != i && rel.test(elems[j], cand)) ready = false;
      if (!ready) continue;
      used[i] = 1;
      cur.push_back(cand);
      go();
      cur.pop_back();
      used[i] = 0;
    }
  };
  go();
  return out;
}

namespace detail {
/// Indegree-driven DFS over the linear extensions of rel on xs, invoking
/// `leaf` per complete extension until it returns false.
template <class Leaf>
void extensions_dfs(const Relation& rel, const IndexSet& xs, Leaf&& leaf) {
  std::vector<size_t> elems = xs.elements();
  const size_t n = elems.size();
  std::vector<size_t> indeg(rel.universe_size(), 0);
  for (size_t a : elems)
    rel.successors(a).for_each([&](size_t b) {
      if (xs.contains(b) && b != a) indeg[b]++;
    });
  std::vector<size_t> order;
  std::vector<char> taken(rel.universe_size(), 0);
  bool stop = false;
  std::function<void()> go = [&] {
    if (stop) return;
    if (order.size() == n) {
      if (!leaf(order)) stop = true;
      return;
    }
    for (size_t cand : elems) {
      if (taken[cand] || indeg[cand] != 0) continue;
      taken[cand] = 1;
      order.push_back(cand);
      rel.successors(cand).for_each([&](size_t b) {
        if (xs.contains(b) && !taken[b]) indeg[b]--;
      });
      go();
      rel.successors(cand).for_each([&](size_t b) {
        if (xs.contains(b) && !taken[b]) indeg[b]++;
      });
      order.pop_back();
      taken[cand] = 0;
      if (stop) return;
    }
  };
  go();
}
}  // namespace detail

/// Number of linear extensions, counted up to `limit` (returns limit when
/// there are at least that many). Never materialises the enumerations.
inline size_t count_enumerations_up_to(const Relation& rel, const IndexSet& xs,
                                       size_t limit) {
  (void)enumerate_one(rel, xs);
  size_t count = 0;
  detail::extensions_dfs(rel, xs, [&](const std::vector<size_t>&) {
    return ++count < limit;
  });
  return count;
}

/// Materialises up to max_results enumerations (unlike enumerate_all, no
/// bound on the element count; meant for checker sweeps over whole graphs).
inline std::vector<std::vector<size_t>> enumerate_limit(const Relation& rel,
                                                        const IndexSet& xs,
                                                        size_t max_results) {
  (void)enumerate_one(rel, xs);
  std::vector<std::vector<size_t>> out;
  detail::extensions_dfs(rel, xs, [&](const std::vector<size_t>& order) {
    out.push_back(order);
    return out.size() < max_results;
  });
  return out;
}

/// A pseudo-random enumeration of X respecting rel, driven by `next(k)`,
/// a callable returning a value in [0,k).
template <class Rng>
inline std::vector<size_t> enumerate_sampled(const Relation& rel,
                                             const IndexSet& xs, Rng&& next) {
  std::vector<size_t> elems = xs.elements();
  std::vector<size_t> indeg(rel.universe_size(), 0);
  for (size_t a : elems)
    rel.successors(a).for_each([&](size_t b) {
      if (xs.contains(b)) indeg[b]++;
    });
  std::vector<char> taken(rel.universe_size(), 0);
  std::vector<size_t> out;
  for (size_t step = 0; step < elems.size(); ++step) {
    std::vector<size_t> ready;
    for (size_t a : elems)
      if (!taken[a] && indeg[a] == 0) ready.push_back(a);
    if (ready.empty()) throw CycleError();
    size_t pick = ready[next(ready.size())];
    taken[pick] = 1;
    out.push_back(pick);
    rel.successors(pick).for_each([&](size_t b) {
      if (xs.contains(b)) indeg[b]--;
    });
  }
  return out;
}

}  // namespace pxlin

#endif  // PXLIN_RELATION_HPP_
