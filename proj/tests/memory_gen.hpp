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

#ifndef PXLIN_TESTS_MEMORY_GEN_HPP_
#define PXLIN_TESTS_MEMORY_GEN_HPP_

#include <random>
#include <set>
#include <vector>

#include "pxlin/checkers.hpp"

namespace pxlin::testutil {

/// A randomized durable memory encoding a set S subseteq {1..key_max}, with
/// up to the given numbers of deleted and garbage nodes and optionally a
/// stale sentinel pair. Links are sorted or dangling, as real executions
/// leave them.
inline Memory gen_durable_memory(std::mt19937_64& rng, prog::ImplId impl,
                                 std::set<int>* out_s, int key_max = 3,
                                 int max_deleted = 3, int max_garbage = 3) {
  const bool opt = impl == prog::ImplId::LinkFreeOpt;
  Memory m;
  uint32_t next = 1;
  std::set<int> s;
  for (int k = 1; k <= key_max; ++k)
    if (rng() % 2) s.insert(k);

  struct NodeSpec {
    Value key;
    bool marked;
    int valid;
    int del_fl;
  };
  std::vector<std::pair<Addr, NodeSpec>> nodes;
  for (int k : s) nodes.push_back({{}, {Value::integer(k), false, 1, 0}});
  size_t deleted = rng() % (max_deleted + 1);
  for (size_t i = 0; i < deleted; ++i)
    nodes.push_back(
        {{}, {Value::integer(1 + rng() % key_max), true, 1,
              static_cast<int>(rng() % 2)}});
  size_t garbage = rng() % (max_garbage + 1);
  for (size_t i = 0; i < garbage; ++i)
    nodes.push_back(
        {{}, {Value::integer(static_cast<int>(rng() % (key_max + 1))), false,
              0, 0}});
  if (rng() % 2) {  // a stale sentinel pair from a prior era
    nodes.push_back({{}, {Value::pos_inf(), false, 1, 0}});
    nodes.push_back({{}, {Value::neg_inf(), false, 1, 0}});
  }
  // Shuffle so address order does not mirror key order.
  for (size_t i = nodes.size(); i > 1; --i)
    std::swap(nodes[i - 1], nodes[rng() % i]);
  for (auto& [a, spec] : nodes) a = Addr{next++};

  auto write_node = [&](Addr a, const NodeSpec& spec) {
    m.set({a, Field::Key}, spec.key);
    // Target: null, dangling, or a strictly larger-keyed node.
    Addr target = kNullAddr;
    if (rng() % 3 == 0) {
      target = Addr{next + 10 + static_cast<uint32_t>(rng() % 5)};  // dangling
    } else {
      std::vector<Addr> larger;
      for (auto& [b, sp] : nodes)
        if (key_less(spec.key, sp.key)) larger.push_back(b);
      if (!larger.empty()) target = larger[rng() % larger.size()];
    }
    m.set({a, Field::Nxt}, Value::ptr(spec.marked, target));
    m.set({a, Field::Valid}, Value::integer(spec.valid));
    if (opt) {
      m.set({a, Field::Val}, Value::integer(1 + rng() % 2));
      m.set({a, Field::InsFl}, Value::integer(rng() % 2));
      m.set({a, Field::DelFl}, Value::integer(spec.del_fl));
    }
  };
  for (auto& [a, spec] : nodes) write_node(a, spec);
  if (out_s) *out_s = s;
  return m;
}

}  // namespace pxlin::testutil

#endif  // PXLIN_TESTS_MEMORY_GEN_HPP_
