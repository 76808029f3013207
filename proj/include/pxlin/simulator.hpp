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

#ifndef PXLIN_SIMULATOR_HPP_
#define PXLIN_SIMULATOR_HPP_

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "pxlin/graph.hpp"
#include "pxlin/programs.hpp"

namespace pxlin::sim {

// ---------------------------------------------------------------------------
// Configuration

struct CrashPlan {
  enum class Kind : uint8_t {
    None,          // final era: run to completion and drain everything
    AtStep,        // crash after the given scheduler step (recovery included)
    AfterReturns,  // crash the moment every workload op has returned
    Free,          // exploration decides (systematic branches, random samples)
  };
  Kind kind = Kind::None;
  size_t step = 0;
};

struct EraConfig {
  std::vector<std::vector<Call>> workload;  // one op list per worker thread
  CrashPlan crash;
};

/// Test seam: lets litmus suites run scripted programs on the machine.
using ProgramFactory = std::function<std::unique_ptr<prog::ProgramBase>(
    uint8_t tid, size_t op_index, const Call&, Addr head,
    prog::MutationFlags)>;

struct ChainConfig {
  prog::ImplId impl = prog::ImplId::LinkFreeBasic;
  prog::MutationFlags mut;
  std::vector<EraConfig> eras;
  ProgramFactory factory;  // empty: spawn the impl's own operations
};

/// Persistent state threaded through the eras of a chain.
struct ChainState {
  Memory nvm;
  std::vector<Addr> directory;  // every address ever allocated
  std::optional<Addr> head;
  uint32_t next_addr = 1;
};

// ---------------------------------------------------------------------------
// Scheduler choices

struct Choice {
  enum class Kind : uint8_t { Issue, Commit, Drain, Crash };
  Kind kind = Kind::Issue;
  uint8_t tid = 0;     // Issue/Commit
  CacheLine line;      // Drain
};

/// Answers "which choice index at decision k" for a run; also told how many
/// options existed, so systematic exploration can rebuild its frontier.
using ChoicePicker = std::function<size_t(size_t step, size_t n_options)>;

// ---------------------------------------------------------------------------
// The operational machine: TSO store buffers over per-cache-line
// persistence buffers, recording an execution graph with a tso witness.

class Machine {
 public:
  Machine(const ChainConfig& cfg, const EraConfig& era, uint32_t era_idx,
          ChainState state)
      : impl_(cfg.impl),
        mut_(cfg.mut),
        factory_(cfg.factory),
        layout_(prog::layout_of(cfg.impl)),
        cl_mode_(cfg.mut.weak_cacheline ? CacheLineMode::PerField
                                        : CacheLineMode::Node),
        era_idx_(era_idx),
        state_(std::move(state)) {
    seed_init_events();
    start_recovery();
    threads_.resize(era.workload.size());
    for (size_t t = 0; t < era.workload.size(); ++t) {
      threads_[t].tid = static_cast<uint8_t>(t + 1);
      for (const Call& c : era.workload[t]) threads_[t].todo.push_back(c);
    }
  }

  bool in_recovery() const { return recovery_ != nullptr; }

  /// One sequential recovery step. Recovery is driven deterministically,
  /// with no interleaved commits or drains; crash plans can still chop it
  /// via the step counter.
  void step_recovery() { issue_recovery(); }

  void finish_recovery_phase() {
    for (auto& th : threads_) spawn_next(th);
  }

  std::vector<Choice> enabled_choices() const {
    std::vector<Choice> out;
    for (const auto& th : threads_)
      if (!th.dead && th.prog) out.push_back({Choice::Kind::Issue, th.tid, {}});
    for (const auto& th : threads_)
      if (!th.buffer.empty()) out.push_back({Choice::Kind::Commit, th.tid, {}});
    for (const auto& [line, q] : persist_)
      if (queue_has_undrained(q)) out.push_back({Choice::Kind::Drain, 0, line});
    return out;
  }

  void apply(const Choice& ch) {
    switch (ch.kind) {
      case Choice::Kind::Issue: issue_thread(thread_by_tid(ch.tid)); break;
      case Choice::Kind::Commit: commit_one(thread_by_tid(ch.tid)); break;
      case Choice::Kind::Drain: drain_one(ch.line); break;
      case Choice::Kind::Crash: crash_finalize(); break;
    }
  }

  bool workload_done() const {
    for (const auto& th : threads_)
      if (!th.dead && (th.prog || !th.todo.empty())) return false;
    return true;
  }
  bool fully_drained() const {
    for (const auto& th : threads_)
      if (!th.buffer.empty()) return false;
    for (const auto& [line, q] : persist_)
      if (!q.empty()) return false;
    return true;
  }

  /// Crash: buffers are discarded, the persisted set is frozen, and nvo/tso
  /// are totalized over the lost durable events (never touching nvm).
  void crash_finalize() {
    persisted_upto_ = nvo_log_.size();
    for (auto& th : threads_) {
      for (uint32_t w : th.buffer) {
        tso_extra_.push_back(w);
        virtual_enqueue(w);
      }
      th.buffer.clear();
    }
    std::vector<CacheLine> lines;
    for (const auto& [line, q] : persist_)
      if (!q.empty()) lines.push_back(line);
    for (CacheLine line : lines) {
      auto& q = persist_[line];
      while (!q.empty()) {
        uint32_t e = q.front();
        q.pop_front();
        if (drained_[e]) continue;
        drained_[e] = 1;
        nvo_extra_.push_back(e);
      }
    }
    crashed_ = true;
  }

  /// Final era epilogue: commit and drain everything, deterministically.
  void drain_all_finalize() {
    for (auto& th : threads_)
      while (!th.buffer.empty()) commit_one(th);
    std::vector<CacheLine> lines;
    for (const auto& [line, q] : persist_)
      if (!q.empty()) lines.push_back(line);
    for (CacheLine line : lines)
      while (!persist_[line].empty()) drain_one(line);
    persisted_upto_ = nvo_log_.size();
  }

  ExecutionGraph build_graph() const {
    ExecutionGraph g;
    g.era = era_idx_;
    g.layout = layout_;
    g.cl_mode = cl_mode_;
    g.head = state_.head.value_or(kNullAddr);
    g.events = events_;
    g.calls = calls_;
    const size_t n = events_.size();
    g.init = IndexSet(n);
    for (uint32_t i : init_events_) g.init.insert(i);
    g.persisted = IndexSet(n);
    for (size_t i = 0; i < persisted_upto_; ++i) g.persisted.insert(nvo_log_[i]);

    g.po = Relation(n);
    for (uint32_t i : init_events_)
      for (size_t j = 0; j < n; ++j)
        if (!g.init.contains(j)) g.po.add(i, j);
    std::vector<uint32_t> rec_events;
    std::map<uint8_t, std::vector<uint32_t>> per_thread;
    for (size_t j = 0; j < n; ++j) {
      if (g.init.contains(j)) continue;
      if (events_[j].cid.is_recovery())
        rec_events.push_back(j);
      else
        per_thread[events_[j].tid].push_back(j);
    }
    for (uint32_t r : rec_events)
      for (size_t j = 0; j < n; ++j)
        if (!g.init.contains(j) && !events_[j].cid.is_recovery())
          g.po.add(r, j);
    auto add_chain = [&](const std::vector<uint32_t>& seq) {
      for (size_t i = 0; i < seq.size(); ++i)
        for (size_t j = i + 1; j < seq.size(); ++j) g.po.add(seq[i], seq[j]);
    };
    add_chain(rec_events);
    for (auto& [tid, seq] : per_thread) add_chain(seq);

    g.rf = Relation(n);
    for (auto [w, r] : rf_) g.rf.add(w, r);
    g.mo = Relation(n);
    for (const auto& [loc, seq] : mo_) {
      for (size_t i = 0; i < seq.size(); ++i)
        for (size_t j = i + 1; j < seq.size(); ++j) g.mo.add(seq[i], seq[j]);
    }
    std::vector<size_t> nvo_all(nvo_log_.begin(), nvo_log_.end());
    nvo_all.insert(nvo_all.end(), nvo_extra_.begin(), nvo_extra_.end());
    g.nvo = Relation::chain(n, nvo_all);
    std::vector<size_t> tso_all(tso_log_.begin(), tso_log_.end());
    tso_all.insert(tso_all.end(), tso_extra_.begin(), tso_extra_.end());
    g.tso = Relation::chain(n, tso_all);
    return g;
  }

  ChainState take_state() {
    ChainState s = std::move(state_);
    return s;
  }

  bool crashed() const { return crashed_; }
  size_t event_count() const { return events_.size(); }

  /// nvm must equal the memory induced by the drained prefix of nvo.
  bool nvm_matches_nvo_log() const {
    std::vector<Event> seq;
    for (uint32_t i : nvo_log_) seq.push_back(events_[i]);
    return mem_of(seq, layout_) == state_.nvm;
  }

 private:
  struct ThreadState {
    uint8_t tid = 1;
    std::deque<Call> todo;
    std::unique_ptr<prog::ProgramBase> prog;
    std::optional<prog::Request> req;
    int32_t cid = -1;
    size_t op_index = 0;
    bool dead = false;
    std::deque<uint32_t> buffer;  // store buffer: event indices, FIFO
  };

  prog::ImplId impl_;
  prog::MutationFlags mut_;
  ProgramFactory factory_;
  NodeLayout layout_;
  CacheLineMode cl_mode_;
  uint32_t era_idx_;
  ChainState state_;

  std::vector<Event> events_;
  std::vector<Call> calls_;
  std::vector<uint32_t> init_events_;
  std::vector<std::pair<uint32_t, uint32_t>> rf_;
  std::map<Location, std::vector<uint32_t>> mo_;
  std::vector<uint32_t> nvo_log_, nvo_extra_, tso_log_, tso_extra_;
  std::vector<char> drained_;
  size_t persisted_upto_ = 0;
  bool crashed_ = false;

  // Volatile view: committed values and their writer events.
  std::map<Location, std::pair<Value, uint32_t>> volatile_mem_;
  std::map<CacheLine, std::deque<uint32_t>> persist_;

  std::unique_ptr<prog::ProgramBase> recovery_;
  std::optional<prog::Request> recovery_req_;
  std::vector<ThreadState> threads_;

  ThreadState& thread_by_tid(uint8_t tid) { return threads_[tid - 1]; }

  bool queue_has_undrained(const std::deque<uint32_t>& q) const {
    for (uint32_t e : q)
      if (!drained_[e]) return true;
    return false;
  }

  uint32_t push_event(uint8_t tid, CallId cid, Action act, Line tag) {
    Event e;
    e.id = static_cast<uint32_t>(events_.size());
    e.tid = tid;
    e.cid = cid;
    e.act = std::move(act);
    e.tag = tag;
    events_.push_back(e);
    drained_.push_back(0);
    return e.id;
  }

  void seed_init_events() {
    for (const auto& [loc, val] : state_.nvm.entries()) {
      uint32_t id = push_event(0, CallId::client(), Action::write(loc, val),
                               Line::None);
      init_events_.push_back(id);
      volatile_mem_[loc] = {val, id};
      mo_[loc].push_back(id);
      tso_log_.push_back(id);
      nvo_log_.push_back(id);
      drained_[id] = 1;
    }
    persisted_upto_ = nvo_log_.size();
  }

  void start_recovery() {
    std::vector<Addr> dir;
    for (Addr a : state_.directory)
      if (state_.nvm.has_addr(a)) dir.push_back(a);
    recovery_ =
        prog::recovery_program(impl_, std::move(dir), state_.head);
    recovery_req_ = recovery_->start();
  }

  void spawn_next(ThreadState& th) {
    if (th.todo.empty() || th.dead) return;
    Call c = th.todo.front();
    th.todo.pop_front();
    th.cid = static_cast<int32_t>(calls_.size());
    calls_.push_back(c);
    th.op_index++;
    Addr head = state_.head.value_or(kNullAddr);
    th.prog = factory_ ? factory_(th.tid, th.op_index - 1, c, head, mut_)
                       : prog::spawn(impl_, c, head, mut_);
    th.req = th.prog->start();
  }

  bool addr_accessible(Addr a) const {
    return !a.is_null() && volatile_mem_.lower_bound({a, Field::Key}) !=
                               volatile_mem_.end() &&
           volatile_mem_.lower_bound({a, Field::Key})->first.addr == a;
  }

  void commit_event(uint32_t w) {
    // Store-buffer entry (or direct update/alloc) reaches the volatile view
    // and its cache line's persistence buffer; tso position is now.
    const Action& act = events_[w].act;
    tso_log_.push_back(w);
    for (Location l : act.locations(layout_)) {
      Value v = act.type == ActionType::Alloc ? Value::zero() : act.wval;
      volatile_mem_[l] = {v, w};
      mo_[l].push_back(w);
    }
    if (act.type == ActionType::Alloc && cl_mode_ == CacheLineMode::PerField) {
      for (Location l : act.locations(layout_))
        persist_[cache_line_of(l, cl_mode_)].push_back(w);
    } else {
      Location l0 = act.locations(layout_).front();
      persist_[cache_line_of(l0, cl_mode_)].push_back(w);
    }
  }

  void commit_one(ThreadState& th) {
    uint32_t w = th.buffer.front();
    th.buffer.pop_front();
    commit_event(w);
  }

  void drain_one(CacheLine line) {
    auto& q = persist_[line];
    while (!q.empty()) {
      uint32_t e = q.front();
      q.pop_front();
      if (drained_[e]) continue;  // multi-line alloc drained via another line
      drained_[e] = 1;
      state_.nvm.apply(events_[e].act, layout_);
      nvo_log_.push_back(e);
      if (!crashed_) persisted_upto_ = nvo_log_.size();
      return;
    }
  }

  void drain_own_buffer(ThreadState* th) {
    if (!th) return;
    while (!th->buffer.empty()) commit_one(*th);
  }

  void virtual_enqueue(uint32_t w) {
    // Crash totalization: never-committed writes get mo and persist-queue
    // slots so nvo can be total on all durables; nvm is left alone.
    const Action& act = events_[w].act;
    for (Location l : act.locations(layout_)) mo_[l].push_back(w);
    if (act.type == ActionType::Alloc && cl_mode_ == CacheLineMode::PerField) {
      for (Location l : act.locations(layout_))
        persist_[cache_line_of(l, cl_mode_)].push_back(w);
    } else {
      Location l0 = act.locations(layout_).front();
      persist_[cache_line_of(l0, cl_mode_)].push_back(w);
    }
  }

  struct ExecResult {
    std::optional<Value> obs;  // value fed back to the instance
    bool returned = false;
    bool errored = false;
  };

  /// Performs one request on behalf of (tid, cid). One event per call,
  /// except flushes, which also drain pending same-line persists.
  ExecResult execute(uint8_t tid, CallId cid, ThreadState* th,
                     const prog::Request& req) {
    using K = prog::Request::Kind;
    ExecResult res;
    switch (req.kind) {
      case K::Read: {
        if (!addr_accessible(req.loc.addr)) return emit_err(tid, cid);
        // Store-buffer forwarding: newest own buffered write to the location.
        std::optional<std::pair<Value, uint32_t>> hit;
        if (th)
          for (auto it = th->buffer.rbegin(); it != th->buffer.rend(); ++it) {
            const Action& a = events_[*it].act;
            if (a.loc == req.loc && a.type == ActionType::Write) {
              hit = {a.wval, *it};
              break;
            }
          }
        if (!hit) {
          auto it = volatile_mem_.find(req.loc);
          if (it == volatile_mem_.end()) return emit_err(tid, cid);
          hit = it->second;
        }
        uint32_t id =
            push_event(tid, cid, Action::read(req.loc, hit->first), req.tag);
        tso_log_.push_back(id);
        rf_.push_back({hit->second, id});
        res.obs = hit->first;
        return res;
      }
      case K::Write: {
        if (!addr_accessible(req.loc.addr)) return emit_err(tid, cid);
        uint32_t id =
            push_event(tid, cid, Action::write(req.loc, req.wval), req.tag);
        th ? (void)th->buffer.push_back(id) : commit_event(id);
        res.obs = Value::zero();
        return res;
      }
      case K::Cas: {
        if (!addr_accessible(req.loc.addr)) return emit_err(tid, cid);
        drain_own_buffer(th);
        auto it = volatile_mem_.find(req.loc);
        if (it == volatile_mem_.end()) return emit_err(tid, cid);
        auto [cur, writer] = it->second;
        if (cur == req.expect) {
          uint32_t id = push_event(
              tid, cid, Action::update(req.loc, cur, req.wval), req.tag);
          rf_.push_back({writer, id});
          commit_event(id);
        } else {
          uint32_t id =
              push_event(tid, cid, Action::read(req.loc, cur), req.tag);
          tso_log_.push_back(id);
          rf_.push_back({writer, id});
        }
        res.obs = cur;
        return res;
      }
      case K::MFence: {
        drain_own_buffer(th);
        uint32_t id = push_event(tid, cid, Action::mfence(), req.tag);
        tso_log_.push_back(id);
        res.obs = Value::zero();
        return res;
      }
      case K::Flush: {
        if (!addr_accessible(req.flush_addr)) return emit_err(tid, cid);
        drain_own_buffer(th);
        CacheLine line = flush_line(req.flush_addr, cl_mode_);
        auto& q = persist_[line];
        while (!q.empty()) {
          uint32_t e = q.front();
          q.pop_front();
          if (drained_[e]) continue;
          drained_[e] = 1;
          state_.nvm.apply(events_[e].act, layout_);
          nvo_log_.push_back(e);
        }
        uint32_t id =
            push_event(tid, cid, Action::flush(req.flush_addr), req.tag);
        tso_log_.push_back(id);
        nvo_log_.push_back(id);
        drained_[id] = 1;
        if (!crashed_) persisted_upto_ = nvo_log_.size();
        res.obs = Value::zero();
        return res;
      }
      case K::Alloc: {
        drain_own_buffer(th);
        Addr a{state_.next_addr++};
        state_.directory.push_back(a);
        uint32_t id = push_event(tid, cid, Action::alloc(a), req.tag);
        commit_event(id);
        res.obs = Value::ptr(false, a);
        return res;
      }
      case K::Ret: {
        uint32_t id = push_event(tid, cid, Action::ret(req.retval), req.tag);
        (void)id;
        tso_log_.push_back(id);
        res.obs = req.retval;
        res.returned = true;
        return res;
      }
    }
    return res;
  }

  ExecResult emit_err(uint8_t tid, CallId cid) {
    uint32_t id = push_event(tid, cid, Action::err(), Line::None);
    tso_log_.push_back(id);
    ExecResult r;
    r.errored = true;
    return r;
  }

  void issue_recovery() {
    ExecResult res = execute(0, CallId::recovery(), nullptr, *recovery_req_);
    if (res.errored) {
      recovery_.reset();  // recovery wedged; surfaces as a wellformed failure
      return;
    }
    if (res.returned) {
      state_.head = recovery_req_->retval.next_addr();
      recovery_.reset();
      return;
    }
    recovery_req_ = recovery_->advance(*res.obs);
  }

  void issue_thread(ThreadState& th) {
    ExecResult res = execute(th.tid, CallId::call(th.cid), &th, *th.req);
    if (res.errored) {
      th.dead = true;
      th.prog.reset();
      return;
    }
    if (res.returned) {
      th.prog.reset();
      th.req.reset();
      spawn_next(th);
      return;
    }
    th.req = th.prog->advance(*res.obs);
  }
};

// ---------------------------------------------------------------------------
// Era and chain runners

struct EraResult {
  ExecutionGraph graph;
  ChainState state;
  bool crashed = false;
  size_t steps = 0;
};

/// Runs one era under the given picker. AtStep crash plans count scheduler
/// steps from the era's start, recovery included.
inline EraResult run_era(const ChainConfig& cfg, const EraConfig& era,
                         uint32_t era_idx, ChainState state,
                         const ChoicePicker& pick, size_t* step,
                         bool allow_free_crash) {
  Machine m(cfg, era, era_idx, std::move(state));
  const CrashPlan& plan = era.crash;
  const size_t era_start = *step;
  auto at_step_hit = [&] {
    return plan.kind == CrashPlan::Kind::AtStep &&
           *step - era_start >= plan.step;
  };
  while (m.in_recovery()) {
    if (at_step_hit()) {
      m.crash_finalize();
      break;
    }
    m.step_recovery();
    ++*step;
  }
  if (!m.crashed()) m.finish_recovery_phase();
  while (!m.crashed()) {
    if (at_step_hit()) {
      m.crash_finalize();
      break;
    }
    if (plan.kind == CrashPlan::Kind::AfterReturns && m.workload_done()) {
      m.crash_finalize();
      break;
    }
    if (plan.kind == CrashPlan::Kind::None && m.workload_done()) {
      m.drain_all_finalize();
      break;
    }
    std::vector<Choice> choices = m.enabled_choices();
    if (choices.empty()) {
      if (plan.kind == CrashPlan::Kind::None)
        m.drain_all_finalize();
      else
        m.crash_finalize();  // free/step plans: era over, crash cleanly
      break;
    }
    const bool may_crash =
        allow_free_crash && plan.kind == CrashPlan::Kind::Free;
    size_t extra = may_crash ? 1 : 0;
    size_t idx = pick(*step, choices.size() + extra);
    ++*step;
    if (idx >= choices.size()) {
      m.crash_finalize();
      break;
    }
    m.apply(choices[idx]);
  }
  EraResult out{m.build_graph(), {}, m.crashed(), *step};
  out.state = m.take_state();
  return out;
}

inline bool era_needs_crash(const ChainConfig& cfg, size_t era_idx) {
  return era_idx + 1 < cfg.eras.size();
}

/// Runs a whole chain; the picker sees one global step counter.
inline Chain run_chain(const ChainConfig& cfg, const ChoicePicker& pick) {
  Chain chain;
  ChainState st;
  size_t step = 0;
  for (size_t i = 0; i < cfg.eras.size(); ++i) {
    EraResult r = run_era(cfg, cfg.eras[i], static_cast<uint32_t>(i),
                          std::move(st), pick, &step, era_needs_crash(cfg, i));
    chain.eras.push_back(std::move(r.graph));
    st = std::move(r.state);
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Policies

/// Rough step budget of an era, used to place random crash points.
inline size_t era_step_horizon(const EraConfig& era) {
  size_t ops = 0;
  for (const auto& w : era.workload) ops += w.size();
  return 80 + 60 * ops;
}

/// Free crash plans resolved to concrete uniformly-drawn crash steps, so a
/// random sweep covers early, mid and post-return crashes alike.
inline ChainConfig randomize_free_crashes(ChainConfig cfg, std::mt19937_64& rng) {
  for (EraConfig& era : cfg.eras)
    if (era.crash.kind == CrashPlan::Kind::Free) {
      era.crash.kind = CrashPlan::Kind::AtStep;
      // Never before the first recovery step: a well-formed execution has a
      // nonempty recovery.
      era.crash.step = 1 + rng() % era_step_horizon(era);
    }
  return cfg;
}

/// Reproducible random scheduling from a seed.
inline Chain run_chain_random(const ChainConfig& cfg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  ChainConfig resolved = randomize_free_crashes(cfg, rng);
  ChoicePicker pick = [&rng](size_t, size_t n) -> size_t {
    return static_cast<size_t>(rng() % n);
  };
  return run_chain(resolved, pick);
}

/// Replays an explicit choice stack (systematic exploration, counterexample
/// replay). Off-stack steps take choice 0.
inline Chain run_chain_choices(const ChainConfig& cfg,
                               const std::vector<uint32_t>& stack,
                               std::vector<size_t>* branching = nullptr) {
  ChoicePicker pick = [&](size_t step, size_t n) -> size_t {
    if (branching) {
      if (branching->size() <= step) branching->resize(step + 1, 0);
      (*branching)[step] = n;
    }
    size_t c = step < stack.size() ? stack[step] : 0;
    return c < n ? c : n - 1;
  };
  return run_chain(cfg, pick);
}

struct ExploreLimits {
  size_t max_runs = 20000;
  size_t max_steps = 100000;  // per run safety net
};

struct ExploreStats {
  size_t runs = 0;
  bool truncated = false;  // hit max_runs before exhausting the choice tree
};

/// Bounded depth-first enumeration of schedules, drain interleavings and
/// (for Free crash plans) crash points. Plain DFS, no reduction; each run
/// replays its choice stack from scratch. The callback may return false to
/// stop early.
inline ExploreStats explore_systematic(
    const ChainConfig& cfg, const ExploreLimits& lim,
    const std::function<bool(const Chain&, const std::vector<uint32_t>&)>& f) {
  ExploreStats stats;
  std::vector<uint32_t> stack;
  for (;;) {
    std::vector<size_t> branching;
    Chain chain = run_chain_choices(cfg, stack, &branching);
    stats.runs++;
    std::vector<uint32_t> run_stack = stack;
    run_stack.resize(branching.size(), 0);
    if (!f(chain, run_stack)) return stats;
    if (stats.runs >= lim.max_runs) {
      stats.truncated = true;
      return stats;
    }
    // Advance to the next leaf: bump the deepest position with room.
    size_t depth = branching.size();
    stack = std::move(run_stack);
    while (depth > 0 && stack[depth - 1] + 1 >= branching[depth - 1]) --depth;
    if (depth == 0) return stats;
    stack[depth - 1]++;
    stack.resize(depth);
  }
}

}  // namespace pxlin::sim

#endif  // PXLIN_SIMULATOR_HPP_
