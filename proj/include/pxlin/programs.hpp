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

#ifndef PXLIN_PROGRAMS_HPP_
#define PXLIN_PROGRAMS_HPP_

#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pxlin/model.hpp"

namespace pxlin::prog {

enum class ImplId : uint8_t { HarrisDurable, LinkFreeBasic, LinkFreeOpt };

inline const char* impl_name(ImplId id) {
  switch (id) {
    case ImplId::HarrisDurable: return "harris-durable";
    case ImplId::LinkFreeBasic: return "link-free-basic";
    case ImplId::LinkFreeOpt: return "link-free-opt";
  }
  return "?";
}
inline std::optional<ImplId> impl_from_name(const std::string& s) {
  if (s == "harris-durable") return ImplId::HarrisDurable;
  if (s == "link-free-basic") return ImplId::LinkFreeBasic;
  if (s == "link-free-opt") return ImplId::LinkFreeOpt;
  return std::nullopt;
}

inline const NodeLayout& layout_of(ImplId id) {
  switch (id) {
    case ImplId::HarrisDurable: return layout_harris();
    case ImplId::LinkFreeBasic: return layout_link_free_basic();
    case ImplId::LinkFreeOpt: return layout_link_free_opt();
  }
  return layout_link_free_basic();
}

/// Switches that excise specific flush/validity steps, realizing the
/// counterexample scenarios the mutation suite hunts for.
struct MutationFlags {
  bool skip_flush_ins = false;
  bool skip_flush_del = false;
  bool skip_valid = false;
  bool weak_cacheline = false;  // machine-level: split-line persist queues

  bool any() const {
    return skip_flush_ins || skip_flush_del || skip_valid || weak_cacheline;
  }
};

struct UnknownOp : std::runtime_error {
  explicit UnknownOp(const std::string& what) : std::runtime_error(what) {}
};
struct ProtocolMismatch : std::logic_error {
  explicit ProtocolMismatch(const std::string& what) : std::logic_error(what) {}
};

// ---------------------------------------------------------------------------
// Requests: what an instance asks the machine to do next.

struct Request {
  enum class Kind : uint8_t { Read, Write, Cas, MFence, Flush, Alloc, Ret };
  Kind kind = Kind::Read;
  Location loc;
  Value wval;
  Value expect;  // Cas only
  Value retval;  // Ret only
  Addr flush_addr;
  Line tag = Line::None;

  static Request read(Location l, Line t) {
    Request r;
    r.kind = Kind::Read;
    r.loc = l;
    r.tag = t;
    return r;
  }
  static Request write(Location l, Value v, Line t) {
    Request r;
    r.kind = Kind::Write;
    r.loc = l;
    r.wval = v;
    r.tag = t;
    return r;
  }
  static Request cas(Location l, Value expect, Value v, Line t) {
    Request r;
    r.kind = Kind::Cas;
    r.loc = l;
    r.expect = expect;
    r.wval = v;
    r.tag = t;
    return r;
  }
  static Request mfence() {
    Request r;
    r.kind = Kind::MFence;
    return r;
  }
  static Request flush(Addr a, Line t) {
    Request r;
    r.kind = Kind::Flush;
    r.flush_addr = a;
    r.tag = t;
    return r;
  }
  static Request alloc(Line t) {
    Request r;
    r.kind = Kind::Alloc;
    r.tag = t;
    return r;
  }
  static Request ret(Value v) {
    Request r;
    r.kind = Kind::Ret;
    r.retval = v;
    r.tag = Line::RetLine;
    return r;
  }
};

/// Deterministic action-emitting program. The machine performs each request,
/// feeds back the observation (read value, allocated address, or unit), and
/// asks for the next one. After a Ret request the machine stops driving the
/// instance.
class ProgramBase {
 public:
  virtual ~ProgramBase() = default;
  virtual Request start() = 0;
  virtual Request advance(Value observed) = 0;
};

// ---------------------------------------------------------------------------
// The set-algorithm interpreters. One frame per (pseudo-)procedure, with an
// explicit program counter; sub-procedure results come back in sub0/sub1.

namespace detail {

enum class Proc : uint8_t {
  Find,
  Trim,
  FlushDel,
  FlushIns,
  MakeValid,
  Insert,
  Delete,
  Contains,
};

struct Frame {
  Proc proc;
  int pc = 0;
  Value p, c, s, n, o;
};

}  // namespace detail

class OpInstance : public ProgramBase {
 public:
  OpInstance(ImplId impl, Call call, Addr head, MutationFlags mut)
      : impl_(impl), call_(call), head_(head), mut_(mut) {
    if (call.op == OpKind::Contains && impl != ImplId::LinkFreeOpt)
      throw UnknownOp(std::string("operation contains not provided by ") +
                      impl_name(impl));
    if (call.op == OpKind::Insert && impl == ImplId::LinkFreeOpt && !call.val)
      throw UnknownOp("insert on the optimized variant needs a value");
  }

  Request start() override {
    switch (call_.op) {
      case OpKind::Insert: push(detail::Proc::Insert); break;
      case OpKind::Delete: push(detail::Proc::Delete); break;
      case OpKind::Contains: push(detail::Proc::Contains); break;
    }
    return run({});
  }

  Request advance(Value observed) override { return run(observed); }

  const Call& call() const { return call_; }

 private:
  using Proc = detail::Proc;
  using Frame = detail::Frame;

  ImplId impl_;
  Call call_;
  Addr head_;
  MutationFlags mut_;
  // Deque: frame references stay valid across pushes from within a step.
  std::deque<Frame> stack_;
  Value sub0_, sub1_;

  Value key_value() const { return Value::integer(call_.key); }
  Value val_value() const { return Value::integer(call_.val.value_or(0)); }
  static Value head_ptr(Addr h) { return Value::ptr(false, h); }

  void push(Proc p) {
    stack_.push_back(Frame{p, 0, {}, {}, {}, {}, {}});
  }
  /// Pops the top frame, depositing its results for the caller.
  void pop(Value r0 = {}, Value r1 = {}) {
    sub0_ = r0;
    sub1_ = r1;
    stack_.pop_back();
  }

  static Addr addr_of(const Value& v, const char* what) {
    if (!v.is_next()) throw ProtocolMismatch(what);
    return v.next_addr();
  }

  /// Drives frames until one of them issues a request. Each case label is
  /// one resume point; `obs` carries the observation for the previously
  /// issued request and is consumed exactly once.
  Request run(std::optional<Value> obs) {
    while (true) {
      if (stack_.empty()) throw ProtocolMismatch("advance on finished op");
      Frame& f = stack_.back();
      switch (f.proc) {
        case Proc::Find: {
          if (auto r = step_find(f, obs)) return *r;
          break;
        }
        case Proc::Trim: {
          if (auto r = step_trim(f, obs)) return *r;
          break;
        }
        case Proc::FlushDel: {
          if (auto r = step_flush_flag(f, obs, Field::DelFl,
                                       Line::TrimFlushRead, Line::TrimFlush,
                                       Line::TrimFlushMark,
                                       mut_.skip_flush_del))
            return *r;
          break;
        }
        case Proc::FlushIns: {
          if (auto r = step_flush_flag(f, obs, Field::InsFl,
                                       Line::FlushInsRead, Line::FlushIns,
                                       Line::FlushInsMark, mut_.skip_flush_ins))
            return *r;
          break;
        }
        case Proc::MakeValid: {
          if (auto r = step_make_valid(f, obs)) return *r;
          break;
        }
        case Proc::Insert: {
          if (auto r = step_insert(f, obs)) return *r;
          break;
        }
        case Proc::Delete: {
          if (auto r = step_delete(f, obs)) return *r;
          break;
        }
        case Proc::Contains: {
          if (auto r = step_contains(f, obs)) return *r;
          break;
        }
      }
      obs.reset();
    }
  }

  // find(h, k). Results: sub0 = p, sub1 = c. The basic and harris variants
  // re-check the predecessor and restart from the head; the optimized one
  // returns as soon as an unmarked node with key >= k is found.
  std::optional<Request> step_find(Frame& f, std::optional<Value>& obs) {
    const bool rechecks = impl_ != ImplId::LinkFreeOpt;
    switch (f.pc) {
      case 0:
        f.p = head_ptr(head_);
        f.pc = 1;
        return Request::read({head_, Field::Nxt}, Line::FindAdvance);
      case 1:  // <_,c> = p.nxt
        f.c = Value::ptr(false, addr_of(*obs, "find: nxt expected"));
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Nxt}, Line::FindCCheck);
      case 2:  // if c.nxt == <0,_>
        if (!obs->is_next()) throw ProtocolMismatch("find: nxt expected");
        if (!obs->mark()) {
          f.pc = 3;
          return Request::read({f.c.next_addr(), Field::Key}, Line::FindCKey);
        }
        push(Proc::Trim);
        stack_.back().p = f.p;
        stack_.back().c = f.c;
        f.pc = 4;
        return std::nullopt;
      case 3:  // if c.key >= k
        if (!obs->is_key()) throw ProtocolMismatch("find: key expected");
        if (key_less(*obs, key_value())) {
          f.p = f.c;
          f.pc = 5;
          return Request::read({f.c.next_addr(), Field::Nxt},
                               Line::FindAdvance);
        }
        if (!rechecks) {
          pop(f.p, f.c);
          return std::nullopt;
        }
        f.pc = 6;
        return Request::read({f.p.next_addr(), Field::Nxt}, Line::FindPCheck);
      case 4:  // back from trim
        f.pc = 5;
        return Request::read({f.c.next_addr(), Field::Nxt}, Line::FindAdvance);
      case 5:  // <_,c> = c.nxt
        f.c = Value::ptr(false, addr_of(*obs, "find: nxt expected"));
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Nxt}, Line::FindCCheck);
      case 6:  // if p.nxt == <0,_> return; else restart from the head
        if (!obs->is_next()) throw ProtocolMismatch("find: nxt expected");
        if (!obs->mark()) {
          pop(f.p, f.c);
          return std::nullopt;
        }
        f.c = head_ptr(head_);
        f.p = f.c;
        f.pc = 5;
        return Request::read({f.c.next_addr(), Field::Nxt}, Line::FindAdvance);
    }
    throw ProtocolMismatch("find: bad pc");
  }

  // trim(p, c): flush the marked node (directly, or via flushDel on the
  // optimized variant), then unlink it. Harris also flushes the predecessor.
  std::optional<Request> step_trim(Frame& f, std::optional<Value>& obs) {
    const bool opt = impl_ == ImplId::LinkFreeOpt;
    switch (f.pc) {
      case 0:
        if (opt) {
          push(Proc::FlushDel);
          stack_.back().n = f.c;
          f.pc = 1;
          return std::nullopt;
        }
        f.pc = 1;
        if (mut_.skip_flush_del) return std::nullopt;
        return Request::flush(f.c.next_addr(), Line::TrimFlush);
      case 1:
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Nxt},
                             Line::TrimNxtRead);
      case 2:  // <_,s> = c.nxt
        f.s = Value::ptr(false, addr_of(*obs, "trim: nxt expected"));
        f.pc = 3;
        return Request::cas({f.p.next_addr(), Field::Nxt},
                            Value::ptr(false, f.c.next_addr()),
                            Value::ptr(false, f.s.next_addr()), Line::TrimCas);
      case 3:
        if (impl_ == ImplId::HarrisDurable) {
          f.pc = 4;
          return Request::flush(f.p.next_addr(), Line::TrimFlush);
        }
        pop();
        return std::nullopt;
      case 4:
        pop();
        return std::nullopt;
    }
    throw ProtocolMismatch("trim: bad pc");
  }

  // flushIns/flushDel(n): if the flag is unset, flush the node and set it.
  std::optional<Request> step_flush_flag(Frame& f, std::optional<Value>& obs,
                                         Field flag, Line read_tag,
                                         Line flush_tag, Line mark_tag,
                                         bool skipped) {
    switch (f.pc) {
      case 0:
        if (skipped) {
          pop();
          return std::nullopt;
        }
        f.pc = 1;
        return Request::read({f.n.next_addr(), flag}, read_tag);
      case 1:
        if (*obs != Value::zero()) {
          pop();
          return std::nullopt;
        }
        f.pc = 2;
        return Request::flush(f.n.next_addr(), flush_tag);
      case 2:
        f.pc = 3;
        return Request::write({f.n.next_addr(), flag}, Value::integer(1),
                              mark_tag);
      case 3:
        pop();
        return std::nullopt;
    }
    throw ProtocolMismatch("flush flag: bad pc");
  }

  std::optional<Request> step_make_valid(Frame& f, std::optional<Value>& obs) {
    switch (f.pc) {
      case 0:
        if (mut_.skip_valid) {
          pop();
          return std::nullopt;
        }
        f.pc = 1;
        return Request::read({f.n.next_addr(), Field::Valid},
                             Line::MakeValidRead);
      case 1:
        if (*obs != Value::zero()) {
          pop();
          return std::nullopt;
        }
        f.pc = 2;
        return Request::write({f.n.next_addr(), Field::Valid},
                              Value::integer(1), Line::MakeValid);
      case 2:
        pop();
        return std::nullopt;
    }
    throw ProtocolMismatch("makeValid: bad pc");
  }

  std::optional<Request> step_insert(Frame& f, std::optional<Value>& obs) {
    const bool opt = impl_ == ImplId::LinkFreeOpt;
    const bool harris = impl_ == ImplId::HarrisDurable;
    switch (f.pc) {
      case 0:
        push(Proc::Find);
        f.pc = 1;
        return std::nullopt;
      case 1:  // back from find
        f.p = sub0_;
        f.c = sub1_;
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Key},
                             Line::InsKeyCheck);
      case 2:
        if (!obs->is_key()) throw ProtocolMismatch("insert: key expected");
        if (*obs == key_value()) {
          // Key already present: help persist the found node, return false.
          if (harris) {
            f.pc = 20;
            return Request::flush(f.c.next_addr(), Line::FlushIns);
          }
          if (opt) {
            push(Proc::MakeValid);
            stack_.back().n = f.c;
            f.pc = 23;
            return std::nullopt;
          }
          f.pc = 22;
          if (mut_.skip_valid) return std::nullopt;
          return Request::write({f.c.next_addr(), Field::Valid},
                                Value::integer(1), Line::MakeValid);
        }
        f.pc = 3;
        return Request::alloc(Line::NewNode);
      case 3:  // n = alloc(Node)
        f.n = *obs;
        f.pc = 4;
        return Request::write({f.n.next_addr(), Field::Key}, key_value(),
                              Line::NewNode);
      case 4:
        if (opt) {
          f.pc = 5;
          return Request::write({f.n.next_addr(), Field::Val}, val_value(),
                                Line::NewNode);
        }
        f.pc = 5;
        [[fallthrough]];
      case 5:
        f.pc = 6;
        return Request::write({f.n.next_addr(), Field::Nxt},
                              Value::ptr(false, f.c.next_addr()),
                              Line::NewNode);
      case 6:
        if (harris) {
          f.pc = 7;
          return Request::write({f.n.next_addr(), Field::Orig}, f.p,
                                Line::OrigWrite);
        }
        f.pc = 9;
        return Request::cas({f.p.next_addr(), Field::Nxt},
                            Value::ptr(false, f.c.next_addr()),
                            Value::ptr(false, f.n.next_addr()), Line::InsCas);
      case 7:  // harris: flush(n); flush(p.orig)
        f.pc = 8;
        return Request::flush(f.n.next_addr(), Line::FlushIns);
      case 8:
        f.pc = 30;
        return Request::read({f.p.next_addr(), Field::Orig}, Line::OrigRead);
      case 30:
        f.o = Value::ptr(false, addr_of(*obs, "insert: orig expected"));
        f.pc = 31;
        return Request::flush(f.o.next_addr(), Line::OrigFlush);
      case 31:
        f.pc = 9;
        return Request::cas({f.p.next_addr(), Field::Nxt},
                            Value::ptr(false, f.c.next_addr()),
                            Value::ptr(false, f.n.next_addr()), Line::InsCas);
      case 9:  // CAS observed
        if (*obs == Value::ptr(false, f.c.next_addr())) {
          // success
          if (harris) {
            f.pc = 10;
            return Request::flush(f.p.next_addr(), Line::FlushIns);
          }
          if (opt) {
            push(Proc::MakeValid);
            stack_.back().n = f.n;
            f.pc = 11;
            return std::nullopt;
          }
          f.pc = 12;
          if (mut_.skip_valid) return std::nullopt;
          return Request::write({f.n.next_addr(), Field::Valid},
                                Value::integer(1), Line::MakeValid);
        }
        // failure: retry from find
        push(Proc::Find);
        f.pc = 1;
        return std::nullopt;
      case 10:  // harris success epilogue
        return Request::ret(Value::integer(1));
      case 11:  // opt: back from makeValid(n)
        push(Proc::FlushIns);
        stack_.back().n = f.n;
        f.pc = 13;
        return std::nullopt;
      case 12:  // basic: flush(n); return true
        f.pc = 13;
        if (mut_.skip_flush_ins) return std::nullopt;
        return Request::flush(f.n.next_addr(), Line::FlushIns);
      case 13:
        return Request::ret(Value::integer(1));
      case 20:  // harris insert-false: flush(c); flush(c.orig); ret false
        f.pc = 21;
        return Request::read({f.c.next_addr(), Field::Orig}, Line::OrigRead);
      case 21:
        f.o = Value::ptr(false, addr_of(*obs, "insert: orig expected"));
        f.pc = 24;
        return Request::flush(f.o.next_addr(), Line::OrigFlush);
      case 22:  // basic insert-false: flush(c); ret false
        f.pc = 24;
        if (mut_.skip_flush_ins) return std::nullopt;
        return Request::flush(f.c.next_addr(), Line::FlushIns);
      case 23:  // opt insert-false: back from makeValid(c)
        push(Proc::FlushIns);
        stack_.back().n = f.c;
        f.pc = 24;
        return std::nullopt;
      case 24:
        return Request::ret(Value::integer(0));
    }
    throw ProtocolMismatch("insert: bad pc");
  }

  std::optional<Request> step_delete(Frame& f, std::optional<Value>& obs) {
    const bool opt = impl_ == ImplId::LinkFreeOpt;
    const bool harris = impl_ == ImplId::HarrisDurable;
    switch (f.pc) {
      case 0:
        push(Proc::Find);
        f.pc = 1;
        return std::nullopt;
      case 1:
        f.p = sub0_;
        f.c = sub1_;
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Key},
                             Line::DelKeyCheck);
      case 2:
        if (!obs->is_key()) throw ProtocolMismatch("delete: key expected");
        if (*obs != key_value()) return Request::ret(Value::integer(0));
        f.pc = 3;
        return Request::read({f.c.next_addr(), Field::Nxt},
                             Line::DelNxtRead);
      case 3:  // <b,n> = c.nxt
        f.n = Value::ptr(false, addr_of(*obs, "delete: nxt expected"));
        if (harris) {
          if (obs->mark()) {  // already being deleted: retry
            push(Proc::Find);
            f.pc = 1;
            return std::nullopt;
          }
          f.pc = 4;
          return Request::read({f.c.next_addr(), Field::Orig},
                               Line::OrigRead);
        }
        if (opt) {
          push(Proc::MakeValid);
          stack_.back().n = f.c;
          f.pc = 6;
          return std::nullopt;
        }
        f.pc = 6;
        if (mut_.skip_valid) return std::nullopt;
        return Request::write({f.c.next_addr(), Field::Valid},
                              Value::integer(1), Line::MakeValid);
      case 4:  // harris: flush(c.orig)
        f.o = Value::ptr(false, addr_of(*obs, "delete: orig expected"));
        f.pc = 6;
        return Request::flush(f.o.next_addr(), Line::OrigFlush);
      case 6:
        f.pc = 7;
        return Request::cas({f.c.next_addr(), Field::Nxt},
                            Value::ptr(false, f.n.next_addr()),
                            Value::ptr(true, f.n.next_addr()),
                            Line::DelMarkCas);
      case 7:
        if (*obs == Value::ptr(false, f.n.next_addr())) {
          push(Proc::Trim);
          stack_.back().p = f.p;
          stack_.back().c = f.c;
          f.pc = 8;
          return std::nullopt;
        }
        push(Proc::Find);
        f.pc = 1;
        return std::nullopt;
      case 8:
        return Request::ret(Value::integer(1));
    }
    throw ProtocolMismatch("delete: bad pc");
  }

  // The optimized variant's wait-free membership check.
  std::optional<Request> step_contains(Frame& f, std::optional<Value>& obs) {
    switch (f.pc) {
      case 0:
        f.pc = 1;
        return Request::read({head_, Field::Nxt}, Line::ContAdvance);
      case 1:
        f.c = Value::ptr(false, addr_of(*obs, "contains: nxt expected"));
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Key}, Line::ContKey);
      case 2:
        if (!obs->is_key()) throw ProtocolMismatch("contains: key expected");
        if (key_less(*obs, key_value())) {
          f.pc = 3;
          return Request::read({f.c.next_addr(), Field::Nxt},
                               Line::ContAdvance);
        }
        if (*obs != key_value()) return Request::ret(Value::integer(0));
        f.pc = 4;
        return Request::read({f.c.next_addr(), Field::Nxt},
                             Line::ContMarkCheck);
      case 3:
        f.c = Value::ptr(false, addr_of(*obs, "contains: nxt expected"));
        f.pc = 2;
        return Request::read({f.c.next_addr(), Field::Key}, Line::ContKey);
      case 4:
        if (!obs->is_next()) throw ProtocolMismatch("contains: nxt expected");
        if (obs->mark()) {
          push(Proc::FlushDel);
          stack_.back().n = f.c;
          f.pc = 5;
          return std::nullopt;
        }
        push(Proc::MakeValid);
        stack_.back().n = f.c;
        f.pc = 6;
        return std::nullopt;
      case 5:
        return Request::ret(Value::integer(0));
      case 6:
        push(Proc::FlushIns);
        stack_.back().n = f.c;
        f.pc = 7;
        return std::nullopt;
      case 7:
        return Request::ret(Value::integer(1));
    }
    throw ProtocolMismatch("contains: bad pc");
  }
};

// ---------------------------------------------------------------------------
// Recovery programs.

/// Recovery for the link-free sets: re-allocate the sentinels, then scan the
/// surviving nodes and sorted-insert every valid, unmarked, real-keyed one.
/// Only nxt fields of surviving nodes are written. Returns the new head.
class LinkFreeRecovery : public ProgramBase {
 public:
  LinkFreeRecovery(ImplId impl, std::vector<Addr> directory)
      : impl_(impl), directory_(std::move(directory)) {}

  Request start() override { return step({}); }
  Request advance(Value observed) override { return step(observed); }

 private:
  enum class Pc {
    AllocTail,
    TailKey,
    TailValid,
    TailNxt,
    AllocHead,
    HeadKey,
    HeadValid,
    HeadNxt,
    NextNode,
    NodeValid,
    NodeNxt,
    NodeKey,
    WalkReadNxt,
    WalkReadKey,
    LinkNode,
    LinkPred,
    Fence,
    Return,
  };

  ImplId impl_;
  std::vector<Addr> directory_;
  size_t idx_ = 0;
  Pc pc_ = Pc::AllocTail;
  Addr tail_, head_, node_, cur_, nxt_;
  int node_key_ = 0;

  Request step(std::optional<Value> obs) {
    for (;;) {
      switch (pc_) {
        case Pc::AllocTail:
          pc_ = Pc::TailKey;
          return Request::alloc(Line::RecoveryStep);
        case Pc::TailKey:
          tail_ = obs->next_addr();
          pc_ = Pc::TailValid;
          return Request::write({tail_, Field::Key}, Value::pos_inf(),
                                Line::RecoveryStep);
        case Pc::TailValid:
          pc_ = Pc::TailNxt;
          if (!layout_of(impl_).has(Field::Valid)) continue;
          return Request::write({tail_, Field::Valid}, Value::integer(1),
                                Line::RecoveryStep);
        case Pc::TailNxt:
          pc_ = Pc::AllocHead;
          return Request::write({tail_, Field::Nxt},
                                Value::ptr(false, kNullAddr),
                                Line::RecoveryStep);
        case Pc::AllocHead:
          pc_ = Pc::HeadKey;
          return Request::alloc(Line::RecoveryStep);
        case Pc::HeadKey:
          head_ = obs->next_addr();
          pc_ = Pc::HeadValid;
          return Request::write({head_, Field::Key}, Value::neg_inf(),
                                Line::RecoveryStep);
        case Pc::HeadValid:
          pc_ = Pc::HeadNxt;
          if (!layout_of(impl_).has(Field::Valid)) continue;
          return Request::write({head_, Field::Valid}, Value::integer(1),
                                Line::RecoveryStep);
        case Pc::HeadNxt:
          pc_ = Pc::NextNode;
          return Request::write({head_, Field::Nxt},
                                Value::ptr(false, tail_), Line::RecoveryStep);
        case Pc::NextNode:
          if (idx_ >= directory_.size()) {
            pc_ = Pc::Fence;
            continue;
          }
          node_ = directory_[idx_++];
          pc_ = Pc::NodeValid;
          return Request::read({node_, Field::Valid}, Line::RecoveryStep);
        case Pc::NodeValid:
          if (*obs != Value::integer(1)) {
            pc_ = Pc::NextNode;
            continue;
          }
          pc_ = Pc::NodeNxt;
          return Request::read({node_, Field::Nxt}, Line::RecoveryStep);
        case Pc::NodeNxt:
          if (!obs->is_next() || obs->mark()) {
            pc_ = Pc::NextNode;
            continue;
          }
          pc_ = Pc::NodeKey;
          return Request::read({node_, Field::Key}, Line::RecoveryStep);
        case Pc::NodeKey:
          if (!obs->is_int() || obs->as_int() < 1) {  // key must be real
            pc_ = Pc::NextNode;
            continue;
          }
          node_key_ = static_cast<int>(obs->as_int());
          cur_ = head_;
          pc_ = Pc::WalkReadNxt;
          return Request::read({cur_, Field::Nxt}, Line::RecoveryStep);
        case Pc::WalkReadNxt:
          nxt_ = obs->next_addr();
          pc_ = Pc::WalkReadKey;
          return Request::read({nxt_, Field::Key}, Line::RecoveryStep);
        case Pc::WalkReadKey:
          if (key_less(*obs, Value::integer(node_key_))) {
            cur_ = nxt_;
            pc_ = Pc::WalkReadNxt;
            return Request::read({cur_, Field::Nxt}, Line::RecoveryStep);
          }
          pc_ = Pc::LinkNode;
          return Request::write({node_, Field::Nxt},
                                Value::ptr(false, nxt_), Line::RecoveryStep);
        case Pc::LinkNode:
          pc_ = Pc::LinkPred;
          return Request::write({cur_, Field::Nxt},
                                Value::ptr(false, node_), Line::RecoveryStep);
        case Pc::LinkPred:
          pc_ = Pc::NextNode;
          continue;
        case Pc::Fence:
          pc_ = Pc::Return;
          return Request::mfence();
        case Pc::Return:
          return Request::ret(Value::ptr(false, head_));
      }
    }
  }
};

/// Recovery for the durable Harris list. Its durable representation equals
/// the volatile one, so recovery is the identity after the first era; era 0
/// builds and flushes the sentinels.
class HarrisRecovery : public ProgramBase {
 public:
  HarrisRecovery(std::optional<Addr> existing_head)
      : existing_head_(existing_head) {}

  Request start() override { return step({}); }
  Request advance(Value observed) override { return step(observed); }

 private:
  enum class Pc {
    AllocTail,
    TailKey,
    TailNxt,
    AllocHead,
    HeadKey,
    HeadNxt,
    HeadOrig,
    TailOrig,
    FlushTail,
    FlushHead,
    Fence,
    Return,
  };
  std::optional<Addr> existing_head_;
  Pc pc_ = Pc::AllocTail;
  Addr tail_, head_;

  Request step(std::optional<Value> obs) {
    if (existing_head_) {
      if (pc_ == Pc::AllocTail) {
        pc_ = Pc::Return;
        return Request::mfence();
      }
      return Request::ret(Value::ptr(false, *existing_head_));
    }
    for (;;) {
      switch (pc_) {
        case Pc::AllocTail:
          pc_ = Pc::TailKey;
          return Request::alloc(Line::RecoveryStep);
        case Pc::TailKey:
          tail_ = obs->next_addr();
          pc_ = Pc::TailNxt;
          return Request::write({tail_, Field::Key}, Value::pos_inf(),
                                Line::RecoveryStep);
        case Pc::TailNxt:
          pc_ = Pc::AllocHead;
          return Request::write({tail_, Field::Nxt},
                                Value::ptr(false, kNullAddr),
                                Line::RecoveryStep);
        case Pc::AllocHead:
          pc_ = Pc::HeadKey;
          return Request::alloc(Line::RecoveryStep);
        case Pc::HeadKey:
          head_ = obs->next_addr();
          pc_ = Pc::HeadNxt;
          return Request::write({head_, Field::Key}, Value::neg_inf(),
                                Line::RecoveryStep);
        case Pc::HeadNxt:
          pc_ = Pc::HeadOrig;
          return Request::write({head_, Field::Nxt},
                                Value::ptr(false, tail_), Line::RecoveryStep);
        case Pc::HeadOrig:
          pc_ = Pc::TailOrig;
          return Request::write({head_, Field::Orig},
                                Value::ptr(false, head_), Line::RecoveryStep);
        case Pc::TailOrig:
          pc_ = Pc::FlushTail;
          return Request::write({tail_, Field::Orig},
                                Value::ptr(false, head_), Line::RecoveryStep);
        case Pc::FlushTail:
          pc_ = Pc::FlushHead;
          return Request::flush(tail_, Line::RecoveryStep);
        case Pc::FlushHead:
          pc_ = Pc::Fence;
          return Request::flush(head_, Line::RecoveryStep);
        case Pc::Fence:
          pc_ = Pc::Return;
          return Request::mfence();
        case Pc::Return:
          return Request::ret(Value::ptr(false, head_));
      }
    }
  }
};

inline std::unique_ptr<ProgramBase> spawn(ImplId impl, const Call& call,
                                          Addr head, MutationFlags mut) {
  return std::make_unique<OpInstance>(impl, call, head, mut);
}

inline std::unique_ptr<ProgramBase> recovery_program(
    ImplId impl, std::vector<Addr> directory, std::optional<Addr> prev_head) {
  if (impl == ImplId::HarrisDurable)
    return std::make_unique<HarrisRecovery>(prev_head);
  return std::make_unique<LinkFreeRecovery>(impl, std::move(directory));
}

// ---------------------------------------------------------------------------
// Strategy hooks: which emitted events serve as linearization/persistency
// point candidates, consumed by the checkers.

struct StrategyHooks {
  ImplId impl;
  bool master_checkable;  // the harris variant is oracle-only
  // Failed inserts read the key-holding node itself, which pins their find
  // read against racing deletes; failed deletes observe only the frontier
  // and are resolved by hindsight instead.
  bool failed_insert_fixed_lp;
  bool hindsight_failed_deletes;
  bool has_contains;
};

inline StrategyHooks strategy_hooks(ImplId impl) {
  switch (impl) {
    case ImplId::HarrisDurable:
      return {impl, false, true, true, false};
    case ImplId::LinkFreeBasic:
      return {impl, true, true, true, false};
    case ImplId::LinkFreeOpt:
      return {impl, true, true, true, true};
  }
  return {impl, false, false, false, false};
}

}  // namespace pxlin::prog

#endif  // PXLIN_PROGRAMS_HPP_
