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

#ifndef PXLIN_MODEL_HPP_
#define PXLIN_MODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pxlin/relation.hpp"

namespace pxlin {

// ---------------------------------------------------------------------------
// Addresses, fields, locations

struct Addr {
  uint32_t id = 0;  // 0 is the null address

  bool is_null() const { return id == 0; }
  friend auto operator<=>(const Addr&, const Addr&) = default;
};
inline constexpr Addr kNullAddr{0};

enum class Field : uint8_t { Key, Nxt, Val, Valid, InsFl, DelFl, Orig };
inline constexpr Field kAllFields[] = {Field::Key,   Field::Nxt,
                                       Field::Val,   Field::Valid,
                                       Field::InsFl, Field::DelFl, Field::Orig};

inline const char* field_name(Field f) {
  switch (f) {
    case Field::Key: return "key";
    case Field::Nxt: return "nxt";
    case Field::Val: return "val";
    case Field::Valid: return "valid";
    case Field::InsFl: return "insFl";
    case Field::DelFl: return "delFl";
    case Field::Orig: return "orig";
  }
  return "?";
}

struct Location {
  Addr addr;
  Field field = Field::Key;
  friend auto operator<=>(const Location&, const Location&) = default;
};

/// Per-implementation node record layout.
struct NodeLayout {
  std::vector<Field> fields;
  bool has(Field f) const {
    for (Field g : fields)
      if (g == f) return true;
    return false;
  }
};

inline const NodeLayout& layout_harris() {
  static const NodeLayout l{{Field::Key, Field::Nxt, Field::Orig}};
  return l;
}
inline const NodeLayout& layout_link_free_basic() {
  static const NodeLayout l{{Field::Key, Field::Nxt, Field::Valid}};
  return l;
}
inline const NodeLayout& layout_link_free_opt() {
  static const NodeLayout l{{Field::Key, Field::Nxt, Field::Val, Field::Valid,
                             Field::InsFl, Field::DelFl}};
  return l;
}

// ---------------------------------------------------------------------------
// Cache lines

enum class CacheLineMode : uint8_t {
  Node,      // all fields of an address share one cache line
  PerField,  // adversarial split-line map, one line per field
};

struct CacheLine {
  uint32_t id = 0;
  friend auto operator<=>(const CacheLine&, const CacheLine&) = default;
};

inline CacheLine cache_line_of(Location loc, CacheLineMode mode) {
  if (mode == CacheLineMode::Node) return {loc.addr.id};
  return {loc.addr.id * 8u + static_cast<uint32_t>(loc.field)};
}

/// The line a flush on address x targets. Under the split-line map a single
/// flush covers only the line holding the key field, which is what makes the
/// map adversarial: the validity bit lives on a line the flush misses.
inline CacheLine flush_line(Addr x, CacheLineMode mode) {
  return cache_line_of({x, Field::Key}, mode);
}

// ---------------------------------------------------------------------------
// Values

/// A field value: a small integer, a +/-infinity key sentinel, or a
/// (mark, address) next-pointer. Zero-initialisation reads back as Int(0),
/// which decodes as the unmarked null pointer; <0,null> normalises to it.
class Value {
 public:
  enum class Kind : uint8_t { Int, NegInf, PosInf, Ptr };

  Value() : kind_(Kind::Int), mark_(false), payload_(0) {}

  static Value integer(int64_t v) {
    Value x;
    x.kind_ = Kind::Int;
    x.payload_ = v;
    return x;
  }
  static Value pos_inf() {
    Value x;
    x.kind_ = Kind::PosInf;
    return x;
  }
  static Value neg_inf() {
    Value x;
    x.kind_ = Kind::NegInf;
    return x;
  }
  static Value ptr(bool mark, Addr a) {
    if (!mark && a.is_null()) return integer(0);
    Value x;
    x.kind_ = Kind::Ptr;
    x.mark_ = mark;
    x.payload_ = a.id;
    return x;
  }
  static Value zero() { return integer(0); }

  Kind kind() const { return kind_; }
  bool is_int() const { return kind_ == Kind::Int; }
  int64_t as_int() const { return payload_; }

  bool is_next() const {
    return kind_ == Kind::Ptr || (kind_ == Kind::Int && payload_ == 0);
  }
  bool mark() const { return kind_ == Kind::Ptr ? mark_ : false; }
  Addr next_addr() const {
    return kind_ == Kind::Ptr ? Addr{static_cast<uint32_t>(payload_)}
                              : kNullAddr;
  }

  bool is_key() const { return kind_ != Kind::Ptr; }
  friend bool key_less(const Value& a, const Value& b) {
    auto rank = [](const Value& v) {
      return v.kind_ == Value::Kind::NegInf ? 0
             : v.kind_ == Value::Kind::Int  ? 1
                                            : 2;
    };
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    return rank(a) == 1 && a.payload_ < b.payload_;
  }

  friend auto operator<=>(const Value&, const Value&) = default;

 private:
  Kind kind_;
  bool mark_ = false;
  int64_t payload_ = 0;
};

// ---------------------------------------------------------------------------
// Actions

enum class ActionType : uint8_t {
  Read,
  Write,
  Update,
  MFence,
  Flush,
  Alloc,
  Ret,
  Err,
};

struct Action {
  ActionType type = ActionType::Err;
  Location loc;     // Read/Write/Update
  Addr addr;        // Flush/Alloc (= loc.addr for the others)
  Value rval;       // Read/Update
  Value wval;       // Write/Update (Alloc conceptually writes zero)
  Value retval;     // Ret

  static Action read(Location l, Value v) {
    return {ActionType::Read, l, l.addr, v, {}, {}};
  }
  static Action write(Location l, Value v) {
    return {ActionType::Write, l, l.addr, {}, v, {}};
  }
  static Action update(Location l, Value from, Value to) {
    return {ActionType::Update, l, l.addr, from, to, {}};
  }
  static Action mfence() { return {ActionType::MFence, {}, {}, {}, {}, {}}; }
  static Action flush(Addr a) {
    return {ActionType::Flush, {a, Field::Key}, a, {}, {}, {}};
  }
  static Action alloc(Addr a) {
    return {ActionType::Alloc, {a, Field::Key}, a, {}, Value::zero(), {}};
  }
  static Action ret(Value v) {
    Action a;
    a.type = ActionType::Ret;
    a.retval = v;
    return a;
  }
  static Action err() { return {ActionType::Err, {}, {}, {}, {}, {}}; }

  bool is_read() const { return type == ActionType::Read; }
  bool is_write() const {
    return type == ActionType::Write || type == ActionType::Alloc;
  }
  bool is_update() const { return type == ActionType::Update; }
  bool is_uwrite() const { return is_write() || is_update(); }
  bool is_uread() const { return is_read() || is_update(); }
  bool is_flush() const { return type == ActionType::Flush; }
  bool is_durable() const { return is_uwrite() || is_flush(); }
  bool is_ret() const { return type == ActionType::Ret; }

  /// Locations an action touches; an allocation initialises every field.
  std::vector<Location> locations(const NodeLayout& layout) const {
    switch (type) {
      case ActionType::Read:
      case ActionType::Write:
      case ActionType::Update:
        return {loc};
      case ActionType::Alloc: {
        std::vector<Location> out;
        for (Field f : layout.fields) out.push_back({addr, f});
        return out;
      }
      default:
        return {};
    }
  }

  std::optional<Value> wval_of() const {
    if (type == ActionType::Write || type == ActionType::Update) return wval;
    if (type == ActionType::Alloc) return Value::zero();
    return std::nullopt;
  }
  std::optional<Value> rval_of() const {
    if (type == ActionType::Read || type == ActionType::Update) return rval;
    return std::nullopt;
  }

  friend auto operator<=>(const Action&, const Action&) = default;
};

// ---------------------------------------------------------------------------
// Calls and events

enum class OpKind : uint8_t { Insert, Delete, Contains };

inline const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::Insert: return "insert";
    case OpKind::Delete: return "delete";
    case OpKind::Contains: return "contains";
  }
  return "?";
}

struct Call {
  OpKind op = OpKind::Insert;
  int key = 0;
  std::optional<int> val;  // optimized variant carries a value
  friend auto operator<=>(const Call&, const Call&) = default;
};

/// Call attribution of an event: a client event, the recovery, or call #k.
struct CallId {
  int32_t v = kClient;
  static constexpr int32_t kClient = -1;
  static constexpr int32_t kRecovery = -2;

  static CallId client() { return {kClient}; }
  static CallId recovery() { return {kRecovery}; }
  static CallId call(int32_t k) { return {k}; }

  bool is_client() const { return v == kClient; }
  bool is_recovery() const { return v == kRecovery; }
  bool is_call() const { return v >= 0; }
  int32_t index() const { return v; }
  friend auto operator<=>(const CallId&, const CallId&) = default;
};

/// Source line tags let the strategy extractor find linearization and
/// persistency point candidates without guessing from action shapes alone.
enum class Line : uint8_t {
  None,
  FindCCheck,   // the `c.nxt == <0,_>` read in find (the lp:find line)
  FindCKey,
  FindPCheck,   // basic variant's predecessor re-check
  FindAdvance,  // the `<_,c> = c.nxt` footer read
  NewNode,      // alloc + field writes of a fresh node
  InsCas,       // the linking CAS of insert
  InsKeyCheck,  // insert's `c.key == k` read
  MakeValid,    // validity write (incl. the basic variant's bare writes)
  MakeValidRead,
  FlushIns,     // flush of flushIns / basic insert's flush
  FlushInsRead,
  FlushInsMark,  // insFl := 1
  DelMarkCas,    // the marking CAS of delete
  DelKeyCheck,
  DelNxtRead,
  TrimFlush,  // flush of trim/flushDel
  TrimFlushRead,
  TrimFlushMark,  // delFl := 1
  TrimNxtRead,
  TrimCas,  // the unlinking CAS of trim
  ContKey,
  ContAdvance,
  ContMarkCheck,
  OrigWrite,
  OrigRead,
  OrigFlush,
  RecoveryStep,
  RetLine,
};

struct Event {
  uint32_t id = 0;  // issue index within the era; stable across replay
  uint8_t tid = 0;  // thread 0 is the recovery
  CallId cid = CallId::client();
  Action act;
  Line tag = Line::None;
};

// ---------------------------------------------------------------------------
// Memory

/// Finite partial map from locations to values.
class Memory {
 public:
  using Map = std::map<Location, Value>;

  std::optional<Value> get(Location l) const {
    auto it = m_.find(l);
    if (it == m_.end()) return std::nullopt;
    return it->second;
  }
  void set(Location l, Value v) { m_[l] = v; }
  bool defined(Location l) const { return m_.count(l) != 0; }
  size_t size() const { return m_.size(); }
  bool empty() const { return m_.empty(); }
  const Map& entries() const { return m_; }

  bool has_addr(Addr a) const {
    auto it = m_.lower_bound({a, static_cast<Field>(0)});
    return it != m_.end() && it->first.addr == a;
  }
  std::vector<Addr> addresses() const {
    std::vector<Addr> out;
    for (const auto& [loc, _] : m_)
      if (out.empty() || out.back() != loc.addr) out.push_back(loc.addr);
    return out;
  }

  void apply(const Action& a, const NodeLayout& layout) {
    if (auto wv = a.wval_of())
      for (Location l : a.locations(layout)) {
        if (a.type == ActionType::Alloc)
          m_[l] = Value::zero();
        else
          m_[l] = *wv;
      }
  }

  friend auto operator<=>(const Memory&, const Memory&) = default;

 private:
  Map m_;
};

/// Memory of an event sequence: each location holds the last value written
/// to it; untouched locations stay undefined.
inline Memory mem_of(const std::vector<Event>& events,
                     const NodeLayout& layout) {
  Memory m;
  for (const Event& e : events) m.apply(e.act, layout);
  return m;
}

}  // namespace pxlin

#endif  // PXLIN_MODEL_HPP_
