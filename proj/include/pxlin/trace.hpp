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

#ifndef PXLIN_TRACE_HPP_
#define PXLIN_TRACE_HPP_

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pxlin/graph.hpp"
#include "pxlin/programs.hpp"

// The trace format is line-oriented and greppable. A chain is a header plus
// one block per era:
//
//   impl: link-free-basic
//   cacheline: node
//   era 0
//   head 2
//   call 0 insert 1
//   event 0 0 - W 1.key +inf
//   event 5 1 0 U 2.nxt 0:1 0:3 #InsCas
//   po 0 5
//   rf 0 5
//   mo 0 5
//   nvo 0 5
//   tso 0 5
//   persisted 5
//
// po/mo/nvo/tso list immediate pairs (the parser takes transitive closures);
// rf lists every edge; persisted lists event ids. Values are integers, the
// key sentinels +inf/-inf, or mark:addr next-pointers (addr may be "null").

namespace pxlin::trace {

struct ParseError : std::runtime_error {
  ParseError(size_t line, size_t byte, const std::string& what)
      : std::runtime_error("trace parse error at line " + std::to_string(line) +
                           " (byte " + std::to_string(byte) + "): " + what),
        line_no(line),
        byte_offset(byte) {}
  size_t line_no;
  size_t byte_offset;
};

namespace detail {

inline const std::pair<Line, const char*> kLineNames[] = {
    {Line::None, "None"},
    {Line::FindCCheck, "FindCCheck"},
    {Line::FindCKey, "FindCKey"},
    {Line::FindPCheck, "FindPCheck"},
    {Line::FindAdvance, "FindAdvance"},
    {Line::NewNode, "NewNode"},
    {Line::InsCas, "InsCas"},
    {Line::InsKeyCheck, "InsKeyCheck"},
    {Line::MakeValid, "MakeValid"},
    {Line::MakeValidRead, "MakeValidRead"},
    {Line::FlushIns, "FlushIns"},
    {Line::FlushInsRead, "FlushInsRead"},
    {Line::FlushInsMark, "FlushInsMark"},
    {Line::DelMarkCas, "DelMarkCas"},
    {Line::DelKeyCheck, "DelKeyCheck"},
    {Line::DelNxtRead, "DelNxtRead"},
    {Line::TrimFlush, "TrimFlush"},
    {Line::TrimFlushRead, "TrimFlushRead"},
    {Line::TrimFlushMark, "TrimFlushMark"},
    {Line::TrimNxtRead, "TrimNxtRead"},
    {Line::TrimCas, "TrimCas"},
    {Line::ContKey, "ContKey"},
    {Line::ContAdvance, "ContAdvance"},
    {Line::ContMarkCheck, "ContMarkCheck"},
    {Line::OrigWrite, "OrigWrite"},
    {Line::OrigRead, "OrigRead"},
    {Line::OrigFlush, "OrigFlush"},
    {Line::RecoveryStep, "RecoveryStep"},
    {Line::RetLine, "RetLine"},
};

inline const char* line_name(Line l) {
  for (auto& [v, n] : kLineNames)
    if (v == l) return n;
  return "None";
}
inline std::optional<Line> line_from(const std::string& s) {
  for (auto& [v, n] : kLineNames)
    if (s == n) return v;
  return std::nullopt;
}

inline std::optional<Field> field_from(const std::string& s) {
  for (Field f : kAllFields)
    if (s == field_name(f)) return f;
  return std::nullopt;
}

inline std::string value_str(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::PosInf: return "+inf";
    case Value::Kind::NegInf: return "-inf";
    case Value::Kind::Ptr: {
      std::string s = v.mark() ? "1:" : "0:";
      s += v.next_addr().is_null() ? "null" : std::to_string(v.next_addr().id);
      return s;
    }
  }
  return "0";
}

inline std::optional<Value> value_from(const std::string& s) {
  if (s == "+inf") return Value::pos_inf();
  if (s == "-inf") return Value::neg_inf();
  auto colon = s.find(':');
  if (colon != std::string::npos) {
    bool mark = s.substr(0, colon) == "1";
    if (!mark && s.substr(0, colon) != "0") return std::nullopt;
    std::string rest = s.substr(colon + 1);
    if (rest == "null") return Value::ptr(mark, kNullAddr);
    uint32_t id = 0;
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
    if (ec != std::errc{} || p != rest.data() + rest.size())
      return std::nullopt;
    return Value::ptr(mark, Addr{id});
  }
  int64_t i = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return Value::integer(i);
}

inline std::string loc_str(Location l) {
  return std::to_string(l.addr.id) + "." + field_name(l.field);
}

inline void write_pairs(std::ostream& os, const char* name,
                        const Relation& immediate_of) {
  for (auto [a, b] : immediate_of.pairs())
    os << name << " " << a << " " << b << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Serialization

inline void write_graph(std::ostream& os, const ExecutionGraph& g) {
  os << "era " << g.era << "\n";
  os << "head " << g.head.id << "\n";
  for (size_t c = 0; c < g.calls.size(); ++c) {
    os << "call " << c << " " << op_name(g.calls[c].op) << " "
       << g.calls[c].key;
    if (g.calls[c].val) os << " " << *g.calls[c].val;
    os << "\n";
  }
  for (const Event& e : g.events) {
    os << "event " << e.id << " " << int(e.tid) << " ";
    if (e.cid.is_client())
      os << "-";
    else if (e.cid.is_recovery())
      os << "rec";
    else
      os << e.cid.index();
    os << " ";
    const Action& a = e.act;
    switch (a.type) {
      case ActionType::Read:
        os << "R " << detail::loc_str(a.loc) << " " << detail::value_str(a.rval);
        break;
      case ActionType::Write:
        os << "W " << detail::loc_str(a.loc) << " " << detail::value_str(a.wval);
        break;
      case ActionType::Update:
        os << "U " << detail::loc_str(a.loc) << " " << detail::value_str(a.rval)
           << " " << detail::value_str(a.wval);
        break;
      case ActionType::MFence: os << "MF"; break;
      case ActionType::Flush: os << "FL " << a.addr.id; break;
      case ActionType::Alloc: os << "A " << a.addr.id; break;
      case ActionType::Ret:
        os << "RET " << detail::value_str(a.retval);
        break;
      case ActionType::Err: os << "ERR"; break;
    }
    if (e.tag != Line::None) os << " #" << detail::line_name(e.tag);
    os << "\n";
  }
  g.init.for_each([&](size_t i) { os << "init " << i << "\n"; });
  detail::write_pairs(os, "po", g.po.immediate());
  detail::write_pairs(os, "rf", g.rf);
  detail::write_pairs(os, "mo", g.mo.immediate());
  detail::write_pairs(os, "nvo", g.nvo.immediate());
  if (g.tso) detail::write_pairs(os, "tso", g.tso->immediate());
  g.persisted.for_each([&](size_t i) { os << "persisted " << i << "\n"; });
}

inline void write_chain(std::ostream& os, const Chain& chain,
                        prog::ImplId impl) {
  os << "# pxlin execution trace\n";
  os << "impl: " << prog::impl_name(impl) << "\n";
  if (!chain.eras.empty())
    os << "cacheline: "
       << (chain.eras[0].cl_mode == CacheLineMode::Node ? "node" : "field")
       << "\n";
  for (const ExecutionGraph& g : chain.eras) write_graph(os, g);
}

// ---------------------------------------------------------------------------
// Parsing

struct ParsedTrace {
  prog::ImplId impl = prog::ImplId::LinkFreeBasic;
  Chain chain;
};

inline ParsedTrace read_chain(std::istream& is) {
  ParsedTrace out;
  CacheLineMode cl_mode = CacheLineMode::Node;

  struct RawEra {
    uint32_t era = 0;
    Addr head;
    std::vector<Call> calls;
    std::vector<Event> events;
    std::vector<std::pair<size_t, size_t>> po, rf, mo, nvo, tso;
    std::vector<size_t> persisted;
    std::vector<size_t> init;
    bool has_tso = false;
  };
  std::vector<RawEra> eras;

  std::string line;
  size_t line_no = 0, byte = 0;
  auto err = [&](const std::string& what) -> ParseError {
    return ParseError(line_no, byte, what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    byte += line.size() + 1;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok == "impl:") {
      std::string name;
      ls >> name;
      auto impl = prog::impl_from_name(name);
      if (!impl) throw err("unknown impl '" + name + "'");
      out.impl = *impl;
      continue;
    }
    if (tok == "cacheline:") {
      std::string mode;
      ls >> mode;
      if (mode == "node")
        cl_mode = CacheLineMode::Node;
      else if (mode == "field")
        cl_mode = CacheLineMode::PerField;
      else
        throw err("unknown cacheline mode '" + mode + "'");
      continue;
    }
    if (tok == "era") {
      RawEra e;
      if (!(ls >> e.era)) throw err("era index expected");
      eras.push_back(std::move(e));
      continue;
    }
    if (eras.empty()) throw err("'" + tok + "' before any era header");
    RawEra& era = eras.back();
    if (tok == "head") {
      if (!(ls >> era.head.id)) throw err("head address expected");
    } else if (tok == "call") {
      size_t idx;
      std::string op;
      int key;
      if (!(ls >> idx >> op >> key)) throw err("malformed call record");
      Call c;
      if (op == "insert")
        c.op = OpKind::Insert;
      else if (op == "delete")
        c.op = OpKind::Delete;
      else if (op == "contains")
        c.op = OpKind::Contains;
      else
        throw err("unknown operation '" + op + "'");
      c.key = key;
      int val;
      if (ls >> val) c.val = val;
      if (idx != era.calls.size()) throw err("call indices must be dense");
      era.calls.push_back(c);
    } else if (tok == "event") {
      Event e;
      uint32_t id;
      int tid;
      std::string cid, act;
      if (!(ls >> id >> tid >> cid >> act)) throw err("malformed event record");
      if (id != era.events.size())
        throw err("event ids must be dense and ordered");
      e.id = id;
      e.tid = static_cast<uint8_t>(tid);
      if (cid == "-")
        e.cid = CallId::client();
      else if (cid == "rec")
        e.cid = CallId::recovery();
      else {
        int32_t ci = 0;
        auto [p, ec] = std::from_chars(cid.data(), cid.data() + cid.size(), ci);
        if (ec != std::errc{}) throw err("bad call id '" + cid + "'");
        e.cid = CallId::call(ci);
      }
      auto parse_loc = [&](const std::string& s) -> Location {
        auto dot = s.find('.');
        if (dot == std::string::npos) throw err("location expected, got " + s);
        uint32_t addr = 0;
        auto head = s.substr(0, dot);
        auto [p, ec] =
            std::from_chars(head.data(), head.data() + head.size(), addr);
        if (ec != std::errc{}) throw err("bad address in location " + s);
        auto f = detail::field_from(s.substr(dot + 1));
        if (!f) throw err("bad field in location " + s);
        return {Addr{addr}, *f};
      };
      auto parse_val = [&](const std::string& s) -> Value {
        auto v = detail::value_from(s);
        if (!v) throw err("bad value '" + s + "'");
        return *v;
      };
      std::string a1, a2, a3;
      if (act == "R") {
        ls >> a1 >> a2;
        e.act = Action::read(parse_loc(a1), parse_val(a2));
      } else if (act == "W") {
        ls >> a1 >> a2;
        e.act = Action::write(parse_loc(a1), parse_val(a2));
      } else if (act == "U") {
        ls >> a1 >> a2 >> a3;
        e.act = Action::update(parse_loc(a1), parse_val(a2), parse_val(a3));
      } else if (act == "MF") {
        e.act = Action::mfence();
      } else if (act == "FL") {
        uint32_t addr;
        ls >> addr;
        e.act = Action::flush(Addr{addr});
      } else if (act == "A") {
        uint32_t addr;
        ls >> addr;
        e.act = Action::alloc(Addr{addr});
      } else if (act == "RET") {
        ls >> a1;
        e.act = Action::ret(parse_val(a1));
      } else if (act == "ERR") {
        e.act = Action::err();
      } else {
        throw err("unknown action '" + act + "'");
      }
      std::string tag;
      if (ls >> tag && tag.size() > 1 && tag[0] == '#') {
        auto t = detail::line_from(tag.substr(1));
        if (t) e.tag = *t;
      }
      era.events.push_back(e);
    } else if (tok == "po" || tok == "rf" || tok == "mo" || tok == "nvo" ||
               tok == "tso") {
      size_t a, b;
      if (!(ls >> a >> b)) throw err("pair expected after '" + tok + "'");
      if (tok == "po") era.po.push_back({a, b});
      if (tok == "rf") era.rf.push_back({a, b});
      if (tok == "mo") era.mo.push_back({a, b});
      if (tok == "nvo") era.nvo.push_back({a, b});
      if (tok == "tso") {
        era.tso.push_back({a, b});
        era.has_tso = true;
      }
    } else if (tok == "persisted") {
      size_t a;
      if (!(ls >> a)) throw err("event id expected after 'persisted'");
      era.persisted.push_back(a);
    } else if (tok == "init") {
      size_t a;
      if (!(ls >> a)) throw err("event id expected after 'init'");
      era.init.push_back(a);
    } else {
      throw err("unknown record '" + tok + "'");
    }
  }

  for (RawEra& re : eras) {
    ExecutionGraph g;
    g.era = re.era;
    g.layout = prog::layout_of(out.impl);
    g.cl_mode = cl_mode;
    g.head = re.head;
    g.calls = std::move(re.calls);
    g.events = std::move(re.events);
    const size_t n = g.events.size();
    auto rel_of = [&](const std::vector<std::pair<size_t, size_t>>& pairs,
                      bool closure) {
      Relation r(n);
      for (auto [a, b] : pairs) {
        if (a >= n || b >= n)
          throw ParseError(0, 0, "relation pair out of range");
        r.add(a, b);
      }
      return closure ? r.transitive_closure() : r;
    };
    g.po = rel_of(re.po, true);
    g.rf = rel_of(re.rf, false);
    g.mo = rel_of(re.mo, true);
    g.nvo = rel_of(re.nvo, true);
    if (re.has_tso) g.tso = rel_of(re.tso, true);
    g.init = IndexSet(n);
    g.persisted = IndexSet(n);
    for (size_t p : re.persisted) {
      if (p >= n) throw ParseError(0, 0, "persisted id out of range");
      g.persisted.insert(p);
    }
    for (size_t i : re.init) {
      if (i >= n) throw ParseError(0, 0, "init id out of range");
      g.init.insert(i);
    }
    out.chain.eras.push_back(std::move(g));
  }
  return out;
}

}  // namespace pxlin::trace

#endif  // PXLIN_TRACE_HPP_
