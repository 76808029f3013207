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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pxlin/checkers.hpp"
#include "pxlin/simulator.hpp"
#include "pxlin/trace.hpp"

namespace fs = std::filesystem;
using namespace pxlin;

namespace {

// Exit codes are a stable contract for CI.
constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBound = 3;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string impl = "link-free-basic";
  int threads = 2;
  int ops = 2;
  int keys = 2;
  int values = 1;
  int eras = 1;
  uint64_t seed = 0;
  std::string crash = "none";  // none | after-returns | step:K | free
  std::string mutate;          // comma list
  std::string model = "strong";
  std::string policy = "random";
  std::string checks = "axioms,dl";
  std::string workload;  // explicit: eras ';', threads '/', ops ','
  std::string choices;   // comma list: replay a recorded choice stack
  std::string trace_out;
  std::string report_out;
  std::string archive;
  std::string format = "text";
  size_t runs = 2000;    // systematic exploration cap
  size_t seeds = 0;      // random sweep size (explore)
  int workers = 0;       // 0: take PXLIN_WORKERS, else 1
  std::string config_file;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

/// Config files are plain `key = value` lines; they override flags.
void apply_config_file(Options& o) {
  if (o.config_file.empty()) return;
  std::ifstream f(o.config_file);
  if (!f) throw CliError("cannot open config file " + o.config_file);
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::string trimmed;
    for (char c : line)
      if (!isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw CliError(o.config_file + ":" + std::to_string(line_no) +
                     ": expected key = value");
    std::string key = trimmed.substr(0, eq), val = trimmed.substr(eq + 1);
    if (key == "impl") o.impl = val;
    else if (key == "threads") o.threads = std::stoi(val);
    else if (key == "ops") o.ops = std::stoi(val);
    else if (key == "keys") o.keys = std::stoi(val);
    else if (key == "values") o.values = std::stoi(val);
    else if (key == "eras") o.eras = std::stoi(val);
    else if (key == "seed") o.seed = std::stoull(val);
    else if (key == "crash") o.crash = val;
    else if (key == "mutate") o.mutate = val;
    else if (key == "model") o.model = val;
    else if (key == "policy") o.policy = val;
    else if (key == "check") o.checks = val;
    else if (key == "workload") o.workload = val;
    else if (key == "choices") o.choices = val;
    else if (key == "runs") o.runs = std::stoull(val);
    else if (key == "seeds") o.seeds = std::stoull(val);
    else
      throw CliError(o.config_file + ":" + std::to_string(line_no) +
                     ": unknown key '" + key + "'");
  }
}

prog::MutationFlags parse_mutations(const std::string& s) {
  prog::MutationFlags m;
  if (s.empty()) return m;
  for (const std::string& part : split(s, ',')) {
    if (part == "skip-flush-ins") m.skip_flush_ins = true;
    else if (part == "skip-flush-del") m.skip_flush_del = true;
    else if (part == "skip-valid") m.skip_valid = true;
    else if (part == "weak-cacheline") m.weak_cacheline = true;
    else if (!part.empty())
      throw CliError("unknown mutation '" + part + "'");
  }
  return m;
}

sim::CrashPlan parse_crash(const std::string& s) {
  if (s == "none") return {sim::CrashPlan::Kind::None, 0};
  if (s == "after-returns") return {sim::CrashPlan::Kind::AfterReturns, 0};
  if (s == "free") return {sim::CrashPlan::Kind::Free, 0};
  if (s.rfind("step:", 0) == 0)
    return {sim::CrashPlan::Kind::AtStep,
            static_cast<size_t>(std::stoull(s.substr(5)))};
  throw CliError("unknown crash plan '" + s + "'");
}

Call parse_call(const std::string& s, prog::ImplId impl) {
  auto open = s.find('(');
  auto close = s.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw CliError("malformed call '" + s + "'");
  std::string op = s.substr(0, open);
  std::string args = s.substr(open + 1, close - open - 1);
  Call c;
  if (op == "insert") c.op = OpKind::Insert;
  else if (op == "delete") c.op = OpKind::Delete;
  else if (op == "contains") c.op = OpKind::Contains;
  else throw CliError("unknown operation '" + op + "'");
  auto colon = args.find(':');
  if (colon == std::string::npos) {
    c.key = std::stoi(args);
  } else {
    c.key = std::stoi(args.substr(0, colon));
    c.val = std::stoi(args.substr(colon + 1));
  }
  if (c.op == OpKind::Insert && impl == prog::ImplId::LinkFreeOpt && !c.val)
    c.val = 1;
  return c;
}

struct BuiltConfig {
  sim::ChainConfig chain;
  check::CheckContext ctx;
  px86::ModelVariant variant = px86::ModelVariant::Strong;
};

BuiltConfig build_config(const Options& o) {
  BuiltConfig out;
  auto impl = prog::impl_from_name(o.impl);
  if (!impl) throw CliError("unknown impl '" + o.impl + "'");
  out.chain.impl = *impl;
  out.chain.mut = parse_mutations(o.mutate);
  out.ctx.impl = *impl;
  out.ctx.keys = o.keys;
  out.ctx.vals = o.values;
  if (o.model == "strong") out.variant = px86::ModelVariant::Strong;
  else if (o.model == "weak") out.variant = px86::ModelVariant::Weak;
  else throw CliError("unknown model '" + o.model + "'");
  if (out.chain.mut.weak_cacheline) out.variant = px86::ModelVariant::Weak;
  if (o.threads < 1 || o.threads > 8) throw CliError("threads must be 1..8");
  if (o.keys < 1 || o.keys > 6) throw CliError("keys must be 1..6");
  if (o.eras < 1 || o.eras > 6) throw CliError("eras must be 1..6");

  sim::CrashPlan plan = parse_crash(o.crash);
  if (!o.workload.empty()) {
    std::vector<std::string> eras = split(o.workload, ';');
    for (size_t e = 0; e < eras.size(); ++e) {
      sim::EraConfig era;
      for (const std::string& th : split(eras[e], '/')) {
        std::vector<Call> ops;
        for (const std::string& cs : split(th, ','))
          if (!cs.empty()) ops.push_back(parse_call(cs, *impl));
        era.workload.push_back(std::move(ops));
      }
      era.crash = e + 1 < eras.size() ? plan : sim::CrashPlan{};
      out.chain.eras.push_back(std::move(era));
    }
  } else {
    // Random workload drawn from a stream independent of the scheduler's.
    std::mt19937_64 rng(o.seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    for (int e = 0; e < o.eras; ++e) {
      sim::EraConfig era;
      for (int t = 0; t < o.threads; ++t) {
        std::vector<Call> ops;
        for (int i = 0; i < o.ops; ++i) {
          Call c;
          int kinds = *impl == prog::ImplId::LinkFreeOpt ? 3 : 2;
          switch (rng() % kinds) {
            case 0: c.op = OpKind::Insert; break;
            case 1: c.op = OpKind::Delete; break;
            default: c.op = OpKind::Contains; break;
          }
          c.key = 1 + static_cast<int>(rng() % o.keys);
          if (c.op == OpKind::Insert && *impl == prog::ImplId::LinkFreeOpt)
            c.val = 1 + static_cast<int>(rng() % o.values);
          ops.push_back(c);
        }
        era.workload.push_back(std::move(ops));
      }
      era.crash = e + 1 < o.eras ? plan : sim::CrashPlan{};
      out.chain.eras.push_back(std::move(era));
    }
  }
  // Non-final eras must crash to form a chain.
  for (size_t e = 0; e + 1 < out.chain.eras.size(); ++e)
    if (out.chain.eras[e].crash.kind == sim::CrashPlan::Kind::None)
      out.chain.eras[e].crash = {sim::CrashPlan::Kind::Free, 0};
  return out;
}

struct CheckSelection {
  bool axioms = false, dl = false, master = false, recovery = false;
};

CheckSelection parse_checks(const std::string& s) {
  CheckSelection sel;
  for (const std::string& part : split(s, ',')) {
    if (part == "axioms") sel.axioms = true;
    else if (part == "dl") sel.dl = true;
    else if (part == "master") sel.master = true;
    else if (part == "recovery") sel.recovery = true;
    else if (part == "all")
      sel.axioms = sel.dl = sel.master = sel.recovery = true;
    else if (!part.empty())
      throw CliError("unknown check '" + part + "'");
  }
  return sel;
}

// ---------------------------------------------------------------------------
// Reports

struct CheckOutcome {
  bool failed = false;
  bool bound_exceeded = false;
  std::ostringstream report;
};

void check_chain(const Chain& chain, const BuiltConfig& cfg,
                 const CheckSelection& sel, bool lines, CheckOutcome& out) {
  auto& os = out.report;
  if (sel.axioms) {
    bool all = true;
    for (const ExecutionGraph& g : chain.eras) {
      WellformedReport wf = graph_wellformed(g);
      for (const auto& v : wf.violations) {
        all = false;
        os << "wellformed era " << g.era << " " << v.clause << " fail "
           << v.detail << "\n";
      }
      std::optional<Relation> tso = g.tso;
      if (!tso) {
        try {
          tso = px86::search_tso(g, cfg.variant);
        } catch (const BoundExceeded&) {
          out.bound_exceeded = true;
          os << "axioms era " << g.era << " witness-search bound exceeded\n";
          continue;
        }
        if (!tso) {
          all = false;
          os << "axioms era " << g.era << " no-tso-witness fail\n";
          continue;
        }
        os << "axioms era " << g.era << " witness found by search\n";
      }
      px86::AxiomReport rep = px86::check_px86(g, cfg.variant, tso);
      for (const auto& a : rep.axioms) {
        if (lines || !a.pass) {
          os << "axiom era " << g.era << " " << a.name << " "
             << (a.pass ? "pass" : "fail");
          if (!a.pass && a.witness)
            os << " witness " << a.witness->first << " " << a.witness->second;
          os << "\n";
        }
        all &= a.pass;
      }
    }
    os << "axioms " << (all ? "pass" : "fail") << "\n";
    out.failed |= !all;
  }
  if (sel.dl) {
    try {
      check::DlReport rep = check::dl_check(chain, cfg.ctx);
      if (rep.pass) {
        os << "dl pass\n";
        for (size_t e = 0; e < rep.witness.size(); ++e)
          os << "dl witness era " << e << ": "
             << spec::to_string(rep.witness[e]) << "\n";
      } else {
        os << "dl fail: " << rep.note << "\n";
        out.failed = true;
      }
    } catch (const BoundExceeded& b) {
      out.bound_exceeded = true;
      os << "dl bound exceeded: " << b.what() << "\n";
    }
  }
  if (sel.master) {
    if (!prog::strategy_hooks(cfg.chain.impl).master_checkable) {
      os << "master skipped: " << prog::impl_name(cfg.chain.impl)
         << " is oracle-only\n";
    } else {
      bool all = true;
      for (const ExecutionGraph& g : chain.eras) {
        check::StrategyAnnotation ann =
            check::extract_strategy(g, cfg.chain.impl);
        check::MasterReport rep = check::master_check(g, ann, cfg.ctx);
        if (!rep.precondition_ok) {
          all = false;
          os << "master era " << g.era << " precondition fail: " << rep.note
             << "\n";
          continue;
        }
        for (const auto& c : rep.conds) {
          if (lines || !c.pass)
            os << "master era " << g.era << " condition " << c.id << " "
               << (c.pass ? "pass" : "fail")
               << (c.detail.empty() ? "" : " " + c.detail) << "\n";
          all &= c.pass;
        }
      }
      os << "master " << (all ? "pass" : "fail") << "\n";
      out.failed |= !all;
    }
  }
  if (sel.recovery) {
    bool all = true;
    for (const ExecutionGraph& g : chain.eras) {
      std::vector<Event> init_events;
      g.init.for_each([&](size_t i) { init_events.push_back(g.ev(i)); });
      Memory m = mem_of(init_events, g.layout);
      check::RecoveryReport rep =
          check::recovery_soundness(cfg.chain.impl, m);
      if (!rep.pass()) {
        all = false;
        os << "recovery era " << g.era << " fail: " << rep.detail << "\n";
      } else if (lines) {
        os << "recovery era " << g.era << " pass\n";
      }
    }
    os << "recovery " << (all ? "pass" : "fail") << "\n";
    out.failed |= !all;
  }
}

void emit_outcome(const Options& o, const CheckOutcome& out) {
  std::cout << out.report.str();
  if (!o.report_out.empty()) {
    std::ofstream f(o.report_out);
    f << out.report.str();
  }
}

void write_trace_file(const std::string& path, const Chain& chain,
                      prog::ImplId impl) {
  std::ofstream f(path);
  if (!f) throw CliError("cannot write trace to " + path);
  trace::write_chain(f, chain, impl);
}

/// Persist a failing chain with everything needed to replay it.
void archive_counterexample(const std::string& dir, size_t n,
                            const Chain& chain, const BuiltConfig& cfg,
                            const Options& o,
                            const std::vector<uint32_t>* stack,
                            std::optional<uint64_t> seed) {
  fs::create_directories(dir);
  std::string base = dir + "/cex" + std::to_string(n);
  write_trace_file(base + ".trace", chain, cfg.chain.impl);
  std::ofstream f(base + ".cfg");
  f << "# replayable counterexample configuration\n";
  f << "impl = " << o.impl << "\n";
  f << "keys = " << o.keys << "\n";
  f << "values = " << o.values << "\n";
  if (!o.mutate.empty()) f << "mutate = " << o.mutate << "\n";
  f << "model = " << o.model << "\n";
  if (!o.workload.empty()) {
    f << "workload = " << o.workload << "\n";
  } else {
    f << "threads = " << o.threads << "\n";
    f << "ops = " << o.ops << "\n";
    f << "eras = " << o.eras << "\n";
    f << "crash = " << o.crash << "\n";
  }
  if (seed) f << "seed = " << *seed << "\n";
  if (stack) {
    f << "choices = ";
    for (size_t i = 0; i < stack->size(); ++i)
      f << (i ? "," : "") << (*stack)[i];
    f << "\n";
  }
}

// ---------------------------------------------------------------------------
// Commands

int cmd_run(const Options& o) {
  BuiltConfig cfg = build_config(o);
  Chain chain;
  if (!o.choices.empty()) {
    std::vector<uint32_t> stack;
    for (const std::string& c : split(o.choices, ','))
      if (!c.empty()) stack.push_back(static_cast<uint32_t>(std::stoul(c)));
    chain = sim::run_chain_choices(cfg.chain, stack);
  } else {
    chain = sim::run_chain_random(cfg.chain, o.seed);
  }
  if (!o.trace_out.empty())
    write_trace_file(o.trace_out, chain, cfg.chain.impl);

  CheckOutcome out;
  check_chain(chain, cfg, parse_checks(o.checks), o.format == "lines", out);
  emit_outcome(o, out);
  if (out.bound_exceeded) return kExitBound;
  return out.failed ? kExitCheckFailed : kExitPass;
}

int cmd_explore(const Options& o) {
  BuiltConfig cfg = build_config(o);
  CheckSelection sel = parse_checks(o.checks);
  size_t failures = 0, bound_hits = 0, archived = 0, total = 0;
  auto consider = [&](const Chain& chain, const std::vector<uint32_t>* stack,
                      std::optional<uint64_t> seed) {
    ++total;
    CheckOutcome out;
    check_chain(chain, cfg, sel, false, out);
    if (out.bound_exceeded) ++bound_hits;
    if (out.failed) {
      ++failures;
      if (!o.archive.empty()) {
        archive_counterexample(o.archive, archived, chain, cfg, o, stack,
                               seed);
        ++archived;
      }
    }
    return out.failed;
  };

  if (o.policy == "systematic") {
    sim::ExploreStats st = sim::explore_systematic(
        cfg.chain, {o.runs, 0},
        [&](const Chain& chain, const std::vector<uint32_t>& stack) {
          consider(chain, &stack, std::nullopt);
          return true;
        });
    std::cout << "explored " << st.runs << " schedules"
              << (st.truncated ? " (bound reached)" : " (exhausted)") << "\n";
  } else {
    size_t n = o.seeds ? o.seeds : o.runs;
    int workers = o.workers;
    if (workers <= 0) {
      const char* env = std::getenv("PXLIN_WORKERS");
      workers = env ? std::max(1, atoi(env)) : 1;
    }
    // Workers simulate disjoint seed slices; checking stays in seed order.
    std::vector<Chain> chains(n);
    std::vector<std::future<void>> futs;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w)
      futs.push_back(std::async(std::launch::async, [&] {
        for (size_t s = next.fetch_add(1); s < n; s = next.fetch_add(1))
          chains[s] = sim::run_chain_random(cfg.chain, o.seed + s);
      }));
    for (auto& f : futs) f.get();
    for (size_t s = 0; s < n; ++s)
      consider(chains[s], nullptr, o.seed + s);
    std::cout << "explored " << n << " seeded runs\n";
  }
  std::cout << "failures " << failures << "\n";
  if (!o.archive.empty()) std::cout << "archived " << archived << "\n";
  if (bound_hits) {
    std::cout << "bound-exceeded " << bound_hits << "\n";
    return kExitBound;
  }
  return failures ? kExitCheckFailed : kExitPass;
}

int cmd_replay(const Options& o, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CliError("cannot open trace " + path);
  trace::ParsedTrace parsed;
  try {
    parsed = trace::read_chain(f);
  } catch (const trace::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  BuiltConfig cfg;
  cfg.chain.impl = parsed.impl;
  cfg.ctx.impl = parsed.impl;
  cfg.ctx.keys = o.keys;
  cfg.ctx.vals = o.values;
  cfg.variant = o.model == "weak" ? px86::ModelVariant::Weak
                                  : px86::ModelVariant::Strong;
  if (!parsed.chain.eras.empty() &&
      parsed.chain.eras[0].cl_mode == CacheLineMode::PerField)
    cfg.variant = px86::ModelVariant::Weak;
  CheckOutcome out;
  check_chain(parsed.chain, cfg, parse_checks(o.checks), o.format == "lines",
              out);
  emit_outcome(o, out);
  if (out.bound_exceeded) return kExitBound;
  return out.failed ? kExitCheckFailed : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pxlin: a persistent-memory model-checking harness for durable "
      "set algorithms"};
  app.require_subcommand(1);

  Options o;
  std::string trace_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--impl", o.impl,
                    "harris-durable | link-free-basic | link-free-opt");
    cmd->add_option("--threads", o.threads, "worker thread count");
    cmd->add_option("--ops", o.ops, "random ops per thread per era");
    cmd->add_option("--keys", o.keys, "key range 1..K");
    cmd->add_option("--values", o.values, "value range 1..V");
    cmd->add_option("--eras", o.eras, "era count");
    cmd->add_option("--seed", o.seed, "scheduler/workload seed");
    cmd->add_option("--crash", o.crash,
                    "none | after-returns | step:K | free (non-final eras)");
    cmd->add_option("--mutate", o.mutate,
                    "skip-flush-ins,skip-flush-del,skip-valid,weak-cacheline");
    cmd->add_option("--model", o.model, "strong | weak");
    cmd->add_option("--check", o.checks, "axioms,dl,master,recovery | all");
    cmd->add_option("--workload", o.workload,
                    "explicit workload: eras ';', threads '/', ops ','");
    cmd->add_option("--format", o.format, "text | lines");
    cmd->add_option("--report", o.report_out, "write the report here too");
    cmd->add_option("--config", o.config_file,
                    "key = value file; overrides flags");
  };

  CLI::App* run = app.add_subcommand("run", "run one chain and check it");
  add_common(run);
  run->add_option("--trace-out", o.trace_out, "write the executed trace");
  run->add_option("--choices", o.choices, "replay a recorded choice stack");

  CLI::App* explore = app.add_subcommand(
      "explore", "sweep schedules, aggregate check results");
  add_common(explore);
  explore->add_option("--runs", o.runs, "systematic exploration cap");
  explore->add_option("--seeds", o.seeds, "random sweep size");
  explore->add_option("--policy", o.policy, "random | systematic");
  explore->add_option("--archive", o.archive, "directory for counterexamples");
  explore->add_option("--workers", o.workers,
                      "worker count (default: PXLIN_WORKERS or 1)");

  CLI::App* replay = app.add_subcommand("replay", "re-check a trace file");
  add_common(replay);
  replay->add_option("trace", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config_file(o);
    if (run->parsed()) return cmd_run(o);
    if (explore->parsed()) return cmd_explore(o);
    if (replay->parsed()) return cmd_replay(o, trace_path);
  } catch (const CliError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BoundExceeded& e) {
    std::cerr << "bound exceeded: " << e.what() << "\n";
    return kExitBound;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
