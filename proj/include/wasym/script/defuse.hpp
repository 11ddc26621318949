#pragma once

// Def-use labeling of instruction sites, the static half of locator binding.
//
// Every instruction of a function gets a set of (kind, name) labels computed
// by an abstract operand-stack simulation, where a stack slot carries the set
// of named variables it provably derives from:
//
//   - `local.get x` / `global.get g` push {x} / {g};
//   - value-producing ops push the union of their operands' provenance;
//   - loads propagate the *address* provenance into the loaded value, so a
//     value read from a[i] stays connected to i;
//   - provenance is intra-block only: the simulation restarts with an empty
//     stack at every CFG block boundary (compilers spill across blocks
//     through locals, which re-anchor provenance via local.get).
//
// Labels:
//   def(x)   local.set/local.tee x, global.set g — plus cuse(y) for every y
//            the stored value derives from, so `def(f) and cuse(i)` can match
//            a single store site;
//   puse(x)  x flows into the condition of if/br_if/br_table/select;
//   luse(x)  x flows into the address operand of a load/store (or the
//            source/destination of memory.copy/memory.fill);
//   cuse(x)  x flows into any operand of a numeric/comparison/conversion op;
//   ause(x)  x flows into an argument of call/call_indirect;
//   ouse(x)  ause(x) where the callee is in the configured output set
//            (default {fd_write}).

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "wasym/script/ast.hpp"
#include "wasym/wasm/cfg.hpp"
#include "wasym/wasm/module.hpp"

namespace wasym::script {

struct SiteLabel {
  LocKind kind = LocKind::Def;
  std::string name;

  friend bool operator<(const SiteLabel& a, const SiteLabel& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.name < b.name;
  }
  friend bool operator==(const SiteLabel& a, const SiteLabel& b) {
    return a.kind == b.kind && a.name == b.name;
  }
};

struct FuncLabels {
  u32 func_index = 0;
  // indexed by instruction offset in the function body
  std::vector<std::vector<SiteLabel>> at;

  bool has(u32 instr, LocKind kind, const std::string& name) const {
    if (instr >= at.size()) return false;
    for (const SiteLabel& l : at[instr])
      if (l.kind == kind && l.name == name) return true;
    return false;
  }
};

// names under which a function can be addressed by a script: debug name,
// import field name, export names, and the positional fallback
inline std::vector<std::string> func_name_candidates(const wasm::Module& m, u32 fidx) {
  std::vector<std::string> out;
  auto add = [&](std::string s) {
    if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end())
      out.push_back(std::move(s));
  };
  add(m.names.func(fidx));
  if (m.is_imported_func(fidx)) add(m.func_import(fidx).name);
  for (const wasm::Export& e : m.exports)
    if (e.kind == wasm::ImportKind::Func && e.index == fidx) add(e.name);
  return out;
}

inline bool func_matches_name(const wasm::Module& m, u32 fidx, const std::string& name) {
  for (const std::string& c : func_name_candidates(m, fidx))
    if (c == name) return true;
  return false;
}

namespace detail {

using Prov = std::set<std::string>;

struct LabelSim {
  const wasm::Module& m;
  u32 fidx;
  const std::set<std::string>& output_funcs;
  std::vector<std::set<SiteLabel>> labels;
  std::vector<Prov> stack;

  Prov pop() {
    if (stack.empty()) return {};  // block input: no recoverable provenance
    Prov p = std::move(stack.back());
    stack.pop_back();
    return p;
  }

  void mark(u32 i, LocKind kind, const Prov& p) {
    for (const std::string& n : p) labels[i].insert({kind, n});
  }

  bool callee_is_output(u32 callee) const {
    for (const std::string& c : func_name_candidates(m, callee))
      if (output_funcs.count(c)) return true;
    return false;
  }

  void step(u32 i, const wasm::Instr& ins) {
    using namespace wasm::opc;
    switch (ins.op) {
      case LocalGet:
        stack.push_back({m.names.local(fidx, u32(ins.a))});
        return;
      case GlobalGet:
        stack.push_back({m.names.global(u32(ins.a))});
        return;
      case LocalSet:
      case LocalTee: {
        Prov v = pop();
        std::string name = m.names.local(fidx, u32(ins.a));
        labels[i].insert({LocKind::Def, name});
        mark(i, LocKind::CUse, v);
        if (ins.op == LocalTee) {
          v.insert(name);
          stack.push_back(std::move(v));
        }
        return;
      }
      case GlobalSet: {
        Prov v = pop();
        labels[i].insert({LocKind::Def, m.names.global(u32(ins.a))});
        mark(i, LocKind::CUse, v);
        return;
      }
      case I32Const: case I64Const: case F32Const: case F64Const:
      case MemorySize:
        stack.push_back({});
        return;
      case MemoryGrow: {
        pop();
        stack.push_back({});
        return;
      }
      case Drop:
        pop();
        return;
      case Select: {
        Prov c = pop(), b = pop(), a = pop();
        mark(i, LocKind::PUse, c);
        for (const std::string& n : b) a.insert(n);
        stack.push_back(std::move(a));
        return;
      }
      case If: case BrIf: case BrTable:
        mark(i, LocKind::PUse, pop());
        return;
      case MemoryCopy: {
        pop();  // length
        Prov src = pop(), dst = pop();
        mark(i, LocKind::LUse, src);
        mark(i, LocKind::LUse, dst);
        return;
      }
      case MemoryFill: {
        pop();  // length
        pop();  // value
        mark(i, LocKind::LUse, pop());
        return;
      }
      case Call: {
        const wasm::FuncType& ft = m.type_of(u32(ins.a));
        bool to_output = callee_is_output(u32(ins.a));
        for (size_t k = 0; k < ft.params.size(); ++k) {
          Prov arg = pop();
          mark(i, LocKind::AUse, arg);
          if (to_output) mark(i, LocKind::OUse, arg);
        }
        for (size_t k = 0; k < ft.results.size(); ++k) stack.push_back({});
        return;
      }
      case CallIndirect: {
        pop();  // table index
        const wasm::FuncType& ft = m.types[ins.a];
        for (size_t k = 0; k < ft.params.size(); ++k) mark(i, LocKind::AUse, pop());
        for (size_t k = 0; k < ft.results.size(); ++k) stack.push_back({});
        return;
      }
      default:
        if (wasm::is_load(ins.op)) {
          Prov addr = pop();
          mark(i, LocKind::LUse, addr);
          stack.push_back(std::move(addr));
          return;
        }
        if (wasm::is_store(ins.op)) {
          pop();  // stored value: stores do not define a named variable
          mark(i, LocKind::LUse, pop());
          return;
        }
        if (wasm::is_numeric(ins.op)) {
          Prov acc;
          for (u32 k = 0; k < wasm::numeric_arity(ins.op); ++k) {
            Prov v = pop();
            mark(i, LocKind::CUse, v);
            for (const std::string& n : v) acc.insert(n);
          }
          stack.push_back(std::move(acc));
          return;
        }
        // block/loop/else/end/br/return/unreachable/nop: no value tracking
        return;
    }
  }
};

}  // namespace detail

inline FuncLabels compute_defuse_labels(const wasm::Module& m, const wasm::Cfg& cfg,
                                        const std::set<std::string>& output_funcs) {
  const std::vector<wasm::Instr>& body = m.body_of(cfg.func_index).body;
  detail::LabelSim sim{m, cfg.func_index, output_funcs, {}, {}};
  sim.labels.resize(body.size());
  for (const wasm::CfgBlock& blk : cfg.blocks) {
    sim.stack.clear();
    for (u32 i = blk.first; i <= blk.last; ++i) sim.step(i, body[i]);
  }
  FuncLabels out;
  out.func_index = cfg.func_index;
  out.at.resize(body.size());
  for (size_t i = 0; i < body.size(); ++i)
    out.at[i].assign(sim.labels[i].begin(), sim.labels[i].end());
  return out;
}

inline FuncLabels compute_defuse_labels(const wasm::Module& m, const wasm::Cfg& cfg) {
  return compute_defuse_labels(m, cfg, {"fd_write"});
}

inline std::string labels_to_string(const wasm::Module& m, const FuncLabels& labels) {
  const std::vector<wasm::Instr>& body = m.body_of(labels.func_index).body;
  std::string out;
  for (size_t i = 0; i < labels.at.size(); ++i) {
    if (labels.at[i].empty()) continue;
    out += strf("%4zu %-16s", i, wasm::mnemonic(body[i].op));
    for (const SiteLabel& l : labels.at[i])
      out += strf(" %s(%s)", loc_kind_name(l.kind), l.name.c_str());
    out += "\n";
  }
  return out;
}

}  // namespace wasym::script
