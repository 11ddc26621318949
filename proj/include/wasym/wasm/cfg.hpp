#pragma once

// Lowers a function's structured control into a flat block graph.
//
// Blocks are contiguous index ranges into the function's instruction vector.
// Boundaries sit exactly at branch targets, after branches, at loop headers
// (the `loop` marker itself) and at `end`/`else` joins. `call` does not end a
// block. Each branch edge carries static stack-unwind info: the number of
// values the branch carries and the operand-stack height kept underneath
// them, so the executor never needs a runtime control stack.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wasym/wasm/module.hpp"

namespace wasym::wasm {

enum class EdgeKind : u8 { Fallthrough, BranchTaken, BranchNotTaken, TableCase };

inline const char* edge_kind_name(EdgeKind k, bool back) {
  if (back) return "back-edge";
  switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::BranchTaken: return "branch-taken";
    case EdgeKind::BranchNotTaken: return "branch-not-taken";
    case EdgeKind::TableCase: return "table-case";
  }
  return "?";
}

// Taking an edge pops `carry` values, truncates the operand stack to `keep`
// entries and pushes the carried values back.
struct StackUnwind {
  u32 carry = 0;
  u32 keep = 0;
  bool active = false;  // identity unwind for fallthrough / not-taken edges
};

struct CfgEdge {
  u32 from = 0;
  u32 to = 0;
  EdgeKind kind = EdgeKind::Fallthrough;
  bool back = false;  // target starts at or before the source block
  StackUnwind unwind;
  std::vector<u32> case_values;  // TableCase: matching selector values
  bool is_default = false;       // TableCase: selector >= table length
};

struct CfgBlock {
  u32 first = 0;  // inclusive instruction index range
  u32 last = 0;
  std::vector<u32> out;  // edge ids, in decode order
  std::vector<u32> in;
};

struct Cfg {
  u32 func_index = 0;
  std::vector<CfgBlock> blocks;  // sorted by `first`; block 0 is the entry
  std::vector<CfgEdge> edges;

  u32 block_of_instr(u32 idx) const {
    u32 lo = 0, hi = u32(blocks.size());
    while (lo + 1 < hi) {
      u32 mid = (lo + hi) / 2;
      if (blocks[mid].first <= idx) lo = mid;
      else hi = mid;
    }
    return lo;
  }
};

namespace detail {

struct CtrlFrame {
  u16 op = 0;  // opc::Block / Loop / If, or 0 for the function frame
  u64 bt = 0x40;
  u32 entry_height = 0;
  u32 start = 0;
  u32 end_idx = 0;
  i64 else_idx = -1;
};

struct BranchRec {
  u32 target_instr = 0;
  StackUnwind unwind;
};

inline i64 stack_effect(const Module& m, const Instr& ins) {
  using namespace opc;
  switch (ins.op) {
    case I32Const: case I64Const: case F32Const: case F64Const:
    case LocalGet: case GlobalGet: case MemorySize:
      return 1;
    case LocalSet: case GlobalSet: case Drop:
      return -1;
    case LocalTee: case MemoryGrow: case Nop:
      return 0;
    case Select: return -2;
    case MemoryCopy: case MemoryFill: return -3;
    case Call: {
      const FuncType& ft = m.type_of(u32(ins.a));
      return i64(ft.results.size()) - i64(ft.params.size());
    }
    case CallIndirect: {
      if (ins.a >= m.types.size()) fail(Errc::bad_index, "call_indirect type out of range");
      const FuncType& ft = m.types[ins.a];
      return i64(ft.results.size()) - i64(ft.params.size()) - 1;
    }
    default:
      if (is_load(ins.op)) return 0;
      if (is_store(ins.op)) return -2;
      if (is_numeric(ins.op)) return 1 - i64(numeric_arity(ins.op));
      return 0;
  }
}

}  // namespace detail

inline Cfg build_cfg(const Module& m, u32 fidx) {
  using namespace detail;
  const std::vector<Instr>& body = m.body_of(fidx).body;
  if (body.empty() || body.back().op != opc::End)
    fail(Errc::malformed_section, "function %u body does not end with `end`", fidx);

  // pass A: match block/loop/if with their else/end
  std::vector<u32> end_of(body.size(), 0);
  std::vector<i64> else_of(body.size(), -1);
  {
    std::vector<u32> stack;  // indices of open control instructions
    for (u32 i = 0; i < body.size(); ++i) {
      u16 op = body[i].op;
      if (op == opc::Block || op == opc::Loop || op == opc::If) {
        stack.push_back(i);
      } else if (op == opc::Else) {
        if (stack.empty() || body[stack.back()].op != opc::If)
          fail(Errc::malformed_section, "`else` without matching `if`");
        else_of[stack.back()] = i;
      } else if (op == opc::End) {
        if (stack.empty()) {
          if (i + 1 != body.size())
            fail(Errc::malformed_section, "instructions after function-level `end`");
        } else {
          end_of[stack.back()] = i;
          stack.pop_back();
        }
      }
    }
    if (!stack.empty()) fail(Errc::malformed_section, "unclosed control frame");
  }

  const u32 func_results = u32(m.type_of(fidx).results.size());

  // pass B: static heights + branch resolution
  std::vector<CtrlFrame> frames;
  frames.push_back({0, 0x40, 0, 0, u32(body.size() - 1), -1});
  std::map<u32, BranchRec> branch_of;          // branch instr -> taken target
  std::map<u32, std::vector<BranchRec>> table_of;  // br_table instr -> targets+default
  bool unreachable = false;
  i64 h = 0;

  auto resolve = [&](u32 depth) -> BranchRec {
    if (depth >= frames.size())
      fail(Errc::malformed_section, "branch depth %u exceeds nesting", depth);
    const CtrlFrame& f = frames[frames.size() - 1 - depth];
    BranchRec r;
    if (f.op == opc::Loop) {
      r.target_instr = f.start;  // back to the loop marker
      r.unwind = {0, f.entry_height, true};
    } else if (f.op == 0) {
      // branching to the function label lands on the final `end`
      r.target_instr = f.end_idx;
      r.unwind = {func_results, 0, true};
    } else {
      r.target_instr = end_of[f.start];
      r.unwind = {Module::blocktype_arity(f.bt), f.entry_height, true};
    }
    return r;
  };

  for (u32 i = 0; i < body.size(); ++i) {
    const Instr& ins = body[i];
    switch (ins.op) {
      case opc::Block:
      case opc::Loop:
        frames.push_back({ins.op, ins.a, u32(h), i, end_of[i], else_of[i]});
        break;
      case opc::If:
        if (!unreachable) h -= 1;
        frames.push_back({ins.op, ins.a, u32(h), i, end_of[i], else_of[i]});
        break;
      case opc::Else: {
        const CtrlFrame& f = frames.back();
        branch_of[i] = {end_of[f.start],
                        {Module::blocktype_arity(f.bt), f.entry_height, true}};
        h = f.entry_height;
        unreachable = false;
        break;
      }
      case opc::End: {
        const CtrlFrame f = frames.back();
        frames.pop_back();
        h = f.entry_height + (f.op == 0 ? func_results : Module::blocktype_arity(f.bt));
        unreachable = false;
        if (f.op == 0) {
          // function frame: loop ends here
        }
        break;
      }
      case opc::Br:
        branch_of[i] = resolve(u32(ins.a));
        unreachable = true;
        break;
      case opc::BrIf:
        if (!unreachable) h -= 1;
        branch_of[i] = resolve(u32(ins.a));
        break;
      case opc::BrTable: {
        if (!unreachable) h -= 1;
        std::vector<BranchRec> recs;
        for (u32 t : ins.table) recs.push_back(resolve(t));
        recs.push_back(resolve(u32(ins.a)));  // default last
        table_of[i] = std::move(recs);
        unreachable = true;
        break;
      }
      case opc::Return:
      case opc::Unreachable:
        unreachable = true;
        break;
      default:
        if (!unreachable) {
          h += stack_effect(m, ins);
          if (h < 0)
            fail(Errc::malformed_section, "operand stack underflow at instruction %u of %s", i,
                 m.names.func(fidx).c_str());
        }
        break;
    }
  }

  // leaders
  std::set<u32> leaders = {0};
  for (u32 i = 0; i < body.size(); ++i) {
    u16 op = body[i].op;
    if (op == opc::Loop || op == opc::End) leaders.insert(i);
    bool terminator = op == opc::If || op == opc::Else || op == opc::Br || op == opc::BrIf ||
                      op == opc::BrTable || op == opc::Return || op == opc::Unreachable;
    if (terminator && i + 1 < body.size()) leaders.insert(i + 1);
  }
  for (auto& [i, r] : branch_of) leaders.insert(r.target_instr);
  for (auto& [i, rs] : table_of)
    for (auto& r : rs) leaders.insert(r.target_instr);

  Cfg g;
  g.func_index = fidx;
  std::map<u32, u32> block_at;  // leader instr -> block id
  {
    std::vector<u32> ls(leaders.begin(), leaders.end());
    for (u32 b = 0; b < ls.size(); ++b) {
      CfgBlock blk;
      blk.first = ls[b];
      blk.last = (b + 1 < ls.size() ? ls[b + 1] - 1 : u32(body.size() - 1));
      block_at[ls[b]] = b;
      g.blocks.push_back(blk);
    }
  }

  auto add_edge = [&](u32 from, u32 target_instr, EdgeKind kind, StackUnwind uw,
                      std::vector<u32> cases = {}, bool is_default = false) {
    CfgEdge e;
    e.from = from;
    e.to = block_at.at(target_instr);
    e.kind = kind;
    e.unwind = uw;
    e.case_values = std::move(cases);
    e.is_default = is_default;
    e.back = g.blocks[e.to].first <= g.blocks[e.from].first;
    g.edges.push_back(std::move(e));
  };

  for (u32 b = 0; b < g.blocks.size(); ++b) {
    u32 last = g.blocks[b].last;
    const Instr& t = body[last];
    switch (t.op) {
      case opc::If:
        add_edge(b, last + 1, EdgeKind::BranchTaken, {});
        add_edge(b, else_of[last] >= 0 ? u32(else_of[last] + 1) : end_of[last],
                 EdgeKind::BranchNotTaken, {});
        break;
      case opc::Else:
      case opc::Br:
        add_edge(b, branch_of.at(last).target_instr, EdgeKind::BranchTaken,
                 branch_of.at(last).unwind);
        break;
      case opc::BrIf:
        add_edge(b, branch_of.at(last).target_instr, EdgeKind::BranchTaken,
                 branch_of.at(last).unwind);
        if (last + 1 < body.size())
          add_edge(b, last + 1, EdgeKind::BranchNotTaken, {});
        break;
      case opc::BrTable: {
        const std::vector<BranchRec>& recs = table_of.at(last);
        // one edge per distinct target, collecting the selector values
        std::map<u32, std::vector<u32>> by_target;
        std::vector<u32> order;
        for (u32 k = 0; k + 1 < recs.size(); ++k) {
          if (!by_target.count(recs[k].target_instr)) order.push_back(recs[k].target_instr);
          by_target[recs[k].target_instr].push_back(k);
        }
        for (u32 tgt : order)
          add_edge(b, tgt, EdgeKind::TableCase,
                   recs[by_target[tgt].front()].unwind, by_target[tgt], false);
        add_edge(b, recs.back().target_instr, EdgeKind::TableCase, recs.back().unwind, {},
                 true);
        break;
      }
      case opc::Return:
      case opc::Unreachable:
        break;  // no successors
      default:
        if (last + 1 < body.size()) add_edge(b, last + 1, EdgeKind::Fallthrough, {});
        break;  // final block falls off the function end
    }
  }

  // prune blocks unreachable from the entry, renumber, build in/out lists
  std::vector<bool> seen(g.blocks.size(), false);
  std::vector<u32> work = {0};
  seen[0] = true;
  while (!work.empty()) {
    u32 b = work.back();
    work.pop_back();
    for (const CfgEdge& e : g.edges)
      if (e.from == b && !seen[e.to]) {
        seen[e.to] = true;
        work.push_back(e.to);
      }
  }
  std::vector<u32> remap(g.blocks.size(), ~0u);
  Cfg out;
  out.func_index = fidx;
  for (u32 b = 0; b < g.blocks.size(); ++b)
    if (seen[b]) {
      remap[b] = u32(out.blocks.size());
      CfgBlock nb;
      nb.first = g.blocks[b].first;
      nb.last = g.blocks[b].last;
      out.blocks.push_back(nb);
    }
  for (const CfgEdge& e : g.edges) {
    if (!seen[e.from]) continue;
    CfgEdge ne = e;
    ne.from = remap[e.from];
    ne.to = remap[e.to];
    u32 id = u32(out.edges.size());
    out.blocks[ne.from].out.push_back(id);
    out.blocks[ne.to].in.push_back(id);
    out.edges.push_back(std::move(ne));
  }
  return out;
}

// GraphViz rendering for --dump-cfg.
inline std::string cfg_to_dot(const Module& m, const Cfg& g) {
  const std::vector<Instr>& body = m.body_of(g.func_index).body;
  std::string s = strf("digraph \"%s\" {\n  node [shape=box fontname=monospace];\n",
                       m.names.func(g.func_index).c_str());
  for (u32 b = 0; b < g.blocks.size(); ++b) {
    std::string label = strf("B%u [%u..%u]", b, g.blocks[b].first, g.blocks[b].last);
    for (u32 i = g.blocks[b].first; i <= g.blocks[b].last && i < body.size(); ++i) {
      label += "\\n";
      label += mnemonic(body[i].op);
    }
    s += strf("  b%u [label=\"%s\"];\n", b, label.c_str());
  }
  for (const CfgEdge& e : g.edges) {
    std::string lbl = edge_kind_name(e.kind, e.back);
    if (e.kind == EdgeKind::TableCase) {
      if (e.is_default) lbl += " default";
      else {
        lbl += " [";
        for (u32 i = 0; i < e.case_values.size(); ++i)
          lbl += (i ? "," : "") + std::to_string(e.case_values[i]);
        lbl += "]";
      }
    }
    s += strf("  b%u -> b%u [label=\"%s\"%s];\n", e.from, e.to, lbl.c_str(),
              e.back ? " style=dashed" : "");
  }
  s += "}\n";
  return s;
}

}  // namespace wasym::wasm
