// Block-graph lowering: boundary placement, edge kinds, stack-unwind info,
// table dedup and dead-code pruning.

#include "catch2/catch_amalgamated.hpp"
#include "wasym/wasm/cfg.hpp"
#include "wasym/wasm/decoder.hpp"
#include "wasym/wasm/writer.hpp"

using namespace wasym;
using namespace wasym::wasm;

namespace {

// Builds a single-function module and returns its CFG (a Cfg owns its data,
// so the module can go out of scope).
Cfg cfg_of(Asm body, std::vector<ValType> params = {}, std::vector<ValType> results = {},
           u32 extra_locals = 0) {
  ModuleBuilder b;
  u32 f = b.func("f", b.type(std::move(params), std::move(results)));
  for (u32 i = 0; i < extra_locals; ++i) b.local(f, ValType::I32);
  b.set_body(f, std::move(body));
  Module m = decode(b.emit());
  return build_cfg(m, 0);
}

const CfgEdge& only_edge(const Cfg& g, u32 from) {
  REQUIRE(g.blocks[from].out.size() == 1);
  return g.edges[g.blocks[from].out[0]];
}

}  // namespace

TEST_CASE("straight-line code forms a single block", "[cfg]") {
  // i32.const 1; drop; end  -- `end` is the function end, no split before it
  Cfg g = cfg_of(Asm{}.i32_const(1).drop());
  REQUIRE(g.blocks.size() == 2);  // code block + function-end join
  CHECK(g.blocks[0].first == 0);
  CHECK(g.blocks[0].last == 1);
  CHECK(only_edge(g, 0).kind == EdgeKind::Fallthrough);
  CHECK(g.blocks[1].out.empty());
}

TEST_CASE("calls do not end a block", "[cfg]") {
  ModuleBuilder b;
  u32 t = b.type({}, {ValType::I32});
  u32 callee = b.func("callee", t);
  u32 caller = b.func("caller", b.type({}, {}));
  b.set_body(callee, Asm{}.i32_const(5));
  b.set_body(caller, Asm{}.call(callee).drop().call(callee).drop());
  Module m = decode(b.emit());
  Cfg g = build_cfg(m, caller);
  REQUIRE(g.blocks.size() == 2);
  CHECK(g.blocks[0].first == 0);
  CHECK(g.blocks[0].last == 3);  // call drop call drop, all in one block
}

TEST_CASE("if/else produces taken and not-taken edges joining at end", "[cfg]") {
  // local.get 0; if; i32.const 1; local.set 0; else; i32.const 2; local.set 0; end
  Asm a;
  a.local_get(0).if_().i32_const(1).local_set(0).else_().i32_const(2).local_set(0).end();
  Cfg g = cfg_of(std::move(a), {ValType::I32});

  REQUIRE(g.blocks.size() >= 4);
  const CfgBlock& head = g.blocks[0];
  REQUIRE(head.out.size() == 2);
  const CfgEdge& taken = g.edges[head.out[0]];
  const CfgEdge& not_taken = g.edges[head.out[1]];
  CHECK(taken.kind == EdgeKind::BranchTaken);
  CHECK(not_taken.kind == EdgeKind::BranchNotTaken);
  CHECK(g.blocks[taken.to].first == 2);      // then-arm starts after `if`
  CHECK(g.blocks[not_taken.to].first == 5);  // else-arm starts after `else`

  // both arms end at the join (the `end` block), the then-arm via a jump
  const CfgEdge& then_exit = only_edge(g, taken.to);
  const CfgEdge& else_exit = only_edge(g, not_taken.to);
  CHECK(then_exit.to == else_exit.to);
  CHECK(then_exit.kind == EdgeKind::BranchTaken);  // `else` acts as a jump to end
  CHECK(else_exit.kind == EdgeKind::Fallthrough);
}

TEST_CASE("loops split at the loop marker and the latch is a back-edge", "[cfg]") {
  // i32.const 0; local.set 0; loop; local.get 0; i32.const 1; i32.add;
  // local.tee 0; i32.const 10; i32.lt_s; br_if 0; end
  Asm a;
  a.i32_const(0).local_set(0).loop();
  a.local_get(0).i32_const(1).i32_add().local_tee(0).i32_const(10).i32_lt_s().br_if(0).end();
  Cfg g = cfg_of(std::move(a), {}, {}, 1);

  // blocks: [0..1] preheader, [2..2]? no: loop marker at 2 is a leader and the
  // body continues to the br_if at 9; then the ends.
  REQUIRE(g.blocks.size() >= 3);
  CHECK(g.blocks[1].first == 2);  // the `loop` marker

  // find the br_if block
  const CfgBlock* latch = nullptr;
  u32 latch_id = 0;
  for (u32 i = 0; i < g.blocks.size(); ++i)
    if (g.blocks[i].out.size() == 2) {
      latch = &g.blocks[i];
      latch_id = i;
    }
  REQUIRE(latch != nullptr);
  const CfgEdge& back = g.edges[latch->out[0]];
  const CfgEdge& exit = g.edges[latch->out[1]];
  CHECK(back.kind == EdgeKind::BranchTaken);
  CHECK(back.back);
  CHECK(g.blocks[back.to].first == 2);  // targets the loop marker
  CHECK(back.unwind.active);
  CHECK(back.unwind.carry == 0);
  CHECK(back.unwind.keep == 0);
  CHECK(exit.kind == EdgeKind::BranchNotTaken);
  CHECK(!exit.back);
  CHECK(g.blocks[exit.to].first == g.blocks[latch_id].last + 1);
}

TEST_CASE("branches out of a value block carry its result", "[cfg]") {
  // block (result i32); i32.const 3; br 0; end; drop
  Asm a;
  a.block(u64(u8(ValType::I32))).i32_const(3).br(0).end().drop();
  Cfg g = cfg_of(std::move(a));
  const CfgEdge* br = nullptr;
  for (const CfgEdge& e : g.edges)
    if (e.kind == EdgeKind::BranchTaken) br = &e;
  REQUIRE(br != nullptr);
  CHECK(br->unwind.active);
  CHECK(br->unwind.carry == 1);
  CHECK(br->unwind.keep == 0);
  CHECK(g.blocks[br->to].first == 3);  // the block's `end`
}

TEST_CASE("branching to the function label reaches the final end with the result", "[cfg]") {
  // block; i32.const 9; br 1; end; i32.const 1; end  (function returns i32)
  Asm a;
  a.block().i32_const(9).br(1).end().i32_const(1);
  Cfg g = cfg_of(std::move(a), {}, {ValType::I32});
  const CfgEdge* br = nullptr;
  for (const CfgEdge& e : g.edges)
    if (e.kind == EdgeKind::BranchTaken && e.unwind.carry == 1) br = &e;
  REQUIRE(br != nullptr);
  CHECK(br->unwind.keep == 0);
  // target block holds the function-level `end`
  u32 last_instr = 0;
  for (auto& b : g.blocks) last_instr = std::max(last_instr, b.last);
  CHECK(g.blocks[br->to].last == last_instr);
}

TEST_CASE("br_table merges duplicate targets and keeps a separate default", "[cfg]") {
  // block block block local.get 0 br_table [1 0 1] default 2 ... end end end
  Asm a;
  a.block().block().block().local_get(0).br_table({1, 0, 1}, 2);
  a.end().i32_const(10).local_set(0).br(1).end().i32_const(20).local_set(0).end();
  Cfg g = cfg_of(std::move(a), {ValType::I32});

  const CfgBlock* dispatch = nullptr;
  for (const CfgBlock& b : g.blocks)
    if (!b.out.empty() && g.edges[b.out[0]].kind == EdgeKind::TableCase) dispatch = &b;
  REQUIRE(dispatch != nullptr);
  REQUIRE(dispatch->out.size() == 3);  // two distinct case targets + default

  const CfgEdge& e0 = g.edges[dispatch->out[0]];
  const CfgEdge& e1 = g.edges[dispatch->out[1]];
  const CfgEdge& ed = g.edges[dispatch->out[2]];
  CHECK(e0.case_values == std::vector<u32>{0, 2});  // depth-1 targets (slots 0 and 2)
  CHECK(e1.case_values == std::vector<u32>{1});
  CHECK(!e0.is_default);
  CHECK(ed.is_default);
  CHECK(ed.case_values.empty());
  CHECK(e0.to != e1.to);
}

TEST_CASE("code after an unconditional branch is pruned", "[cfg]") {
  // block; br 0; i32.const 1; drop; end
  Asm a;
  a.block().br(0).i32_const(1).drop().end();
  Cfg g = cfg_of(std::move(a));
  for (const CfgBlock& b : g.blocks)
    for (u32 i = b.first; i <= b.last; ++i)
      CHECK(!(i >= 2 && i <= 3));  // the dead const/drop belong to no live block
  for (const CfgBlock& b : g.blocks)
    if (b.first != 0) CHECK(!b.in.empty());
}

TEST_CASE("block_of_instr maps instruction indices to their blocks", "[cfg]") {
  Asm a;
  a.local_get(0).if_().i32_const(1).local_set(0).else_().i32_const(2).local_set(0).end();
  Cfg g = cfg_of(std::move(a), {ValType::I32});
  for (u32 b = 0; b < g.blocks.size(); ++b)
    for (u32 i = g.blocks[b].first; i <= g.blocks[b].last; ++i)
      CHECK(g.block_of_instr(i) == b);
}

TEST_CASE("dot rendering mentions every block and edge kind", "[cfg]") {
  ModuleBuilder b;
  u32 f = b.func("walk", b.type({ValType::I32}, {}));
  Asm a;
  a.loop().local_get(0).i32_const(1).i32_sub().local_tee(0).br_if(0).end();
  b.set_body(f, std::move(a));
  Module m = decode(b.emit());
  Cfg g = build_cfg(m, 0);
  std::string dot = cfg_to_dot(m, g);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("back-edge") != std::string::npos);
  CHECK(dot.find("branch-not-taken") != std::string::npos);
}
