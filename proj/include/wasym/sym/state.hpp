#pragma once

// The mutable engine state of one execution path: activation frames, the
// operand stack, globals, linear memory, and the path condition. States are
// value types; `fork` is a copy with one extra path constraint and a fresh
// lineage id (expression nodes are immutable and shared, so copies are
// independent without deep-cloning the DAG).

#include <map>
#include <string>
#include <vector>

#include "wasym/sym/expr.hpp"
#include "wasym/sym/memory.hpp"
#include "wasym/wasm/module.hpp"

namespace wasym::sym {

enum class Status : u8 { Running, Returned, Trapped, Halted };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::Returned: return "returned";
    case Status::Trapped: return "trapped";
    case Status::Halted: return "halted";
  }
  return "?";
}

enum class TrapKind : u8 {
  None,
  Unreachable,
  MemOutOfBounds,
  DivByZero,
  IntegerOverflow,  // i32.div_s INT_MIN / -1 and friends
  BadIndirectCall,
  StackOverflow,
  BadConversion,  // float-to-int of NaN / out-of-range
};

inline const char* trap_name(TrapKind k) {
  switch (k) {
    case TrapKind::None: return "none";
    case TrapKind::Unreachable: return "unreachable";
    case TrapKind::MemOutOfBounds: return "memory-out-of-bounds";
    case TrapKind::DivByZero: return "division-by-zero";
    case TrapKind::IntegerOverflow: return "integer-overflow";
    case TrapKind::BadIndirectCall: return "bad-indirect-call";
    case TrapKind::StackOverflow: return "stack-overflow";
    case TrapKind::BadConversion: return "bad-conversion";
  }
  return "?";
}

// One activation. The operand stack is shared across frames; entry_height
// marks where this frame's portion begins, so returns can assert the static
// stack discipline. ret_instr is the caller-body offset to resume at.
struct Frame {
  u32 func = 0;
  std::vector<ExprRef> locals;
  u32 ret_instr = 0;
  u32 ret_block = 0;  // caller block containing the call (context-switch `pre`)
  u32 entry_height = 0;
  std::vector<ExprRef> call_args;  // operands of the call, for post-call hooks
};

constexpr u32 kMaxFrames = 512;

struct EngineState {
  std::vector<Frame> frames;
  std::vector<ExprRef> stack;
  std::vector<ExprRef> globals;
  LinearMemory memory;
  std::vector<ExprRef> path;  // boolean constraints, oldest first
  Status status = Status::Running;
  TrapKind trap = TrapKind::None;
  std::string trap_msg;
  i64 exit_code = 0;
  std::map<u32, std::vector<ExprRef>> fd_out;  // per-fd byte log (8-bit exprs)
  u64 arena_cursor = 0;                        // bump allocator for malloc
  u64 arena_end = 0;
  u32 sym_counter = 0;  // fresh-symbol numbering, per path for determinism
  u64 lineage = 0;      // fork-tree node id
  u64 parent = 0;

  Frame& top() { return frames.back(); }
  const Frame& top() const { return frames.back(); }

  // Height of the current frame's portion of the operand stack.
  u32 frame_height() const { return u32(stack.size()) - top().entry_height; }

  void push(ExprRef v) { stack.push_back(std::move(v)); }

  ExprRef pop() {
    if (stack.size() <= top().entry_height)
      fail(Errc::bad_index, "operand stack underflow in %s", "execution");
    ExprRef v = std::move(stack.back());
    stack.pop_back();
    return v;
  }

  void assume(ExprRef cond) {
    if (cond->is_bool_const() && cond->cval == 1) return;  // no-op constraint
    path.push_back(std::move(cond));
  }

  void set_trap(TrapKind k, std::string msg) {
    status = Status::Trapped;
    trap = k;
    trap_msg = std::move(msg);
  }

  ExprRef fresh(u32 width, const char* prefix) {
    return mk_sym(width, strf("%s_%u", prefix, sym_counter++));
  }

  // Named fresh symbol without a counter suffix (entry parameters).
  static ExprRef named(u32 width, const std::string& name) { return mk_sym(width, name); }
};

// Deep, independent copy with `extra` appended to the path condition and a
// fresh lineage id supplied by the caller (the scheduler owns the counter).
inline EngineState fork(const EngineState& s, ExprRef extra, u64 new_lineage) {
  EngineState child = s;
  child.assume(std::move(extra));
  child.parent = s.lineage;
  child.lineage = new_lineage;
  return child;
}

inline u32 valtype_width(wasm::ValType t) {
  switch (t) {
    case wasm::ValType::I32: case wasm::ValType::F32: return 32;
    case wasm::ValType::I64: case wasm::ValType::F64: return 64;
    case wasm::ValType::Funcref: return 32;
  }
  return 32;
}

inline ExprRef zero_of(wasm::ValType t) { return mk_const(valtype_width(t), 0); }

// Initial state for an entry function: parameters become named symbols (or
// caller-supplied values), non-parameter locals are zero, globals take their
// initializers (imported globals are havocked), memory is built from the
// data segments with the malloc arena placed past them.
struct InitOptions {
  std::vector<ExprRef> args;  // optional concrete/symbolic entry arguments
  u64 arena_reserve = 1u << 20;
};

inline EngineState make_initial_state(const wasm::Module& m, u32 entry,
                                      const InitOptions& opt = {}) {
  EngineState es;

  u32 nig = m.num_imported_globals();
  for (u32 g = 0; g < nig; ++g)
    es.globals.push_back(mk_sym(32, m.names.global(g)));  // havoc: unknown import
  for (const wasm::GlobalDef& gd : m.globals) {
    using namespace wasm::opc;
    ExprRef v;
    switch (gd.init.op) {
      case I32Const: case F32Const: v = mk_const(32, gd.init.a); break;
      case I64Const: case F64Const: v = mk_const(64, gd.init.a); break;
      case GlobalGet:
        if (gd.init.a >= es.globals.size())
          fail(Errc::bad_index, "global initializer references global %llu",
               (unsigned long long)gd.init.a);
        v = es.globals[gd.init.a];
        break;
      default: fail(Errc::unsupported_opcode, "unsupported %s initializer", "global");
    }
    es.globals.push_back(std::move(v));
  }

  u64 pages = m.memories.empty() ? 0 : m.memories[0].min;
  es.memory = LinearMemory(pages);
  u64 data_end = 0;
  for (const wasm::DataSeg& seg : m.datas) {
    if (seg.offset.op != wasm::opc::I32Const)
      fail(Errc::unsupported_opcode, "non-constant %s segment offset", "data");
    u64 at = seg.offset.a;
    const std::vector<u8>& b = seg.bytes;
    // chunk into <=8-byte constant regions (little-endian)
    for (size_t i = 0; i < b.size();) {
      size_t n = std::min<size_t>(8, b.size() - i);
      u64 v = 0;
      for (size_t k = 0; k < n; ++k) v |= u64(b[i + k]) << (8 * k);
      es.memory.store(at + i, u32(n), mk_const(u32(n * 8), v));
      i += n;
    }
    data_end = std::max(data_end, at + b.size());
  }
  es.arena_cursor = (data_end + 4096 + 15) & ~u64(15);
  es.arena_end = es.arena_cursor + opt.arena_reserve;

  const wasm::FuncType& ft = m.type_of(entry);
  Frame f;
  f.func = entry;
  for (u32 p = 0; p < ft.params.size(); ++p) {
    if (p < opt.args.size() && opt.args[p]) {
      if (opt.args[p]->width != valtype_width(ft.params[p]))
        fail(Errc::bad_config, "entry argument %u width mismatch", p);
      f.locals.push_back(opt.args[p]);
    } else {
      f.locals.push_back(EngineState::named(valtype_width(ft.params[p]),
                                            m.names.local(entry, p)));
    }
  }
  if (!m.is_imported_func(entry))
    for (wasm::ValType t : m.body_of(entry).expand_locals())
      f.locals.push_back(zero_of(t));
  es.frames.push_back(std::move(f));
  return es;
}

}  // namespace wasym::sym
