#pragma once

// Binary encoder and a small assembler/builder used by tests and the corpus
// generator. The encoder always emits canonical (shortest) LEB128s, so
// modules produced by the builder decode and re-encode byte-identically.

#include <string>
#include <utility>
#include <vector>

#include "wasym/wasm/module.hpp"
#include "wasym/wasm/reader.hpp"

namespace wasym::wasm {

inline void encode_instr(std::vector<u8>& out, const Instr& ins) {
  u16 op = ins.op;
  if (op >= 0xfc00) {
    out.push_back(0xfc);
    put_uleb(out, op & 0xff);
    if (op == opc::MemoryCopy) {
      out.push_back(u8(ins.a));
      out.push_back(u8(ins.b));
    } else if (op == opc::MemoryFill) {
      out.push_back(u8(ins.a));
    }
    return;
  }
  out.push_back(u8(op));
  switch (imm_kind(op)) {
    case ImmKind::None: break;
    case ImmKind::BlockType: out.push_back(u8(ins.a)); break;
    case ImmKind::Depth:
    case ImmKind::Index: put_uleb(out, ins.a); break;
    case ImmKind::BrTable:
      put_uleb(out, ins.table.size());
      for (u32 t : ins.table) put_uleb(out, t);
      put_uleb(out, ins.a);
      break;
    case ImmKind::CallIndirect:
      put_uleb(out, ins.a);
      out.push_back(u8(ins.b));
      break;
    case ImmKind::Memarg:
      put_uleb(out, ins.a);
      put_uleb(out, ins.b);
      break;
    case ImmKind::MemIdx: out.push_back(u8(ins.a)); break;
    case ImmKind::I32C: put_sleb(out, i64(i32(u32(ins.a)))); break;
    case ImmKind::I64C: put_sleb(out, i64(ins.a)); break;
    case ImmKind::F32C:
      for (int i = 0; i < 4; ++i) out.push_back(u8(ins.a >> (8 * i)));
      break;
    case ImmKind::F64C:
      for (int i = 0; i < 8; ++i) out.push_back(u8(ins.a >> (8 * i)));
      break;
  }
}

namespace detail {

inline void put_limits(std::vector<u8>& out, const Limits& l) {
  out.push_back(l.has_max ? 1 : 0);
  put_uleb(out, l.min);
  if (l.has_max) put_uleb(out, l.max);
}

inline void put_section(std::vector<u8>& out, u8 id, const std::vector<u8>& payload) {
  out.push_back(id);
  put_uleb(out, payload.size());
  put_bytes(out, payload);
}

inline std::vector<u8> encode_body(const FunctionBody& fb) {
  std::vector<u8> b;
  put_uleb(b, fb.local_decls.size());
  for (auto& [n, t] : fb.local_decls) {
    put_uleb(b, n);
    b.push_back(u8(t));
  }
  for (auto& ins : fb.body) encode_instr(b, ins);
  return b;
}

}  // namespace detail

inline std::vector<u8> encode_code_section_payload(const Module& m) {
  std::vector<u8> p;
  put_uleb(p, m.code.size());
  for (auto& fb : m.code) {
    auto body = detail::encode_body(fb);
    put_uleb(p, body.size());
    put_bytes(p, body);
  }
  return p;
}

inline std::vector<u8> encode(const Module& m) {
  using detail::put_limits;
  using detail::put_section;
  std::vector<u8> out = {0x00, 'a', 's', 'm', 1, 0, 0, 0};

  if (!m.types.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.types.size());
    for (auto& ft : m.types) {
      p.push_back(0x60);
      put_uleb(p, ft.params.size());
      for (auto t : ft.params) p.push_back(u8(t));
      put_uleb(p, ft.results.size());
      for (auto t : ft.results) p.push_back(u8(t));
    }
    put_section(out, 1, p);
  }
  if (!m.imports.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.imports.size());
    for (auto& im : m.imports) {
      put_name(p, im.module);
      put_name(p, im.name);
      p.push_back(u8(im.kind));
      switch (im.kind) {
        case ImportKind::Func: put_uleb(p, im.type_idx); break;
        case ImportKind::Table:
          p.push_back(im.elem_type);
          put_limits(p, im.limits);
          break;
        case ImportKind::Memory: put_limits(p, im.limits); break;
        case ImportKind::Global:
          p.push_back(u8(im.gtype));
          p.push_back(im.gmut ? 1 : 0);
          break;
      }
    }
    put_section(out, 2, p);
  }
  if (!m.func_types.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.func_types.size());
    for (u32 t : m.func_types) put_uleb(p, t);
    put_section(out, 3, p);
  }
  if (!m.tables.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.tables.size());
    for (auto& t : m.tables) {
      p.push_back(t.elem_type);
      put_limits(p, t.limits);
    }
    put_section(out, 4, p);
  }
  if (!m.memories.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.memories.size());
    for (auto& l : m.memories) put_limits(p, l);
    put_section(out, 5, p);
  }
  if (!m.globals.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.globals.size());
    for (auto& g : m.globals) {
      p.push_back(u8(g.type));
      p.push_back(g.mut ? 1 : 0);
      encode_instr(p, g.init);
      p.push_back(u8(opc::End));
    }
    put_section(out, 6, p);
  }
  if (!m.exports.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.exports.size());
    for (auto& e : m.exports) {
      put_name(p, e.name);
      p.push_back(u8(e.kind));
      put_uleb(p, e.index);
    }
    put_section(out, 7, p);
  }
  if (m.start) {
    std::vector<u8> p;
    put_uleb(p, *m.start);
    put_section(out, 8, p);
  }
  if (!m.elems.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.elems.size());
    for (auto& seg : m.elems) {
      put_uleb(p, 0);
      encode_instr(p, seg.offset);
      p.push_back(u8(opc::End));
      put_uleb(p, seg.funcs.size());
      for (u32 f : seg.funcs) put_uleb(p, f);
    }
    put_section(out, 9, p);
  }
  if (!m.code.empty()) put_section(out, 10, encode_code_section_payload(m));
  if (!m.datas.empty()) {
    std::vector<u8> p;
    put_uleb(p, m.datas.size());
    for (auto& seg : m.datas) {
      put_uleb(p, 0);
      encode_instr(p, seg.offset);
      p.push_back(u8(opc::End));
      put_uleb(p, seg.bytes.size());
      put_bytes(p, seg.bytes);
    }
    put_section(out, 11, p);
  }
  for (auto& [name, bytes] : m.customs) {
    std::vector<u8> p;
    put_name(p, name);
    put_bytes(p, bytes);
    put_section(out, 0, p);
  }
  // name section last
  const NameMap& nm = m.names;
  if (!nm.module_name.empty() || !nm.funcs.empty() || !nm.locals.empty() || !nm.globals.empty()) {
    std::vector<u8> p;
    put_name(p, "name");
    auto sub = [&](u8 id, const std::vector<u8>& body) {
      p.push_back(id);
      put_uleb(p, body.size());
      put_bytes(p, body);
    };
    if (!nm.module_name.empty()) {
      std::vector<u8> b;
      put_name(b, nm.module_name);
      sub(0, b);
    }
    if (!nm.funcs.empty()) {
      std::vector<u8> b;
      put_uleb(b, nm.funcs.size());
      for (auto& [i, n] : nm.funcs) {
        put_uleb(b, i);
        put_name(b, n);
      }
      sub(1, b);
    }
    if (!nm.locals.empty()) {
      std::vector<u8> b;
      put_uleb(b, nm.locals.size());
      for (auto& [f, names] : nm.locals) {
        put_uleb(b, f);
        put_uleb(b, names.size());
        for (auto& [l, n] : names) {
          put_uleb(b, l);
          put_name(b, n);
        }
      }
      sub(2, b);
    }
    if (!nm.globals.empty()) {
      std::vector<u8> b;
      put_uleb(b, nm.globals.size());
      for (auto& [i, n] : nm.globals) {
        put_uleb(b, i);
        put_name(b, n);
      }
      sub(7, b);
    }
    detail::put_section(out, 0, p);
  }
  return out;
}

// Returns the payload of the first section with the given id (past the id and
// size header), or an empty vector. Used by round-trip tests and dump tools.
inline std::vector<u8> section_payload(const std::vector<u8>& bytes, u8 want_id) {
  Reader r(bytes);
  r.skip(8);
  while (!r.done()) {
    u8 id = r.byte();
    u32 size = r.u32leb();
    Reader s = r.sub(size);
    if (id == want_id) return s.blob(s.remaining());
  }
  return {};
}

// --- instruction assembler ----------------------------------------------------

// Thin chainable helper for writing function bodies in tests/generators.
struct Asm {
  std::vector<Instr> ins;

  Asm& op(u16 o) {
    ins.push_back({o, 0, 0, {}});
    return *this;
  }
  Asm& op1(u16 o, u64 a) {
    ins.push_back({o, a, 0, {}});
    return *this;
  }
  Asm& op2(u16 o, u64 a, u64 b) {
    ins.push_back({o, a, b, {}});
    return *this;
  }

  Asm& i32_const(i32 v) { return op1(opc::I32Const, u64(u32(v))); }
  Asm& i64_const(i64 v) { return op1(opc::I64Const, u64(v)); }
  Asm& local_get(u32 i) { return op1(opc::LocalGet, i); }
  Asm& local_set(u32 i) { return op1(opc::LocalSet, i); }
  Asm& local_tee(u32 i) { return op1(opc::LocalTee, i); }
  Asm& global_get(u32 i) { return op1(opc::GlobalGet, i); }
  Asm& global_set(u32 i) { return op1(opc::GlobalSet, i); }
  Asm& block(u64 bt = 0x40) { return op1(opc::Block, bt); }
  Asm& loop(u64 bt = 0x40) { return op1(opc::Loop, bt); }
  Asm& if_(u64 bt = 0x40) { return op1(opc::If, bt); }
  Asm& else_() { return op(opc::Else); }
  Asm& end() { return op(opc::End); }
  Asm& br(u32 d) { return op1(opc::Br, d); }
  Asm& br_if(u32 d) { return op1(opc::BrIf, d); }
  Asm& br_table(std::vector<u32> targets, u32 def) {
    Instr i{opc::BrTable, def, 0, std::move(targets)};
    ins.push_back(std::move(i));
    return *this;
  }
  Asm& ret() { return op(opc::Return); }
  Asm& call(u32 f) { return op1(opc::Call, f); }
  Asm& call_indirect(u32 type_idx, u32 table = 0) { return op2(opc::CallIndirect, type_idx, table); }
  Asm& drop() { return op(opc::Drop); }
  Asm& select() { return op(opc::Select); }
  Asm& unreachable() { return op(opc::Unreachable); }

  Asm& i32_load(u32 offset = 0, u32 align = 2) { return op2(opc::I32Load, align, offset); }
  Asm& i32_load8_u(u32 offset = 0, u32 align = 0) { return op2(opc::I32Load8U, align, offset); }
  Asm& i32_load16_u(u32 offset = 0, u32 align = 1) { return op2(opc::I32Load16U, align, offset); }
  Asm& i32_store(u32 offset = 0, u32 align = 2) { return op2(opc::I32Store, align, offset); }
  Asm& i32_store8(u32 offset = 0, u32 align = 0) { return op2(opc::I32Store8, align, offset); }
  Asm& i64_load(u32 offset = 0, u32 align = 3) { return op2(opc::I64Load, align, offset); }
  Asm& i64_store(u32 offset = 0, u32 align = 3) { return op2(opc::I64Store, align, offset); }

  Asm& i32_add() { return op(opc::I32Add); }
  Asm& i32_sub() { return op(opc::I32Sub); }
  Asm& i32_mul() { return op(opc::I32Mul); }
  Asm& i32_div_s() { return op(opc::I32DivS); }
  Asm& i32_div_u() { return op(opc::I32DivU); }
  Asm& i32_rem_s() { return op(opc::I32RemS); }
  Asm& i32_rem_u() { return op(opc::I32RemU); }
  Asm& i32_and() { return op(opc::I32And); }
  Asm& i32_or() { return op(opc::I32Or); }
  Asm& i32_xor() { return op(opc::I32Xor); }
  Asm& i32_shl() { return op(opc::I32Shl); }
  Asm& i32_shr_s() { return op(opc::I32ShrS); }
  Asm& i32_shr_u() { return op(opc::I32ShrU); }
  Asm& i32_eqz() { return op(opc::I32Eqz); }
  Asm& i32_eq() { return op(opc::I32Eq); }
  Asm& i32_ne() { return op(opc::I32Ne); }
  Asm& i32_lt_s() { return op(opc::I32LtS); }
  Asm& i32_lt_u() { return op(opc::I32LtU); }
  Asm& i32_gt_s() { return op(opc::I32GtS); }
  Asm& i32_gt_u() { return op(opc::I32GtU); }
  Asm& i32_le_s() { return op(opc::I32LeS); }
  Asm& i32_ge_s() { return op(opc::I32GeS); }
  Asm& i32_ge_u() { return op(opc::I32GeU); }
  Asm& i64_add() { return op(opc::I64Add); }
  Asm& i64_sub() { return op(opc::I64Sub); }
  Asm& i64_mul() { return op(opc::I64Mul); }
  Asm& i64_eq() { return op(opc::I64Eq); }
  Asm& i32_wrap_i64() { return op(opc::I32WrapI64); }
  Asm& i64_extend_i32_u() { return op(opc::I64ExtendI32U); }
  Asm& i64_extend_i32_s() { return op(opc::I64ExtendI32S); }
};

// --- module builder -----------------------------------------------------------

// Declares functions up front (so forward calls have stable indices) and
// fills bodies afterwards. Assembles the name section from the names given.
class ModuleBuilder {
 public:
  u32 type(std::vector<ValType> params, std::vector<ValType> results) {
    FuncType ft{std::move(params), std::move(results)};
    for (u32 i = 0; i < m_.types.size(); ++i)
      if (m_.types[i] == ft) return i;
    m_.types.push_back(std::move(ft));
    return u32(m_.types.size() - 1);
  }

  u32 import_func(const std::string& module, const std::string& name, u32 type_idx) {
    if (!m_.code.empty() || !m_.func_types.empty())
      fail(Errc::bad_config, "imports must be declared before functions");
    Import im;
    im.module = module;
    im.name = name;
    im.kind = ImportKind::Func;
    im.type_idx = type_idx;
    m_.imports.push_back(std::move(im));
    u32 fidx = m_.num_imported_funcs() - 1;
    m_.names.funcs[fidx] = name;
    return fidx;
  }

  // Declares a function; params are named, extra locals are added later.
  u32 func(const std::string& name, u32 type_idx,
           const std::vector<std::string>& param_names = {}) {
    u32 fidx = m_.num_imported_funcs() + u32(m_.code.size());
    m_.func_types.push_back(type_idx);
    FunctionBody fb;
    fb.type_idx = type_idx;
    m_.code.push_back(std::move(fb));
    if (!name.empty()) m_.names.funcs[fidx] = name;
    for (u32 i = 0; i < param_names.size(); ++i)
      if (!param_names[i].empty()) m_.names.locals[fidx][i] = param_names[i];
    return fidx;
  }

  u32 local(u32 fidx, ValType t, const std::string& name = "") {
    FunctionBody& fb = body(fidx);
    u32 idx = u32(m_.types[fb.type_idx].params.size());
    for (auto& [n, _] : fb.local_decls) idx += n;
    if (!fb.local_decls.empty() && fb.local_decls.back().second == t)
      fb.local_decls.back().first++;
    else
      fb.local_decls.emplace_back(1, t);
    if (!name.empty()) m_.names.locals[fidx][idx] = name;
    return idx;
  }

  void set_body(u32 fidx, Asm a) {
    a.end();  // terminating end of the function body
    body(fidx).body = std::move(a.ins);
  }

  void export_func(const std::string& name, u32 fidx) {
    m_.exports.push_back({name, ImportKind::Func, fidx});
  }

  u32 memory(u32 min_pages, u32 max_pages = 0) {
    Limits l;
    l.min = min_pages;
    if (max_pages) {
      l.has_max = true;
      l.max = max_pages;
    }
    m_.memories.push_back(l);
    u32 idx = u32(m_.memories.size() - 1);
    return idx;
  }

  void export_memory(const std::string& name, u32 idx = 0) {
    m_.exports.push_back({name, ImportKind::Memory, idx});
  }

  u32 global(const std::string& name, ValType t, bool mut, i64 init) {
    GlobalDef g;
    g.type = t;
    g.mut = mut;
    g.init = t == ValType::I64 ? Instr{opc::I64Const, u64(init), 0, {}}
                               : Instr{opc::I32Const, u64(u32(i32(init))), 0, {}};
    m_.globals.push_back(std::move(g));
    u32 idx = m_.num_imported_globals() + u32(m_.globals.size() - 1);
    if (!name.empty()) m_.names.globals[idx] = name;
    return idx;
  }

  u32 funcref_table(const std::vector<u32>& funcs) {
    Module::Table t;
    t.limits.min = u32(funcs.size());
    t.limits.has_max = true;
    t.limits.max = u32(funcs.size());
    m_.tables.push_back(t);
    ElemSeg seg;
    seg.table = u32(m_.tables.size() - 1);
    seg.offset = Instr{opc::I32Const, 0, 0, {}};
    seg.funcs = funcs;
    m_.elems.push_back(std::move(seg));
    return seg.table;
  }

  void data(u32 offset, std::vector<u8> bytes) {
    DataSeg seg;
    seg.offset = Instr{opc::I32Const, offset, 0, {}};
    seg.bytes = std::move(bytes);
    m_.datas.push_back(std::move(seg));
  }

  Module& module() { return m_; }
  std::vector<u8> emit() const { return encode(m_); }

 private:
  FunctionBody& body(u32 fidx) {
    u32 n = m_.num_imported_funcs();
    if (fidx < n || fidx - n >= m_.code.size())
      fail(Errc::bad_index, "no defined function with index %u", fidx);
    return m_.code[fidx - n];
  }

  Module m_;
};

}  // namespace wasym::wasm
