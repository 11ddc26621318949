#pragma once

// Binary-format decoder. Produces a Module; rejects anything outside the
// supported instruction set with Errc::unsupported_opcode and structural
// problems with Errc::malformed_section / Errc::truncated / Errc::bad_magic.

#include <string>
#include <vector>

#include "wasym/wasm/module.hpp"
#include "wasym/wasm/reader.hpp"

namespace wasym::wasm {

namespace detail {

inline ValType read_valtype(Reader& r) {
  u8 b = r.byte();
  switch (b) {
    case 0x7f: return ValType::I32;
    case 0x7e: return ValType::I64;
    case 0x7d: return ValType::F32;
    case 0x7c: return ValType::F64;
    case 0x70: return ValType::Funcref;
    default: fail(Errc::malformed_section, "unknown value type 0x%02x", b);
  }
}

inline Limits read_limits(Reader& r) {
  Limits l;
  u8 flags = r.byte();
  if (flags > 1) fail(Errc::malformed_section, "unknown limits flags 0x%02x", flags);
  l.min = r.u32leb();
  if (flags == 1) {
    l.has_max = true;
    l.max = r.u32leb();
  }
  return l;
}

inline Instr read_instr(Reader& r) {
  Instr ins;
  u8 first = r.byte();
  u16 op = first;
  if (first == 0xfc) {
    u32 sub = r.u32leb();
    op = u16(0xfc00 | sub);
    switch (op) {
      case opc::I32TruncSatF32S: case opc::I32TruncSatF32U:
      case opc::I32TruncSatF64S: case opc::I32TruncSatF64U:
      case opc::I64TruncSatF32S: case opc::I64TruncSatF32U:
      case opc::I64TruncSatF64S: case opc::I64TruncSatF64U:
        break;
      case opc::MemoryCopy:
        ins.a = r.byte();
        ins.b = r.byte();
        break;
      case opc::MemoryFill:
        ins.a = r.byte();
        break;
      default:
        fail(Errc::unsupported_opcode, "unsupported 0xfc opcode %u", sub);
    }
    ins.op = op;
    return ins;
  }
  ins.op = op;
  switch (imm_kind(op)) {
    case ImmKind::None:
      // reject gaps in the one-byte opcode space we do not model
      if (!(op == opc::Unreachable || op == opc::Nop || op == opc::Else || op == opc::End ||
            op == opc::Return || op == opc::Drop || op == opc::Select || is_numeric(op)))
        fail(Errc::unsupported_opcode, "unsupported opcode 0x%02x", op);
      break;
    case ImmKind::BlockType: {
      u8 bt = r.peek();
      if (bt == 0x40 || bt == 0x7f || bt == 0x7e || bt == 0x7d || bt == 0x7c) {
        ins.a = r.byte();
      } else {
        fail(Errc::unsupported_opcode, "multi-value block type 0x%02x not supported", bt);
      }
      break;
    }
    case ImmKind::Depth:
    case ImmKind::Index:
      ins.a = r.u32leb();
      break;
    case ImmKind::BrTable: {
      u32 n = r.u32leb();
      ins.table.resize(n);
      for (u32 i = 0; i < n; ++i) ins.table[i] = r.u32leb();
      ins.a = r.u32leb();  // default target
      break;
    }
    case ImmKind::CallIndirect:
      ins.a = r.u32leb();  // type index
      ins.b = r.byte();    // table index (single-byte in MVP)
      break;
    case ImmKind::Memarg:
      ins.a = r.u32leb();  // align
      ins.b = r.u32leb();  // offset
      break;
    case ImmKind::MemIdx:
      ins.a = r.byte();
      break;
    case ImmKind::I32C:
      ins.a = u64(u32(i32(r.sleb(32))));
      break;
    case ImmKind::I64C:
      ins.a = u64(r.sleb(64));
      break;
    case ImmKind::F32C: {
      u8 buf[4];
      r.bytes(buf, 4);
      u32 bits = 0;
      for (int i = 3; i >= 0; --i) bits = (bits << 8) | buf[i];
      ins.a = bits;
      break;
    }
    case ImmKind::F64C: {
      u8 buf[8];
      r.bytes(buf, 8);
      u64 bits = 0;
      for (int i = 7; i >= 0; --i) bits = (bits << 8) | buf[i];
      ins.a = bits;
      break;
    }
  }
  return ins;
}

// Decodes instructions until the `end` that closes the body (depth tracking
// for nested blocks). The terminating `end` is kept in the output.
inline std::vector<Instr> read_expr(Reader& r) {
  std::vector<Instr> out;
  u32 depth = 1;
  while (depth > 0) {
    Instr ins = read_instr(r);
    if (ins.op == opc::Block || ins.op == opc::Loop || ins.op == opc::If) ++depth;
    else if (ins.op == opc::End) --depth;
    out.push_back(std::move(ins));
  }
  return out;
}

inline Instr read_init_expr(Reader& r) {
  auto e = read_expr(r);
  if (e.size() != 2)
    fail(Errc::malformed_section, "init expression must be a single %s instruction", "constant");
  u16 op = e[0].op;
  if (op != opc::I32Const && op != opc::I64Const && op != opc::F32Const &&
      op != opc::F64Const && op != opc::GlobalGet)
    fail(Errc::malformed_section, "unsupported init expression opcode 0x%x", op);
  return e[0];
}

inline void read_name_section(Reader r, Module& m) {
  while (!r.done()) {
    u8 id = r.byte();
    u32 size = r.u32leb();
    Reader sub = r.sub(size);
    switch (id) {
      case 0:  // module name
        m.names.module_name = sub.name();
        break;
      case 1: {  // function names
        u32 n = sub.u32leb();
        for (u32 i = 0; i < n; ++i) {
          u32 idx = sub.u32leb();
          m.names.funcs[idx] = sub.name();
        }
        break;
      }
      case 2: {  // local names
        u32 nf = sub.u32leb();
        for (u32 i = 0; i < nf; ++i) {
          u32 fidx = sub.u32leb();
          u32 nl = sub.u32leb();
          for (u32 j = 0; j < nl; ++j) {
            u32 lidx = sub.u32leb();
            m.names.locals[fidx][lidx] = sub.name();
          }
        }
        break;
      }
      case 7: {  // global names
        u32 n = sub.u32leb();
        for (u32 i = 0; i < n; ++i) {
          u32 idx = sub.u32leb();
          m.names.globals[idx] = sub.name();
        }
        break;
      }
      default:
        break;  // other name subsections are ignored
    }
  }
}

}  // namespace detail

inline Module decode(const std::vector<u8>& bytes) {
  using namespace detail;
  Module m;
  Reader r(bytes);
  u8 magic[4];
  r.bytes(magic, 4);
  if (magic[0] != 0x00 || magic[1] != 'a' || magic[2] != 's' || magic[3] != 'm')
    fail(Errc::bad_magic, "not a wasm binary (bad magic)");
  u8 version[4];
  r.bytes(version, 4);
  if (version[0] != 1 || version[1] != 0 || version[2] != 0 || version[3] != 0)
    fail(Errc::bad_magic, "unsupported wasm version");

  int last_section = 0;
  while (!r.done()) {
    u8 id = r.byte();
    u32 size = r.u32leb();
    Reader s = r.sub(size);
    if (id != 0) {
      if (id > 12) fail(Errc::malformed_section, "unknown section id %u", id);
      // data count (12) is ordered between element (9) and code (10)
      int order = id == 12 ? 9 : id;
      int last_order = last_section == 12 ? 9 : last_section;
      if (order <= last_order)
        fail(Errc::malformed_section, "section id %u out of order", id);
      last_section = id;
    }
    switch (id) {
      case 0: {  // custom
        std::string name = s.name();
        if (name == "name") {
          read_name_section(s.sub(s.remaining()), m);
        } else {
          m.customs.emplace_back(name, s.blob(s.remaining()));
        }
        break;
      }
      case 1: {  // type
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          u8 form = s.byte();
          if (form != 0x60) fail(Errc::malformed_section, "unknown type form 0x%02x", form);
          FuncType ft;
          u32 np = s.u32leb();
          for (u32 j = 0; j < np; ++j) ft.params.push_back(read_valtype(s));
          u32 nr = s.u32leb();
          if (nr > 1) fail(Errc::unsupported_opcode, "multi-value results not supported");
          for (u32 j = 0; j < nr; ++j) ft.results.push_back(read_valtype(s));
          m.types.push_back(std::move(ft));
        }
        break;
      }
      case 2: {  // import
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          Import im;
          im.module = s.name();
          im.name = s.name();
          u8 kind = s.byte();
          if (kind > 3) fail(Errc::malformed_section, "unknown import kind %u", kind);
          im.kind = ImportKind(kind);
          switch (im.kind) {
            case ImportKind::Func: im.type_idx = s.u32leb(); break;
            case ImportKind::Table:
              im.elem_type = s.byte();
              im.limits = read_limits(s);
              break;
            case ImportKind::Memory: im.limits = read_limits(s); break;
            case ImportKind::Global:
              im.gtype = read_valtype(s);
              im.gmut = s.byte() != 0;
              break;
          }
          m.imports.push_back(std::move(im));
        }
        break;
      }
      case 3: {  // function
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) m.func_types.push_back(s.u32leb());
        break;
      }
      case 4: {  // table
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          Module::Table t;
          t.elem_type = s.byte();
          t.limits = read_limits(s);
          m.tables.push_back(t);
        }
        break;
      }
      case 5: {  // memory
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) m.memories.push_back(read_limits(s));
        break;
      }
      case 6: {  // global
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          GlobalDef g;
          g.type = read_valtype(s);
          g.mut = s.byte() != 0;
          g.init = read_init_expr(s);
          m.globals.push_back(std::move(g));
        }
        break;
      }
      case 7: {  // export
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          Export e;
          e.name = s.name();
          u8 kind = s.byte();
          if (kind > 3) fail(Errc::malformed_section, "unknown export kind %u", kind);
          e.kind = ImportKind(kind);
          e.index = s.u32leb();
          m.exports.push_back(std::move(e));
        }
        break;
      }
      case 8:  // start
        m.start = s.u32leb();
        break;
      case 9: {  // element
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          u32 flags = s.u32leb();
          if (flags != 0)
            fail(Errc::unsupported_opcode, "element segment flags %u not supported", flags);
          ElemSeg seg;
          seg.table = 0;
          seg.offset = read_init_expr(s);
          u32 nf = s.u32leb();
          seg.funcs.resize(nf);
          for (u32 j = 0; j < nf; ++j) seg.funcs[j] = s.u32leb();
          m.elems.push_back(std::move(seg));
        }
        break;
      }
      case 10: {  // code
        u32 n = s.u32leb();
        if (n != m.func_types.size())
          fail(Errc::malformed_section, "code count %u does not match function count %zu", n,
               m.func_types.size());
        for (u32 i = 0; i < n; ++i) {
          u32 body_size = s.u32leb();
          Reader b = s.sub(body_size);
          FunctionBody fb;
          fb.type_idx = m.func_types[i];
          u32 nl = b.u32leb();
          for (u32 j = 0; j < nl; ++j) {
            u32 cnt = b.u32leb();
            ValType t = read_valtype(b);
            fb.local_decls.emplace_back(cnt, t);
          }
          fb.body = read_expr(b);
          if (!b.done())
            fail(Errc::malformed_section, "trailing bytes after function body %u", i);
          m.code.push_back(std::move(fb));
        }
        break;
      }
      case 11: {  // data
        u32 n = s.u32leb();
        for (u32 i = 0; i < n; ++i) {
          u32 flags = s.u32leb();
          if (flags != 0)
            fail(Errc::unsupported_opcode, "data segment flags %u not supported", flags);
          DataSeg seg;
          seg.mem = 0;
          seg.offset = read_init_expr(s);
          u32 len = s.u32leb();
          seg.bytes = s.blob(len);
          m.datas.push_back(std::move(seg));
        }
        break;
      }
      case 12:  // data count: implied by the data section, nothing to keep
        s.skip(s.remaining());
        break;
      default:
        fail(Errc::malformed_section, "unknown section id %u", id);
    }
    if (id != 0 && !s.done())
      fail(Errc::malformed_section, "section %u has %zu trailing bytes", id, s.remaining());
  }
  if (m.start)
    m.warnings.push_back(
        strf("module has a start section (function %u); it is not run implicitly", *m.start));
  return m;
}

}  // namespace wasym::wasm
