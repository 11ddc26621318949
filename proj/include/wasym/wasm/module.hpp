#pragma once

// In-memory module representation produced by the decoder and consumed by the
// control-flow and execution layers. Function indices follow the module index
// space: imported functions first, then defined functions.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wasym/wasm/instr.hpp"

namespace wasym::wasm {

struct FuncType {
  std::vector<ValType> params;
  std::vector<ValType> results;
  bool operator==(const FuncType& o) const { return params == o.params && results == o.results; }
};

enum class ImportKind : u8 { Func = 0, Table = 1, Memory = 2, Global = 3 };

struct Limits {
  u32 min = 0;
  u32 max = 0;
  bool has_max = false;
};

struct Import {
  std::string module;
  std::string name;
  ImportKind kind = ImportKind::Func;
  u32 type_idx = 0;           // Func
  Limits limits;              // Table / Memory
  u8 elem_type = 0x70;        // Table
  ValType gtype = ValType::I32;  // Global
  bool gmut = false;          // Global
};

struct GlobalDef {
  ValType type = ValType::I32;
  bool mut = false;
  Instr init;  // i32.const / i64.const / f32.const / f64.const / global.get
};

struct Export {
  std::string name;
  ImportKind kind = ImportKind::Func;
  u32 index = 0;
};

struct ElemSeg {
  u32 table = 0;
  Instr offset;
  std::vector<u32> funcs;
};

struct DataSeg {
  u32 mem = 0;
  Instr offset;
  std::vector<u8> bytes;
};

struct FunctionBody {
  u32 type_idx = 0;
  std::vector<std::pair<u32, ValType>> local_decls;  // run-length (count, type), as encoded
  std::vector<Instr> body;                           // flat, includes the terminating `end`

  std::vector<ValType> expand_locals() const {
    std::vector<ValType> out;
    for (auto& [n, t] : local_decls) out.insert(out.end(), n, t);
    return out;
  }
};

// Debug-name lookup with deterministic fallbacks when the binary carries no
// (or partial) name section.
struct NameMap {
  std::string module_name;
  std::map<u32, std::string> funcs;
  std::map<u32, std::map<u32, std::string>> locals;  // func index -> local index -> name
  std::map<u32, std::string> globals;

  std::string func(u32 i) const {
    auto it = funcs.find(i);
    return it != funcs.end() ? it->second : strf("func#%u", i);
  }
  std::string local(u32 f, u32 i) const {
    auto fit = locals.find(f);
    if (fit != locals.end()) {
      auto it = fit->second.find(i);
      if (it != fit->second.end()) return it->second;
    }
    return strf("local#%u", i);
  }
  std::string global(u32 i) const {
    auto it = globals.find(i);
    return it != globals.end() ? it->second : strf("global#%u", i);
  }
  bool has_func(u32 i) const { return funcs.count(i) != 0; }
};

struct Module {
  std::vector<FuncType> types;
  std::vector<Import> imports;
  std::vector<u32> func_types;  // type index per defined function
  struct Table {
    u8 elem_type = 0x70;
    Limits limits;
  };
  std::vector<Table> tables;
  std::vector<Limits> memories;
  std::vector<GlobalDef> globals;
  std::vector<Export> exports;
  std::optional<u32> start;
  std::vector<ElemSeg> elems;
  std::vector<DataSeg> datas;
  std::vector<FunctionBody> code;
  NameMap names;
  std::vector<std::pair<std::string, std::vector<u8>>> customs;  // non-name custom sections
  std::vector<std::string> warnings;

  u32 num_imported_funcs() const {
    u32 n = 0;
    for (auto& im : imports)
      if (im.kind == ImportKind::Func) ++n;
    return n;
  }
  u32 num_imported_globals() const {
    u32 n = 0;
    for (auto& im : imports)
      if (im.kind == ImportKind::Global) ++n;
    return n;
  }
  u32 func_count() const { return num_imported_funcs() + u32(code.size()); }

  bool is_imported_func(u32 fidx) const { return fidx < num_imported_funcs(); }

  const Import& func_import(u32 fidx) const {
    u32 n = 0;
    for (auto& im : imports) {
      if (im.kind != ImportKind::Func) continue;
      if (n == fidx) return im;
      ++n;
    }
    fail(Errc::bad_index, "imported function %u out of range", fidx);
  }

  u32 type_index_of(u32 fidx) const {
    if (is_imported_func(fidx)) return func_import(fidx).type_idx;
    u32 d = fidx - num_imported_funcs();
    if (d >= code.size()) fail(Errc::bad_index, "function index %u out of range", fidx);
    return func_types[d];
  }

  const FuncType& type_of(u32 fidx) const {
    u32 t = type_index_of(fidx);
    if (t >= types.size()) fail(Errc::bad_index, "type index %u out of range", t);
    return types[t];
  }

  const FunctionBody& body_of(u32 fidx) const {
    if (is_imported_func(fidx)) fail(Errc::bad_index, "function %u is imported", fidx);
    return code[fidx - num_imported_funcs()];
  }

  std::optional<u32> find_export(const std::string& name, ImportKind kind) const {
    for (auto& e : exports)
      if (e.kind == kind && e.name == name) return e.index;
    return std::nullopt;
  }

  // Looks a function up by its debug name or export name.
  std::optional<u32> find_func_by_name(const std::string& name) const {
    for (u32 i = 0; i < func_count(); ++i)
      if (names.func(i) == name) return i;
    return find_export(name, ImportKind::Func);
  }

  // Result arity of a block type immediate (0x40 = empty, else a valtype).
  static u32 blocktype_arity(u64 bt) { return bt == 0x40 ? 0 : 1; }
};

}  // namespace wasym::wasm
