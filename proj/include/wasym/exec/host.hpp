#pragma once

// Host-side configuration for a run plus small helpers shared by the WASI
// layer, the library summaries and the executor.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wasym/smt/solver.hpp"
#include "wasym/sym/state.hpp"

namespace wasym::exec {

using sym::ExprRef;

struct HostEnv {
  std::vector<std::string> argv = {"module.wasm"};
  std::vector<std::string> env;
  u64 clock_ns = 1000000000;  // fixed virtual clock
  bool lib_summaries = true;  // model well-known library routines by name
  std::set<std::string> summary_names = {"memcpy", "memmove", "memset",  "strlen",
                                         "strcmp", "malloc",  "calloc",  "realloc",
                                         "free"};
  u32 indirect_enum_cap = 8;  // candidate targets for a symbolic call_indirect
  u32 scan_cap = 64;          // symbolic byte-scan horizon (strlen/strcmp)
};

namespace detail {

// Picks a concrete value for `e` consistent with the path, records it as a
// constraint and returns it; nullopt when the path itself is infeasible.
inline std::optional<u64> concretize(smt::Solver& solver, sym::EngineState& es,
                                     const ExprRef& e) {
  if (e->is_const()) return e->cval;
  std::vector<ExprRef> atoms = es.path;
  // tautology mentioning e so the model covers its symbols
  atoms.push_back(sym::mk_cmp(sym::Op::LeU, e,
                              sym::mk_const(e->width, sym::detail::mask_width(~0ull, e->width))));
  std::optional<smt::Model> model = solver.get_model(atoms);
  if (!model) return std::nullopt;
  u64 v = sym::eval_concrete(e, *model);
  es.assume(sym::mk_cmp(sym::Op::Eq, e, sym::mk_const(e->width, v)));
  return v;
}

// Concrete little-endian loads/stores over the symbolic memory.
inline void store_u(sym::LinearMemory& mem, u64 addr, u32 bytes, u64 v) {
  mem.store(addr, bytes, sym::mk_const(bytes * 8, v));
}

inline std::optional<u64> load_u(const sym::LinearMemory& mem, u64 addr, u32 bytes) {
  ExprRef e = mem.load(addr, bytes);
  if (e->is_const()) return e->cval;
  return std::nullopt;
}

// Writes a NUL-terminated string as constant bytes.
inline void store_cstr(sym::LinearMemory& mem, u64 addr, const std::string& s) {
  for (size_t k = 0; k < s.size(); ++k) store_u(mem, addr + k, 1, u8(s[k]));
  store_u(mem, addr + s.size(), 1, 0);
}

}  // namespace detail
}  // namespace wasym::exec
