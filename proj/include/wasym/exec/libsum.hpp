#pragma once

// Name-based summaries for well-known library routines.  When enabled, calls
// to these functions are modeled directly against the symbolic memory rather
// than executed instruction by instruction; this keeps common byte-buffer
// idioms (copy, fill, scan, compare, allocate) cheap and keeps their results
// symbolic where the inputs are.
//
// Approximations, by design:
//  - lengths/pointers that are symbolic get concretized against the path
//    (the chosen value is recorded as a constraint);
//  - strlen/strcmp scan at most `scan_cap` bytes before giving up on finding
//    a definite terminator;
//  - realloc copies the *new* size's worth of bytes (allocation sizes are
//    not tracked), which over-reads but never loses live data.

#include <optional>
#include <string>
#include <vector>

#include "wasym/exec/host.hpp"
#include "wasym/wasm/module.hpp"

namespace wasym::exec {

namespace detail {

inline std::optional<u64> lib_alloc(sym::EngineState& es, const wasm::Module& m, u64 n) {
  u64 ptr = (es.arena_cursor + 15) & ~u64(15);
  u64 end = ptr + n;
  if (end > es.memory.byte_size()) {
    u64 need = (end - es.memory.byte_size() + sym::kWasmPageSize - 1) / sym::kWasmPageSize;
    u64 cap = 65536;
    if (!m.memories.empty() && m.memories[0].has_max) cap = m.memories[0].max;
    if (es.memory.pages() + need > cap) return std::nullopt;  // -> null pointer
    es.memory.grow(need);
  }
  es.arena_cursor = end;
  if (end > es.arena_end) es.arena_end = end;
  return ptr;
}

}  // namespace detail

// Models a call to `name` when it matches a known signature.  Returns false
// to fall back to the real body (or havoc, for imports).  On success,
// `result` is set when the routine returns a value.
inline bool try_summary(const HostEnv& host, smt::Solver& solver, const wasm::Module& m,
                        sym::EngineState& es, u32 fidx, const std::string& name,
                        const std::vector<ExprRef>& args, std::optional<ExprRef>& result) {
  if (!host.lib_summaries || !host.summary_names.count(name)) return false;
  const wasm::FuncType& ft = m.type_of(fidx);

  auto conc = [&](const ExprRef& e) -> std::optional<u64> {
    return detail::concretize(solver, es, e);
  };
  auto infeasible = [&] {
    es.status = sym::Status::Trapped;  // TrapKind::None: pruned, not a finding
    es.trap_msg = "infeasible path at " + name;
    return true;
  };

  if ((name == "memcpy" || name == "memmove") && args.size() == 3 &&
      ft.results.size() == 1) {
    std::optional<u64> d = conc(args[0]), s = conc(args[1]), n = conc(args[2]);
    if (!d || !s || !n) return infeasible();
    std::vector<ExprRef> bytes;
    bytes.reserve(size_t(*n));
    for (u64 j = 0; j < *n; ++j) bytes.push_back(es.memory.load(*s + j, 1));
    for (u64 j = 0; j < *n; ++j) es.memory.store(*d + j, 1, std::move(bytes[j]));
    result = sym::mk_const(32, *d);
    return true;
  }

  if (name == "memset" && args.size() == 3 && ft.results.size() == 1) {
    std::optional<u64> d = conc(args[0]), n = conc(args[2]);
    if (!d || !n) return infeasible();
    ExprRef byte = args[1]->width > 8 ? sym::mk_extract(args[1], 7, 0) : args[1];
    for (u64 j = 0; j < *n; ++j) es.memory.store(*d + j, 1, byte);
    result = sym::mk_const(32, *d);
    return true;
  }

  if (name == "strlen" && args.size() == 1 && ft.results.size() == 1) {
    std::optional<u64> s = conc(args[0]);
    if (!s) return infeasible();
    // walk to the first definitely-zero byte (or the scan horizon), then
    // fold earlier maybe-zero bytes into an if-then-else chain backwards
    std::vector<ExprRef> bytes;
    u32 end = host.scan_cap;
    for (u32 j = 0; j < host.scan_cap; ++j) {
      ExprRef b = es.memory.load(*s + j, 1);
      if (b->is_const() && b->cval == 0) {
        end = j;
        break;
      }
      bytes.push_back(std::move(b));
    }
    ExprRef len = sym::mk_const(32, end);
    for (u32 j = u32(bytes.size()); j-- > 0;)
      len = sym::mk_ite(sym::mk_is_zero(bytes[j]), sym::mk_const(32, j), std::move(len));
    result = std::move(len);
    return true;
  }

  if (name == "strcmp" && args.size() == 2 && ft.results.size() == 1) {
    std::optional<u64> a = conc(args[0]), b = conc(args[1]);
    if (!a || !b) return infeasible();
    ExprRef neg1 = sym::mk_const(32, u64(u32(-1))), one = sym::mk_const(32, 1),
            zero = sym::mk_const(32, 0);
    ExprRef acc = zero;  // beyond the horizon the strings are assumed equal
    for (u32 j = host.scan_cap; j-- > 0;) {
      ExprRef ca = es.memory.load(*a + j, 1);
      ExprRef cb = es.memory.load(*b + j, 1);
      ExprRef order = sym::mk_ite(sym::mk_cmp(sym::Op::LtU, ca, cb), neg1, one);
      ExprRef eq_here =
          sym::mk_ite(sym::mk_is_zero(ca), zero, std::move(acc));  // both ended
      acc = sym::mk_ite(sym::mk_cmp(sym::Op::Eq, ca, cb), std::move(eq_here),
                        std::move(order));
    }
    result = std::move(acc);
    return true;
  }

  if (name == "malloc" && args.size() == 1 && ft.results.size() == 1) {
    std::optional<u64> n = conc(args[0]);
    if (!n) return infeasible();
    std::optional<u64> p = detail::lib_alloc(es, m, *n);
    result = sym::mk_const(32, p ? *p : 0);
    return true;
  }

  if (name == "calloc" && args.size() == 2 && ft.results.size() == 1) {
    std::optional<u64> n = conc(args[0]), sz = conc(args[1]);
    if (!n || !sz) return infeasible();
    u64 total = *n * *sz;
    std::optional<u64> p = detail::lib_alloc(es, m, total);
    if (p)
      for (u64 j = 0; j < total; ++j) detail::store_u(es.memory, *p + j, 1, 0);
    result = sym::mk_const(32, p ? *p : 0);
    return true;
  }

  if (name == "realloc" && args.size() == 2 && ft.results.size() == 1) {
    std::optional<u64> p = conc(args[0]), n = conc(args[1]);
    if (!p || !n) return infeasible();
    std::optional<u64> np = detail::lib_alloc(es, m, *n);
    if (np && *p != 0) {
      std::vector<ExprRef> bytes;
      for (u64 j = 0; j < *n; ++j) bytes.push_back(es.memory.load(*p + j, 1));
      for (u64 j = 0; j < *n; ++j) es.memory.store(*np + j, 1, std::move(bytes[j]));
    }
    result = sym::mk_const(32, np ? *np : 0);
    return true;
  }

  if (name == "free" && args.size() == 1 && ft.results.empty()) return true;

  return false;
}

}  // namespace wasym::exec
