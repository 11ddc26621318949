#pragma once

// Symbolic models of the WASI preview-1 calls the engine understands.  The
// concrete behaviors (argument layouts, return codes, the virtual clock and
// the zeroed random source) mirror a plain in-order interpreter so concrete
// runs agree with reference executions byte for byte; `fd_read` is the one
// deliberate difference: it fills the destination buffers with fresh
// symbolic bytes, making stdin a symbolic input source.

#include <optional>
#include <string>
#include <vector>

#include "wasym/exec/host.hpp"
#include "wasym/wasm/module.hpp"

namespace wasym::exec {

inline bool is_wasi_module(const std::string& mod) {
  return mod == "wasi_snapshot_preview1" || mod == "wasi_unstable";
}

// Handles an imported WASI function.  Returns false when the name is not
// modeled.  On success `result` carries the return value (if the signature
// has one); the call may also end the path (proc_exit) or mark it infeasible.
inline bool wasi_call(const HostEnv& host, smt::Solver& solver, const wasm::Module& m,
                      sym::EngineState& es, u32 fidx, const std::vector<ExprRef>& args,
                      std::optional<ExprRef>& result) {
  const wasm::Import& im = m.func_import(fidx);
  if (!is_wasi_module(im.module)) return false;
  const std::string& n = im.name;

  auto conc = [&](const ExprRef& e) -> std::optional<u64> {
    return detail::concretize(solver, es, e);
  };
  auto infeasible = [&] {
    es.status = sym::Status::Trapped;  // TrapKind::None: pruned, not a finding
    es.trap_msg = "infeasible path at " + n;
    return true;
  };
  auto ok = [&] {
    result = sym::mk_const(32, 0);
    return true;
  };

  if (n == "proc_exit") {
    std::optional<u64> code = conc(args.at(0));
    if (!code) return infeasible();
    es.exit_code = sym::detail::to_signed(*code, 32);
    es.status = sym::Status::Returned;
    return true;
  }

  if (n == "fd_write") {
    std::optional<u64> fd = conc(args.at(0)), iovs = conc(args.at(1)),
                       cnt = conc(args.at(2)), outp = conc(args.at(3));
    if (!fd || !iovs || !cnt || !outp) return infeasible();
    u64 total = 0;
    for (u64 k = 0; k < *cnt; ++k) {
      std::optional<u64> buf = conc(es.memory.load(*iovs + 8 * k, 4));
      std::optional<u64> len = conc(es.memory.load(*iovs + 8 * k + 4, 4));
      if (!buf || !len) return infeasible();
      if (!es.memory.in_bounds(*buf, u32(*len)))
        return es.set_trap(sym::TrapKind::MemOutOfBounds, "fd_write buffer out of bounds"),
               true;
      std::vector<ExprRef>& sink = es.fd_out[u32(*fd)];
      for (u64 j = 0; j < *len; ++j) sink.push_back(es.memory.load(*buf + j, 1));
      total += *len;
    }
    detail::store_u(es.memory, *outp, 4, total);
    return ok();
  }

  if (n == "fd_read") {
    std::optional<u64> iovs = conc(args.at(1)), cnt = conc(args.at(2)),
                       outp = conc(args.at(3));
    if (!iovs || !cnt || !outp) return infeasible();
    u64 total = 0;
    for (u64 k = 0; k < *cnt; ++k) {
      std::optional<u64> buf = conc(es.memory.load(*iovs + 8 * k, 4));
      std::optional<u64> len = conc(es.memory.load(*iovs + 8 * k + 4, 4));
      if (!buf || !len) return infeasible();
      for (u64 j = 0; j < *len; ++j) es.memory.store(*buf + j, 1, es.fresh(8, "stdin"));
      total += *len;
    }
    detail::store_u(es.memory, *outp, 4, total);
    return ok();
  }

  if (n == "args_sizes_get" || n == "environ_sizes_get") {
    const std::vector<std::string>& v = (n[0] == 'a') ? host.argv : host.env;
    std::optional<u64> p0 = conc(args.at(0)), p1 = conc(args.at(1));
    if (!p0 || !p1) return infeasible();
    u64 bytes = 0;
    for (const std::string& s : v) bytes += s.size() + 1;
    detail::store_u(es.memory, *p0, 4, v.size());
    detail::store_u(es.memory, *p1, 4, bytes);
    return ok();
  }

  if (n == "args_get" || n == "environ_get") {
    const std::vector<std::string>& v = (n[0] == 'a') ? host.argv : host.env;
    std::optional<u64> ptrs = conc(args.at(0)), buf = conc(args.at(1));
    if (!ptrs || !buf) return infeasible();
    u64 p = *ptrs, b = *buf;
    for (const std::string& s : v) {
      detail::store_u(es.memory, p, 4, b);
      p += 4;
      detail::store_cstr(es.memory, b, s);
      b += s.size() + 1;
    }
    return ok();
  }

  if (n == "clock_time_get") {
    std::optional<u64> outp = conc(args.at(2));
    if (!outp) return infeasible();
    detail::store_u(es.memory, *outp, 8, host.clock_ns);
    return ok();
  }

  if (n == "random_get") {
    std::optional<u64> buf = conc(args.at(0)), len = conc(args.at(1));
    if (!buf || !len) return infeasible();
    for (u64 j = 0; j < *len; ++j) detail::store_u(es.memory, *buf + j, 1, 0);
    return ok();
  }

  if (n == "fd_close" || n == "fd_fdstat_get" || n == "fd_seek") {
    if (!m.type_of(fidx).results.empty()) result = sym::mk_const(32, 0);
    return true;
  }

  return false;
}

}  // namespace wasym::exec
