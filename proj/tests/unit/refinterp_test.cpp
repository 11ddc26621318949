// Sanity checks for the concrete reference interpreter against hand-computed
// values, before it is trusted as a differential oracle elsewhere.

#include "catch2/catch_amalgamated.hpp"
#include "oracle/ref_interp.hpp"
#include "wasym/wasm/writer.hpp"

using namespace wasym;

namespace {

// fact(n) computed with a loop; returns n!
wasm::Module fact_module() {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32}, {wasm::ValType::I32});
  u32 f = b.func("fact", t, {"n"});
  b.local(f, wasm::ValType::I32, "acc");
  // acc = 1; loop { if n > 1 { acc *= n; n -= 1; br loop } }
  b.set_body(f, wasm::Asm()
                    .i32_const(1)
                    .local_set(1)
                    .loop()
                    .local_get(0)
                    .i32_const(1)
                    .i32_gt_s()
                    .if_()
                    .local_get(1)
                    .local_get(0)
                    .i32_mul()
                    .local_set(1)
                    .local_get(0)
                    .i32_const(1)
                    .i32_sub()
                    .local_set(0)
                    .br(1)
                    .end()
                    .end()
                    .local_get(1));
  b.export_func("fact", f);
  return b.module();
}

wasm::Module fib_module() {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32}, {wasm::ValType::I32});
  u32 f = b.func("fib", t, {"n"});
  // if n < 2 return n; return fib(n-1) + fib(n-2)
  b.set_body(f, wasm::Asm()
                    .local_get(0)
                    .i32_const(2)
                    .i32_lt_s()
                    .if_()
                    .local_get(0)
                    .ret()
                    .end()
                    .local_get(0)
                    .i32_const(1)
                    .i32_sub()
                    .call(f)
                    .local_get(0)
                    .i32_const(2)
                    .i32_sub()
                    .call(f)
                    .i32_add());
  b.export_func("fib", f);
  return b.module();
}

}  // namespace

TEST_CASE("loop arithmetic: factorial", "[refinterp]") {
  wasm::Module m = fact_module();
  refinterp::Interp it(m);
  CHECK(it.run("fact", {0}).results[0] == 1);
  CHECK(it.run("fact", {1}).results[0] == 1);
  CHECK(it.run("fact", {5}).results[0] == 120);
  CHECK(it.run("fact", {10}).results[0] == 3628800);
}

TEST_CASE("recursion: fibonacci", "[refinterp]") {
  wasm::Module m = fib_module();
  refinterp::Interp it(m);
  CHECK(it.run("fib", {10}).results[0] == 55);
  CHECK(it.run("fib", {15}).results[0] == 610);
}

TEST_CASE("division traps and wrapping arithmetic", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32, wasm::ValType::I32}, {wasm::ValType::I32});
  u32 f = b.func("div", t, {"a", "b"});
  b.set_body(f, wasm::Asm().local_get(0).local_get(1).i32_div_s());
  b.export_func("div", f);
  wasm::Module m = b.module();
  refinterp::Interp it(m);

  CHECK(it.run("div", {u64(u32(-7)), 2}).results[0] == u32(-3));  // trunc toward zero
  CHECK(it.run("div", {7, 0}).trapped);
  CHECK(it.run("div", {0x80000000u, u64(u32(-1))}).trapped);  // INT_MIN / -1
}

TEST_CASE("br_table dispatch", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32}, {wasm::ValType::I32});
  u32 f = b.func("pick", t, {"x"});
  // block block block (br_table 0 1) (default 2)
  //   case 0 -> 10, case 1 -> 20, default -> 30
  b.set_body(f, wasm::Asm()
                    .block()
                    .block()
                    .block()
                    .local_get(0)
                    .br_table({0, 1}, 2)
                    .end()
                    .i32_const(10)
                    .ret()
                    .end()
                    .i32_const(20)
                    .ret()
                    .end()
                    .i32_const(30));
  b.export_func("pick", f);
  wasm::Module m = b.module();
  refinterp::Interp it(m);
  CHECK(it.run("pick", {0}).results[0] == 10);
  CHECK(it.run("pick", {1}).results[0] == 20);
  CHECK(it.run("pick", {2}).results[0] == 30);
  CHECK(it.run("pick", {250}).results[0] == 30);
}

TEST_CASE("memory load/store and bounds trap", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32, wasm::ValType::I32}, {wasm::ValType::I32});
  u32 f = b.func("rw", t, {"addr", "v"});
  // mem[addr] = v; return mem[addr] + mem8[addr]
  b.set_body(f, wasm::Asm()
                    .local_get(0)
                    .local_get(1)
                    .i32_store(0, 0)
                    .local_get(0)
                    .i32_load(0, 0)
                    .local_get(0)
                    .i32_load8_u(0, 0)
                    .i32_add());
  b.export_func("rw", f);
  b.memory(1, 1);
  wasm::Module m = b.module();
  refinterp::Interp it(m);
  CHECK(it.run("rw", {64, 0x01020304}).results[0] == 0x01020304 + 0x04);
  CHECK(it.run("rw", {65535, 1}).trapped);  // 4-byte access crosses the page end
}

TEST_CASE("call_indirect via table", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32}, {wasm::ValType::I32});
  u32 dbl = b.func("dbl", t, {"x"});
  b.set_body(dbl, wasm::Asm().local_get(0).local_get(0).i32_add());
  u32 sq = b.func("sq", t, {"x"});
  b.set_body(sq, wasm::Asm().local_get(0).local_get(0).i32_mul());
  u32 disp = b.func("disp", b.type({wasm::ValType::I32, wasm::ValType::I32}, {wasm::ValType::I32}),
                    {"which", "x"});
  b.set_body(disp, wasm::Asm().local_get(1).local_get(0).call_indirect(t, 0));
  b.export_func("disp", disp);
  b.funcref_table({dbl, sq});
  wasm::Module m = b.module();
  refinterp::Interp it(m);
  CHECK(it.run("disp", {0, 21}).results[0] == 42);
  CHECK(it.run("disp", {1, 9}).results[0] == 81);
  CHECK(it.run("disp", {7, 9}).trapped);  // out of table bounds
}

TEST_CASE("fd_write captures stdout and proc_exit sets the code", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 tw = b.type({wasm::ValType::I32, wasm::ValType::I32, wasm::ValType::I32, wasm::ValType::I32},
                  {wasm::ValType::I32});
  u32 tx = b.type({wasm::ValType::I32}, {});
  u32 fw = b.import_func("wasi_snapshot_preview1", "fd_write", tw);
  u32 px = b.import_func("wasi_snapshot_preview1", "proc_exit", tx);
  u32 f = b.func("_start", b.type({}, {}), {});
  // iovec at 0: {buf=16, len=3}; "hi\n" at 16; write; exit(7)
  b.set_body(f, wasm::Asm()
                    .i32_const(0).i32_const(16).i32_store(0, 0)
                    .i32_const(4).i32_const(3).i32_store(0, 0)
                    .i32_const(1).i32_const(0).i32_const(1).i32_const(12)
                    .call(fw)
                    .drop()
                    .i32_const(7)
                    .call(px));
  b.export_func("_start", f);
  b.memory(1, 1);
  b.data(16, {'h', 'i', '\n'});
  wasm::Module m = b.module();
  refinterp::Interp it(m);
  refinterp::Result r = it.run("_start");
  CHECK(r.exited);
  CHECK(r.exit_code == 7);
  CHECK(r.fd1 == "hi\n");
}

TEST_CASE("f64 arithmetic and conversions", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::F64, wasm::ValType::F64}, {wasm::ValType::I32});
  u32 f = b.func("hyp", t, {"a", "b"});
  // i32.trunc_f64_s(sqrt(a*a + b*b))
  b.set_body(f, wasm::Asm()
                    .local_get(0).local_get(0).op(wasm::opc::F64Mul)
                    .local_get(1).local_get(1).op(wasm::opc::F64Mul)
                    .op(wasm::opc::F64Add)
                    .op(wasm::opc::F64Sqrt)
                    .op(wasm::opc::I32TruncF64S));
  b.export_func("hyp", f);
  wasm::Module m = b.module();
  refinterp::Interp it(m);
  auto d = [](double x) { return std::bit_cast<u64>(x); };
  CHECK(it.run("hyp", {d(3.0), d(4.0)}).results[0] == 5);
  CHECK(it.run("hyp", {d(5.0), d(12.0)}).results[0] == 13);
}

TEST_CASE("sign extension operators", "[refinterp]") {
  wasm::ModuleBuilder b;
  u32 t = b.type({wasm::ValType::I32}, {wasm::ValType::I32});
  u32 f = b.func("ext8", t, {"x"});
  b.set_body(f, wasm::Asm().local_get(0).op(wasm::opc::I32Extend8S));
  b.export_func("ext8", f);
  wasm::Module m = b.module();
  refinterp::Interp it(m);
  CHECK(it.run("ext8", {0x7f}).results[0] == 0x7f);
  CHECK(it.run("ext8", {0x80}).results[0] == u32(-128));
  CHECK(it.run("ext8", {0x1ff}).results[0] == u32(-1));
}
