#include <catch2/catch_amalgamated.hpp>

#include "oracle/byte_memory.hpp"
#include "wasym/sym/memory.hpp"

using namespace wasym;
using namespace wasym::sym;

namespace {

bool contains_op(const ExprRef& e, Op op) {
  if (e->op == op) return true;
  for (auto& k : e->kids)
    if (contains_op(k, op)) return true;
  return false;
}

}  // namespace

TEST_CASE("symbolic-address load builds the documented ite chain", "[memory]") {
  LinearMemory mem(1);
  mem.store(0, 5, mk_sym(40, "v"));
  auto ptr = mk_sym(32, "ptr_a");
  auto loaded = mem.load_symbolic(ptr, 4);
  CHECK(to_string(loaded) == "ite(ptr_a = 0, v[0:4], ite(ptr_a = 1, v[1:5], invalid))");

  // same load at each concrete position matches direct evaluation
  std::map<std::string, u64> env{{"v", 0x1234567890ull}, {"ptr_a", 0}};
  CHECK(eval_concrete(loaded, env) == 0x34567890u);
  env["ptr_a"] = 1;
  CHECK(eval_concrete(loaded, env) == 0x12345678u);
}

TEST_CASE("concrete store/load differential against byte oracle", "[memory]") {
  LinearMemory mem(1);
  oracle::ByteMemory ref(256);
  SplitMix64 rng(0x5eed);
  const u32 widths[] = {1, 2, 4, 8};
  for (int i = 0; i < 1000; i++) {
    u32 w = widths[rng.below(4)];
    u64 addr = rng.below(256 - w);
    if (rng.below(2)) {
      u64 val = rng.next();
      mem.store(addr, w, mk_const(w * 8, val));
      ref.store(addr, w, val);
    } else {
      auto e = mem.load(addr, w);
      REQUIRE(e->is_const());
      CHECK(e->cval == ref.load(addr, w));
    }
  }
  // final sweep: every byte agrees
  for (u64 a = 0; a < 256; a++) CHECK(mem.load(a, 1)->cval == ref.load(a, 1));
}

TEST_CASE("loads stitch across regions and zero-fill gaps", "[memory]") {
  LinearMemory mem(1);
  mem.store(0, 2, mk_sym(16, "ab"));
  mem.store(2, 2, mk_sym(16, "cd"));
  auto e = mem.load(1, 2);  // high byte of ab, low byte of cd
  REQUIRE(e->op == Op::Concat);
  std::map<std::string, u64> env{{"ab", 0x2211}, {"cd", 0x4433}};
  CHECK(eval_concrete(e, env) == 0x3322);

  // gap between regions reads as zero
  LinearMemory gap(1);
  gap.store(0, 2, mk_const(16, 0xabcd));
  gap.store(6, 1, mk_const(8, 0xff));
  CHECK(gap.load(0, 4)->cval == 0xabcd);
  CHECK(gap.load(0, 8)->cval == 0x00ff00000000abcdull);
}

TEST_CASE("loads from concretely-written memory are ite-free", "[memory]") {
  LinearMemory mem(1);
  SplitMix64 rng(99);
  for (int i = 0; i < 200; i++) {
    u32 w = 1 + static_cast<u32>(rng.below(8));
    mem.store(rng.below(120), w, mk_const(w * 8, rng.next()));
  }
  // overlapping concrete stores never introduce ite or symbols
  for (u64 a = 0; a + 8 <= 128; a += 3) {
    auto e = mem.load(a, 8);
    CHECK(!contains_op(e, Op::Ite));
    CHECK(!contains_op(e, Op::Sym));
  }
}

TEST_CASE("symbolic store rewrites the span byte-wise", "[memory]") {
  LinearMemory mem(1);
  mem.store(0, 4, mk_const(32, 0xddccbbaa));
  auto p = mk_sym(32, "p");
  mem.store_symbolic(p, 2, mk_const(16, 0xffee));

  // For every feasible concrete position, the resulting bytes must equal the
  // oracle's view of "store 0xffee at p".
  for (u64 pos = 0; pos <= 2; pos++) {
    oracle::ByteMemory ref(8);
    ref.store(0, 4, 0xddccbbaa);
    ref.store(pos, 2, 0xffee);
    std::map<std::string, u64> env{{"p", pos}};
    for (u64 a = 0; a < 4; a++)
      CHECK(eval_concrete(mem.load(a, 1), env) == ref.load(a, 1));
  }
}

TEST_CASE("enumeration domain respects the candidate cap", "[memory]") {
  LinearMemory mem(1);
  mem.store(0, 2, mk_const(16, 1));
  mem.store(400, 2, mk_const(16, 2));  // span of 402 bytes, > 256 candidates
  CHECK_THROWS_AS(mem.load_symbolic(mk_sym(32, "p"), 2), Error);
  try {
    mem.load_symbolic(mk_sym(32, "p"), 2);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::concretization_overflow);
  }
}

TEST_CASE("store splits overlapped regions exactly", "[memory]") {
  LinearMemory mem(1);
  mem.store(0, 8, mk_sym(64, "w"));
  mem.store(3, 2, mk_const(16, 0xbeef));
  std::map<std::string, u64> env{{"w", 0x8877665544332211ull}};
  CHECK(eval_concrete(mem.load(0, 8), env) == 0x887766beef332211ull);
  CHECK(mem.regions().size() == 3);
}
