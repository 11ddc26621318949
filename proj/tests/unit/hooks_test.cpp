// Script hook runtime: expression semantics, reserved-slot assignment
// (prior/cons/halt), operand references, variable scoping and scoring
// previews.  Expected values are computed by hand next to each assertion.

#include <string>
#include <variant>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "test_paths.hpp"
#include "wasym/exec/hooks.hpp"
#include "wasym/script/parser.hpp"
#include "wasym/wasm/decoder.hpp"
#include "wasym/wasm/writer.hpp"

using namespace wasym;
using namespace wasym::exec;
using sym::ExprRef;
using sym::Op;

namespace {

std::string solver_cmd() {
  if (const char* e = std::getenv("WASYM_SOLVER"); e && *e) return e;
  return WASYM_SOLVER_CMD;
}

constexpr u32 kExt = 0, kMain = 1;

// main(x, y): locals loopcount:i32, big:i64
//   0 local.get x   1 call ext   2 drop   3 local.get x   4 end
wasm::Module make_module() {
  wasm::ModuleBuilder b;
  u32 t_unary = b.type({wasm::ValType::I32}, {wasm::ValType::I32});
  u32 t_bin = b.type({wasm::ValType::I32, wasm::ValType::I32}, {wasm::ValType::I32});
  REQUIRE(b.import_func("env", "ext", t_unary) == kExt);
  u32 mn = b.func("main", t_bin, {"x", "y"});
  REQUIRE(mn == kMain);
  b.local(mn, wasm::ValType::I32, "loopcount");
  b.local(mn, wasm::ValType::I64, "big");
  b.global("counter", wasm::ValType::I32, true, 5);
  b.memory(1);
  b.set_body(mn, wasm::Asm().local_get(0).call(kExt).drop().local_get(0));
  return wasm::decode(b.emit());
}

struct Fix {
  wasm::Module m = make_module();
  script::BoundScript bs;
  smt::Solver solver{solver_cmd()};
  std::unique_ptr<HookRuntime> rt;
  sym::EngineState es;
  VarsContext vars;
  PilotVars pv;

  explicit Fix(const std::string& runtime_script = "p { CSUM := 2; }") {
    bs = script::bind(script::parse_script(runtime_script), m,
                      script::compute_all_labels(m));
    rt = std::make_unique<HookRuntime>(&bs, &m, &solver);
    es = sym::make_initial_state(m, kMain, {});
    rt->init_pilot_vars(es, vars, pv);
  }

  // Parses `stmts` as a behave body and executes it with the given timing.
  // A call locator admits $ operands; pre/post bodies get the mandatory
  // trailing cons assignment (trivially true, so it has no side effects).
  void run(const std::string& stmts, script::Timing timing = script::Timing::Plain,
           const HookRuntime::Site* site = nullptr) {
    std::string prefix = timing == script::Timing::Pre    ? "pre "
                         : timing == script::Timing::Post ? "post "
                                                          : "";
    std::string body = stmts;
    if (timing != script::Timing::Plain) body += " cons = true;";
    script::AesScript sc =
        script::parse_script("q { " + prefix + "call(ext) { " + body + " } }");
    const script::Behave* b = nullptr;
    for (const script::Advice& a : sc.pilots[0].advices)
      if (const script::Behave* bb = std::get_if<script::Behave>(&a.node)) b = bb;
    REQUIRE(b != nullptr);
    HookRuntime::Evaluator ev(*rt, es, vars, pv, 0, timing, site, false);
    for (const script::StmtPtr& s : b->body) ev.exec(*s);
  }

  ScriptValue eval(const std::string& expr, script::Timing timing = script::Timing::Plain,
                   const HookRuntime::Site* site = nullptr) {
    run("r_ = " + expr + ";", timing, site);
    ScriptValue v = vars.vars.at("r_");
    vars.vars.erase("r_");
    return v;
  }

  ExprRef local(u32 idx) { return es.top().locals[idx]; }
  void set_local(u32 idx, ExprRef v) { es.top().locals[idx] = std::move(v); }
};

i64 as_int(const ScriptValue& v) {
  REQUIRE(v.kind == ScriptValue::Kind::Int);
  return v.i;
}
bool as_bool(const ScriptValue& v) {
  REQUIRE(v.kind == ScriptValue::Kind::Bool);
  return v.b;
}
ExprRef as_sym(const ScriptValue& v) {
  REQUIRE(v.kind == ScriptValue::Kind::Sym);
  return v.e;
}

}  // namespace

TEST_CASE("concrete expression evaluation follows C-like integer semantics") {
  Fix f;
  CHECK(as_int(f.eval("2 + 3 * 4")) == 14);
  CHECK(as_int(f.eval("(0 - 7) / 2")) == -3);   // truncating division
  CHECK(as_int(f.eval("7 % (0 - 2)")) == 1);    // sign follows the dividend
  CHECK(as_int(f.eval("(0 - 7) % 2")) == -1);
  CHECK(as_bool(f.eval("3 < 5")));
  CHECK_FALSE(as_bool(f.eval("3 >= 5")));
  CHECK(as_bool(f.eval("1 and 2")));
  CHECK_FALSE(as_bool(f.eval("1 and 0")));
  CHECK(as_bool(f.eval("0 or 5")));
  CHECK(as_bool(f.eval("not 0")));
  CHECK_FALSE(as_bool(f.eval("not 3")));
  CHECK(as_int(f.eval("abs(0 - 5)")) == 5);
  CHECK(as_int(f.eval("abs(5)")) == 5);
  CHECK(as_bool(f.eval("\"aa\" == \"aa\"")));
  CHECK(as_bool(f.eval("\"aa\" != \"ab\"")));

  ScriptValue fl = f.eval("1.5 * 2");
  REQUIRE(fl.kind == ScriptValue::Kind::Float);
  CHECK(fl.f == 3.0);

  CHECK_THROWS_AS(f.eval("1 / 0"), Error);
  CHECK_THROWS_AS(f.eval("1 % 0"), Error);
  CHECK_THROWS_AS(f.eval("HIGHER + 1"), Error);
  CHECK_THROWS_AS(f.eval("\"a\" < \"b\""), Error);
}

TEST_CASE("while statements iterate on concrete conditions and cap runaway loops") {
  Fix f;
  f.run("i = 0; while i < 5 do i = i + 1;");
  CHECK(as_int(f.vars.vars.at("i")) == 5);
  f.run("k = 0; while k < 3 do k = k + 2;");
  CHECK(as_int(f.vars.vars.at("k")) == 4);  // condition re-evaluated per pass

  bool capped = false;
  try {
    f.run("while 1 do t = 1;");
  } catch (const Error& e) {
    capped = e.code() == Errc::script_while_cap;
  }
  CHECK(capped);
}

TEST_CASE("program variables resolve through frame locals then globals") {
  Fix f;
  CHECK(as_int(f.eval("loopcount")) == 0);       // zero-initialized local
  CHECK(as_int(f.eval("counter")) == 5);         // global initializer
  ExprRef x = as_sym(f.eval("x"));               // parameter stays symbolic
  CHECK(x->op == Op::Sym);
  CHECK(x->name == "x");

  bool unknown = false;
  try {
    f.eval("no_such_var");
  } catch (const Error& e) {
    unknown = e.code() == Errc::script_unknown_identifier;
  }
  CHECK(unknown);

  // interval-local variables shadow program variables
  f.run("loopcount = 41;");
  CHECK(as_int(f.eval("loopcount")) == 41);
  // ... without touching the actual frame slot
  CHECK(f.local(2)->cval == 0);
}

TEST_CASE("pilot-declared variables persist and write through") {
  Fix f("p { CSUM := 2; LEN := CSUM + 1; }");
  REQUIRE(f.pv.size() == 1);
  CHECK(as_int(f.pv[0].at("CSUM")) == 2);
  CHECK(as_int(f.pv[0].at("LEN")) == 3);  // later initializers see earlier ones

  f.run("CSUM = CSUM + 10;");
  CHECK(as_int(f.pv[0].at("CSUM")) == 12);       // durable scope updated
  CHECK(f.vars.vars.count("CSUM") == 0);         // not interval-local

  f.run("tmp = 4;");
  CHECK(as_int(f.vars.vars.at("tmp")) == 4);     // undeclared -> interval-local
  CHECK(f.pv[0].count("tmp") == 0);

  // interval-local entries shadow the pilot scope on reads
  f.vars.vars["CSUM"] = ScriptValue::of_int(99);
  CHECK(as_int(f.eval("CSUM")) == 99);
}

TEST_CASE("operand references respect timing") {
  Fix f;
  std::vector<ExprRef> ops = {sym::mk_const(32, 7), f.local(0)};
  ExprRef result = sym::mk_const(32, 9);
  HookRuntime::Site site{kMain, 1, &ops, &result};

  CHECK(as_int(f.eval("$0", script::Timing::Plain, &site)) == 7);
  CHECK(as_sym(f.eval("$1", script::Timing::Plain, &site))->name == "x");
  CHECK(as_int(f.eval("$0", script::Timing::Post, &site)) == 9);   // result
  CHECK(as_int(f.eval("$1", script::Timing::Post, &site)) == 7);   // first operand
  CHECK(as_sym(f.eval("$2", script::Timing::Post, &site))->name == "x");

  bool oob = false;
  try {
    f.eval("$2", script::Timing::Plain, &site);
  } catch (const Error& e) {
    oob = e.code() == Errc::script_operand_outside_call;
  }
  CHECK(oob);

  bool nosite = false;
  try {
    f.eval("$0");
  } catch (const Error& e) {
    nosite = e.code() == Errc::script_operand_outside_call;
  }
  CHECK(nosite);
}

TEST_CASE("prior assignments map ranks and numeric fitness values") {
  Fix f;
  f.run("prior = HIGHER;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Rank, kRankHigher});
  f.run("prior = LOWER;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Rank, kRankLower});
  f.run("prior = 42;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Fitness, 42});

  // reading `prior` yields the stored value
  CHECK(as_int(f.eval("prior")) == 42);

  // documented example: distance-to-target fitness from a program variable
  f.set_local(2, sym::mk_const(32, 20));  // loopcount = 20
  f.run("prior = abs(25 - loopcount);");
  CHECK(f.vars.prior == Priority{Priority::Kind::Fitness, 5});

  // symbolic priorities are rejected with a warning, keeping the previous one
  size_t warnings = f.rt->warnings.size();
  f.run("prior = x;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Fitness, 5});
  CHECK(f.rt->warnings.size() == warnings + 1);
}

TEST_CASE("priority keys order ranks above fitness distances") {
  PrioKey higher = key_of({Priority::Kind::Rank, kRankHigher});
  PrioKey lower = key_of({Priority::Kind::Rank, kRankLower});
  PrioKey dflt = key_of({});
  PrioKey fit3 = key_of({Priority::Kind::Fitness, 3});
  PrioKey fit7 = key_of({Priority::Kind::Fitness, 7});

  CHECK(higher > dflt);
  CHECK(dflt > lower);
  CHECK(fit3 > fit7);      // smaller distance pops first
  CHECK(higher > fit3);    // rank dominates fitness
  CHECK(fit7 > lower);
  CHECK(key_of({Priority::Kind::Fitness, 0}) == dflt);
}

TEST_CASE("rank-valued conditionals resolve through the path condition") {
  Fix f;
  ExprRef x = f.local(0);

  // concrete guard picks an arm without the solver
  f.run("prior = HIGHER if 3 < 5 else LOWER;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Rank, kRankHigher});

  // path entails the guard -> then-arm
  f.es.assume(sym::mk_cmp(Op::Eq, x, sym::mk_const(32, 1)));
  f.run("prior = HIGHER if x < 2 else LOWER;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Rank, kRankHigher});

  // path refutes the guard -> else-arm
  f.run("prior = HIGHER if x > 5 else LOWER;");
  CHECK(f.vars.prior == Priority{Priority::Kind::Rank, kRankLower});

  // undecided guard -> default priority
  Fix g;
  g.run("prior = HIGHER if x < 2 else LOWER;");
  CHECK(g.vars.prior == Priority{});
}

TEST_CASE("expressible conditional arms fold into if-then-else terms") {
  Fix f;
  ExprRef e = as_sym(f.eval("100 if x < 2 else 200"));
  std::map<std::string, u64> env{{"x", 1}};
  CHECK(sym::eval_concrete(e, env) == 100);
  env["x"] = 50;
  CHECK(sym::eval_concrete(e, env) == 200);

  ExprRef b = as_sym(f.eval("(x > 10) if y == 0 else (x > 20)"));
  env = {{"x", 15}, {"y", 0}};
  CHECK(sym::eval_concrete(b, env) == 1);
  env["y"] = 3;
  CHECK(sym::eval_concrete(b, env) == 0);
}

TEST_CASE("symbolic arithmetic widens and compares signed") {
  Fix f;
  ExprRef sum = as_sym(f.eval("x + 1"));
  CHECK(sum->width == 32);
  std::map<std::string, u64> env{{"x", 41}};
  CHECK(sym::eval_concrete(sum, env) == 42);

  // i64 local mixes with i32 symbol by sign-extending the narrower side
  f.set_local(3, sym::mk_sym(64, "big"));
  ExprRef mix = as_sym(f.eval("big + x"));
  CHECK(mix->width == 64);
  env = {{"x", u64(u32(-5))}, {"big", 100}};
  CHECK(sym::eval_concrete(mix, env) == 95);  // x sign-extends to -5

  ExprRef lt = as_sym(f.eval("x < 0 - 1"));
  env = {{"x", u64(u32(-2))}};
  CHECK(sym::eval_concrete(lt, env) == 1);    // signed comparison

  ExprRef ab = as_sym(f.eval("abs(x)"));
  env = {{"x", u64(u32(-10))}};
  CHECK(sym::eval_concrete(ab, env) == 10);
  env = {{"x", 10}};
  CHECK(sym::eval_concrete(ab, env) == 10);

  CHECK_THROWS_AS(f.eval("x + 1.5"), Error);  // floats cannot meet symbols
}

TEST_CASE("plain cons assignments constrain the path and fill the tuple slot") {
  Fix f;
  ExprRef x = f.local(0);
  size_t before = f.es.path.size();
  f.run("cons = x < 10;");
  REQUIRE(f.es.path.size() == before + 1);
  REQUIRE(f.vars.cons);
  std::map<std::string, u64> env{{"x", 5}};
  CHECK(sym::eval_concrete(f.vars.cons, env) == 1);
  env["x"] = 15;
  CHECK(sym::eval_concrete(f.vars.cons, env) == 0);
  CHECK(f.es.path.back() == f.vars.cons);

  // integers coerce through truthiness; other kinds are rejected
  f.run("cons = x;");  // x != 0
  env = {{"x", 3}};
  CHECK(sym::eval_concrete(f.vars.cons, env) == 1);

  bool rejected = false;
  try {
    f.run("cons = \"nope\";");
  } catch (const Error& e) {
    rejected = e.code() == Errc::script_non_boolean_cons;
  }
  CHECK(rejected);
  CHECK_THROWS_AS(f.run("cons = 1.5;"), Error);
}

TEST_CASE("pre/post cons assignments assert instead of assuming") {
  Fix f;
  ExprRef x = f.local(0);
  std::vector<ExprRef> ops;
  HookRuntime::Site site{kMain, 1, &ops, nullptr};

  // x != 3 is violable: expect a violation with a concrete witness
  f.run("cons = x != 3;", script::Timing::Post, &site);
  REQUIRE(f.rt->violations.size() == 1);
  const Violation& v = f.rt->violations[0];
  CHECK(v.kind == "assertion");
  CHECK(v.func == kMain);
  CHECK(v.instr == 1);
  CHECK(v.pilot_name == "p");
  REQUIRE(v.model.count("x"));
  CHECK(v.model.at("x") == 3);
  REQUIRE(v.cond);
  std::map<std::string, u64> env{{"x", v.model.at("x")}};
  CHECK(sym::eval_concrete(v.cond, env) == 0);  // the witness breaks the assertion

  // exploration continues under the asserted condition
  REQUIRE(!f.es.path.empty());
  CHECK(f.es.path.back()->op != Op::BoolConst);
  // the interval tuple slot is reserved for plain-timing constraints
  CHECK(!f.vars.cons);

  // an assertion the path already entails reports nothing
  Fix g;
  ExprRef gx = g.es.top().locals[0];
  g.es.assume(sym::mk_cmp(Op::LtS, gx, sym::mk_const(32, 2)));
  g.run("cons = x < 10;", script::Timing::Pre, &site);
  CHECK(g.rt->violations.empty());
}

TEST_CASE("halt assignments require certainty for symbolic values") {
  Fix f;
  ExprRef x = f.local(0);
  f.run("halt = true;");
  CHECK(f.vars.halt);
  f.run("halt = 0;");
  CHECK_FALSE(f.vars.halt);

  f.run("halt = x > 1;");  // undecided under an empty path
  CHECK_FALSE(f.vars.halt);

  f.es.assume(sym::mk_cmp(Op::Eq, x, sym::mk_const(32, 3)));
  f.run("halt = x > 2;");  // now entailed
  CHECK(f.vars.halt);
  CHECK(as_bool(f.eval("halt")));
}

TEST_CASE("indexed expressions are rejected outside locators") {
  Fix f;
  bool programmatic = false;
  try {
    f.eval("sec_field_cnt[i]");
  } catch (const Error& e) {
    programmatic = e.code() == Errc::script_index_on_program_array;
  }
  CHECK(programmatic);

  f.run("sv = 1;");
  CHECK_THROWS_AS(f.eval("sv[i]"), Error);  // script variables are not arrays
}

TEST_CASE("while loops follow solver-entailed symbolic conditions") {
  Fix f;
  ExprRef x = f.local(0);
  f.es.assume(sym::mk_cmp(Op::Eq, x, sym::mk_const(32, 3)));
  f.run("i = 0; while x > 2 and i < 2 do i = i + 1;");
  CHECK(as_int(f.vars.vars.at("i")) == 2);
}

TEST_CASE("hooks dispatch by phase at bound sites") {
  Fix f(
      "p {"
      "  pre call(ext) { a = 1; cons = true; }"
      "  call(ext) { b = 2; }"
      "  post call(ext) { c = $0; cons = true; }"
      "}");
  std::vector<ExprRef> ops = {sym::mk_const(32, 7)};
  ExprRef result = sym::mk_const(32, 8);
  HookRuntime::Site site{kMain, 1, &ops, &result};
  REQUIRE(f.rt->has_hooks(kMain, 1));

  f.rt->run_before(f.es, f.vars, f.pv, site);
  CHECK(as_int(f.vars.vars.at("a")) == 1);
  CHECK(as_int(f.vars.vars.at("b")) == 2);
  CHECK(f.vars.vars.count("c") == 0);

  f.rt->run_after(f.es, f.vars, f.pv, site);
  CHECK(as_int(f.vars.vars.at("c")) == 8);
}

TEST_CASE("scoring previews leave every context untouched") {
  Fix f(
      "p {"
      "  CSUM := 2;"
      "  func(main) { prior = 7 - CSUM; CSUM = CSUM + 1; marker = 1; }"
      "}");
  size_t path_before = f.es.path.size();

  Priority p = f.rt->preview(f.es, f.vars, f.pv, kMain, {0});
  CHECK(p == Priority{Priority::Kind::Fitness, 5});

  // scratch side effects are discarded
  CHECK(f.vars.prior == Priority{});
  CHECK(as_int(f.pv[0].at("CSUM")) == 2);
  CHECK(f.vars.vars.count("marker") == 0);
  CHECK(f.es.path.size() == path_before);

  // no prior-assigning hook at the site -> inherit the current priority
  f.vars.prior = {Priority::Kind::Fitness, 9};
  CHECK(f.rt->preview(f.es, f.vars, f.pv, kMain, {}) ==
        Priority{Priority::Kind::Fitness, 9});

  // running the same behave for real does commit
  std::vector<ExprRef> ops;
  HookRuntime::Site site{kMain, 0, &ops, nullptr};
  f.rt->run_before(f.es, f.vars, f.pv, site);
  CHECK(f.vars.prior == Priority{Priority::Kind::Fitness, 5});
  CHECK(as_int(f.pv[0].at("CSUM")) == 3);
  CHECK(as_int(f.vars.vars.at("marker")) == 1);
}

TEST_CASE("previews evaluate rank conditionals under the successor path") {
  // mirrors steering a loop by comparing an induction variable against a
  // bound: under the continue-edge constraint the guard becomes must-true
  Fix f(
      "p {"
      "  func(main) { prior = HIGHER if x < 4 else LOWER; }"
      "}");
  ExprRef x = f.local(0);

  sym::EngineState cont =
      sym::fork(f.es, sym::mk_cmp(Op::LtS, x, sym::mk_const(32, 4)), 1);
  CHECK(f.rt->preview(cont, f.vars, f.pv, kMain, {0}) ==
        Priority{Priority::Kind::Rank, kRankHigher});

  sym::EngineState exit =
      sym::fork(f.es, sym::mk_not(sym::mk_cmp(Op::LtS, x, sym::mk_const(32, 4))), 2);
  CHECK(f.rt->preview(exit, f.vars, f.pv, kMain, {0}) ==
        Priority{Priority::Kind::Rank, kRankLower});

  // without an edge constraint the guard stays undecided -> default
  CHECK(f.rt->preview(f.es, f.vars, f.pv, kMain, {0}) == Priority{});
}
