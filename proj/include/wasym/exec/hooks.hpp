#pragma once

// Runtime for bound guidance scripts: evaluates behave bodies at sites with
// access to script variables, program variables and instruction operands.
//
// Slots and scoping:
//  - `prior`, `cons`, `halt` are reserved slots in the per-interval context.
//  - Pilot-declared variables live in a durable per-pilot scope; assignments
//    write through from anywhere. Undeclared assignment targets create
//    interval-local variables. Reads resolve $k, then the interval context,
//    then the pilot scope, then program variables of the active frame.
//  - `prior = HIGHER/LOWER` (directly or via a conditional arm) stores a
//    rank; any other numeric assignment stores a fitness distance (smaller
//    is hotter). The raw value remains readable through `prior`.
//  - `cons = e` with plain timing conjoins e onto the path condition and
//    records it for the scheduler's tuple filter; with pre/post timing it is
//    an assertion: if path ∧ ¬e is satisfiable a violation (with model) is
//    recorded, and exploration continues under path ∧ e.
//  - `halt = e` sets a flag the scheduler consults at path ends; a symbolic
//    e must hold in every model of the path to count as true.
//  - Operand references: pre/plain sites see $k as the k-th instruction
//    operand (0-based); post sites see $0 as the result and $k (k >= 1) as
//    the (k-1)-th operand.
//
// Scoring previews re-run prior-assigning plain behaves against scratch
// copies of the contexts so that enqueue priorities can reflect a successor's
// extended path condition without double-applying side effects.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wasym/script/bind.hpp"
#include "wasym/smt/solver.hpp"
#include "wasym/sym/state.hpp"

namespace wasym::exec {

using sym::ExprRef;

constexpr i64 kRankHigher = 100;
constexpr i64 kRankLower = -100;

// --- scheduling priority ----------------------------------------------------

struct Priority {
  enum class Kind : u8 { Default, Rank, Fitness };
  Kind kind = Kind::Default;
  i64 value = 0;
  bool operator==(const Priority&) const = default;
};

// Queue ordering key: lexicographically larger pops first. Ranks occupy the
// first component (default 0 sits between LOWER and HIGHER); fitness values
// compete inside a rank tier with smaller distances first.
struct PrioKey {
  i64 tier = 0;
  i64 fit = 0;
  auto operator<=>(const PrioKey&) const = default;
};

inline PrioKey key_of(const Priority& p) {
  switch (p.kind) {
    case Priority::Kind::Rank: return {p.value, 0};
    case Priority::Kind::Fitness: return {0, -p.value};
    case Priority::Kind::Default: break;
  }
  return {0, 0};
}

// --- script values ------------------------------------------------------------

struct ScriptValue {
  enum class Kind : u8 { Int, Float, Bool, Str, Sym, Rank, Unresolved };
  Kind kind = Kind::Int;
  i64 i = 0;       // Int payload; Rank stores +-100 here
  double f = 0;    // Float
  bool b = false;  // Bool
  std::string s;   // Str
  ExprRef e;       // Sym (bitvector or boolean sort)

  static ScriptValue of_int(i64 v) { return {.kind = Kind::Int, .i = v}; }
  static ScriptValue of_float(double v) { return {.kind = Kind::Float, .f = v}; }
  static ScriptValue of_bool(bool v) { return {.kind = Kind::Bool, .b = v}; }
  static ScriptValue of_str(std::string v) { return {.kind = Kind::Str, .s = std::move(v)}; }
  static ScriptValue of_sym(ExprRef v) { return {.kind = Kind::Sym, .e = std::move(v)}; }
  static ScriptValue of_rank(bool higher) {
    return {.kind = Kind::Rank, .i = higher ? kRankHigher : kRankLower};
  }
  static ScriptValue unresolved() { return {.kind = Kind::Unresolved}; }

  bool concrete_truthy() const {  // only for Int/Float/Bool
    switch (kind) {
      case Kind::Int: return i != 0;
      case Kind::Float: return f != 0;
      case Kind::Bool: return b;
      default: fail(Errc::script_type, "value has no concrete truth value");
    }
  }
};

inline std::string value_to_string(const ScriptValue& v) {
  switch (v.kind) {
    case ScriptValue::Kind::Int: return std::to_string(v.i);
    case ScriptValue::Kind::Float: return strf("%g", v.f);
    case ScriptValue::Kind::Bool: return v.b ? "true" : "false";
    case ScriptValue::Kind::Str: return "\"" + v.s + "\"";
    case ScriptValue::Kind::Sym: return sym::to_string(v.e);
    case ScriptValue::Kind::Rank: return v.i > 0 ? "HIGHER" : "LOWER";
    case ScriptValue::Kind::Unresolved: return "<unresolved>";
  }
  return "?";
}

// Wraps a program value (operand, local, global) as a script value.
inline ScriptValue wrap_program_value(const ExprRef& e) {
  if (e->op == sym::Op::Const)
    return ScriptValue::of_int(sym::detail::to_signed(e->cval, e->width));
  if (e->op == sym::Op::BoolConst) return ScriptValue::of_bool(e->cval != 0);
  return ScriptValue::of_sym(e);
}

// --- contexts -----------------------------------------------------------------

// Interval-local scheduling context (Algorithm-style `vars`): saved and
// restored by the scheduler on interval transitions.
struct VarsContext {
  Priority prior;
  ExprRef cons;  // last plain-timing constraint, for the tuple filter
  bool halt = false;
  std::map<std::string, ScriptValue> vars;
};

// Durable per-pilot variable scopes, indexed by pilot.
using PilotVars = std::vector<std::map<std::string, ScriptValue>>;

struct Violation {
  u32 pilot = 0;
  u32 func = 0;
  u32 instr = 0;
  std::string pilot_name;
  std::string kind;    // "assertion" | "trap"
  std::string detail;  // human-readable condition / trap description
  ExprRef cond;        // asserted condition (null for traps)
  smt::Model model;    // witness inputs
  u64 lineage = 0;     // state that detected it
};

// --- runtime ------------------------------------------------------------------

class HookRuntime {
 public:
  HookRuntime(const script::BoundScript* bs, const wasm::Module* m, smt::Solver* solver)
      : bs_(bs), m_(m), solver_(solver) {
    if (bs_ && bs_->script) {
      declared_.resize(bs_->script->pilots.size());
      for (const auto& [pi, decls] : bs_->var_inits)
        for (const script::VarDecl* d : decls) declared_[pi].insert(d->name);
    }
  }

  const script::BoundScript* script() const { return bs_; }
  const wasm::Module& module() const { return *m_; }
  smt::Solver* solver() const { return solver_; }

  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  // Per-site execution context handed in by the executor.
  struct Site {
    u32 func = 0;
    u32 instr = 0;
    const std::vector<ExprRef>* operands = nullptr;
    const ExprRef* result = nullptr;  // post-timing only
  };

  bool has_hooks(u32 func, u32 instr) const {
    return bs_ && bs_->hooks_at(func, instr) != nullptr;
  }

  // Evaluates pilot variable initializers into fresh pilot scopes.
  void init_pilot_vars(sym::EngineState& es, VarsContext& vars, PilotVars& pv) {
    pv.clear();
    if (!bs_ || !bs_->script) return;
    pv.resize(bs_->script->pilots.size());
    for (const auto& [pi, decls] : bs_->var_inits) {
      for (const script::VarDecl* d : decls) {
        Evaluator ev(*this, es, vars, pv, pi, script::Timing::Plain, nullptr, false);
        pv[pi][d->name] = ev.eval(*d->init);
      }
    }
  }

  // Runs pre- and plain-timing hooks bound at the site (in script order).
  void run_before(sym::EngineState& es, VarsContext& vars, PilotVars& pv, const Site& site) {
    run_phase(es, vars, pv, site, false);
  }
  // Runs post-timing hooks bound at the site.
  void run_after(sym::EngineState& es, VarsContext& vars, PilotVars& pv, const Site& site) {
    run_phase(es, vars, pv, site, true);
  }

  // Scoring preview: re-evaluates prior-assigning plain behaves bound at the
  // given instructions against scratch contexts under `es.path`, returning
  // the priority the scheduler should enqueue with. Side effects other than
  // the resulting priority are discarded; behaves needing operands are
  // skipped (operand values are not available outside execution).
  Priority preview(const sym::EngineState& es, const VarsContext& vars, const PilotVars& pv,
                   u32 func, const std::vector<u32>& instrs) {
    if (!bs_) return vars.prior;
    std::vector<script::BoundHook> todo;
    for (u32 i : instrs) {
      const std::vector<script::BoundHook>* hooks = bs_->hooks_at(func, i);
      if (!hooks) continue;
      for (const script::BoundHook& h : *hooks)
        if (h.behave->timing == script::Timing::Plain && behave_assigns_prior(*h.behave))
          todo.push_back(h);
    }
    if (todo.empty()) return vars.prior;

    VarsContext scratch = vars;
    PilotVars scratch_pv = pv;
    // the evaluator only mutates the engine state on non-preview paths
    sym::EngineState& esm = const_cast<sym::EngineState&>(es);
    for (const script::BoundHook& h : todo) {
      Evaluator ev(*this, esm, scratch, scratch_pv, h.pilot, script::Timing::Plain, nullptr,
                   true);
      try {
        for (const script::StmtPtr& s : h.behave->body) ev.exec(*s);
      } catch (const Error& e) {
        if (e.code() != Errc::script_operand_outside_call) throw;
      }
    }
    return scratch.prior;
  }

  static bool stmt_assigns_prior(const script::Stmt& s) {
    if (s.kind == script::Stmt::Kind::Assign) return s.target == "prior";
    if (s.kind == script::Stmt::Kind::While) return s.body && stmt_assigns_prior(*s.body);
    return false;
  }
  static bool behave_assigns_prior(const script::Behave& b) {
    for (const script::StmtPtr& s : b.body)
      if (stmt_assigns_prior(*s)) return true;
    return false;
  }

  const std::string& pilot_name(u32 pi) const { return bs_->script->pilots[pi].name; }

  // name -> local index for a function (params + locals, first name wins)
  const std::map<std::string, u32>& local_names(u32 func) {
    auto it = local_names_.find(func);
    if (it != local_names_.end()) return it->second;
    std::map<std::string, u32> names;
    u32 n = u32(m_->type_of(func).params.size());
    if (!m_->is_imported_func(func)) n += u32(m_->body_of(func).expand_locals().size());
    for (u32 l = 0; l < n; ++l) names.emplace(m_->names.local(func, l), l);
    return local_names_.emplace(func, std::move(names)).first->second;
  }

  const std::map<std::string, u32>& global_names() {
    if (!global_names_built_) {
      u32 n = m_->num_imported_globals() + u32(m_->globals.size());
      for (u32 g = 0; g < n; ++g) global_names_.emplace(m_->names.global(g), g);
      global_names_built_ = true;
    }
    return global_names_;
  }

  // --- body evaluator ---------------------------------------------------------

  class Evaluator {
   public:
    Evaluator(HookRuntime& rt, sym::EngineState& es, VarsContext& vars, PilotVars& pv,
              u32 pilot, script::Timing timing, const Site* site, bool preview)
        : rt_(rt), es_(es), vars_(vars), pv_(pv), pilot_(pilot), timing_(timing),
          site_(site), preview_(preview) {}

    void exec(const script::Stmt& s) {
      using K = script::Stmt::Kind;
      switch (s.kind) {
        case K::Assign: assign(s.target, eval(*s.expr)); return;
        case K::ExprStmt: eval(*s.expr); return;
        case K::While: {
          u32 iters = 0;
          for (;;) {
            if (++iters > 10000)
              fail(Errc::script_while_cap, "while loop exceeded %u iterations", 10000u);
            ScriptValue c = eval(*s.expr);
            bool go;
            if (c.kind == ScriptValue::Kind::Sym)
              go = must(to_bool_expr(c, "while condition")) == Tri::True;
            else if (c.kind == ScriptValue::Kind::Unresolved)
              go = false;
            else
              go = c.concrete_truthy();
            if (!go) break;
            if (s.body) exec(*s.body);
          }
          return;
        }
      }
    }

    ScriptValue eval(const script::Expr& e) {
      using K = script::Expr::Kind;
      switch (e.kind) {
        case K::Int: return ScriptValue::of_int(e.ival);
        case K::Float: return ScriptValue::of_float(e.fval);
        case K::Str: return ScriptValue::of_str(e.sval);
        case K::Bool: return ScriptValue::of_bool(e.bval);
        case K::Rank: return ScriptValue::of_rank(e.bval);
        case K::Ident: return lookup(e.sval);
        case K::Indexed: return eval_indexed(e);
        case K::Binary: return eval_binary(e);
        case K::Not: return eval_not(eval(*e.lhs));
        case K::Operand: return eval_operand(e.ival);
        case K::Cond: return eval_cond(e);
        case K::Abs: return eval_abs(eval(*e.lhs));
      }
      fail(Errc::script_type, "unhandled expression kind");
    }

   private:
    enum class Tri : u8 { True, False, Unknown };

    // must(c): True if path entails c, False if path entails !c, else Unknown
    Tri must(const ExprRef& c) {
      if (c->op == sym::Op::BoolConst) return c->cval ? Tri::True : Tri::False;
      std::vector<ExprRef> atoms = es_.path;
      atoms.push_back(sym::mk_not(c));
      if (rt_.solver_->check(atoms) == smt::Verdict::Unsat) return Tri::True;
      atoms.back() = c;
      if (rt_.solver_->check(atoms) == smt::Verdict::Unsat) return Tri::False;
      return Tri::Unknown;
    }

    ScriptValue eval_operand(i64 k) {
      if (!site_ || !site_->operands)
        fail(Errc::script_operand_outside_call, "$%lld used without instruction operands",
             (long long)k);
      const std::vector<ExprRef>& ops = *site_->operands;
      if (timing_ == script::Timing::Post) {
        if (k == 0) {
          if (!site_->result)
            fail(Errc::script_operand_outside_call, "$0: site produces no result");
          return wrap_program_value(*site_->result);
        }
        if (u64(k - 1) >= ops.size())
          fail(Errc::script_operand_outside_call, "$%lld: site has %zu operands",
               (long long)k, ops.size());
        return wrap_program_value(ops[size_t(k - 1)]);
      }
      if (u64(k) >= ops.size())
        fail(Errc::script_operand_outside_call, "$%lld: site has %zu operands", (long long)k,
             ops.size());
      return wrap_program_value(ops[size_t(k)]);
    }

    ScriptValue eval_indexed(const script::Expr& e) {
      if (vars_.vars.count(e.sval) || pv_[pilot_].count(e.sval))
        fail(Errc::script_type, "script variable %s is not an array", e.sval.c_str());
      fail(Errc::script_index_on_program_array,
           "%s[%s]: program arrays cannot be indexed in expressions", e.sval.c_str(),
           e.index_name.c_str());
    }

    ScriptValue eval_cond(const script::Expr& e) {
      ScriptValue g = eval(*e.cond);
      if (g.kind != ScriptValue::Kind::Sym && g.kind != ScriptValue::Kind::Unresolved)
        return eval(g.concrete_truthy() ? *e.lhs : *e.rhs);
      if (g.kind == ScriptValue::Kind::Unresolved) return ScriptValue::unresolved();

      ExprRef gb = to_bool_expr(g, "conditional guard");
      ScriptValue a = eval(*e.lhs);
      ScriptValue b = eval(*e.rhs);

      // both arms expressible -> fold into an if-then-else term
      if (expressible(a) && expressible(b)) {
        if (boolish(a) && boolish(b)) {
          ExprRef ea = to_bool_expr(a, "conditional arm");
          ExprRef eb = to_bool_expr(b, "conditional arm");
          return ScriptValue::of_sym(
              sym::mk_bool2(sym::Op::BOr, sym::mk_bool2(sym::Op::BAnd, gb, ea),
                            sym::mk_bool2(sym::Op::BAnd, sym::mk_not(gb), eb)));
        }
        u32 w = arm_width(a, b);
        return ScriptValue::of_sym(sym::mk_ite(gb, to_bv(a, w), to_bv(b, w)));
      }

      // rank-valued (or otherwise unexpressible) arms: ask the solver whether
      // the guard is decided by the path; otherwise the result is unresolved
      switch (must(gb)) {
        case Tri::True: return a;
        case Tri::False: return b;
        case Tri::Unknown: return ScriptValue::unresolved();
      }
      return ScriptValue::unresolved();
    }

    ScriptValue eval_abs(ScriptValue v) {
      switch (v.kind) {
        case ScriptValue::Kind::Int: return ScriptValue::of_int(v.i < 0 ? -v.i : v.i);
        case ScriptValue::Kind::Float: return ScriptValue::of_float(std::abs(v.f));
        case ScriptValue::Kind::Sym: {
          if (v.e->width == 0) break;
          ExprRef zero = sym::mk_const(v.e->width, 0);
          ExprRef neg = sym::mk_bv2(sym::Op::Sub, zero, v.e);
          return ScriptValue::of_sym(
              sym::mk_ite(sym::mk_cmp(sym::Op::LtS, v.e, zero), neg, v.e));
        }
        case ScriptValue::Kind::Unresolved: return v;
        default: break;
      }
      fail(Errc::script_type, "abs() expects a numeric value, got %s",
           value_to_string(v).c_str());
    }

    ScriptValue eval_not(ScriptValue v) {
      switch (v.kind) {
        case ScriptValue::Kind::Bool: return ScriptValue::of_bool(!v.b);
        case ScriptValue::Kind::Int: return ScriptValue::of_bool(v.i == 0);
        case ScriptValue::Kind::Float: return ScriptValue::of_bool(v.f == 0);
        case ScriptValue::Kind::Sym:
          return ScriptValue::of_sym(sym::mk_not(to_bool_expr(v, "not operand")));
        case ScriptValue::Kind::Unresolved: return v;
        default: break;
      }
      fail(Errc::script_type, "not expects a boolean, got %s", value_to_string(v).c_str());
    }

    ScriptValue eval_binary(const script::Expr& e) {
      using B = script::BinOp;
      ScriptValue a = eval(*e.lhs);
      ScriptValue b = eval(*e.rhs);
      if (a.kind == ScriptValue::Kind::Unresolved || b.kind == ScriptValue::Kind::Unresolved)
        return ScriptValue::unresolved();
      if (a.kind == ScriptValue::Kind::Rank || b.kind == ScriptValue::Kind::Rank)
        fail(Errc::script_type, "HIGHER/LOWER cannot be combined with operators");

      // strings: equality only
      if (a.kind == ScriptValue::Kind::Str || b.kind == ScriptValue::Kind::Str) {
        if (a.kind != b.kind)
          fail(Errc::script_type, "cannot compare a string with a non-string");
        if (e.op == B::Eq) return ScriptValue::of_bool(a.s == b.s);
        if (e.op == B::Ne) return ScriptValue::of_bool(a.s != b.s);
        fail(Errc::script_type, "strings only support == and !=");
      }

      bool symbolic =
          a.kind == ScriptValue::Kind::Sym || b.kind == ScriptValue::Kind::Sym;
      if (symbolic) {
        if (a.kind == ScriptValue::Kind::Float || b.kind == ScriptValue::Kind::Float)
          fail(Errc::script_type, "cannot mix floats with symbolic values");
        return eval_binary_sym(e.op, a, b);
      }

      if (a.kind == ScriptValue::Kind::Float || b.kind == ScriptValue::Kind::Float) {
        double x = a.kind == ScriptValue::Kind::Float ? a.f
                   : a.kind == ScriptValue::Kind::Int ? double(a.i)
                                                      : double(a.b);
        double y = b.kind == ScriptValue::Kind::Float ? b.f
                   : b.kind == ScriptValue::Kind::Int ? double(b.i)
                                                      : double(b.b);
        switch (e.op) {
          case B::Add: return ScriptValue::of_float(x + y);
          case B::Sub: return ScriptValue::of_float(x - y);
          case B::Mul: return ScriptValue::of_float(x * y);
          case B::Div:
            if (y == 0) fail(Errc::script_type, "float division by zero");
            return ScriptValue::of_float(x / y);
          case B::Mod:
            if (y == 0) fail(Errc::script_type, "float modulo by zero");
            return ScriptValue::of_float(std::fmod(x, y));
          case B::Lt: return ScriptValue::of_bool(x < y);
          case B::Gt: return ScriptValue::of_bool(x > y);
          case B::Le: return ScriptValue::of_bool(x <= y);
          case B::Ge: return ScriptValue::of_bool(x >= y);
          case B::Eq: return ScriptValue::of_bool(x == y);
          case B::Ne: return ScriptValue::of_bool(x != y);
          case B::And: return ScriptValue::of_bool(x != 0 && y != 0);
          case B::Or: return ScriptValue::of_bool(x != 0 || y != 0);
        }
      }

      // concrete integers / booleans; arithmetic wraps in 64 bits
      i64 x = a.kind == ScriptValue::Kind::Bool ? i64(a.b) : a.i;
      i64 y = b.kind == ScriptValue::Kind::Bool ? i64(b.b) : b.i;
      auto wrap = [](u64 v) { return i64(v); };
      switch (e.op) {
        case B::Add: return ScriptValue::of_int(wrap(u64(x) + u64(y)));
        case B::Sub: return ScriptValue::of_int(wrap(u64(x) - u64(y)));
        case B::Mul: return ScriptValue::of_int(wrap(u64(x) * u64(y)));
        case B::Div:
          if (y == 0) fail(Errc::script_type, "integer division by zero");
          if (y == -1) return ScriptValue::of_int(wrap(u64(0) - u64(x)));
          return ScriptValue::of_int(x / y);
        case B::Mod:
          if (y == 0) fail(Errc::script_type, "integer modulo by zero");
          if (y == -1) return ScriptValue::of_int(0);
          return ScriptValue::of_int(x % y);
        case B::Lt: return ScriptValue::of_bool(x < y);
        case B::Gt: return ScriptValue::of_bool(x > y);
        case B::Le: return ScriptValue::of_bool(x <= y);
        case B::Ge: return ScriptValue::of_bool(x >= y);
        case B::Eq: return ScriptValue::of_bool(x == y);
        case B::Ne: return ScriptValue::of_bool(x != y);
        case B::And: return ScriptValue::of_bool(x != 0 && y != 0);
        case B::Or: return ScriptValue::of_bool(x != 0 || y != 0);
      }
      fail(Errc::script_type, "unhandled operator");
    }

    // at least one side symbolic; integer two's-complement, signed comparisons
    ScriptValue eval_binary_sym(script::BinOp op, const ScriptValue& a, const ScriptValue& b) {
      using B = script::BinOp;
      if (op == B::And || op == B::Or) {
        ExprRef ea = to_bool_expr(a, "logical operand");
        ExprRef eb = to_bool_expr(b, "logical operand");
        return ScriptValue::of_sym(
            sym::mk_bool2(op == B::And ? sym::Op::BAnd : sym::Op::BOr, ea, eb));
      }
      if ((op == B::Eq || op == B::Ne) && boolish(a) && boolish(b)) {
        ExprRef ea = sym::mk_bool_to_bv(to_bool_expr(a, "operand"), 32);
        ExprRef eb = sym::mk_bool_to_bv(to_bool_expr(b, "operand"), 32);
        return ScriptValue::of_sym(sym::mk_cmp(op == B::Eq ? sym::Op::Eq : sym::Op::Ne, ea, eb));
      }

      u32 w = arm_width(a, b);
      ExprRef ea = to_bv(a, w);
      ExprRef eb = to_bv(b, w);
      switch (op) {
        case B::Add: return ScriptValue::of_sym(sym::mk_bv2(sym::Op::Add, ea, eb));
        case B::Sub: return ScriptValue::of_sym(sym::mk_bv2(sym::Op::Sub, ea, eb));
        case B::Mul: return ScriptValue::of_sym(sym::mk_bv2(sym::Op::Mul, ea, eb));
        case B::Div: return ScriptValue::of_sym(sym::mk_bv2(sym::Op::DivS, ea, eb));
        case B::Mod: return ScriptValue::of_sym(sym::mk_bv2(sym::Op::RemS, ea, eb));
        case B::Lt: return ScriptValue::of_sym(sym::mk_cmp(sym::Op::LtS, ea, eb));
        case B::Gt: return ScriptValue::of_sym(sym::mk_cmp(sym::Op::LtS, eb, ea));
        case B::Le: return ScriptValue::of_sym(sym::mk_cmp(sym::Op::LeS, ea, eb));
        case B::Ge: return ScriptValue::of_sym(sym::mk_cmp(sym::Op::LeS, eb, ea));
        case B::Eq: return ScriptValue::of_sym(sym::mk_cmp(sym::Op::Eq, ea, eb));
        case B::Ne: return ScriptValue::of_sym(sym::mk_cmp(sym::Op::Ne, ea, eb));
        default: fail(Errc::script_type, "unhandled symbolic operator");
      }
    }

    static bool boolish(const ScriptValue& v) {
      return v.kind == ScriptValue::Kind::Bool ||
             (v.kind == ScriptValue::Kind::Sym && v.e->width == 0);
    }
    static bool expressible(const ScriptValue& v) {
      return v.kind == ScriptValue::Kind::Int || v.kind == ScriptValue::Kind::Bool ||
             v.kind == ScriptValue::Kind::Sym;
    }

    // common bitvector width for a binary operation (widen the narrower side)
    static u32 arm_width(const ScriptValue& a, const ScriptValue& b) {
      u32 w = 0;
      if (a.kind == ScriptValue::Kind::Sym && a.e->width) w = std::max(w, a.e->width);
      if (b.kind == ScriptValue::Kind::Sym && b.e->width) w = std::max(w, b.e->width);
      return w ? w : 32;
    }

    ExprRef to_bv(const ScriptValue& v, u32 w) {
      switch (v.kind) {
        case ScriptValue::Kind::Int: return sym::mk_const(w, u64(v.i));
        case ScriptValue::Kind::Bool: return sym::mk_const(w, v.b ? 1 : 0);
        case ScriptValue::Kind::Sym:
          if (v.e->width == 0) return sym::mk_bool_to_bv(v.e, w);
          if (v.e->width < w) return sym::mk_sext(v.e, w);  // signed integers widen
          if (v.e->width > w)
            fail(Errc::script_type, "cannot narrow a %u-bit value to %u bits", v.e->width, w);
          return v.e;
        default: break;
      }
      fail(Errc::script_type, "expected a numeric value, got %s", value_to_string(v).c_str());
    }

    ExprRef to_bool_expr(const ScriptValue& v, const char* what) {
      switch (v.kind) {
        case ScriptValue::Kind::Bool: return sym::mk_bool(v.b);
        case ScriptValue::Kind::Int: return sym::mk_bool(v.i != 0);
        case ScriptValue::Kind::Sym:
          return v.e->width == 0 ? v.e : sym::mk_truthy(v.e);
        default: break;
      }
      fail(Errc::script_type, "%s must be boolean, got %s", what, value_to_string(v).c_str());
    }

    ScriptValue lookup(const std::string& name) {
      if (name == "prior") return ScriptValue::of_int(vars_.prior.value);
      if (name == "cons")
        return vars_.cons ? ScriptValue::of_sym(vars_.cons) : ScriptValue::of_bool(true);
      if (name == "halt") return ScriptValue::of_bool(vars_.halt);

      auto iv = vars_.vars.find(name);
      if (iv != vars_.vars.end()) return iv->second;
      auto pd = pv_[pilot_].find(name);
      if (pd != pv_[pilot_].end()) return pd->second;

      // program variables of the active frame, then globals
      if (!es_.frames.empty()) {
        const sym::Frame& fr = es_.top();
        const auto& locals = rt_.local_names(fr.func);
        auto li = locals.find(name);
        if (li != locals.end() && li->second < fr.locals.size())
          return wrap_program_value(fr.locals[li->second]);
      }
      const auto& globals = rt_.global_names();
      auto gi = globals.find(name);
      if (gi != globals.end() && gi->second < es_.globals.size())
        return wrap_program_value(es_.globals[gi->second]);

      fail(Errc::script_unknown_identifier, "unknown variable %s", name.c_str());
    }

    void assign(const std::string& name, ScriptValue v) {
      if (name == "prior") return assign_prior(std::move(v));
      if (name == "cons") return assign_cons(std::move(v));
      if (name == "halt") return assign_halt(std::move(v));
      if (pilot_ < rt_.declared_.size() && rt_.declared_[pilot_].count(name))
        pv_[pilot_][name] = std::move(v);  // write-through to the pilot scope
      else
        vars_.vars[name] = std::move(v);  // interval-local
    }

    void assign_prior(ScriptValue v) {
      switch (v.kind) {
        case ScriptValue::Kind::Rank:
          vars_.prior = {Priority::Kind::Rank, v.i};
          return;
        case ScriptValue::Kind::Int:
          vars_.prior = {Priority::Kind::Fitness, v.i};
          return;
        case ScriptValue::Kind::Bool:
          vars_.prior = {Priority::Kind::Fitness, v.b ? 1 : 0};
          return;
        case ScriptValue::Kind::Float:
          vars_.prior = {Priority::Kind::Fitness, i64(v.f)};
          return;
        case ScriptValue::Kind::Sym:
          rt_.warnings.push_back("prior assigned a symbolic value; keeping previous priority");
          return;
        case ScriptValue::Kind::Unresolved:
          vars_.prior = {};  // undecided conditional: fall back to the default
          return;
        default: fail(Errc::script_type, "prior cannot hold %s", value_to_string(v).c_str());
      }
    }

    void assign_cons(ScriptValue v) {
      if (v.kind == ScriptValue::Kind::Unresolved)
        fail(Errc::script_non_boolean_cons, "cons assigned an unresolved conditional");
      if (v.kind == ScriptValue::Kind::Rank || v.kind == ScriptValue::Kind::Str ||
          v.kind == ScriptValue::Kind::Float)
        fail(Errc::script_non_boolean_cons, "cons must be boolean, got %s",
             value_to_string(v).c_str());
      ExprRef c = to_bool_expr(v, "cons");
      if (preview_) {
        vars_.cons = c;
        return;
      }
      if (timing_ == script::Timing::Plain) {
        vars_.cons = c;
        es_.assume(c);
        return;
      }
      check_assertion(c);
    }

    void assign_halt(ScriptValue v) {
      switch (v.kind) {
        case ScriptValue::Kind::Bool: vars_.halt = v.b; return;
        case ScriptValue::Kind::Int: vars_.halt = v.i != 0; return;
        case ScriptValue::Kind::Sym:
          vars_.halt = !preview_ && must(to_bool_expr(v, "halt")) == Tri::True;
          return;
        case ScriptValue::Kind::Unresolved: vars_.halt = false; return;
        default: fail(Errc::script_type, "halt must be boolean, got %s",
                      value_to_string(v).c_str());
      }
    }

    // pre/post `cons = c`: report a violation if !c is reachable, then
    // continue exploring under path ∧ c (the interval slot is untouched)
    void check_assertion(const ExprRef& c) {
      bool trivially_true = c->op == sym::Op::BoolConst && c->cval == 1;
      if (!trivially_true) {
        std::vector<ExprRef> atoms = es_.path;
        atoms.push_back(sym::mk_not(c));
        smt::Verdict verdict = rt_.solver_->check(atoms);
        if (verdict == smt::Verdict::Sat) {
          std::optional<smt::Model> model = rt_.solver_->get_model(atoms);
          Violation viol;
          viol.pilot = pilot_;
          viol.pilot_name = rt_.pilot_name(pilot_);
          viol.kind = "assertion";
          viol.cond = c;
          viol.detail = sym::to_string(c);
          viol.lineage = es_.lineage;
          if (site_) {
            viol.func = site_->func;
            viol.instr = site_->instr;
          }
          if (model) viol.model = *model;
          rt_.violations.push_back(std::move(viol));
        } else if (verdict == smt::Verdict::Unknown) {
          rt_.warnings.push_back("assertion undecided by the solver: " + sym::to_string(c));
        }
      }
      es_.assume(c);
    }

    HookRuntime& rt_;
    sym::EngineState& es_;
    VarsContext& vars_;
    PilotVars& pv_;
    u32 pilot_;
    script::Timing timing_;
    const Site* site_;
    bool preview_;
  };

 private:
  void run_phase(sym::EngineState& es, VarsContext& vars, PilotVars& pv, const Site& site,
                 bool post) {
    if (!bs_) return;
    const std::vector<script::BoundHook>* hooks = bs_->hooks_at(site.func, site.instr);
    if (!hooks) return;
    for (const script::BoundHook& h : *hooks) {
      bool is_post = h.behave->timing == script::Timing::Post;
      if (is_post != post) continue;
      Evaluator ev(*this, es, vars, pv, h.pilot, h.behave->timing, &site, false);
      for (const script::StmtPtr& s : h.behave->body) ev.exec(*s);
    }
  }

  const script::BoundScript* bs_;
  const wasm::Module* m_;
  smt::Solver* solver_;
  std::vector<std::set<std::string>> declared_;
  std::map<u32, std::map<std::string, u32>> local_names_;
  std::map<std::string, u32> global_names_;
  bool global_names_built_ = false;
};

}  // namespace wasym::exec
