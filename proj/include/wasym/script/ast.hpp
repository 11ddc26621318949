#pragma once

// AST for the guidance-script language, plus the canonical printer.
//
// Notes on surface syntax pinned here (and exercised by the parser tests):
//  - `x if c else y` is the conditional at expression level with the lowest
//    precedence; an assignment right-hand side absorbs it greedily, so
//    `prior = HIGHER if j < 2 else LOWER` assigns the conditional's value.
//    Since expressions are pure, a conditional used as a statement behaves
//    exactly like a statement conditional over expression statements.
//  - `=` and `:=` both assign in statement position; in expression position
//    `=` and `==` both compare. The printer canonicalizes to `=` for
//    assignment and `==` for comparison.
//  - `HIGHER`/`LOWER` are reserved priority literals; `halt`/`cons`/`prior`
//    are reserved assignment targets that scripts may not declare as vars.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "wasym/common.hpp"

namespace wasym::script {

enum class BinOp : u8 { Add, Sub, Mul, Div, Mod, Lt, Gt, Le, Ge, Eq, Ne, And, Or };

inline const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind : u8 {
    Int,      // ival
    Float,    // fval
    Str,      // sval
    Bool,     // bval
    Rank,     // bval: true = HIGHER, false = LOWER
    Ident,    // sval
    Indexed,  // sval[index_name]
    Binary,   // op, lhs, rhs
    Not,      // lhs
    Operand,  // $ival
    Cond,     // lhs if cond else rhs
    Abs,      // builtin abs(lhs)
  };

  Kind kind = Kind::Int;
  i64 ival = 0;
  double fval = 0;
  bool bval = false;
  std::string sval;
  std::string index_name;
  BinOp op = BinOp::Add;
  ExprPtr lhs, rhs, cond;
};

inline ExprPtr mk_int(i64 v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Int;
  e->ival = v;
  return e;
}
inline ExprPtr mk_float(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Float;
  e->fval = v;
  return e;
}
inline ExprPtr mk_str(std::string s) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Str;
  e->sval = std::move(s);
  return e;
}
inline ExprPtr mk_boolean(bool v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Bool;
  e->bval = v;
  return e;
}
inline ExprPtr mk_rank(bool higher) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Rank;
  e->bval = higher;
  return e;
}
inline ExprPtr mk_ident(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Ident;
  e->sval = std::move(name);
  return e;
}
inline ExprPtr mk_indexed(std::string base, std::string index) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Indexed;
  e->sval = std::move(base);
  e->index_name = std::move(index);
  return e;
}
inline ExprPtr mk_binary(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}
inline ExprPtr mk_not_expr(ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Not;
  e->lhs = std::move(x);
  return e;
}
inline ExprPtr mk_operand(i64 k) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Operand;
  e->ival = k;
  return e;
}
inline ExprPtr mk_cond(ExprPtr then_e, ExprPtr c, ExprPtr else_e) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Cond;
  e->lhs = std::move(then_e);
  e->cond = std::move(c);
  e->rhs = std::move(else_e);
  return e;
}
inline ExprPtr mk_abs(ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Abs;
  e->lhs = std::move(x);
  return e;
}

// --- statements ---------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  enum class Kind : u8 { Assign, ExprStmt, While };
  Kind kind = Kind::ExprStmt;
  std::string target;  // Assign
  ExprPtr expr;        // Assign value / ExprStmt / While condition
  StmtPtr body;        // While
};

inline StmtPtr mk_assign(std::string target, ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Assign;
  s->target = std::move(target);
  s->expr = std::move(e);
  return s;
}
inline StmtPtr mk_expr_stmt(ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::ExprStmt;
  s->expr = std::move(e);
  return s;
}
inline StmtPtr mk_while(ExprPtr c, StmtPtr body) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::While;
  s->expr = std::move(c);
  s->body = std::move(body);
  return s;
}

// --- locators ------------------------------------------------------------------

enum class LocKind : u8 { LUse, PUse, CUse, OUse, AUse, Def, Func, Call };

inline const char* loc_kind_name(LocKind k) {
  switch (k) {
    case LocKind::LUse: return "luse";
    case LocKind::PUse: return "puse";
    case LocKind::CUse: return "cuse";
    case LocKind::OUse: return "ouse";
    case LocKind::AUse: return "ause";
    case LocKind::Def: return "def";
    case LocKind::Func: return "func";
    case LocKind::Call: return "call";
  }
  return "?";
}

struct Loc;
using LocPtr = std::shared_ptr<const Loc>;

struct Loc {
  enum class Kind : u8 { Atom, And, Or, Not };
  enum class ArgKind : u8 { Ident, Indexed, Bop, Literal };

  Kind kind = Kind::Atom;
  // Atom
  LocKind atom = LocKind::Func;
  ArgKind arg_kind = ArgKind::Ident;
  std::string arg;         // identifier / base identifier
  std::string index_name;  // Indexed
  BinOp bop = BinOp::Add;  // Bop (e.g. call(+))
  i64 literal = 0;         // Literal
  // And / Or / Not
  LocPtr lhs, rhs;
};

inline LocPtr mk_loc_atom(LocKind k, std::string arg) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::Atom;
  l->atom = k;
  l->arg_kind = Loc::ArgKind::Ident;
  l->arg = std::move(arg);
  return l;
}
inline LocPtr mk_loc_indexed(LocKind k, std::string base, std::string index) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::Atom;
  l->atom = k;
  l->arg_kind = Loc::ArgKind::Indexed;
  l->arg = std::move(base);
  l->index_name = std::move(index);
  return l;
}
inline LocPtr mk_loc_bop(LocKind k, BinOp op) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::Atom;
  l->atom = k;
  l->arg_kind = Loc::ArgKind::Bop;
  l->bop = op;
  return l;
}
inline LocPtr mk_loc_literal(LocKind k, i64 v) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::Atom;
  l->atom = k;
  l->arg_kind = Loc::ArgKind::Literal;
  l->literal = v;
  return l;
}
inline LocPtr mk_loc_and(LocPtr a, LocPtr b) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::And;
  l->lhs = std::move(a);
  l->rhs = std::move(b);
  return l;
}
inline LocPtr mk_loc_or(LocPtr a, LocPtr b) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::Or;
  l->lhs = std::move(a);
  l->rhs = std::move(b);
  return l;
}
inline LocPtr mk_loc_not(LocPtr a) {
  auto l = std::make_shared<Loc>();
  l->kind = Loc::Kind::Not;
  l->lhs = std::move(a);
  return l;
}

// walks the locator tree looking for a `call` atom ($k legality check)
inline bool loc_contains_call(const LocPtr& l) {
  if (!l) return false;
  if (l->kind == Loc::Kind::Atom) return l->atom == LocKind::Call;
  return loc_contains_call(l->lhs) || loc_contains_call(l->rhs);
}

// --- advice / pilot / script -----------------------------------------------------

enum class Timing : u8 { Plain, Pre, Post };

struct Advice;

struct Behave {
  Timing timing = Timing::Plain;
  LocPtr loc;
  std::vector<StmtPtr> body;
};

struct VarDecl {
  std::string name;
  ExprPtr init;
};

struct Scope {
  LocPtr loc;
  std::vector<Advice> advices;
};

struct Advice {
  std::variant<VarDecl, Behave, Scope> node;
};

struct Pilot {
  std::string name;
  LocPtr scope;  // optional
  std::vector<Advice> advices;
};

struct AesScript {
  std::vector<Pilot> pilots;
};

// --- canonical printer -----------------------------------------------------------

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Cond: return 0;
    case Expr::Kind::Binary:
      switch (e.op) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Lt: case BinOp::Gt: case BinOp::Le:
        case BinOp::Ge: case BinOp::Eq: case BinOp::Ne: return 3;
        case BinOp::Add: case BinOp::Sub: return 4;
        default: return 5;  // * / %
      }
    case Expr::Kind::Not: return 6;
    default: return 7;  // atoms
  }
}

inline std::string print_expr(const Expr& e, int parent_prec) {
  int prec = precedence(e);
  std::string s;
  switch (e.kind) {
    case Expr::Kind::Int: s = std::to_string(e.ival); break;
    case Expr::Kind::Float: {
      s = strf("%g", e.fval);
      if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
      break;
    }
    case Expr::Kind::Str: s = "\"" + e.sval + "\""; break;
    case Expr::Kind::Bool: s = e.bval ? "true" : "false"; break;
    case Expr::Kind::Rank: s = e.bval ? "HIGHER" : "LOWER"; break;
    case Expr::Kind::Ident: s = e.sval; break;
    case Expr::Kind::Indexed: s = e.sval + "[" + e.index_name + "]"; break;
    case Expr::Kind::Binary:
      s = print_expr(*e.lhs, prec) + " " + binop_name(e.op) + " " +
          print_expr(*e.rhs, prec + 1);
      break;
    case Expr::Kind::Not: s = "not " + print_expr(*e.lhs, prec); break;
    case Expr::Kind::Operand: s = "$" + std::to_string(e.ival); break;
    case Expr::Kind::Cond:
      s = print_expr(*e.lhs, 1) + " if " + print_expr(*e.cond, 1) + " else " +
          print_expr(*e.rhs, 0);
      break;
    case Expr::Kind::Abs: s = "abs(" + print_expr(*e.lhs, 0) + ")"; break;
  }
  if (prec < parent_prec) s = "(" + s + ")";
  return s;
}

inline std::string print_stmt(const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::Assign: return s.target + " = " + print_expr(*s.expr, 0) + ";";
    case Stmt::Kind::ExprStmt: return print_expr(*s.expr, 0) + ";";
    case Stmt::Kind::While:
      return "while " + print_expr(*s.expr, 0) + " do " + print_stmt(*s.body);
  }
  return ";";
}

inline std::string print_loc(const Loc& l, int parent_prec) {
  // precedence: not(3) > and(2) > or(1)
  int prec;
  std::string s;
  switch (l.kind) {
    case Loc::Kind::Atom: {
      prec = 4;
      std::string arg;
      switch (l.arg_kind) {
        case Loc::ArgKind::Ident: arg = l.arg; break;
        case Loc::ArgKind::Indexed: arg = l.arg + "[" + l.index_name + "]"; break;
        case Loc::ArgKind::Bop: arg = binop_name(l.bop); break;
        case Loc::ArgKind::Literal: arg = std::to_string(l.literal); break;
      }
      s = std::string(loc_kind_name(l.atom)) + "(" + arg + ")";
      break;
    }
    case Loc::Kind::Not:
      prec = 3;
      s = "not " + print_loc(*l.lhs, prec);
      break;
    case Loc::Kind::And:
      prec = 2;
      s = print_loc(*l.lhs, prec) + " and " + print_loc(*l.rhs, prec + 1);
      break;
    case Loc::Kind::Or:
      prec = 1;
      s = print_loc(*l.lhs, prec) + " or " + print_loc(*l.rhs, prec + 1);
      break;
  }
  if (prec < parent_prec) s = "(" + s + ")";
  return s;
}

inline void print_advices(std::string& out, const std::vector<Advice>& advices,
                          const std::string& indent);

inline void print_advice(std::string& out, const Advice& a, const std::string& indent) {
  if (const auto* v = std::get_if<VarDecl>(&a.node)) {
    out += indent + v->name + " := " + print_expr(*v->init, 0) + ";\n";
  } else if (const auto* b = std::get_if<Behave>(&a.node)) {
    out += indent;
    if (b->timing == Timing::Pre) out += "pre ";
    if (b->timing == Timing::Post) out += "post ";
    out += print_loc(*b->loc, 0) + " {";
    for (const StmtPtr& s : b->body) out += " " + print_stmt(*s);
    out += " }\n";
  } else if (const auto* sc = std::get_if<Scope>(&a.node)) {
    out += indent + print_loc(*sc->loc, 0) + " {\n";
    print_advices(out, sc->advices, indent + "  ");
    out += indent + "}\n";
  }
}

inline void print_advices(std::string& out, const std::vector<Advice>& advices,
                          const std::string& indent) {
  for (const Advice& a : advices) print_advice(out, a, indent);
}

}  // namespace detail

inline std::string print_script(const AesScript& script) {
  std::string out;
  for (const Pilot& p : script.pilots) {
    out += p.name;
    if (p.scope) out += " : " + detail::print_loc(*p.scope, 0);
    out += " {\n";
    detail::print_advices(out, p.advices, "  ");
    out += "}\n";
  }
  return out;
}

// --- structural equality (for the round-trip property) ----------------------------

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Int: case Expr::Kind::Operand: return a->ival == b->ival;
    case Expr::Kind::Float: return a->fval == b->fval;
    case Expr::Kind::Str: case Expr::Kind::Ident: return a->sval == b->sval;
    case Expr::Kind::Bool: case Expr::Kind::Rank: return a->bval == b->bval;
    case Expr::Kind::Indexed: return a->sval == b->sval && a->index_name == b->index_name;
    case Expr::Kind::Binary:
      return a->op == b->op && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    case Expr::Kind::Not: case Expr::Kind::Abs: return expr_equal(a->lhs, b->lhs);
    case Expr::Kind::Cond:
      return expr_equal(a->lhs, b->lhs) && expr_equal(a->cond, b->cond) &&
             expr_equal(a->rhs, b->rhs);
  }
  return false;
}

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Stmt::Kind::Assign: return a->target == b->target && expr_equal(a->expr, b->expr);
    case Stmt::Kind::ExprStmt: return expr_equal(a->expr, b->expr);
    case Stmt::Kind::While: return expr_equal(a->expr, b->expr) && stmt_equal(a->body, b->body);
  }
  return false;
}

inline bool loc_equal(const LocPtr& a, const LocPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == Loc::Kind::Atom) {
    if (a->atom != b->atom || a->arg_kind != b->arg_kind) return false;
    switch (a->arg_kind) {
      case Loc::ArgKind::Ident: return a->arg == b->arg;
      case Loc::ArgKind::Indexed: return a->arg == b->arg && a->index_name == b->index_name;
      case Loc::ArgKind::Bop: return a->bop == b->bop;
      case Loc::ArgKind::Literal: return a->literal == b->literal;
    }
  }
  return loc_equal(a->lhs, b->lhs) && loc_equal(a->rhs, b->rhs);
}

inline bool advice_equal(const Advice& a, const Advice& b);

inline bool advices_equal(const std::vector<Advice>& a, const std::vector<Advice>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!advice_equal(a[i], b[i])) return false;
  return true;
}

inline bool advice_equal(const Advice& a, const Advice& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* va = std::get_if<VarDecl>(&a.node)) {
    const auto* vb = std::get_if<VarDecl>(&b.node);
    return va->name == vb->name && expr_equal(va->init, vb->init);
  }
  if (const auto* ba = std::get_if<Behave>(&a.node)) {
    const auto* bb = std::get_if<Behave>(&b.node);
    if (ba->timing != bb->timing || !loc_equal(ba->loc, bb->loc)) return false;
    if (ba->body.size() != bb->body.size()) return false;
    for (size_t i = 0; i < ba->body.size(); ++i)
      if (!stmt_equal(ba->body[i], bb->body[i])) return false;
    return true;
  }
  const auto* sa = std::get_if<Scope>(&a.node);
  const auto* sb = std::get_if<Scope>(&b.node);
  return loc_equal(sa->loc, sb->loc) && advices_equal(sa->advices, sb->advices);
}

inline bool script_equal(const AesScript& a, const AesScript& b) {
  if (a.pilots.size() != b.pilots.size()) return false;
  for (size_t i = 0; i < a.pilots.size(); ++i) {
    const Pilot& pa = a.pilots[i];
    const Pilot& pb = b.pilots[i];
    if (pa.name != pb.name || !loc_equal(pa.scope, pb.scope) ||
        !advices_equal(pa.advices, pb.advices))
      return false;
  }
  return true;
}

}  // namespace wasym::script
