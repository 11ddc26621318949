#pragma once

// Recursive-descent parser for guidance scripts.
//
// Grammar (statements / locators / advice), with the disambiguation rules the
// tests pin down:
//
//   script  := pilot*
//   pilot   := id [':' loc] '{' advice* '}'
//   advice  := id (':='|'=') expr ';'                        -- pilot variable
//            | ('pre'|'post') loc '{' stmt* '}'              -- timed advice
//            | loc '{' advice* '}'                           -- nested scope
//            | loc '{' stmt* '}'                             -- plain advice
//   loc     := loc 'or' loc | loc 'and' loc | 'not' loc | '(' loc ')'
//            | kind '(' arg ')'        kind in {luse,puse,cuse,ouse,ause,def,func,call}
//   stmt    := 'while' expr 'do' stmt | id (':='|'=') expr | expr
//   expr    := or ['if' or 'else' expr]                      -- conditional, lowest
//              (or > and > comparisons > +- > */% > unary)
//
// After `loc '{'`, a body whose first token is pre/post/not or a locator
// keyword is a nested scope; anything else is a plain advice body.  Assignment
// right-hand sides absorb a trailing conditional, so
// `prior = HIGHER if c else LOWER` assigns the conditional's value.
//
// Static checks performed here:
//   - pre/post advice must assign `cons` somewhere in its body
//     (script_invalid_timing);
//   - `$k` may appear only under a locator that mentions `call`
//     (script_operand_outside_call), counting enclosing scopes;
//   - `halt`, `cons` and `prior` may not be declared as pilot variables, and
//     pilot/variable names must be unique per script/pilot (script_syntax).

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wasym/script/ast.hpp"
#include "wasym/script/lexer.hpp"

namespace wasym::script {

namespace detail {

inline bool is_loc_keyword(Tok k) {
  switch (k) {
    case Tok::KwLuse: case Tok::KwPuse: case Tok::KwCuse: case Tok::KwOuse:
    case Tok::KwAuse: case Tok::KwDef: case Tok::KwFunc: case Tok::KwCall:
      return true;
    default:
      return false;
  }
}

inline LocKind loc_kind_of(Tok k) {
  switch (k) {
    case Tok::KwLuse: return LocKind::LUse;
    case Tok::KwPuse: return LocKind::PUse;
    case Tok::KwCuse: return LocKind::CUse;
    case Tok::KwOuse: return LocKind::OUse;
    case Tok::KwAuse: return LocKind::AUse;
    case Tok::KwDef: return LocKind::Def;
    case Tok::KwFunc: return LocKind::Func;
    default: return LocKind::Call;
  }
}

inline bool is_reserved_var(const std::string& name) {
  return name == "halt" || name == "cons" || name == "prior";
}

inline bool stmt_assigns(const StmtPtr& s, const char* target) {
  if (!s) return false;
  if (s->kind == Stmt::Kind::Assign && s->target == target) return true;
  if (s->kind == Stmt::Kind::While) return stmt_assigns(s->body, target);
  return false;
}

inline bool expr_uses_operand(const ExprPtr& e) {
  if (!e) return false;
  if (e->kind == Expr::Kind::Operand) return true;
  return expr_uses_operand(e->lhs) || expr_uses_operand(e->rhs) ||
         expr_uses_operand(e->cond);
}

inline bool stmt_uses_operand(const StmtPtr& s) {
  if (!s) return false;
  if (expr_uses_operand(s->expr)) return true;
  return stmt_uses_operand(s->body);
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  AesScript parse() {
    AesScript script;
    std::set<std::string> pilot_names;
    while (!at(Tok::End)) {
      Pilot p = parse_pilot();
      if (!pilot_names.insert(p.name).second)
        syntax_error(cur().line, cur().col, strf("duplicate pilot '%s'", p.name.c_str()));
      script.pilots.push_back(std::move(p));
    }
    return script;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t off = 1) const {
    size_t i = pos_ + off;
    return toks_[i < toks_.size() ? i : toks_.size() - 1];
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token take() { return toks_[pos_++]; }
  Token expect(Tok k, const char* what) {
    if (!at(k)) syntax_error(cur().line, cur().col, strf("expected %s", what));
    return take();
  }
  [[noreturn]] void unexpected(const char* where) {
    syntax_error(cur().line, cur().col, strf("unexpected token in %s", where));
  }

  bool at_assign_op() const {
    // statement-initial `=` assigns; `==` compares
    return at(Tok::Assign) || (at(Tok::Eq) && !cur().eq_was_double);
  }

  // --- expressions -------------------------------------------------------------

  ExprPtr parse_expr() {
    ExprPtr then_e = parse_or();
    if (!at(Tok::KwIf)) return then_e;
    take();
    ExprPtr c = parse_or();
    expect(Tok::KwElse, "'else'");
    ExprPtr else_e = parse_expr();
    return mk_cond(std::move(then_e), std::move(c), std::move(else_e));
  }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (at(Tok::KwOr)) {
      take();
      e = mk_binary(BinOp::Or, std::move(e), parse_and());
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (at(Tok::KwAnd)) {
      take();
      e = mk_binary(BinOp::And, std::move(e), parse_cmp());
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    while (true) {
      BinOp op;
      switch (cur().kind) {
        case Tok::Lt: op = BinOp::Lt; break;
        case Tok::Gt: op = BinOp::Gt; break;
        case Tok::Le: op = BinOp::Le; break;
        case Tok::Ge: op = BinOp::Ge; break;
        case Tok::Eq: op = BinOp::Eq; break;
        case Tok::Ne: op = BinOp::Ne; break;
        default: return e;
      }
      take();
      e = mk_binary(op, std::move(e), parse_add());
    }
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      BinOp op = take().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      e = mk_binary(op, std::move(e), parse_mul());
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
      Tok t = take().kind;
      BinOp op = t == Tok::Star ? BinOp::Mul : t == Tok::Slash ? BinOp::Div : BinOp::Mod;
      e = mk_binary(op, std::move(e), parse_unary());
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (at(Tok::KwNot)) {
      take();
      return mk_not_expr(parse_unary());
    }
    if (at(Tok::Dollar)) {
      take();
      Token k = expect(Tok::Int, "operand index after '$'");
      return mk_operand(k.ival);
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    switch (cur().kind) {
      case Tok::Int: return mk_int(take().ival);
      case Tok::Float: return mk_float(take().fval);
      case Tok::Str: return mk_str(take().text);
      case Tok::KwTrue: take(); return mk_boolean(true);
      case Tok::KwFalse: take(); return mk_boolean(false);
      case Tok::KwHigher: take(); return mk_rank(true);
      case Tok::KwLower: take(); return mk_rank(false);
      case Tok::LParen: {
        take();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        Token id = take();
        if (id.text == "abs" && at(Tok::LParen)) {
          take();
          ExprPtr e = parse_expr();
          expect(Tok::RParen, "')'");
          return mk_abs(std::move(e));
        }
        if (at(Tok::LBracket)) {
          take();
          Token idx = expect(Tok::Ident, "index identifier");
          expect(Tok::RBracket, "']'");
          return mk_indexed(id.text, idx.text);
        }
        return mk_ident(id.text);
      }
      default:
        unexpected("expression");
    }
  }

  // --- statements --------------------------------------------------------------

  StmtPtr parse_stmt() {
    if (at(Tok::KwWhile)) {
      take();
      ExprPtr c = parse_expr();
      expect(Tok::KwDo, "'do'");
      return mk_while(std::move(c), parse_stmt());
    }
    if (at(Tok::Ident) && (peek().kind == Tok::Assign ||
                           (peek().kind == Tok::Eq && !peek().eq_was_double))) {
      Token id = take();
      take();  // := or =
      return mk_assign(id.text, parse_expr());
    }
    return mk_expr_stmt(parse_expr());
  }

  std::vector<StmtPtr> parse_stmt_list() {
    std::vector<StmtPtr> out;
    while (!at(Tok::RBrace)) {
      if (at(Tok::Semi)) {
        take();
        continue;
      }
      if (at(Tok::End)) unexpected("advice body");
      out.push_back(parse_stmt());
      if (!at(Tok::RBrace)) expect(Tok::Semi, "';'");
    }
    return out;
  }

  // --- locators ----------------------------------------------------------------

  LocPtr parse_loc() {
    LocPtr l = parse_loc_and();
    while (at(Tok::KwOr)) {
      take();
      l = mk_loc_or(std::move(l), parse_loc_and());
    }
    return l;
  }

  LocPtr parse_loc_and() {
    LocPtr l = parse_loc_not();
    while (at(Tok::KwAnd)) {
      take();
      l = mk_loc_and(std::move(l), parse_loc_not());
    }
    return l;
  }

  LocPtr parse_loc_not() {
    if (at(Tok::KwNot)) {
      take();
      return mk_loc_not(parse_loc_not());
    }
    if (at(Tok::LParen)) {
      take();
      LocPtr l = parse_loc();
      expect(Tok::RParen, "')'");
      return l;
    }
    return parse_loc_atom();
  }

  LocPtr parse_loc_atom() {
    if (!is_loc_keyword(cur().kind)) unexpected("locator");
    LocKind kind = loc_kind_of(take().kind);
    expect(Tok::LParen, "'('");
    LocPtr atom;
    switch (cur().kind) {
      case Tok::Ident: {
        Token id = take();
        if (at(Tok::LBracket)) {
          take();
          Token idx = expect(Tok::Ident, "index identifier");
          expect(Tok::RBracket, "']'");
          atom = mk_loc_indexed(kind, id.text, idx.text);
        } else {
          atom = mk_loc_atom(kind, id.text);
        }
        break;
      }
      case Tok::Int: atom = mk_loc_literal(kind, take().ival); break;
      case Tok::Plus: take(); atom = mk_loc_bop(kind, BinOp::Add); break;
      case Tok::Minus: take(); atom = mk_loc_bop(kind, BinOp::Sub); break;
      case Tok::Star: take(); atom = mk_loc_bop(kind, BinOp::Mul); break;
      case Tok::Slash: take(); atom = mk_loc_bop(kind, BinOp::Div); break;
      case Tok::Percent: take(); atom = mk_loc_bop(kind, BinOp::Mod); break;
      case Tok::Lt: take(); atom = mk_loc_bop(kind, BinOp::Lt); break;
      case Tok::Gt: take(); atom = mk_loc_bop(kind, BinOp::Gt); break;
      case Tok::Le: take(); atom = mk_loc_bop(kind, BinOp::Le); break;
      case Tok::Ge: take(); atom = mk_loc_bop(kind, BinOp::Ge); break;
      case Tok::Eq: take(); atom = mk_loc_bop(kind, BinOp::Eq); break;
      case Tok::Ne: take(); atom = mk_loc_bop(kind, BinOp::Ne); break;
      case Tok::KwAnd: take(); atom = mk_loc_bop(kind, BinOp::And); break;
      case Tok::KwOr: take(); atom = mk_loc_bop(kind, BinOp::Or); break;
      default: unexpected("locator argument");
    }
    expect(Tok::RParen, "')'");
    return atom;
  }

  // --- advice / pilot ----------------------------------------------------------

  bool body_starts_scope() const {
    Tok k = cur().kind;
    return k == Tok::KwPre || k == Tok::KwPost || k == Tok::KwNot || is_loc_keyword(k);
  }

  Behave parse_behave_tail(Timing timing, LocPtr loc, bool in_call_scope) {
    int line = cur().line, col = cur().col;
    Behave b;
    b.timing = timing;
    b.loc = std::move(loc);
    expect(Tok::LBrace, "'{'");
    b.body = parse_stmt_list();
    expect(Tok::RBrace, "'}'");
    if (timing != Timing::Plain) {
      bool has_cons = false;
      for (const StmtPtr& s : b.body) has_cons = has_cons || stmt_assigns(s, "cons");
      if (!has_cons)
        fail(Errc::script_invalid_timing,
             "script:%d:%d: %s advice must assign cons", line, col,
             timing == Timing::Pre ? "pre" : "post");
    }
    if (!in_call_scope && !loc_contains_call(b.loc)) {
      for (const StmtPtr& s : b.body)
        if (stmt_uses_operand(s))
          fail(Errc::script_operand_outside_call,
               "script:%d:%d: $ operands are only available under a call locator",
               line, col);
    }
    return b;
  }

  Advice parse_advice(std::set<std::string>& var_names, bool in_call_scope) {
    Advice a;
    if (at(Tok::Ident) && (peek().kind == Tok::Assign ||
                           (peek().kind == Tok::Eq && !peek().eq_was_double))) {
      Token id = take();
      if (is_reserved_var(id.text))
        syntax_error(id.line, id.col,
                     strf("reserved identifier '%s' may not be declared", id.text.c_str()));
      if (!var_names.insert(id.text).second)
        syntax_error(id.line, id.col, strf("duplicate variable '%s'", id.text.c_str()));
      take();  // := or =
      VarDecl v;
      v.name = id.text;
      v.init = parse_expr();
      expect(Tok::Semi, "';'");
      a.node = std::move(v);
      return a;
    }
    if (at(Tok::KwPre) || at(Tok::KwPost)) {
      Timing t = take().kind == Tok::KwPre ? Timing::Pre : Timing::Post;
      LocPtr loc = parse_loc();
      a.node = parse_behave_tail(t, std::move(loc), in_call_scope);
      return a;
    }
    LocPtr loc = parse_loc();
    expect(Tok::LBrace, "'{'");
    if (body_starts_scope()) {
      Scope sc;
      bool call_here = in_call_scope || loc_contains_call(loc);
      sc.loc = std::move(loc);
      sc.advices = parse_advice_list(var_names, call_here);
      expect(Tok::RBrace, "'}'");
      a.node = std::move(sc);
      return a;
    }
    // rewind the '{' so parse_behave_tail sees it
    --pos_;
    a.node = parse_behave_tail(Timing::Plain, std::move(loc), in_call_scope);
    return a;
  }

  std::vector<Advice> parse_advice_list(std::set<std::string>& var_names,
                                        bool in_call_scope) {
    std::vector<Advice> out;
    while (!at(Tok::RBrace)) {
      if (at(Tok::Semi)) {
        take();
        continue;
      }
      if (at(Tok::End)) unexpected("pilot body");
      out.push_back(parse_advice(var_names, in_call_scope));
    }
    return out;
  }

  Pilot parse_pilot() {
    Pilot p;
    Token name = expect(Tok::Ident, "pilot name");
    if (is_reserved_var(name.text))
      syntax_error(name.line, name.col,
                   strf("reserved identifier '%s' may not name a pilot", name.text.c_str()));
    p.name = name.text;
    bool scope_has_call = false;
    if (at(Tok::Colon)) {
      take();
      p.scope = parse_loc();
      scope_has_call = loc_contains_call(p.scope);
    }
    expect(Tok::LBrace, "'{'");
    std::set<std::string> var_names;
    p.advices = parse_advice_list(var_names, scope_has_call);
    expect(Tok::RBrace, "'}'");
    return p;
  }
};

}  // namespace detail

inline AesScript parse_script(std::string_view src) {
  return detail::Parser(src).parse();
}

}  // namespace wasym::script
