#pragma once

// Rendering of symbolic expressions as SMT-LIB v2 text in the QF_BV logic.
//
// Terms are emitted deterministically: the same expression DAG always yields
// the same text, and shared compound subterms (reference count > 1) are
// let-bound in first-visit post-order so deeply shared DAGs (e.g. byte-level
// memory selects) do not explode into trees. Let names use the `?e<n>`
// namespace, which no engine-generated symbol ever occupies.
//
// The expression IR is bitvector/bool only; floating-point values never reach
// the solver (symbolic float operations are rejected upstream), so every sort
// here is Bool or (_ BitVec w) with 1 <= w <= 64.

#include <map>
#include <string>
#include <vector>

#include "wasym/common.hpp"
#include "wasym/sym/expr.hpp"

namespace wasym::smt {

namespace detail {

inline bool plain_symbol(const std::string& s) {
  if (s.empty()) return false;
  if (std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
              c == '$' || c == '!' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

// SMT-LIB spelling of a symbol; names the simple-symbol grammar cannot carry
// are |-quoted. '|' and '\' cannot appear inside quoted symbols at all.
inline std::string sym_text(const std::string& name) {
  if (detail::plain_symbol(name)) return name;
  if (name.find('|') != std::string::npos || name.find('\\') != std::string::npos)
    fail(Errc::solver_protocol, "symbol name not representable in SMT-LIB: %s", name.c_str());
  return "|" + name + "|";
}

inline std::string sort_text(u32 width) {
  if (width == 0) return "Bool";
  if (width > 64) fail(Errc::unsupported_symbolic_float, "unsupported sort width %u", width);
  return strf("(_ BitVec %u)", width);
}

namespace detail {

using sym::ExprRef;
using sym::Node;
using sym::Op;

inline const char* op_word(Op op) {
  switch (op) {
    case Op::Add: return "bvadd";
    case Op::Sub: return "bvsub";
    case Op::Mul: return "bvmul";
    case Op::DivS: return "bvsdiv";
    case Op::DivU: return "bvudiv";
    case Op::RemS: return "bvsrem";
    case Op::RemU: return "bvurem";
    case Op::And: return "bvand";
    case Op::Or: return "bvor";
    case Op::Xor: return "bvxor";
    case Op::Shl: return "bvshl";
    case Op::ShrS: return "bvashr";
    case Op::ShrU: return "bvlshr";
    case Op::BvNot: return "bvnot";
    case Op::Eq: return "=";
    case Op::Ne: return "distinct";
    case Op::LtS: return "bvslt";
    case Op::LtU: return "bvult";
    case Op::LeS: return "bvsle";
    case Op::LeU: return "bvule";
    case Op::BAnd: return "and";
    case Op::BOr: return "or";
    case Op::BNot: return "not";
    case Op::Ite: return "ite";
    case Op::Concat: return "concat";
    default: return nullptr;
  }
}

// Post-order walk collecting reference counts and first-visit order over the
// DAG (each node counted once per parent edge, visited once for ordering).
inline void dag_stats(const ExprRef& e, std::map<const Node*, u32>& refs,
                      std::vector<const Node*>& post) {
  u32& r = refs[e.get()];
  if (++r > 1) return;
  for (const auto& k : e->kids) dag_stats(k, refs, post);
  post.push_back(e.get());
}

struct Renderer {
  std::map<const Node*, std::string> bound;  // node -> let name

  std::string term(const Node* n) const {
    auto it = bound.find(n);
    if (it != bound.end()) return it->second;
    return form(n);
  }

  std::string form(const Node* n) const {
    switch (n->op) {
      case Op::Const: return strf("(_ bv%llu %u)", (unsigned long long)n->cval, n->width);
      case Op::BoolConst: return n->cval ? "true" : "false";
      case Op::Sym: return sym_text(n->name);
      case Op::Extract:
        return strf("((_ extract %u %u) %s", n->hi, n->lo, term(n->kids[0].get()).c_str()) + ")";
      case Op::ZExt:
      case Op::SExt: {
        u32 grow = n->width - n->kids[0]->width;
        const char* w = n->op == Op::ZExt ? "zero_extend" : "sign_extend";
        return strf("((_ %s %u) %s", w, grow, term(n->kids[0].get()).c_str()) + ")";
      }
      default: {
        const char* word = op_word(n->op);
        if (!word) fail(Errc::solver_protocol, "untranslatable operator %d", (int)n->op);
        std::string s = "(";
        s += word;
        for (const auto& k : n->kids) {
          s += ' ';
          s += term(k.get());
        }
        s += ')';
        return s;
      }
    }
  }
};

}  // namespace detail

// One expression as an SMT-LIB term. Shared compound subterms become nested
// (let ...) bindings so text size stays linear in DAG size.
inline std::string term_text(const sym::ExprRef& e) {
  std::map<const sym::Node*, u32> refs;
  std::vector<const sym::Node*> post;
  detail::dag_stats(e, refs, post);

  detail::Renderer r;
  std::vector<std::string> lets;
  u32 next = 0;
  for (const sym::Node* n : post) {
    if (n == e.get() || n->kids.empty() || refs[n] < 2) continue;
    std::string body = r.form(n);
    std::string name = strf("?e%u", next++);
    lets.push_back("(" + name + " " + body + ")");
    r.bound.emplace(n, std::move(name));
  }
  std::string out = r.term(e.get());
  for (auto it = lets.rbegin(); it != lets.rend(); ++it) out = "(let (" + *it + ") " + out + ")";
  return out;
}

inline std::string assert_text(const sym::ExprRef& atom) {
  if (!atom->is_bool())
    fail(Errc::solver_protocol, "assertion is not boolean-sorted (width %u)", atom->width);
  return "(assert " + term_text(atom) + ")";
}

inline std::string declare_text(const std::string& name, u32 width) {
  return "(declare-const " + sym_text(name) + " " + sort_text(width) + ")";
}

// Declarations for every symbol reachable from `atoms`, name-sorted.
inline std::string declarations_text(const std::vector<sym::ExprRef>& atoms) {
  std::map<std::string, u32> syms;
  for (const auto& a : atoms) sym::collect_syms(a, syms);
  std::string out;
  for (const auto& [name, width] : syms) out += declare_text(name, width) + "\n";
  return out;
}

}  // namespace wasym::smt
