#pragma once

// Symbolic bitvector expressions: immutable DAG nodes with structural hashing,
// aggressive constant folding, a concrete evaluator and a human-readable
// printer. Widths up to 64 bits; bool is a separate sort (width 0).

#include <cassert>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wasym/common.hpp"

namespace wasym::sym {

enum class Op : u8 {
  Const,
  BoolConst,
  Sym,
  // bitvector, two children of equal width
  Add, Sub, Mul, DivS, DivU, RemS, RemU,
  And, Or, Xor, Shl, ShrS, ShrU,
  // bitvector, one child
  BvNot,
  // comparisons: two bv children, bool result
  Eq, Ne, LtS, LtU, LeS, LeU,
  // boolean connectives
  BAnd, BOr, BNot,
  // ite: bool cond, two arms of equal sort
  Ite,
  // structure
  Extract,   // bits [lo..hi] of the child, inclusive
  Concat,    // child0 = high bits, child1 = low bits
  ZExt, SExt // widen child to `width`
};

struct Node;
using ExprRef = std::shared_ptr<const Node>;

struct Node {
  Op op;
  u32 width;  // result width in bits; 0 = bool
  u64 cval = 0;            // Const payload (masked) / BoolConst 0|1
  u32 lo = 0, hi = 0;      // Extract range
  std::string name;        // Sym
  std::vector<ExprRef> kids;
  u64 hash = 0;

  bool is_const() const { return op == Op::Const; }
  bool is_bool_const() const { return op == Op::BoolConst; }
  bool is_bool() const { return width == 0; }
};

inline u64 mask_width(u64 v, u32 w) { return w >= 64 ? v : (v & ((1ull << w) - 1)); }

inline u64 node_hash(const Node& n) {
  u64 h = hash_mix((static_cast<u64>(n.op) << 40) ^ (static_cast<u64>(n.width) << 8));
  h = hash_combine(h, n.cval);
  h = hash_combine(h, (static_cast<u64>(n.lo) << 32) | n.hi);
  if (!n.name.empty()) h = hash_combine(h, hash_str(n.name));
  for (const auto& k : n.kids) h = hash_combine(h, k->hash);
  return h;
}

inline ExprRef make_node(Node n) {
  n.hash = node_hash(n);
  return std::make_shared<const Node>(std::move(n));
}

inline bool struct_eq(const ExprRef& a, const ExprRef& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->op != b->op || a->width != b->width) return false;
  if (a->cval != b->cval || a->lo != b->lo || a->hi != b->hi || a->name != b->name) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); i++)
    if (!struct_eq(a->kids[i], b->kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// constructors
// ---------------------------------------------------------------------------

inline ExprRef mk_const(u32 width, u64 v) {
  Node n;
  n.op = Op::Const;
  n.width = width;
  n.cval = mask_width(v, width);
  return make_node(std::move(n));
}

inline ExprRef mk_bool(bool b) {
  Node n;
  n.op = Op::BoolConst;
  n.width = 0;
  n.cval = b ? 1 : 0;
  return make_node(std::move(n));
}

inline ExprRef mk_sym(u32 width, std::string name) {
  Node n;
  n.op = Op::Sym;
  n.width = width;
  n.name = std::move(name);
  return make_node(std::move(n));
}

namespace detail {

inline i64 to_signed(u64 v, u32 w) {
  if (w >= 64) return static_cast<i64>(v);
  u64 sign = 1ull << (w - 1);
  return (v & sign) ? static_cast<i64>(v | ~((1ull << w) - 1)) : static_cast<i64>(v);
}

// Concrete semantics of every binary bitvector op; division by zero is the
// caller's problem (executor traps first, folding refuses).
inline u64 fold_bv2(Op op, u64 a, u64 b, u32 w) {
  u64 m = mask_width(~0ull, w);
  switch (op) {
    case Op::Add: return (a + b) & m;
    case Op::Sub: return (a - b) & m;
    case Op::Mul: return (a * b) & m;
    case Op::DivU: return b ? (a / b) & m : 0;
    case Op::RemU: return b ? (a % b) & m : 0;
    case Op::DivS: {
      i64 sa = to_signed(a, w), sb = to_signed(b, w);
      if (sb == 0) return 0;
      if (sa == std::numeric_limits<i64>::min() && sb == -1) return mask_width(static_cast<u64>(sa), w);
      return mask_width(static_cast<u64>(sa / sb), w);
    }
    case Op::RemS: {
      i64 sa = to_signed(a, w), sb = to_signed(b, w);
      if (sb == 0) return 0;
      if (sb == -1) return 0;  // INT_MIN % -1 is 0 in two's complement
      return mask_width(static_cast<u64>(sa % sb), w);
    }
    case Op::And: return a & b;
    case Op::Or: return a | b;
    case Op::Xor: return a ^ b;
    case Op::Shl: return b >= w ? 0 : (a << b) & m;
    case Op::ShrU: return b >= w ? 0 : a >> b;
    case Op::ShrS: {
      i64 sa = to_signed(a, w);
      if (b >= w) return mask_width(static_cast<u64>(sa < 0 ? -1 : 0), w);
      return mask_width(static_cast<u64>(sa >> b), w);
    }
    default: break;
  }
  assert(false && "fold_bv2: not a binary bv op");
  return 0;
}

inline bool fold_cmp(Op op, u64 a, u64 b, u32 w) {
  switch (op) {
    case Op::Eq: return a == b;
    case Op::Ne: return a != b;
    case Op::LtU: return a < b;
    case Op::LeU: return a <= b;
    case Op::LtS: return to_signed(a, w) < to_signed(b, w);
    case Op::LeS: return to_signed(a, w) <= to_signed(b, w);
    default: break;
  }
  assert(false && "fold_cmp: not a comparison");
  return false;
}

}  // namespace detail

inline ExprRef mk_bv2(Op op, ExprRef a, ExprRef b) {
  assert(a->width == b->width && a->width > 0);
  u32 w = a->width;
  bool div_like = op == Op::DivS || op == Op::DivU || op == Op::RemS || op == Op::RemU;
  if (a->is_const() && b->is_const() && !(div_like && b->cval == 0))
    return mk_const(w, detail::fold_bv2(op, a->cval, b->cval, w));
  // cheap identities; deliberately conservative
  if (b->is_const() && b->cval == 0) {
    if (op == Op::Add || op == Op::Sub || op == Op::Or || op == Op::Xor ||
        op == Op::Shl || op == Op::ShrS || op == Op::ShrU)
      return a;
    if (op == Op::Mul || op == Op::And) return mk_const(w, 0);
  }
  if (a->is_const() && a->cval == 0) {
    if (op == Op::Add || op == Op::Or || op == Op::Xor) return b;
    if (op == Op::Mul || op == Op::And || op == Op::Shl || op == Op::ShrS || op == Op::ShrU)
      return mk_const(w, 0);
  }
  if (b->is_const() && b->cval == 1 && (op == Op::Mul || op == Op::DivU)) return a;
  if (b->is_const() && b->cval == mask_width(~0ull, w) && op == Op::And) return a;
  if (a->is_const() && a->cval == 1 && op == Op::Mul) return b;
  Node n;
  n.op = op;
  n.width = w;
  n.kids = {std::move(a), std::move(b)};
  return make_node(std::move(n));
}

inline ExprRef mk_bvnot(ExprRef a) {
  if (a->is_const()) return mk_const(a->width, ~a->cval);
  Node n;
  n.op = Op::BvNot;
  n.width = a->width;
  n.kids = {std::move(a)};
  return make_node(std::move(n));
}

inline ExprRef mk_cmp(Op op, ExprRef a, ExprRef b) {
  assert(a->width == b->width && a->width > 0);
  if (a->is_const() && b->is_const()) return mk_bool(detail::fold_cmp(op, a->cval, b->cval, a->width));
  if (struct_eq(a, b)) {
    if (op == Op::Eq || op == Op::LeS || op == Op::LeU) return mk_bool(true);
    if (op == Op::Ne || op == Op::LtS || op == Op::LtU) return mk_bool(false);
  }
  Node n;
  n.op = op;
  n.width = 0;
  n.kids = {std::move(a), std::move(b)};
  return make_node(std::move(n));
}

inline ExprRef mk_not(ExprRef a) {
  assert(a->is_bool());
  if (a->is_bool_const()) return mk_bool(!a->cval);
  if (a->op == Op::BNot) return a->kids[0];
  if (a->op == Op::Eq) return mk_cmp(Op::Ne, a->kids[0], a->kids[1]);
  if (a->op == Op::Ne) return mk_cmp(Op::Eq, a->kids[0], a->kids[1]);
  Node n;
  n.op = Op::BNot;
  n.width = 0;
  n.kids = {std::move(a)};
  return make_node(std::move(n));
}

inline ExprRef mk_bool2(Op op, ExprRef a, ExprRef b) {
  assert(a->is_bool() && b->is_bool());
  if (op == Op::BAnd) {
    if (a->is_bool_const()) return a->cval ? b : mk_bool(false);
    if (b->is_bool_const()) return b->cval ? a : mk_bool(false);
  } else {
    if (a->is_bool_const()) return a->cval ? mk_bool(true) : b;
    if (b->is_bool_const()) return b->cval ? mk_bool(true) : a;
  }
  Node n;
  n.op = op;
  n.width = 0;
  n.kids = {std::move(a), std::move(b)};
  return make_node(std::move(n));
}

inline ExprRef mk_ite(ExprRef c, ExprRef t, ExprRef f) {
  assert(c->is_bool() && t->width == f->width);
  if (c->is_bool_const()) return c->cval ? t : f;
  if (struct_eq(t, f)) return t;
  Node n;
  n.op = Op::Ite;
  n.width = t->width;
  n.kids = {std::move(c), std::move(t), std::move(f)};
  return make_node(std::move(n));
}

inline ExprRef mk_extract(ExprRef a, u32 hi, u32 lo) {
  assert(hi >= lo && hi < a->width);
  u32 w = hi - lo + 1;
  if (lo == 0 && hi == a->width - 1) return a;
  if (a->is_const()) return mk_const(w, a->cval >> lo);
  if (a->op == Op::Extract)  // extract of extract composes
    return mk_extract(a->kids[0], a->lo + hi, a->lo + lo);
  if (a->op == Op::Concat) {
    u32 low_w = a->kids[1]->width;
    if (hi < low_w) return mk_extract(a->kids[1], hi, lo);
    if (lo >= low_w) return mk_extract(a->kids[0], hi - low_w, lo - low_w);
  }
  if ((a->op == Op::ZExt || a->op == Op::SExt) && hi < a->kids[0]->width)
    return mk_extract(a->kids[0], hi, lo);
  if (a->op == Op::ZExt && lo >= a->kids[0]->width) return mk_const(w, 0);
  Node n;
  n.op = Op::Extract;
  n.width = w;
  n.lo = lo;
  n.hi = hi;
  n.kids = {std::move(a)};
  return make_node(std::move(n));
}

inline ExprRef mk_concat(ExprRef high, ExprRef low) {
  u32 w = high->width + low->width;
  assert(w <= 64);
  if (high->is_const() && low->is_const())
    return mk_const(w, (high->cval << low->width) | low->cval);
  if (high->is_const() && high->cval == 0) {
    Node z;
    z.op = Op::ZExt;
    z.width = w;
    z.kids = {std::move(low)};
    return make_node(std::move(z));
  }
  // adjacent slices of the same subject merge back into one extract
  if (high->op == Op::Extract && low->op == Op::Extract &&
      high->kids[0].get() == low->kids[0].get() && low->hi + 1 == high->lo)
    return mk_extract(high->kids[0], high->hi, low->lo);
  Node n;
  n.op = Op::Concat;
  n.width = w;
  n.kids = {std::move(high), std::move(low)};
  return make_node(std::move(n));
}

inline ExprRef mk_zext(ExprRef a, u32 width) {
  assert(width >= a->width);
  if (width == a->width) return a;
  if (a->is_const()) return mk_const(width, a->cval);
  if (a->op == Op::ZExt) return mk_zext(a->kids[0], width);
  Node n;
  n.op = Op::ZExt;
  n.width = width;
  n.kids = {std::move(a)};
  return make_node(std::move(n));
}

inline ExprRef mk_sext(ExprRef a, u32 width) {
  assert(width >= a->width);
  if (width == a->width) return a;
  if (a->is_const()) return mk_const(width, static_cast<u64>(detail::to_signed(a->cval, a->width)));
  Node n;
  n.op = Op::SExt;
  n.width = width;
  n.kids = {std::move(a)};
  return make_node(std::move(n));
}

// bool -> 0/1 bitvector of the given width (wasm comparison results)
inline ExprRef mk_bool_to_bv(ExprRef b, u32 width) {
  assert(b->is_bool());
  if (b->is_bool_const()) return mk_const(width, b->cval);
  return mk_ite(std::move(b), mk_const(width, 1), mk_const(width, 0));
}

// bitvector -> bool via "!= 0" (wasm branch conditions)
inline ExprRef mk_nonzero(ExprRef v) { return mk_cmp(Op::Ne, v, mk_const(v->width, 0)); }
inline ExprRef mk_is_zero(ExprRef v) { return mk_cmp(Op::Eq, v, mk_const(v->width, 0)); }

// Like mk_nonzero, but undoes a bool->bv bridge so comparison results that
// round-trip through an i32 (cmp, br_if) yield the bare predicate again.
inline ExprRef mk_truthy(const ExprRef& v) {
  if (v->op == Op::Ite && v->kids[1]->is_const() && v->kids[1]->cval == 1 &&
      v->kids[2]->is_const() && v->kids[2]->cval == 0)
    return v->kids[0];
  return mk_nonzero(v);
}

// Counting ops are lowered eagerly (no dedicated node kinds).
inline ExprRef mk_clz(ExprRef a) {
  u32 w = a->width;
  if (a->is_const()) {
    u64 v = a->cval;
    u32 n = 0;
    for (i32 bit = static_cast<i32>(w) - 1; bit >= 0 && !((v >> bit) & 1); bit--) n++;
    return mk_const(w, n);
  }
  ExprRef acc = mk_const(w, w);  // all zero
  for (u32 bit = 0; bit < w; bit++) {
    ExprRef is_one = mk_cmp(Op::Eq, mk_extract(a, bit, bit), mk_const(1, 1));
    acc = mk_ite(std::move(is_one), mk_const(w, w - 1 - bit), std::move(acc));
  }
  return acc;
}

inline ExprRef mk_ctz(ExprRef a) {
  u32 w = a->width;
  if (a->is_const()) {
    u64 v = a->cval;
    u32 n = 0;
    while (n < w && !((v >> n) & 1)) n++;
    return mk_const(w, n);
  }
  ExprRef acc = mk_const(w, w);
  for (i32 bit = static_cast<i32>(w) - 1; bit >= 0; bit--) {
    ExprRef is_one = mk_cmp(Op::Eq, mk_extract(a, bit, bit), mk_const(1, 1));
    acc = mk_ite(std::move(is_one), mk_const(w, static_cast<u64>(bit)), std::move(acc));
  }
  return acc;
}

inline ExprRef mk_popcnt(ExprRef a) {
  u32 w = a->width;
  if (a->is_const()) {
    u64 v = a->cval;
    u32 n = 0;
    for (u32 bit = 0; bit < w; bit++) n += (v >> bit) & 1;
    return mk_const(w, n);
  }
  ExprRef acc = mk_const(w, 0);
  for (u32 bit = 0; bit < w; bit++)
    acc = mk_bv2(Op::Add, std::move(acc), mk_zext(mk_extract(a, bit, bit), w));
  return acc;
}

inline ExprRef mk_rot(ExprRef a, ExprRef k, bool left) {
  u32 w = a->width;
  ExprRef km = mk_bv2(Op::And, std::move(k), mk_const(w, w - 1));
  ExprRef inv = mk_bv2(Op::And, mk_bv2(Op::Sub, mk_const(w, w), km), mk_const(w, w - 1));
  if (left)
    return mk_bv2(Op::Or, mk_bv2(Op::Shl, a, km), mk_bv2(Op::ShrU, a, inv));
  return mk_bv2(Op::Or, mk_bv2(Op::ShrU, a, km), mk_bv2(Op::Shl, a, inv));
}

// ---------------------------------------------------------------------------
// concrete evaluation (model validation, replay, fold cross-checks)
// ---------------------------------------------------------------------------

// Environment maps symbol names to concrete values; missing symbols default
// to zero so partially-assigned models still evaluate.
inline u64 eval_concrete(const ExprRef& e, const std::map<std::string, u64>& env) {
  switch (e->op) {
    case Op::Const: return e->cval;
    case Op::BoolConst: return e->cval;
    case Op::Sym: {
      auto it = env.find(e->name);
      return it == env.end() ? 0 : mask_width(it->second, e->width);
    }
    case Op::Add: case Op::Sub: case Op::Mul: case Op::DivS: case Op::DivU:
    case Op::RemS: case Op::RemU: case Op::And: case Op::Or: case Op::Xor:
    case Op::Shl: case Op::ShrS: case Op::ShrU:
      return detail::fold_bv2(e->op, eval_concrete(e->kids[0], env), eval_concrete(e->kids[1], env), e->width);
    case Op::BvNot: return mask_width(~eval_concrete(e->kids[0], env), e->width);
    case Op::Eq: case Op::Ne: case Op::LtS: case Op::LtU: case Op::LeS: case Op::LeU:
      return detail::fold_cmp(e->op, eval_concrete(e->kids[0], env), eval_concrete(e->kids[1], env), e->kids[0]->width);
    case Op::BAnd: return eval_concrete(e->kids[0], env) && eval_concrete(e->kids[1], env);
    case Op::BOr: return eval_concrete(e->kids[0], env) || eval_concrete(e->kids[1], env);
    case Op::BNot: return !eval_concrete(e->kids[0], env);
    case Op::Ite:
      return eval_concrete(e->kids[0], env) ? eval_concrete(e->kids[1], env) : eval_concrete(e->kids[2], env);
    case Op::Extract: return mask_width(eval_concrete(e->kids[0], env) >> e->lo, e->width);
    case Op::Concat:
      return (eval_concrete(e->kids[0], env) << e->kids[1]->width) | eval_concrete(e->kids[1], env);
    case Op::ZExt: return eval_concrete(e->kids[0], env);
    case Op::SExt:
      return mask_width(static_cast<u64>(detail::to_signed(eval_concrete(e->kids[0], env), e->kids[0]->width)), e->width);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// printing (debug / report form)
// ---------------------------------------------------------------------------

namespace detail {

inline const char* infix_token(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::DivS: return "/s";
    case Op::DivU: return "/u";
    case Op::RemS: return "%s";
    case Op::RemU: return "%u";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Xor: return "^";
    case Op::Shl: return "<<";
    case Op::ShrS: return ">>s";
    case Op::ShrU: return ">>u";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::LtS: return "<s";
    case Op::LtU: return "<u";
    case Op::LeS: return "<=s";
    case Op::LeU: return "<=u";
    case Op::BAnd: return "and";
    case Op::BOr: return "or";
    default: return "?";
  }
}

inline bool is_infix(Op op) {
  switch (op) {
    case Op::Add: case Op::Sub: case Op::Mul: case Op::DivS: case Op::DivU:
    case Op::RemS: case Op::RemU: case Op::And: case Op::Or: case Op::Xor:
    case Op::Shl: case Op::ShrS: case Op::ShrU: case Op::Eq: case Op::Ne:
    case Op::LtS: case Op::LtU: case Op::LeS: case Op::LeU: case Op::BAnd:
    case Op::BOr:
      return true;
    default:
      return false;
  }
}

}  // namespace detail

inline std::string to_string(const ExprRef& e) {
  auto child = [](const ExprRef& c) {
    std::string s = to_string(c);
    if (detail::is_infix(c->op)) return "(" + s + ")";
    return s;
  };
  switch (e->op) {
    case Op::Const: return std::to_string(e->cval);
    case Op::BoolConst: return e->cval ? "true" : "false";
    case Op::Sym: return e->name;
    case Op::BvNot: return "~" + child(e->kids[0]);
    case Op::BNot: return "not " + child(e->kids[0]);
    case Op::Ite:
      return "ite(" + to_string(e->kids[0]) + ", " + to_string(e->kids[1]) + ", " +
             to_string(e->kids[2]) + ")";
    case Op::Extract: {
      // byte-aligned slices print as name[b0:b1); anything else in bit form
      if (e->lo % 8 == 0 && (e->hi + 1) % 8 == 0)
        return child(e->kids[0]) + "[" + std::to_string(e->lo / 8) + ":" +
               std::to_string((e->hi + 1) / 8) + "]";
      return child(e->kids[0]) + "[bits " + std::to_string(e->lo) + ".." + std::to_string(e->hi) + "]";
    }
    case Op::Concat: return "concat(" + to_string(e->kids[0]) + ", " + to_string(e->kids[1]) + ")";
    case Op::ZExt: return "zext" + std::to_string(e->width) + "(" + to_string(e->kids[0]) + ")";
    case Op::SExt: return "sext" + std::to_string(e->width) + "(" + to_string(e->kids[0]) + ")";
    default:
      return child(e->kids[0]) + " " + detail::infix_token(e->op) + " " + child(e->kids[1]);
  }
}

// Collect distinct symbols reachable from an expression.
inline void collect_syms(const ExprRef& e, std::map<std::string, u32>& out) {
  if (e->op == Op::Sym) {
    out.emplace(e->name, e->width);
    return;
  }
  for (const auto& k : e->kids) collect_syms(k, out);
}

}  // namespace wasym::sym
