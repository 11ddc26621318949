#pragma once

// Canonical constraint sets: the unit of solver queries and cache keys.
//
// A ConstraintSet is an order-independent set of boolean atoms. Atoms are
// deduplicated structurally and sorted by (structural hash, printed form), so
// two sets built from the same atoms in any order produce identical atom
// sequences and identical keys. Literal `true` atoms are dropped; a literal
// `false` atom short-circuits the whole set (flag, no solving needed).

#include <algorithm>
#include <string>
#include <vector>

#include "wasym/common.hpp"
#include "wasym/sym/expr.hpp"

namespace wasym::smt {

enum class Verdict : u8 { Sat, Unsat, Unknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Sat: return "sat";
    case Verdict::Unsat: return "unsat";
    default: return "unknown";
  }
}

struct ConstraintSet {
  std::vector<sym::ExprRef> atoms;  // canonical order, deduplicated
  u64 key = 0;                      // identity over the canonical sequence
  bool literally_false = false;     // input contained a `false` atom

  size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }

  static ConstraintSet canonicalize(const std::vector<sym::ExprRef>& in) {
    ConstraintSet cs;
    cs.atoms.reserve(in.size());
    for (const auto& a : in) {
      if (!a->is_bool())
        fail(Errc::solver_protocol, "constraint atom is not boolean-sorted (width %u)", a->width);
      if (a->is_bool_const()) {
        if (a->cval == 0) cs.literally_false = true;
        continue;  // `true` atoms carry no information
      }
      cs.atoms.push_back(a);
    }
    std::sort(cs.atoms.begin(), cs.atoms.end(), atom_less);
    cs.atoms.erase(std::unique(cs.atoms.begin(), cs.atoms.end(),
                               [](const sym::ExprRef& a, const sym::ExprRef& b) {
                                 return sym::struct_eq(a, b);
                               }),
                   cs.atoms.end());
    u64 k = hash_mix(cs.atoms.size() + 1);
    for (const auto& a : cs.atoms) k = hash_combine(k, a->hash);
    cs.key = k;
    return cs;
  }

  // Strict-weak atom order: structural hash first, printed form as the
  // tiebreak for (rare) hash-equal but structurally distinct atoms.
  static bool atom_less(const sym::ExprRef& a, const sym::ExprRef& b) {
    if (a->hash != b->hash) return a->hash < b->hash;
    if (sym::struct_eq(a, b)) return false;
    return sym::to_string(a) < sym::to_string(b);
  }

  bool contains(const sym::ExprRef& a) const {
    auto lo = std::lower_bound(atoms.begin(), atoms.end(), a, atom_less);
    for (; lo != atoms.end() && (*lo)->hash == a->hash; ++lo)
      if (sym::struct_eq(*lo, a)) return true;
    return false;
  }

  bool set_equal(const ConstraintSet& other) const {
    if (key != other.key || atoms.size() != other.atoms.size()) return false;
    for (size_t i = 0; i < atoms.size(); i++)
      if (!sym::struct_eq(atoms[i], other.atoms[i])) return false;
    return true;
  }

  // True when every atom of this set occurs in `super` (not necessarily
  // strictly; callers wanting strictness compare sizes first).
  bool subset_of(const ConstraintSet& super) const {
    for (const auto& a : atoms)
      if (!super.contains(a)) return false;
    return true;
  }

  // Atoms of this set not present in `base` (canonical order preserved).
  std::vector<sym::ExprRef> minus(const ConstraintSet& base) const {
    std::vector<sym::ExprRef> out;
    for (const auto& a : atoms)
      if (!base.contains(a)) out.push_back(a);
    return out;
  }

  // Every symbol mentioned by any atom, with its width.
  std::map<std::string, u32> symbols() const {
    std::map<std::string, u32> syms;
    for (const auto& a : atoms) sym::collect_syms(a, syms);
    return syms;
  }
};

}  // namespace wasym::smt
