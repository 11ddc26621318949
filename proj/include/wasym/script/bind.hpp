#pragma once

// Static binding of a parsed guidance script to instruction sites.
//
// A behave binds to every (function, instruction) site where its locator —
// conjoined with the locators of its enclosing scopes — evaluates true:
//
//   func(f)    the site lies in a function addressable as f;
//   call(f)    the site is a direct call to a function addressable as f;
//   call(+)    the site belongs to that operator's integer instruction
//              family (i32.add / i64.add, and analogously for the rest);
//   use/def    the site's def-use label set contains (kind, name); indexed
//              arguments match on the base identifier only.
//
// Pilot scope locators pre-filter functions: advices of a scoped pilot only
// bind inside functions where the scope locator holds at some site.
//
// Pre/post behaves whose own locator names only functions span the function
// as a whole: `pre func(f)` binds at f's entry instruction and `post func(f)`
// at f's return sites (explicit returns plus the terminating end), so the
// assertion runs once around the activation instead of at every site.
//
// Identifiers that resolve to no function/local/global in the module raise
// script_unknown_identifier (a script/binary mismatch); behaves that resolve
// but bind to zero sites only produce a warning.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wasym/script/ast.hpp"
#include "wasym/script/defuse.hpp"
#include "wasym/wasm/module.hpp"

namespace wasym::script {

struct BoundHook {
  u32 pilot = 0;
  const Behave* behave = nullptr;
};

struct BoundScript {
  std::shared_ptr<const AesScript> script;
  // (function index, instruction offset) -> hooks at that site, script order
  std::map<std::pair<u32, u32>, std::vector<BoundHook>> sites;
  // pilot index -> variable declarations in source order
  std::map<u32, std::vector<const VarDecl*>> var_inits;
  // pilot index -> functions the pilot's advices may bind into
  std::map<u32, std::set<u32>> scope_funcs;
  std::map<u32, FuncLabels> labels;  // per defined function
  std::vector<std::string> warnings;

  const std::vector<BoundHook>* hooks_at(u32 func, u32 instr) const {
    auto it = sites.find({func, instr});
    return it == sites.end() ? nullptr : &it->second;
  }
  bool trivial() const { return !script || script->pilots.empty(); }
};

namespace detail {

inline bool call_family_matches(u16 op, BinOp b) {
  using namespace wasm::opc;
  switch (b) {
    case BinOp::Add: return op == I32Add || op == I64Add;
    case BinOp::Sub: return op == I32Sub || op == I64Sub;
    case BinOp::Mul: return op == I32Mul || op == I64Mul;
    case BinOp::Div:
      return op == I32DivS || op == I32DivU || op == I64DivS || op == I64DivU;
    case BinOp::Mod:
      return op == I32RemS || op == I32RemU || op == I64RemS || op == I64RemU;
    case BinOp::Lt: return op == I32LtS || op == I32LtU || op == I64LtS || op == I64LtU;
    case BinOp::Gt: return op == I32GtS || op == I32GtU || op == I64GtS || op == I64GtU;
    case BinOp::Le: return op == I32LeS || op == I32LeU || op == I64LeS || op == I64LeU;
    case BinOp::Ge: return op == I32GeS || op == I32GeU || op == I64GeS || op == I64GeU;
    case BinOp::Eq: return op == I32Eq || op == I64Eq;
    case BinOp::Ne: return op == I32Ne || op == I64Ne;
    case BinOp::And: return op == I32And || op == I64And;
    case BinOp::Or: return op == I32Or || op == I64Or;
  }
  return false;
}

struct Binder {
  const wasm::Module& m;
  const std::map<u32, FuncLabels>& labels;
  std::set<std::string> known_vars;   // all local/global names (incl. fallbacks)
  std::set<std::string> known_funcs;  // all function name candidates

  explicit Binder(const wasm::Module& mod, const std::map<u32, FuncLabels>& lbl)
      : m(mod), labels(lbl) {
    for (u32 f = 0; f < m.func_count(); ++f) {
      for (const std::string& n : func_name_candidates(m, f)) known_funcs.insert(n);
      if (m.is_imported_func(f)) continue;
      const wasm::FunctionBody& body = m.body_of(f);
      u32 nlocals = u32(m.type_of(f).params.size());
      for (const auto& [count, type] : body.local_decls) {
        (void)type;
        nlocals += count;
      }
      for (u32 l = 0; l < nlocals; ++l) known_vars.insert(m.names.local(f, l));
    }
    for (u32 g = 0; g < m.num_imported_globals() + u32(m.globals.size()); ++g)
      known_vars.insert(m.names.global(g));
  }

  void check_names(const LocPtr& loc) const {
    if (!loc) return;
    if (loc->kind != Loc::Kind::Atom) {
      check_names(loc->lhs);
      check_names(loc->rhs);
      return;
    }
    if (loc->arg_kind != Loc::ArgKind::Ident && loc->arg_kind != Loc::ArgKind::Indexed)
      return;
    bool is_func_ns = loc->atom == LocKind::Func || loc->atom == LocKind::Call;
    const std::set<std::string>& ns = is_func_ns ? known_funcs : known_vars;
    if (!ns.count(loc->arg))
      fail(Errc::script_unknown_identifier, "locator %s(%s) names an unknown %s",
           loc_kind_name(loc->atom), loc->arg.c_str(),
           is_func_ns ? "function" : "variable");
  }

  bool eval(const LocPtr& loc, u32 fidx, u32 instr) const {
    switch (loc->kind) {
      case Loc::Kind::And: return eval(loc->lhs, fidx, instr) && eval(loc->rhs, fidx, instr);
      case Loc::Kind::Or: return eval(loc->lhs, fidx, instr) || eval(loc->rhs, fidx, instr);
      case Loc::Kind::Not: return !eval(loc->lhs, fidx, instr);
      case Loc::Kind::Atom: break;
    }
    switch (loc->atom) {
      case LocKind::Func:
        if (loc->arg_kind == Loc::ArgKind::Bop || loc->arg_kind == Loc::ArgKind::Literal)
          return false;
        return func_matches_name(m, fidx, loc->arg);
      case LocKind::Call: {
        const wasm::Instr& ins = m.body_of(fidx).body[instr];
        if (loc->arg_kind == Loc::ArgKind::Bop)
          return call_family_matches(ins.op, loc->bop);
        if (loc->arg_kind == Loc::ArgKind::Literal) return false;
        return ins.op == wasm::opc::Call && func_matches_name(m, u32(ins.a), loc->arg);
      }
      default: {
        if (loc->arg_kind == Loc::ArgKind::Bop || loc->arg_kind == Loc::ArgKind::Literal)
          return false;
        auto it = labels.find(fidx);
        return it != labels.end() && it->second.has(instr, loc->atom, loc->arg);
      }
    }
  }
};

// true when every atom of the locator is a func(...) atom
inline bool loc_func_only(const LocPtr& l) {
  if (!l) return true;
  if (l->kind == Loc::Kind::Atom) return l->atom == LocKind::Func;
  return loc_func_only(l->lhs) && loc_func_only(l->rhs);
}

struct FlatBehave {
  const Behave* behave = nullptr;
  LocPtr effective;  // behave locator AND enclosing scope locators
  // A pre/post behave whose own locator only names functions spans the whole
  // function, not individual sites: pre binds at entry, post at return sites.
  bool func_extent = false;
};

inline void flatten(const std::vector<Advice>& advices, const LocPtr& scope_chain,
                    std::vector<FlatBehave>& behaves, std::vector<const VarDecl*>& vars) {
  for (const Advice& a : advices) {
    if (const auto* v = std::get_if<VarDecl>(&a.node)) {
      vars.push_back(v);
    } else if (const auto* b = std::get_if<Behave>(&a.node)) {
      LocPtr eff = scope_chain ? mk_loc_and(scope_chain, b->loc) : b->loc;
      bool extent = b->timing != Timing::Plain && loc_func_only(b->loc);
      behaves.push_back({b, std::move(eff), extent});
    } else if (const auto* sc = std::get_if<Scope>(&a.node)) {
      LocPtr chain = scope_chain ? mk_loc_and(scope_chain, sc->loc) : sc->loc;
      flatten(sc->advices, chain, behaves, vars);
    }
  }
}

}  // namespace detail

inline BoundScript bind(AesScript script, const wasm::Module& m,
                        std::map<u32, FuncLabels> labels) {
  BoundScript out;
  out.labels = std::move(labels);
  out.script = std::make_shared<const AesScript>(std::move(script));
  detail::Binder binder(m, out.labels);

  for (u32 pi = 0; pi < out.script->pilots.size(); ++pi) {
    const Pilot& p = out.script->pilots[pi];

    std::vector<detail::FlatBehave> behaves;
    std::vector<const VarDecl*> vars;
    detail::flatten(p.advices, nullptr, behaves, vars);
    out.var_inits[pi] = std::move(vars);

    binder.check_names(p.scope);
    for (const detail::FlatBehave& fb : behaves) binder.check_names(fb.effective);

    // scope pre-filter: functions where the scope locator holds at some site
    std::set<u32>& scoped = out.scope_funcs[pi];
    for (u32 f = m.num_imported_funcs(); f < m.func_count(); ++f) {
      if (!p.scope) {
        scoped.insert(f);
        continue;
      }
      u32 n = u32(m.body_of(f).body.size());
      for (u32 i = 0; i < n; ++i) {
        if (binder.eval(p.scope, f, i)) {
          scoped.insert(f);
          break;
        }
      }
    }

    for (const detail::FlatBehave& fb : behaves) {
      size_t bound = 0;
      for (u32 f : scoped) {
        const std::vector<wasm::Instr>& body = m.body_of(f).body;
        u32 n = u32(body.size());
        std::vector<u32> candidates;
        if (fb.func_extent && fb.behave->timing == Timing::Pre) {
          candidates.push_back(0);
        } else if (fb.func_extent) {  // post: explicit returns + the final end
          for (u32 i = 0; i + 1 < n; ++i)
            if (body[i].op == wasm::opc::Return) candidates.push_back(i);
          if (n) candidates.push_back(n - 1);
        } else {
          for (u32 i = 0; i < n; ++i) candidates.push_back(i);
        }
        for (u32 i : candidates) {
          if (!binder.eval(fb.effective, f, i)) continue;
          out.sites[{f, i}].push_back({pi, fb.behave});
          ++bound;
        }
      }
      if (bound == 0)
        out.warnings.push_back(strf("pilot %s: advice `%s` binds to no site",
                                    p.name.c_str(),
                                    detail::print_loc(*fb.effective, 0).c_str()));
    }
  }
  return out;
}

// convenience: labels for every defined function of a module
inline std::map<u32, FuncLabels> compute_all_labels(
    const wasm::Module& m, const std::set<std::string>& output_funcs = {"fd_write"}) {
  std::map<u32, FuncLabels> out;
  for (u32 f = m.num_imported_funcs(); f < m.func_count(); ++f)
    out[f] = compute_defuse_labels(m, wasm::build_cfg(m, f), output_funcs);
  return out;
}

inline std::string bindings_to_string(const wasm::Module& m, const BoundScript& b) {
  std::string out;
  for (u32 pi = 0; pi < b.script->pilots.size(); ++pi) {
    const Pilot& p = b.script->pilots[pi];
    out += strf("pilot %s\n", p.name.c_str());
    auto sf = b.scope_funcs.find(pi);
    if (sf != b.scope_funcs.end() && p.scope) {
      out += "  scope:";
      for (u32 f : sf->second) out += " " + m.names.func(f);
      out += "\n";
    }
  }
  for (const auto& [site, hooks] : b.sites) {
    out += strf("%s @ %u:", m.names.func(site.first).c_str(), site.second);
    for (const BoundHook& h : hooks) {
      const char* t = h.behave->timing == Timing::Pre    ? "pre "
                      : h.behave->timing == Timing::Post ? "post "
                                                         : "";
      out += strf(" [%s%s]", t, detail::print_loc(*h.behave->loc, 0).c_str());
    }
    out += "\n";
  }
  for (const std::string& w : b.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace wasym::script
