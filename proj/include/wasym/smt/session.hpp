#pragma once

// One incremental solver session: a child process plus a mirror of its
// assertion stack.
//
// The session never sends (reset); some SMT-LIB front-ends (notably wasm
// builds driven through a REPL shim) do not survive it. Instead, each query
// pops back to level 0 and builds its scopes fresh:
//
//   level 0: empty (nothing global survives between queries)
//   level 1: warm base — assertions replayed from a cached subset
//   level 2: delta — the atoms the cached subset is missing
//
// Declarations are tracked per level and die with their scope on pop, so
// unrelated queries may reuse a symbol name at a different sort without
// tripping redeclaration errors.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wasym/common.hpp"
#include "wasym/smt/constraints.hpp"
#include "wasym/smt/process.hpp"
#include "wasym/smt/translate.hpp"

namespace wasym::smt {

namespace detail {

// Minimal s-expression reader for solver replies (symbols, |symbols|,
// "strings", parenthesized lists).
struct Sexp {
  std::string atom;  // empty for lists
  std::vector<Sexp> kids;
  bool is_list() const { return atom.empty(); }
};

inline void skip_ws(const std::string& s, size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) i++;
}

inline Sexp parse_sexp(const std::string& s, size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) fail(Errc::solver_protocol, "truncated solver reply: %s", s.c_str());
  Sexp node;
  if (s[i] == '(') {
    i++;
    skip_ws(s, i);
    while (i < s.size() && s[i] != ')') {
      node.kids.push_back(parse_sexp(s, i));
      skip_ws(s, i);
    }
    if (i >= s.size()) fail(Errc::solver_protocol, "unbalanced solver reply: %s", s.c_str());
    i++;  // ')'
    node.atom.clear();
    if (node.kids.empty()) node.atom = "()";  // distinguish empty list from symbol
    return node;
  }
  if (s[i] == '|') {
    size_t end = s.find('|', i + 1);
    if (end == std::string::npos)
      fail(Errc::solver_protocol, "unterminated quoted symbol: %s", s.c_str());
    node.atom = s.substr(i + 1, end - i - 1);
    i = end + 1;
    return node;
  }
  if (s[i] == '"') {
    size_t j = i + 1;
    std::string out;
    while (j < s.size() && s[j] != '"') out += s[j++];
    if (j >= s.size()) fail(Errc::solver_protocol, "unterminated string: %s", s.c_str());
    node.atom = out;
    i = j + 1;
    return node;
  }
  size_t j = i;
  while (j < s.size() && s[j] != '(' && s[j] != ')' && s[j] != ' ' && s[j] != '\t' &&
         s[j] != '\n' && s[j] != '\r')
    j++;
  node.atom = s.substr(i, j - i);
  i = j;
  return node;
}

inline u64 parse_bv_literal(const Sexp& v) {
  if (!v.is_list()) {
    const std::string& a = v.atom;
    if (a == "true") return 1;
    if (a == "false") return 0;
    if (a.size() > 2 && a[0] == '#' && a[1] == 'x') return std::stoull(a.substr(2), nullptr, 16);
    if (a.size() > 2 && a[0] == '#' && a[1] == 'b') return std::stoull(a.substr(2), nullptr, 2);
    fail(Errc::solver_protocol, "unrecognized model literal `%s`", a.c_str());
  }
  // (_ bv<dec> <width>)
  if (v.kids.size() == 3 && v.kids[0].atom == "_" && v.kids[1].atom.rfind("bv", 0) == 0)
    return std::stoull(v.kids[1].atom.substr(2), nullptr, 10);
  fail(Errc::solver_protocol, "unrecognized model value form");
}

}  // namespace detail

class Session {
 public:
  Session(std::string command, int timeout_ms)
      : command_(std::move(command)), timeout_ms_(timeout_ms) {}

  const std::string& command() const { return command_; }
  u32 depth() const { return depth_; }
  u64 round_trips() const { return round_trips_; }

  // Drop the process (if any) and all bookkeeping; the next use respawns.
  void reset() {
    proc_.reset();
    depth_ = 0;
    declared_.assign(1, {});
    pending_.clear();
  }

  void push() {
    pending_ += "(push 1)\n";
    depth_++;
    declared_.emplace_back();
  }

  void pop_to(u32 level) {
    if (level >= depth_) return;
    pending_ += strf("(pop %u)\n", depth_ - level);
    depth_ = level;
    declared_.resize(depth_ + 1);
  }

  // Declare every symbol of `syms` not already visible, at the current level.
  void declare(const std::map<std::string, u32>& syms) {
    for (const auto& [name, width] : syms) {
      if (is_declared(name)) continue;
      pending_ += declare_text(name, width) + "\n";
      declared_[depth_].insert(name);
    }
  }

  void assert_atom(const sym::ExprRef& atom) {
    std::map<std::string, u32> syms;
    sym::collect_syms(atom, syms);
    declare(syms);
    pending_ += assert_text(atom) + "\n";
  }

  // One (check-sat) round-trip. Commands are buffered and shipped as a single
  // write here, so the whole query crosses the pipe in one piece. A deadline
  // overrun kills the process and reports Unknown — the next use starts a
  // fresh session. Any reply other than sat/unsat/unknown means the session
  // state can no longer be trusted and is treated as a crash (the facade
  // retries once on a fresh process).
  Verdict check_sat() {
    pending_ += "(check-sat)\n";
    flush();
    round_trips_++;
    auto reply = proc_->read_reply(timeout_ms_);
    if (!reply) {
      reset();  // child may be wedged mid-query
      return Verdict::Unknown;
    }
    if (*reply == "sat") return Verdict::Sat;
    if (*reply == "unsat") return Verdict::Unsat;
    if (*reply == "unknown") return Verdict::Unknown;
    std::string text = *reply;
    reset();
    fail(Errc::solver_crash, "unusable check-sat reply: %s", text.c_str());
  }

  // Values for the given symbols after a sat answer, as raw u64 (bools 0/1).
  // A reply that cannot be parsed is treated like a crash: the stream is
  // suspect, so the session dies and the caller's retry re-solves cold.
  std::map<std::string, u64> get_values(const std::map<std::string, u32>& syms) {
    if (syms.empty()) return {};
    std::string q = "(get-value (";
    bool first = true;
    for (const auto& [name, width] : syms) {
      (void)width;
      if (!first) q += ' ';
      q += sym_text(name);
      first = false;
    }
    q += "))\n";
    pending_ += q;
    flush();
    round_trips_++;
    auto reply = proc_->read_reply(timeout_ms_);
    if (!reply) {
      reset();
      fail(Errc::solver_crash, "solver timed out producing a model");
    }
    try {
      if (reply->rfind("(error", 0) == 0)
        fail(Errc::solver_protocol, "get-value failed: %s", reply->c_str());
      size_t i = 0;
      detail::Sexp root = detail::parse_sexp(*reply, i);
      if (!root.is_list())
        fail(Errc::solver_protocol, "malformed model reply: %s", reply->c_str());
      std::map<std::string, u64> out;
      for (const auto& pair : root.kids) {
        if (!pair.is_list() || pair.kids.size() != 2)
          fail(Errc::solver_protocol, "malformed model pair in: %s", reply->c_str());
        out[pair.kids[0].atom] = detail::parse_bv_literal(pair.kids[1]);
      }
      return out;
    } catch (const Error& e) {
      if (e.code() != Errc::solver_protocol) throw;
      reset();
      fail(Errc::solver_crash, "%s", e.what());
    }
  }

 private:
  // Spawn on demand and ship everything buffered since the last flush as one
  // write (one pipe chunk per query keeps the child's input framing simple).
  void flush() {
    if (!proc_ || !proc_->alive()) {
      proc_ = std::make_unique<SolverProcess>(command_);
      pending_ = "(set-option :print-success false)\n(set-logic QF_BV)\n" + pending_;
    }
    if (pending_.empty()) return;
    std::string out;
    out.swap(pending_);
    proc_->send(out);
  }

  bool is_declared(const std::string& name) const {
    for (const auto& level : declared_)
      if (level.count(name)) return true;
    return false;
  }

  std::string command_;
  int timeout_ms_;
  std::string pending_;  // commands buffered until the next round-trip
  std::unique_ptr<SolverProcess> proc_;
  u32 depth_ = 0;
  std::vector<std::set<std::string>> declared_{1};
  u64 round_trips_ = 0;
};

}  // namespace wasym::smt
