#pragma once

// Solver facade: canonicalization, the three cache rules, incremental warm
// starts, crash recovery and model plumbing behind two calls:
//
//   check(atoms)      -> Sat | Unsat | Unknown
//   get_model(atoms)  -> validated assignment for every symbol mentioned
//
// Failure policy: a solver crash restarts the process and retries the query
// once from scratch; a second crash yields Unknown. A deadline overrun yields
// Unknown directly (the session kills and respawns the child). Unknown is
// never cached.
//
// Thread model: one Solver (one session/process) per worker thread; the
// QueryCache may be shared across Solvers.

#include <cstdlib>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wasym/common.hpp"
#include "wasym/smt/cache.hpp"
#include "wasym/smt/constraints.hpp"
#include "wasym/smt/session.hpp"

namespace wasym::smt {

struct SolverStats {
  u64 queries = 0;
  u64 sat = 0, unsat = 0, unknown = 0;
  u64 trivial = 0;            // literal true/false sets, no cache or solver involved
  u64 exact_hits = 0;         // rule 1
  u64 unsat_subset_hits = 0;  // rule 2
  u64 warm_starts = 0;        // rule 3
  u64 solver_calls = 0;       // (check-sat) round-trips, excluding audits
  u64 model_fetches = 0;      // (get-value) round-trips
  u64 model_resolves = 0;     // models recomputed after eviction/validation miss
  u64 restarts = 0;           // crash-triggered process restarts
  u64 retries = 0;            // queries that succeeded on the post-crash retry
  u64 audit_calls = 0;        // debug-mode rule-2 re-checks

  // Queries answered without any (check-sat) round-trip.
  u64 eliminated() const { return trivial + exact_hits + unsat_subset_hits; }
};

class Solver {
 public:
  Solver(std::string command, int timeout_ms = 20000,
         std::shared_ptr<QueryCache> cache = nullptr)
      : session_(std::move(command), timeout_ms),
        cache_(cache ? std::move(cache) : std::make_shared<QueryCache>()) {}

  QueryCache& cache() { return *cache_; }
  std::shared_ptr<QueryCache> cache_ptr() { return cache_; }
  const SolverStats& stats() const { return stats_; }

  // Debug mode: every rule-2 answer is re-checked against the live solver;
  // a disagreement is a cache-soundness bug and throws.
  void set_audit_unsat_subsets(bool on) { audit_rule2_ = on; }

  Verdict check(const std::vector<sym::ExprRef>& atoms) {
    return check(ConstraintSet::canonicalize(atoms));
  }

  Verdict check(const ConstraintSet& cs) {
    stats_.queries++;
    if (cs.literally_false) {
      stats_.trivial++;
      return count(Verdict::Unsat);
    }
    if (cs.empty()) {
      stats_.trivial++;
      return count(Verdict::Sat);
    }
    if (auto hit = cache_->find_exact(cs)) {
      stats_.exact_hits++;
      return count(hit->verdict);
    }
    if (auto sub = cache_->find_unsat_subset(cs)) {
      if (audit_rule2_) audit_unsat(cs, *sub);
      stats_.unsat_subset_hits++;
      cache_->store(cs, Verdict::Unsat, std::nullopt);
      return count(Verdict::Unsat);
    }
    auto warm = cache_->find_max_sat_subset(cs);
    if (warm) stats_.warm_starts++;

    std::optional<Model> model;
    Verdict v = solve_guarded(cs, warm, &model);
    if (v != Verdict::Unknown) cache_->store(cs, v, std::move(model));
    return count(v);
  }

  // A validated assignment covering every symbol in the set, or nullopt when
  // the set is not (provably) satisfiable. Symbols absent from the returned
  // map are unconstrained; read them through model_value (defaults to 0).
  std::optional<Model> get_model(const std::vector<sym::ExprRef>& atoms) {
    return get_model(ConstraintSet::canonicalize(atoms));
  }

  std::optional<Model> get_model(const ConstraintSet& cs) {
    if (cs.literally_false) return std::nullopt;
    if (cs.empty()) return Model{};
    auto hit = cache_->find_exact(cs);
    if (!hit) {
      if (check(cs) != Verdict::Sat) return std::nullopt;
      hit = cache_->find_exact(cs);
    } else if (hit->verdict != Verdict::Sat) {
      return std::nullopt;
    }
    if (hit && hit->model && validate_model(cs, *hit->model)) return hit->model;

    // Model evicted (or failed re-validation): solve again, cold.
    stats_.model_resolves++;
    std::optional<Model> model;
    Verdict v = solve_guarded(cs, std::nullopt, &model);
    if (v != Verdict::Sat || !model) return std::nullopt;
    if (!validate_model(cs, *model))
      fail(Errc::solver_protocol, "solver model does not satisfy its own constraints");
    cache_->store(cs, Verdict::Sat, model);
    return model;
  }

  static u64 model_value(const Model& m, const std::string& name) {
    auto it = m.find(name);
    return it == m.end() ? 0 : it->second;
  }

  // Substitute the assignment into every atom and constant-fold; all must
  // come out true.
  static bool validate_model(const ConstraintSet& cs, const Model& m) {
    for (const auto& a : cs.atoms)
      if (sym::eval_concrete(a, m) != 1) return false;
    return true;
  }

 private:
  Verdict count(Verdict v) {
    switch (v) {
      case Verdict::Sat: stats_.sat++; break;
      case Verdict::Unsat: stats_.unsat++; break;
      case Verdict::Unknown: stats_.unknown++; break;
    }
    return v;
  }

  // One solve attempt with crash recovery: restart + cold retry once, then
  // give up as Unknown.
  Verdict solve_guarded(const ConstraintSet& cs, const std::optional<ConstraintSet>& warm,
                        std::optional<Model>* model) {
    try {
      return solve_once(cs, warm, model);
    } catch (const Error& e) {
      if (e.code() != Errc::solver_crash) throw;
      stats_.restarts++;
      session_.reset();
    }
    try {
      Verdict v = solve_once(cs, std::nullopt, model);
      stats_.retries++;
      return v;
    } catch (const Error& e) {
      if (e.code() != Errc::solver_crash) throw;
      stats_.restarts++;
      session_.reset();
      return Verdict::Unknown;
    }
  }

  Verdict solve_once(const ConstraintSet& cs, const std::optional<ConstraintSet>& warm,
                     std::optional<Model>* model) {
    session_.pop_to(0);
    session_.push();  // level 1: warm base (or the whole set when cold)
    if (warm && !warm->empty()) {
      for (const auto& a : warm->atoms) session_.assert_atom(a);
      session_.push();  // level 2: delta
      for (const auto& a : cs.minus(*warm)) session_.assert_atom(a);
    } else {
      for (const auto& a : cs.atoms) session_.assert_atom(a);
    }
    stats_.solver_calls++;
    Verdict v = session_.check_sat();
    if (v == Verdict::Sat && model) {
      stats_.model_fetches++;
      *model = session_.get_values(cs.symbols());
    }
    return v;
  }

  void audit_unsat(const ConstraintSet& cs, const ConstraintSet& justification) {
    Verdict v;
    try {
      session_.pop_to(0);
      session_.push();
      for (const auto& a : cs.atoms) session_.assert_atom(a);
      stats_.audit_calls++;
      v = session_.check_sat();
      session_.pop_to(0);
    } catch (const Error& e) {
      // An audit is advisory; a dying session cannot disprove anything.
      if (e.code() != Errc::solver_crash) throw;
      session_.reset();
      return;
    }
    if (v == Verdict::Sat)
      throw std::logic_error(strf(
          "query cache unsoundness: rule-2 subset (%zu atoms) claims UNSAT but the "
          "full set (%zu atoms) is sat",
          justification.size(), cs.size()));
  }

  Session session_;
  std::shared_ptr<QueryCache> cache_;
  SolverStats stats_;
  bool audit_rule2_ = false;
};

namespace detail {

inline bool on_path(const std::string& exe) {
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string dirs(path), cur;
  for (size_t i = 0; i <= dirs.size(); i++) {
    if (i < dirs.size() && dirs[i] != ':') {
      cur += dirs[i];
      continue;
    }
    if (!cur.empty() && ::access((cur + "/" + exe).c_str(), X_OK) == 0) return true;
    cur.clear();
  }
  return false;
}

}  // namespace detail

// Solver command resolution: explicit flag > WASYM_SOLVER > `z3 -in` on PATH
// > the bundled Node shim (relative to the given repo root).
inline std::string resolve_solver_command(const std::string& explicit_cmd = "",
                                          const std::string& repo_root = ".") {
  if (!explicit_cmd.empty()) return explicit_cmd;
  if (const char* env = std::getenv("WASYM_SOLVER"); env && *env) return env;
  if (detail::on_path("z3")) return "z3 -in";
  std::string shim = repo_root + "/solver/z3pipe.js";
  if (::access(shim.c_str(), R_OK) == 0 && detail::on_path("node")) return "node " + shim;
  fail(Errc::bad_config,
       "no SMT solver available: pass --solver-path, set WASYM_SOLVER, or install z3");
}

}  // namespace wasym::smt
