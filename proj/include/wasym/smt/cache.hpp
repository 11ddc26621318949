#pragma once

// The three-rule query cache.
//
// Every solved constraint set is remembered with its verdict (and model when
// sat). A lookup tries, in order:
//
//   rule 1  exact hit:        the same set was solved before -> cached verdict
//   rule 2  unsat subset:     some cached UNSAT set is a strict subset of the
//                             query -> UNSAT (conjunction is monotone)
//   rule 3  maximal sat base: the largest cached SAT strict subset seeds the
//                             solver session; only the missing atoms are
//                             asserted on top
//
// Subset search uses a per-atom inverted index (atom hash -> entries) with
// candidate counting, then verifies containment structurally so hash
// collisions can never smuggle in a wrong rule-2 answer. Entries are LRU-
// bounded; model payloads are evicted before verdicts (a verdict-only entry
// still answers rules 1-3; its model can be re-solved on demand). The wire
// protocol exposes no learned-lemma channel, so warm starts replay the cached
// subset's assertions only.
//
// Thread model: a single mutex guards everything; lookups are cheap and
// writes are idempotent (equal keys get equal verdicts).

#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wasym/common.hpp"
#include "wasym/smt/constraints.hpp"

namespace wasym::smt {

using Model = std::map<std::string, u64>;

class QueryCache {
 public:
  explicit QueryCache(size_t capacity = 10000, size_t model_capacity = 1024)
      : capacity_(capacity), model_capacity_(model_capacity) {}

  struct ExactHit {
    Verdict verdict;
    std::optional<Model> model;
  };

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return order_.size();
  }
  size_t model_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return model_count_;
  }

  // Rule 1.
  std::optional<ExactHit> find_exact(const ConstraintSet& cs) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_key_.find(cs.key);
    if (it == by_key_.end()) return std::nullopt;
    for (auto ent : it->second) {
      if (!ent->cs.set_equal(cs)) continue;
      touch(ent);
      return ExactHit{ent->verdict, ent->model};
    }
    return std::nullopt;
  }

  // Rule 2: some cached UNSAT set strictly contained in cs. Returns the
  // justifying subset (for audits) or nullopt.
  std::optional<ConstraintSet> find_unsat_subset(const ConstraintSet& cs) {
    std::lock_guard<std::mutex> lock(mu_);
    Entry* best = nullptr;
    for_candidate_subsets(cs, [&](Entry* e) {
      if (e->verdict != Verdict::Unsat) return;
      if (!best || e->cs.size() < best->cs.size()) best = e;  // smallest justification
    });
    if (!best) return std::nullopt;
    touch(iter_of(best));
    return best->cs;
  }

  // Rule 3: the largest cached SAT set strictly contained in cs (ties go to
  // the most recently used).
  std::optional<ConstraintSet> find_max_sat_subset(const ConstraintSet& cs) {
    std::lock_guard<std::mutex> lock(mu_);
    Entry* best = nullptr;
    u64 best_stamp = 0;
    for_candidate_subsets(cs, [&](Entry* e) {
      if (e->verdict != Verdict::Sat) return;
      if (!best || e->cs.size() > best->cs.size() ||
          (e->cs.size() == best->cs.size() && e->stamp > best_stamp)) {
        best = e;
        best_stamp = e->stamp;
      }
    });
    if (!best) return std::nullopt;
    touch(iter_of(best));
    return best->cs;
  }

  // Record a fresh verdict (Unknown is never cached). Re-storing an existing
  // key overwrites in place.
  void store(const ConstraintSet& cs, Verdict v, std::optional<Model> model) {
    if (v == Verdict::Unknown || capacity_ == 0) return;
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_key_.find(cs.key);
    if (it != by_key_.end()) {
      for (auto ent : it->second) {
        if (!ent->cs.set_equal(cs)) continue;
        if (ent->model && !model) model = ent->model;  // keep a model we already had
        if (ent->model) model_count_--;
        ent->verdict = v;
        ent->model = std::move(model);
        if (ent->model) model_count_++;
        touch(ent);
        trim();
        return;
      }
    }
    order_.push_front(Entry{cs, v, std::move(model), ++stamp_counter_});
    auto ent = order_.begin();
    if (ent->model) model_count_++;
    by_key_[cs.key].push_back(ent);
    for (const auto& a : cs.atoms) by_atom_[a->hash].push_back(ent);
    trim();
  }

 private:
  struct Entry {
    ConstraintSet cs;
    Verdict verdict;
    std::optional<Model> model;
    u64 stamp;
  };
  using Iter = std::list<Entry>::iterator;

  void touch(Iter ent) {
    ent->stamp = ++stamp_counter_;
    order_.splice(order_.begin(), order_, ent);
  }

  Iter iter_of(Entry* e) {
    // std::list guarantees iterator = node; recover it from the stored lists.
    for (auto ent : by_key_[e->cs.key])
      if (&*ent == e) return ent;
    fail(Errc::solver_protocol, "cache index out of sync");
  }

  // Visit every entry whose atoms all occur in cs, with strictly fewer atoms.
  template <class F>
  void for_candidate_subsets(const ConstraintSet& cs, F&& visit) {
    std::unordered_map<Entry*, size_t> hits;
    for (const auto& a : cs.atoms) {
      auto it = by_atom_.find(a->hash);
      if (it == by_atom_.end()) continue;
      for (auto ent : it->second) hits[&*ent]++;
    }
    for (auto& [e, n] : hits) {
      if (n < e->cs.size() || e->cs.size() >= cs.size()) continue;
      if (!e->cs.subset_of(cs)) continue;  // structural re-check beats hash luck
      visit(e);
    }
  }

  void drop_entry(Iter ent) {
    auto scrub = [&](std::unordered_map<u64, std::vector<Iter>>& index, u64 key) {
      auto it = index.find(key);
      if (it == index.end()) return;
      auto& v = it->second;
      for (size_t i = 0; i < v.size(); i++) {
        if (v[i] != ent) continue;
        v[i] = v.back();
        v.pop_back();
        break;
      }
      if (v.empty()) index.erase(it);
    };
    scrub(by_key_, ent->cs.key);
    for (const auto& a : ent->cs.atoms) scrub(by_atom_, a->hash);
    if (ent->model) model_count_--;
    order_.erase(ent);
  }

  void trim() {
    while (order_.size() > capacity_) drop_entry(std::prev(order_.end()));
    if (model_count_ <= model_capacity_) return;
    for (auto it = std::prev(order_.end()); model_count_ > model_capacity_;) {
      bool at_front = it == order_.begin();
      auto cur = it;
      if (!at_front) --it;
      if (cur->model) {
        cur->model.reset();
        model_count_--;
      }
      if (at_front) break;
    }
  }

  size_t capacity_;
  size_t model_capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // MRU first
  std::unordered_map<u64, std::vector<Iter>> by_key_;
  std::unordered_map<u64, std::vector<Iter>> by_atom_;
  size_t model_count_ = 0;
  u64 stamp_counter_ = 0;
};

}  // namespace wasym::smt
