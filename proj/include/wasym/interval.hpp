#pragma once

// Interval partitioning of a control-flow graph.
//
// Headers are processed FIFO starting from the entry. An interval grows by
// absorbing (in ascending node order) any node all of whose immediate
// predecessors already lie in the interval; nodes with only some
// predecessors inside become headers of later intervals. Cross-interval
// edges that point back to an earlier header are kept as pseudo-edges of the
// derived graph. If the derived-graph sequence stops shrinking before
// reaching a single node the graph is irreducible and the partition falls
// back to singleton intervals.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "wasym/common.hpp"
#include "wasym/wasm/cfg.hpp"

namespace wasym {

struct IntervalPartition {
  // Intervals in creation order; each lists its members ascending and
  // members[0]'s header is `headers[k]` (the header need not be the smallest
  // member, so it is stored separately).
  std::vector<u32> headers;
  std::vector<std::vector<u32>> members;
  std::vector<u32> interval_of;  // node -> index into `headers`
  std::vector<std::pair<u32, u32>> pseudo_edges;  // cross edges into earlier-or-same headers
  bool irreducible = false;
  std::vector<std::string> warnings;

  u32 header_of(u32 node) const { return headers[interval_of[node]]; }
};

namespace detail {

struct Digraph {
  u32 n = 0;
  std::vector<std::vector<u32>> preds;
  std::vector<std::vector<u32>> succs;

  explicit Digraph(u32 nodes, const std::vector<std::pair<u32, u32>>& edges) : n(nodes) {
    preds.resize(n);
    succs.resize(n);
    std::set<std::pair<u32, u32>> seen;
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) fail(Errc::bad_index, "edge (%u,%u) out of range", u, v);
      if (!seen.insert({u, v}).second) continue;  // parallel edges collapse
      succs[u].push_back(v);
      preds[v].push_back(u);
    }
  }
};

inline IntervalPartition partition_once(const Digraph& g, u32 entry) {
  IntervalPartition p;
  p.interval_of.assign(g.n, ~0u);
  std::vector<bool> queued(g.n, false);
  std::vector<u32> fifo;
  size_t head = 0;
  fifo.push_back(entry);
  queued[entry] = true;

  while (head < fifo.size()) {
    u32 h = fifo[head++];
    if (p.interval_of[h] != ~0u) continue;  // absorbed since it was queued
    u32 idx = u32(p.headers.size());
    p.headers.push_back(h);
    p.members.push_back({h});
    p.interval_of[h] = idx;

    bool changed = true;
    while (changed) {
      changed = false;
      for (u32 m = 0; m < g.n; ++m) {
        if (p.interval_of[m] != ~0u || g.preds[m].empty()) continue;
        bool all_in = true;
        for (u32 q : g.preds[m])
          if (p.interval_of[q] != idx) {
            all_in = false;
            break;
          }
        if (all_in) {
          p.interval_of[m] = idx;
          p.members[idx].push_back(m);
          changed = true;
        }
      }
    }
    std::sort(p.members[idx].begin(), p.members[idx].end());

    for (u32 m = 0; m < g.n; ++m) {
      if (p.interval_of[m] != ~0u || queued[m]) continue;
      for (u32 q : g.preds[m])
        if (p.interval_of[q] == idx) {
          fifo.push_back(m);
          queued[m] = true;
          break;
        }
    }
  }
  return p;
}

}  // namespace detail

inline IntervalPartition compute_intervals(u32 n, const std::vector<std::pair<u32, u32>>& edges,
                                           u32 entry = 0) {
  detail::Digraph g(n, edges);
  IntervalPartition p = detail::partition_once(g, entry);

  // Nodes unreachable from the entry never enter any interval; give them
  // singleton intervals at the end so the partition still covers the graph.
  for (u32 m = 0; m < n; ++m) {
    if (p.interval_of[m] != ~0u) continue;
    p.interval_of[m] = u32(p.headers.size());
    p.headers.push_back(m);
    p.members.push_back({m});
    p.warnings.push_back(strf("node %u is unreachable from the entry", m));
  }

  // pseudo-edges: cross-interval edges that enter an earlier-or-same header
  for (u32 u = 0; u < n; ++u)
    for (u32 v : g.succs[u]) {
      u32 iu = p.interval_of[u], iv = p.interval_of[v];
      if (iu != iv && v == p.headers[iv] && iv <= iu) p.pseudo_edges.emplace_back(u, v);
    }

  // reducibility: derive interval graphs until a single node or a fixpoint.
  // The iteration runs on the subgraph reachable from the entry so stray
  // unreachable nodes cannot masquerade as a failure to collapse.
  {
    std::vector<u32> remap(n, ~0u);
    u32 cur_n = 0;
    {
      std::vector<bool> reach(n, false);
      std::vector<u32> work = {entry};
      reach[entry] = true;
      while (!work.empty()) {
        u32 u = work.back();
        work.pop_back();
        for (u32 v : g.succs[u])
          if (!reach[v]) {
            reach[v] = true;
            work.push_back(v);
          }
      }
      for (u32 m = 0; m < n; ++m)
        if (reach[m]) remap[m] = cur_n++;
    }
    std::vector<std::pair<u32, u32>> cur_edges;
    for (auto [u, v] : edges)
      if (remap[u] != ~0u && remap[v] != ~0u) cur_edges.emplace_back(remap[u], remap[v]);
    u32 cur_entry = remap[entry];
    while (cur_n > 1) {
      IntervalPartition cur =
          detail::partition_once(detail::Digraph(cur_n, cur_edges), cur_entry);
      if (cur.headers.size() == cur_n) {
        p.irreducible = true;
        break;
      }
      std::vector<std::pair<u32, u32>> next_edges;
      for (auto [u, v] : cur_edges) {
        u32 iu = cur.interval_of[u], iv = cur.interval_of[v];
        if (iu != iv) next_edges.emplace_back(iu, iv);
      }
      cur_entry = cur.interval_of[cur_entry];
      cur_n = u32(cur.headers.size());
      cur_edges.swap(next_edges);
    }
  }

  if (p.irreducible) {
    // fall back to singleton intervals so downstream context tracking stays sound
    IntervalPartition q;
    q.irreducible = true;
    q.warnings = p.warnings;
    q.warnings.push_back("graph is irreducible; falling back to singleton intervals");
    q.interval_of.resize(n);
    for (u32 m = 0; m < n; ++m) {
      q.interval_of[m] = m;
      q.headers.push_back(m);
      q.members.push_back({m});
    }
    for (auto [u, v] : edges)
      if (u != v && v <= u) q.pseudo_edges.emplace_back(u, v);
    return q;
  }
  return p;
}

inline IntervalPartition compute_intervals(const wasm::Cfg& g) {
  std::vector<std::pair<u32, u32>> edges;
  for (const wasm::CfgEdge& e : g.edges) edges.emplace_back(e.from, e.to);
  return compute_intervals(u32(g.blocks.size()), edges, 0);
}

// Text rendering for --dump-intervals.
inline std::string intervals_to_string(const IntervalPartition& p) {
  std::string s;
  for (u32 k = 0; k < p.headers.size(); ++k) {
    s += strf("I(%u) = {", p.headers[k]);
    for (u32 i = 0; i < p.members[k].size(); ++i)
      s += (i ? "," : "") + std::to_string(p.members[k][i]);
    s += "}\n";
  }
  for (auto [u, v] : p.pseudo_edges) s += strf("pseudo %u -> %u\n", u, v);
  if (p.irreducible) s += "irreducible\n";
  return s;
}

}  // namespace wasym
