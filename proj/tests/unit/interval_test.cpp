// Interval partitioning: the documented two-loop example, structural corner
// cases, irreducible fallback, the definitional checker, and a randomized
// sweep over structured reducible graphs.

#include "catch2/catch_amalgamated.hpp"
#include "oracle/interval_oracle.hpp"
#include "util/random_cfg.hpp"
#include "wasym/interval.hpp"
#include "wasym/wasm/decoder.hpp"
#include "wasym/wasm/writer.hpp"

using namespace wasym;

using EdgeList = std::vector<std::pair<u32, u32>>;

TEST_CASE("two chained loops partition into three intervals", "[interval]") {
  // 0 -> 1, 1 -> 2, 2 -> 3, 3 -> 4, 4 -> 5, 4 -> 6, 5 -> 1, 6 -> 4
  // First loop spans 1..3 (latch 5 lives in the second interval), second
  // loop spans 4..6.
  EdgeList edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {4, 6}, {5, 1}, {6, 4}};
  IntervalPartition p = compute_intervals(7, edges);

  REQUIRE(p.headers == std::vector<u32>{0, 1, 4});
  CHECK(p.members[0] == std::vector<u32>{0});
  CHECK(p.members[1] == std::vector<u32>{1, 2, 3});
  CHECK(p.members[2] == std::vector<u32>{4, 5, 6});
  CHECK(!p.irreducible);

  // the latch of the first loop crosses back to an earlier header
  REQUIRE(p.pseudo_edges.size() == 1);
  CHECK(p.pseudo_edges[0] == std::pair<u32, u32>{5, 1});

  CHECK(oracle::check_intervals(7, edges, p).ok);
}

TEST_CASE("single-node and straight-line graphs collapse into one interval", "[interval]") {
  {
    IntervalPartition p = compute_intervals(1, {});
    CHECK(p.headers == std::vector<u32>{0});
    CHECK(!p.irreducible);
  }
  {
    EdgeList edges = {{0, 1}, {1, 2}, {2, 3}};
    IntervalPartition p = compute_intervals(4, edges);
    CHECK(p.headers == std::vector<u32>{0});
    CHECK(p.members[0] == std::vector<u32>{0, 1, 2, 3});
    CHECK(oracle::check_intervals(4, edges, p).ok);
  }
  {
    // diamond
    EdgeList edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    IntervalPartition p = compute_intervals(4, edges);
    CHECK(p.headers == std::vector<u32>{0});
    CHECK(oracle::check_intervals(4, edges, p).ok);
  }
}

TEST_CASE("self loops become their own headers", "[interval]") {
  EdgeList edges = {{0, 1}, {1, 1}, {1, 2}};
  IntervalPartition p = compute_intervals(3, edges);
  REQUIRE(p.headers == std::vector<u32>{0, 1});
  CHECK(p.members[1] == std::vector<u32>{1, 2});
  CHECK(p.pseudo_edges.empty());  // 1->1 is internal to its interval
  CHECK(!p.irreducible);
  CHECK(oracle::check_intervals(3, edges, p).ok);
}

TEST_CASE("nested loops stay reducible and respect the checker", "[interval]") {
  // outer: 1..5 with latch 5->1; inner: 2..4 with latch 4->2
  EdgeList edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 2}, {4, 5}, {5, 1}, {5, 6}};
  IntervalPartition p = compute_intervals(7, edges);
  CHECK(!p.irreducible);
  CHECK(oracle::check_intervals(7, edges, p).ok);

  // The interval headed by the inner loop header swallows the whole inner
  // loop (its latch 4->2 is interval-internal), so the only pseudo-edge is
  // the outer latch re-entering the earlier header 1.
  REQUIRE(p.headers == std::vector<u32>{0, 1, 2});
  CHECK(p.members[2] == std::vector<u32>{2, 3, 4, 5, 6});
  REQUIRE(p.pseudo_edges.size() == 1);
  CHECK(p.pseudo_edges[0] == std::pair<u32, u32>{5, 1});
}

TEST_CASE("irreducible graphs fall back to singleton intervals with a warning", "[interval]") {
  // the classic two-entry loop
  EdgeList edges = {{0, 1}, {0, 2}, {1, 2}, {2, 1}};
  IntervalPartition p = compute_intervals(3, edges);
  CHECK(p.irreducible);
  REQUIRE(p.headers.size() == 3);
  for (u32 k = 0; k < 3; ++k) CHECK(p.members[k] == std::vector<u32>{k});
  REQUIRE(!p.warnings.empty());
  CHECK(p.warnings.back().find("irreducible") != std::string::npos);
}

TEST_CASE("definitional checker rejects corrupted partitions", "[interval]") {
  EdgeList edges = {{0, 1}, {1, 2}, {2, 1}, {2, 3}};
  IntervalPartition p = compute_intervals(4, edges);
  REQUIRE(oracle::check_intervals(4, edges, p).ok);

  SECTION("double coverage") {
    IntervalPartition q = p;
    q.members[0].push_back(1);
    CHECK(!oracle::check_intervals(4, edges, q).ok);
  }
  SECTION("side entry") {
    // move the loop body out of the loop interval: edge 1->2 then enters
    // interval of 2 away from any header
    IntervalPartition q = p;
    // force: {0,1} {2} {3} with headers 0,2,3 -- edge 2->1 now enters
    // interval 0 at node 1 which is not its header
    q.headers = {0, 2, 3};
    q.members = {{0, 1}, {2}, {3}};
    q.interval_of = {0, 0, 1, 2};
    q.pseudo_edges.clear();
    CHECK(!oracle::check_intervals(4, edges, q).ok);
  }
  SECTION("cycle avoiding the header") {
    EdgeList g2 = {{0, 1}, {1, 2}, {2, 1}, {1, 3}};
    IntervalPartition q;
    q.headers = {0};
    q.members = {{0, 1, 2, 3}};
    q.interval_of = {0, 0, 0, 0};
    CHECK(!oracle::check_intervals(4, g2, q).ok);  // 1<->2 avoids header 0
  }
  SECTION("maximality violation") {
    EdgeList g3 = {{0, 1}, {1, 2}};
    IntervalPartition q;
    q.headers = {0, 1};
    q.members = {{0}, {1, 2}};
    q.interval_of = {0, 1, 1};
    CHECK(!oracle::check_intervals(3, g3, q).ok);  // 1 is absorbable into I(0)
  }
}

TEST_CASE("random structured graphs partition cleanly", "[interval]") {
  SplitMix64 rng(0x1e7a11u);
  for (int iter = 0; iter < 60; ++iter) {
    testutil::RandomCfg g = testutil::random_reducible_cfg(rng, 4 + iter % 2);
    IntervalPartition p = compute_intervals(g.n, g.edges, g.entry);
    INFO("iteration " << iter << " with " << g.n << " nodes");
    CHECK(!p.irreducible);
    oracle::IntervalCheck c = oracle::check_intervals(g.n, g.edges, p);
    INFO(c.why);
    CHECK(c.ok);
  }
}

TEST_CASE("wasm loop functions produce checkable partitions", "[interval]") {
  using namespace wasym::wasm;
  ModuleBuilder b;
  u32 f = b.func("two_loops", b.type({ValType::I32}, {}));
  u32 i = b.local(f, ValType::I32);
  Asm a;
  // two sequential countdown loops over the same local
  for (int rep = 0; rep < 2; ++rep) {
    a.local_get(0).local_set(i);
    a.loop();
    a.local_get(i).i32_const(1).i32_sub().local_tee(i).i32_const(0).i32_gt_s().br_if(0);
    a.end();
  }
  b.set_body(f, std::move(a));
  Module m = decode(b.emit());
  Cfg g = build_cfg(m, 0);
  IntervalPartition p = compute_intervals(g);
  CHECK(!p.irreducible);
  std::vector<std::pair<u32, u32>> edges;
  for (auto& e : g.edges) edges.emplace_back(e.from, e.to);
  CHECK(oracle::check_intervals(u32(g.blocks.size()), edges, p).ok);
  // both loop headers must head their own intervals
  u32 loop_headers = 0;
  for (u32 k = 0; k < p.headers.size(); ++k) {
    u32 first = g.blocks[p.headers[k]].first;
    if (m.body_of(0).body[first].op == opc::Loop) ++loop_headers;
  }
  CHECK(loop_headers == 2);
  CHECK(intervals_to_string(p).find("pseudo") == std::string::npos);
}

TEST_CASE("interval text dump lists intervals and pseudo-edges", "[interval]") {
  EdgeList edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {4, 6}, {5, 1}, {6, 4}};
  std::string s = intervals_to_string(compute_intervals(7, edges));
  CHECK(s.find("I(0) = {0}") != std::string::npos);
  CHECK(s.find("I(1) = {1,2,3}") != std::string::npos);
  CHECK(s.find("I(4) = {4,5,6}") != std::string::npos);
  CHECK(s.find("pseudo 5 -> 1") != std::string::npos);
}
