#pragma once

// Linear memory for symbolic execution: an ordered set of disjoint
// byte-addressed regions [lo, hi) each holding one bitvector expression
// ((hi - lo) * 8 bits wide, little-endian: the byte at `lo` is the least
// significant one). Reads of never-written bytes yield zero. Loads and
// stores at symbolic addresses enumerate candidate positions and build
// nested ite chains terminating in a distinguished `invalid` symbol.

#include <map>
#include <optional>
#include <vector>

#include "wasym/sym/expr.hpp"

namespace wasym::sym {

constexpr u64 kWasmPageSize = 65536;

// Above this many candidate positions a symbolic access refuses to build the
// ite chain; the executor then asks the solver for up to 16 concrete models
// and forks instead.
constexpr u32 kConcretizeCap = 256;
constexpr u32 kConcretizeModelCap = 16;

struct MemRegion {
  u64 hi;        // exclusive end
  ExprRef value; // width (hi - lo) * 8
};

class LinearMemory {
 public:
  LinearMemory() = default;
  explicit LinearMemory(u64 pages) : pages_(pages) {}

  u64 pages() const { return pages_; }
  u64 byte_size() const { return pages_ * kWasmPageSize; }
  void grow(u64 delta_pages) { pages_ += delta_pages; }

  const std::map<u64, MemRegion>& regions() const { return regions_; }

  bool in_bounds(u64 addr, u32 bytes) const {
    return addr + bytes <= byte_size() && addr + bytes >= addr;
  }

  // -- concrete-address operations -----------------------------------------

  void store(u64 addr, u32 bytes, ExprRef value) {
    assert(value->width == bytes * 8);
    erase_range(addr, addr + bytes);
    regions_.emplace(addr, MemRegion{addr + bytes, std::move(value)});
  }

  ExprRef load(u64 addr, u32 bytes) const {
    // Assemble from low address upward; adjacent slices of one region fold
    // back together in mk_concat, so fully-covered loads stay slice-minimal.
    ExprRef acc;  // low part accumulated so far
    u64 pos = addr, end = addr + bytes;
    auto it = regions_.upper_bound(addr);
    if (it != regions_.begin()) {
      auto prev = std::prev(it);
      if (prev->second.hi > addr) it = prev;
    }
    while (pos < end) {
      u64 next_lo = it == regions_.end() ? end : it->first;
      if (pos < next_lo) {  // gap: unwritten bytes read as zero
        u64 g = std::min(end, next_lo) - pos;
        acc = prepend(std::move(acc), mk_const(static_cast<u32>(g * 8), 0));
        pos += g;
        continue;
      }
      u64 lo = it->first, hi = it->second.hi;
      u64 from = std::max(pos, lo), to = std::min(end, hi);
      ExprRef slice = mk_extract(it->second.value, static_cast<u32>((to - lo) * 8 - 1),
                                 static_cast<u32>((from - lo) * 8));
      acc = prepend(std::move(acc), std::move(slice));
      pos = to;
      ++it;
    }
    return acc;
  }

  // -- symbolic-address operations -----------------------------------------

  // Candidate positions for a width-`bytes` access: every address where the
  // access stays inside the initialized extent (gaps between regions are
  // zero-filled and count as initialized for this purpose).
  std::vector<u64> enumeration_domain(u32 bytes) const {
    std::vector<u64> out;
    if (regions_.empty()) return out;
    u64 lo = regions_.begin()->first;
    u64 hi = regions_.rbegin()->second.hi;
    if (hi - lo < bytes) return out;
    for (u64 a = lo; a + bytes <= hi; a++) {
      out.push_back(a);
      if (out.size() > kConcretizeCap)
        fail(Errc::concretization_overflow,
             strf("symbolic access domain exceeds %u candidates", kConcretizeCap));
    }
    return out;
  }

  // Load at a symbolic address: nested ite over the enumeration domain, with
  // the distinguished `invalid` symbol as the terminal arm.
  ExprRef load_symbolic(const ExprRef& addr, u32 bytes) const {
    std::vector<u64> dom = enumeration_domain(bytes);
    ExprRef acc = mk_sym(bytes * 8, "invalid");
    for (auto it = dom.rbegin(); it != dom.rend(); ++it) {
      ExprRef cond = mk_cmp(Op::Eq, addr, mk_const(addr->width, *it));
      acc = mk_ite(std::move(cond), load(*it, bytes), std::move(acc));
    }
    return acc;
  }

  // Store at a symbolic address: every byte of the affected span becomes
  // ite(addr = p, stored byte, old byte) for each candidate position p that
  // would write it. The span is rewritten as single-byte regions.
  void store_symbolic(const ExprRef& addr, u32 bytes, const ExprRef& value) {
    assert(value->width == bytes * 8);
    std::vector<u64> dom = enumeration_domain(bytes);
    if (dom.empty()) return;
    u64 span_lo = dom.front(), span_hi = dom.back() + bytes;
    std::vector<ExprRef> cell(static_cast<size_t>(span_hi - span_lo));
    for (u64 a = span_lo; a < span_hi; a++) cell[a - span_lo] = load(a, 1);
    for (u64 p : dom) {
      ExprRef hit = mk_cmp(Op::Eq, addr, mk_const(addr->width, p));
      for (u32 k = 0; k < bytes; k++) {
        ExprRef byte = mk_extract(value, k * 8 + 7, k * 8);
        auto& c = cell[p + k - span_lo];
        c = mk_ite(hit, std::move(byte), std::move(c));
      }
    }
    erase_range(span_lo, span_hi);
    for (u64 a = span_lo; a < span_hi; a++)
      regions_.emplace(a, MemRegion{a + 1, std::move(cell[a - span_lo])});
  }

 private:
  static ExprRef prepend(ExprRef low, ExprRef high_part) {
    if (!low) return high_part;
    return mk_concat(std::move(high_part), std::move(low));
  }

  // Remove [from, to) from the region map, splitting boundary regions.
  void erase_range(u64 from, u64 to) {
    auto it = regions_.upper_bound(from);
    if (it != regions_.begin()) {
      auto prev = std::prev(it);
      if (prev->second.hi > from) it = prev;
    }
    std::vector<std::pair<u64, MemRegion>> keep;
    while (it != regions_.end() && it->first < to) {
      u64 lo = it->first, hi = it->second.hi;
      ExprRef v = it->second.value;
      if (lo < from)
        keep.push_back({lo, {from, mk_extract(v, static_cast<u32>((from - lo) * 8 - 1), 0)}});
      if (hi > to)
        keep.push_back({to, {hi, mk_extract(v, static_cast<u32>((hi - lo) * 8 - 1),
                                            static_cast<u32>((to - lo) * 8))}});
      it = regions_.erase(it);
    }
    for (auto& kv : keep) regions_.emplace(kv.first, std::move(kv.second));
  }

  std::map<u64, MemRegion> regions_;
  u64 pages_ = 0;
};

}  // namespace wasym::sym
