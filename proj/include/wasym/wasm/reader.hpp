#pragma once

// Bounds-checked byte reader with LEB128 helpers, plus the matching canonical
// writers used by the encoder.

#include <cstring>
#include <string>
#include <vector>

#include "wasym/common.hpp"

namespace wasym::wasm {

class Reader {
 public:
  Reader(const u8* data, size_t size) : data_(data), size_(size) {}
  explicit Reader(const std::vector<u8>& v) : Reader(v.data(), v.size()) {}

  size_t pos() const { return pos_; }
  size_t size() const { return size_; }
  bool done() const { return pos_ >= size_; }
  size_t remaining() const { return size_ - pos_; }

  u8 byte() {
    need(1);
    return data_[pos_++];
  }

  u8 peek() const {
    if (pos_ >= size_) fail(Errc::truncated, "unexpected end of input at offset %zu", pos_);
    return data_[pos_];
  }

  void bytes(u8* out, size_t n) {
    need(n);
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }

  std::vector<u8> blob(size_t n) {
    std::vector<u8> out(n);
    if (n) bytes(out.data(), n);
    return out;
  }

  void skip(size_t n) {
    need(n);
    pos_ += n;
  }

  u64 uleb(u32 max_bits = 64) {
    u64 result = 0;
    u32 shift = 0;
    while (true) {
      u8 b = byte();
      if (shift >= max_bits || (shift + 7 > max_bits && (b >> (max_bits - shift)) != 0))
        fail(Errc::malformed_section, "LEB128 value exceeds %u bits at offset %zu", max_bits,
             pos_ - 1);
      result |= u64(b & 0x7f) << shift;
      if (!(b & 0x80)) return result;
      shift += 7;
    }
  }

  i64 sleb(u32 max_bits = 64) {
    i64 result = 0;
    u32 shift = 0;
    u8 b;
    do {
      if (shift >= max_bits + 7)
        fail(Errc::malformed_section, "signed LEB128 too long at offset %zu", pos_);
      b = byte();
      result |= i64(u64(b & 0x7f) << shift);
      shift += 7;
    } while (b & 0x80);
    if (shift < 64 && (b & 0x40)) result |= -(i64(1) << shift);
    return result;
  }

  u32 u32leb() { return static_cast<u32>(uleb(32)); }

  std::string name() {
    u32 n = u32leb();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  Reader sub(size_t n) {
    need(n);
    Reader r(data_ + pos_, n);
    pos_ += n;
    return r;
  }

 private:
  void need(size_t n) const {
    if (pos_ + n > size_)
      fail(Errc::truncated, "need %zu bytes at offset %zu but only %zu remain", n, pos_,
           size_ - pos_);
  }

  const u8* data_;
  size_t size_;
  size_t pos_ = 0;
};

// --- canonical (shortest-form) LEB writers -----------------------------------

inline void put_uleb(std::vector<u8>& out, u64 v) {
  do {
    u8 b = v & 0x7f;
    v >>= 7;
    if (v) b |= 0x80;
    out.push_back(b);
  } while (v);
}

inline void put_sleb(std::vector<u8>& out, i64 v) {
  bool more = true;
  while (more) {
    u8 b = v & 0x7f;
    v >>= 7;
    if ((v == 0 && !(b & 0x40)) || (v == -1 && (b & 0x40))) more = false;
    else b |= 0x80;
    out.push_back(b);
  }
}

inline void put_name(std::vector<u8>& out, const std::string& s) {
  put_uleb(out, s.size());
  out.insert(out.end(), s.begin(), s.end());
}

inline void put_bytes(std::vector<u8>& out, const std::vector<u8>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

}  // namespace wasym::wasm
