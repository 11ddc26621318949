#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace wasym {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i32 = std::int32_t;
using i64 = std::int64_t;

// Error taxonomy. Every failure the engine can produce carries one of these
// codes; the CLI maps categories to exit codes >= 10.
enum class Errc {
  // module decoding
  bad_magic,
  truncated,
  malformed_section,
  unsupported_opcode,
  bad_index,
  // guidance scripts
  script_syntax,
  script_unknown_identifier,
  script_invalid_timing,
  script_operand_outside_call,
  script_non_boolean_cons,
  script_index_on_program_array,
  script_while_cap,
  script_type,
  // execution
  unsupported_symbolic_float,
  concretization_overflow,
  recursion_limit,
  // solver
  solver_spawn,
  solver_crash,
  solver_protocol,
  // configuration
  missing_entry,
  bad_config,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::bad_magic: return "bad_magic";
    case Errc::truncated: return "truncated";
    case Errc::malformed_section: return "malformed_section";
    case Errc::unsupported_opcode: return "unsupported_opcode";
    case Errc::bad_index: return "bad_index";
    case Errc::script_syntax: return "script_syntax";
    case Errc::script_unknown_identifier: return "script_unknown_identifier";
    case Errc::script_invalid_timing: return "script_invalid_timing";
    case Errc::script_operand_outside_call: return "script_operand_outside_call";
    case Errc::script_non_boolean_cons: return "script_non_boolean_cons";
    case Errc::script_index_on_program_array: return "script_index_on_program_array";
    case Errc::script_while_cap: return "script_while_cap";
    case Errc::script_type: return "script_type";
    case Errc::unsupported_symbolic_float: return "unsupported_symbolic_float";
    case Errc::concretization_overflow: return "concretization_overflow";
    case Errc::recursion_limit: return "recursion_limit";
    case Errc::solver_spawn: return "solver_spawn";
    case Errc::solver_crash: return "solver_crash";
    case Errc::solver_protocol: return "solver_protocol";
    case Errc::missing_entry: return "missing_entry";
    case Errc::bad_config: return "bad_config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// printf-style formatting into std::string; kept tiny on purpose.
template <typename... Args>
std::string strf(const char* fmt, Args... args) {
  int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string out(static_cast<size_t>(n), '\0');
  std::snprintf(out.data(), out.size() + 1, fmt, args...);
  return out;
}

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

template <typename... Args>
[[noreturn]] void fail(Errc code, const char* fmt, Args... args) {
  throw Error(code, strf(fmt, args...));
}

// 64-bit mixer (splitmix64 finalizer) used for structural hashing.
inline u64 hash_mix(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline u64 hash_combine(u64 seed, u64 v) { return hash_mix(seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2))); }

inline u64 hash_str(const std::string& s) {
  u64 h = 1469598103934665603ull;  // FNV offset basis
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// Deterministic RNG for tests and any internal tie-breaking (never libc rand).
struct SplitMix64 {
  u64 state;
  explicit SplitMix64(u64 seed) : state(seed) {}
  u64 next() {
    state += 0x9e3779b97f4a7c15ull;
    return hash_mix(state);
  }
  // uniform in [0, n)
  u64 below(u64 n) { return n ? next() % n : 0; }
};

}  // namespace wasym
