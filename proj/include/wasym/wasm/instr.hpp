#pragma once

// Opcode set and flat instruction representation. Covers the core integer/
// float instruction set plus the sign-extension operators, the nontrapping
// float-to-int conversions and memory.copy/fill (0xfc-prefixed opcodes are
// encoded as 0xfc00 | subopcode).

#include <string>
#include <vector>

#include "wasym/common.hpp"

namespace wasym::wasm {

enum class ValType : u8 { I32 = 0x7f, I64 = 0x7e, F32 = 0x7d, F64 = 0x7c, Funcref = 0x70 };

inline const char* valtype_name(ValType t) {
  switch (t) {
    case ValType::I32: return "i32";
    case ValType::I64: return "i64";
    case ValType::F32: return "f32";
    case ValType::F64: return "f64";
    case ValType::Funcref: return "funcref";
  }
  return "?";
}

namespace opc {
// control
constexpr u16 Unreachable = 0x00, Nop = 0x01, Block = 0x02, Loop = 0x03, If = 0x04,
              Else = 0x05, End = 0x0b, Br = 0x0c, BrIf = 0x0d, BrTable = 0x0e,
              Return = 0x0f, Call = 0x10, CallIndirect = 0x11;
constexpr u16 Drop = 0x1a, Select = 0x1b;
// variables
constexpr u16 LocalGet = 0x20, LocalSet = 0x21, LocalTee = 0x22, GlobalGet = 0x23,
              GlobalSet = 0x24;
// memory
constexpr u16 I32Load = 0x28, I64Load = 0x29, F32Load = 0x2a, F64Load = 0x2b,
              I32Load8S = 0x2c, I32Load8U = 0x2d, I32Load16S = 0x2e, I32Load16U = 0x2f,
              I64Load8S = 0x30, I64Load8U = 0x31, I64Load16S = 0x32, I64Load16U = 0x33,
              I64Load32S = 0x34, I64Load32U = 0x35, I32Store = 0x36, I64Store = 0x37,
              F32Store = 0x38, F64Store = 0x39, I32Store8 = 0x3a, I32Store16 = 0x3b,
              I64Store8 = 0x3c, I64Store16 = 0x3d, I64Store32 = 0x3e, MemorySize = 0x3f,
              MemoryGrow = 0x40;
// constants
constexpr u16 I32Const = 0x41, I64Const = 0x42, F32Const = 0x43, F64Const = 0x44;
// i32 comparisons
constexpr u16 I32Eqz = 0x45, I32Eq = 0x46, I32Ne = 0x47, I32LtS = 0x48, I32LtU = 0x49,
              I32GtS = 0x4a, I32GtU = 0x4b, I32LeS = 0x4c, I32LeU = 0x4d, I32GeS = 0x4e,
              I32GeU = 0x4f;
// i64 comparisons
constexpr u16 I64Eqz = 0x50, I64Eq = 0x51, I64Ne = 0x52, I64LtS = 0x53, I64LtU = 0x54,
              I64GtS = 0x55, I64GtU = 0x56, I64LeS = 0x57, I64LeU = 0x58, I64GeS = 0x59,
              I64GeU = 0x5a;
// float comparisons
constexpr u16 F32Eq = 0x5b, F32Ne = 0x5c, F32Lt = 0x5d, F32Gt = 0x5e, F32Le = 0x5f,
              F32Ge = 0x60, F64Eq = 0x61, F64Ne = 0x62, F64Lt = 0x63, F64Gt = 0x64,
              F64Le = 0x65, F64Ge = 0x66;
// i32 arithmetic
constexpr u16 I32Clz = 0x67, I32Ctz = 0x68, I32Popcnt = 0x69, I32Add = 0x6a, I32Sub = 0x6b,
              I32Mul = 0x6c, I32DivS = 0x6d, I32DivU = 0x6e, I32RemS = 0x6f, I32RemU = 0x70,
              I32And = 0x71, I32Or = 0x72, I32Xor = 0x73, I32Shl = 0x74, I32ShrS = 0x75,
              I32ShrU = 0x76, I32Rotl = 0x77, I32Rotr = 0x78;
// i64 arithmetic
constexpr u16 I64Clz = 0x79, I64Ctz = 0x7a, I64Popcnt = 0x7b, I64Add = 0x7c, I64Sub = 0x7d,
              I64Mul = 0x7e, I64DivS = 0x7f, I64DivU = 0x80, I64RemS = 0x81, I64RemU = 0x82,
              I64And = 0x83, I64Or = 0x84, I64Xor = 0x85, I64Shl = 0x86, I64ShrS = 0x87,
              I64ShrU = 0x88, I64Rotl = 0x89, I64Rotr = 0x8a;
// float arithmetic
constexpr u16 F32Abs = 0x8b, F32Neg = 0x8c, F32Ceil = 0x8d, F32Floor = 0x8e, F32Trunc = 0x8f,
              F32Nearest = 0x90, F32Sqrt = 0x91, F32Add = 0x92, F32Sub = 0x93, F32Mul = 0x94,
              F32Div = 0x95, F32Min = 0x96, F32Max = 0x97, F32Copysign = 0x98;
constexpr u16 F64Abs = 0x99, F64Neg = 0x9a, F64Ceil = 0x9b, F64Floor = 0x9c, F64Trunc = 0x9d,
              F64Nearest = 0x9e, F64Sqrt = 0x9f, F64Add = 0xa0, F64Sub = 0xa1, F64Mul = 0xa2,
              F64Div = 0xa3, F64Min = 0xa4, F64Max = 0xa5, F64Copysign = 0xa6;
// conversions
constexpr u16 I32WrapI64 = 0xa7, I32TruncF32S = 0xa8, I32TruncF32U = 0xa9, I32TruncF64S = 0xaa,
              I32TruncF64U = 0xab, I64ExtendI32S = 0xac, I64ExtendI32U = 0xad,
              I64TruncF32S = 0xae, I64TruncF32U = 0xaf, I64TruncF64S = 0xb0,
              I64TruncF64U = 0xb1, F32ConvertI32S = 0xb2, F32ConvertI32U = 0xb3,
              F32ConvertI64S = 0xb4, F32ConvertI64U = 0xb5, F32DemoteF64 = 0xb6,
              F64ConvertI32S = 0xb7, F64ConvertI32U = 0xb8, F64ConvertI64S = 0xb9,
              F64ConvertI64U = 0xba, F64PromoteF32 = 0xbb, I32ReinterpretF32 = 0xbc,
              I64ReinterpretF64 = 0xbd, F32ReinterpretI32 = 0xbe, F64ReinterpretI64 = 0xbf;
// sign extension
constexpr u16 I32Extend8S = 0xc0, I32Extend16S = 0xc1, I64Extend8S = 0xc2, I64Extend16S = 0xc3,
              I64Extend32S = 0xc4;
// 0xfc prefix: nontrapping conversions + bulk memory subset
constexpr u16 I32TruncSatF32S = 0xfc00, I32TruncSatF32U = 0xfc01, I32TruncSatF64S = 0xfc02,
              I32TruncSatF64U = 0xfc03, I64TruncSatF32S = 0xfc04, I64TruncSatF32U = 0xfc05,
              I64TruncSatF64S = 0xfc06, I64TruncSatF64U = 0xfc07, MemoryCopy = 0xfc0a,
              MemoryFill = 0xfc0b;
}  // namespace opc

// Flat decoded instruction. `a`/`b` hold the immediates:
//   index ops: a = index            memory ops: a = align, b = offset
//   block/loop/if: a = blocktype    call_indirect: a = type index, b = table
//   consts: a = raw bits            br_table: `table` = targets, a = default
struct Instr {
  u16 op = opc::Nop;
  u64 a = 0;
  u64 b = 0;
  std::vector<u32> table;

  bool operator==(const Instr& o) const {
    return op == o.op && a == o.a && b == o.b && table == o.table;
  }
};

enum class ImmKind { None, Index, BlockType, Depth, BrTable, CallIndirect, Memarg, MemIdx, I32C, I64C, F32C, F64C };

inline ImmKind imm_kind(u16 op) {
  using namespace opc;
  switch (op) {
    case Block: case Loop: case If: return ImmKind::BlockType;
    case Br: case BrIf: return ImmKind::Depth;
    case BrTable: return ImmKind::BrTable;
    case Call: case LocalGet: case LocalSet: case LocalTee: case GlobalGet: case GlobalSet:
      return ImmKind::Index;
    case CallIndirect: return ImmKind::CallIndirect;
    case MemorySize: case MemoryGrow: return ImmKind::MemIdx;
    case I32Const: return ImmKind::I32C;
    case I64Const: return ImmKind::I64C;
    case F32Const: return ImmKind::F32C;
    case F64Const: return ImmKind::F64C;
    case MemoryCopy: case MemoryFill: return ImmKind::MemIdx;
    default:
      if (op >= I32Load && op <= I64Store32) return ImmKind::Memarg;
      return ImmKind::None;
  }
}

inline bool is_load(u16 op) { return op >= opc::I32Load && op <= opc::I64Load32U; }
inline bool is_store(u16 op) { return op >= opc::I32Store && op <= opc::I64Store32; }

// width in bytes touched by a load/store
inline u32 mem_width(u16 op) {
  using namespace opc;
  switch (op) {
    case I32Load: case F32Load: case I32Store: case F32Store: return 4;
    case I64Load: case F64Load: case I64Store: case F64Store: return 8;
    case I32Load8S: case I32Load8U: case I64Load8S: case I64Load8U:
    case I32Store8: case I64Store8: return 1;
    case I32Load16S: case I32Load16U: case I64Load16S: case I64Load16U:
    case I32Store16: case I64Store16: return 2;
    case I64Load32S: case I64Load32U: case I64Store32: return 4;
    default: return 0;
  }
}

// Numeric classification used by def-use labeling: unary/binary value ops,
// comparisons and conversions all count as computation sites.
inline bool is_numeric(u16 op) {
  using namespace opc;
  if (op >= I32Eqz && op <= I64Extend32S) return true;
  if (op >= I32TruncSatF32S && op <= I64TruncSatF64U) return true;
  return false;
}

inline bool is_comparison(u16 op) { return op >= opc::I32Eqz && op <= opc::F64Ge; }

// number of operands a numeric op pops
inline u32 numeric_arity(u16 op) {
  using namespace opc;
  if (op == I32Eqz || op == I64Eqz) return 1;
  if (op >= I32Clz && op <= I32Popcnt) return 1;
  if (op >= I64Clz && op <= I64Popcnt) return 1;
  if (op >= F32Abs && op <= F32Sqrt) return 1;
  if (op >= F64Abs && op <= F64Sqrt) return 1;
  if (op >= I32WrapI64 && op <= F64ReinterpretI64) return 1;
  if (op >= I32Extend8S && op <= I64Extend32S) return 1;
  if (op >= I32TruncSatF32S && op <= I64TruncSatF64U) return 1;
  return 2;
}

inline bool is_float_op(u16 op) {
  using namespace opc;
  if (op >= F32Eq && op <= F64Ge) return true;
  if (op >= F32Abs && op <= F64Copysign) return true;
  if (op >= I32TruncF32S && op <= I32TruncF64U) return true;
  if (op >= I64TruncF32S && op <= F64PromoteF32) return true;
  if (op == I32ReinterpretF32 || op == I64ReinterpretF64) return true;
  if (op >= I32TruncSatF32S && op <= I64TruncSatF64U) return true;
  return false;
}

inline const char* mnemonic(u16 op) {
  using namespace opc;
  switch (op) {
    case Unreachable: return "unreachable";
    case Nop: return "nop";
    case Block: return "block";
    case Loop: return "loop";
    case If: return "if";
    case Else: return "else";
    case End: return "end";
    case Br: return "br";
    case BrIf: return "br_if";
    case BrTable: return "br_table";
    case Return: return "return";
    case Call: return "call";
    case CallIndirect: return "call_indirect";
    case Drop: return "drop";
    case Select: return "select";
    case LocalGet: return "local.get";
    case LocalSet: return "local.set";
    case LocalTee: return "local.tee";
    case GlobalGet: return "global.get";
    case GlobalSet: return "global.set";
    case MemorySize: return "memory.size";
    case MemoryGrow: return "memory.grow";
    case MemoryCopy: return "memory.copy";
    case MemoryFill: return "memory.fill";
    case I32Const: return "i32.const";
    case I64Const: return "i64.const";
    case F32Const: return "f32.const";
    case F64Const: return "f64.const";
    case I32Load: return "i32.load";
    case I64Load: return "i64.load";
    case I32Store: return "i32.store";
    case I64Store: return "i64.store";
    case I32Add: return "i32.add";
    case I32Sub: return "i32.sub";
    case I32Mul: return "i32.mul";
    case I32DivS: return "i32.div_s";
    case I32DivU: return "i32.div_u";
    case I32RemS: return "i32.rem_s";
    case I32RemU: return "i32.rem_u";
    case I32And: return "i32.and";
    case I32Or: return "i32.or";
    case I32Xor: return "i32.xor";
    case I32Shl: return "i32.shl";
    case I32ShrS: return "i32.shr_s";
    case I32ShrU: return "i32.shr_u";
    case I32Eqz: return "i32.eqz";
    case I32Eq: return "i32.eq";
    case I32Ne: return "i32.ne";
    case I32LtS: return "i32.lt_s";
    case I32LtU: return "i32.lt_u";
    case I32GtS: return "i32.gt_s";
    case I32GtU: return "i32.gt_u";
    case I32LeS: return "i32.le_s";
    case I32LeU: return "i32.le_u";
    case I32GeS: return "i32.ge_s";
    case I32GeU: return "i32.ge_u";
    case I64Add: return "i64.add";
    case I64Sub: return "i64.sub";
    case I64Mul: return "i64.mul";
    default: return "instr";
  }
}

}  // namespace wasym::wasm
