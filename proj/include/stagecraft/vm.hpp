#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/oracle.hpp"

namespace stagecraft {
namespace vm {

// Oracle programs are plain instruction lists over natural valued registers,
// so they can be written to files and read back without losing anything.
// Register 0 holds the input. The machine stops at HALT with the named
// register as output, when the step budget runs out, or when an oracle
// query comes back Unknown.
//
//   SET d imm        r[d] = imm
//   MOV d s          r[d] = r[s]
//   ADD d a b        r[d] = r[a] + r[b]
//   SUB d a b        r[d] = r[a] - r[b], truncated at 0
//   PAIR d a b       r[d] = pair(r[a], r[b])
//   FST d s          r[d] = first component of unpair(r[s])
//   SND d s          r[d] = second component
//   LDD d i          r[d] = data[r[i]], 0 past the end
//   LDL d            r[d] = data length
//   QRY d a          r[d] = 1 if r[a] is in the oracle else 0
//   JMP t            jump to instruction t
//   JZ r t           jump if r[r] == 0
//   JEQ a b t        jump if r[a] == r[b]
//   JLT a b t        jump if r[a] < r[b]
//   HALT r           stop with output r[r]

enum class Op : std::uint8_t {
  Set, Mov, Add, Sub, Pair, Fst, Snd, Ldd, Ldl, Qry, Jmp, Jz, Jeq, Jlt, Halt,
};

using Reg = std::uint32_t;

struct Instr {
  Op op;
  Reg a = 0;
  Reg b = 0;
  Reg c = 0;
  Nat imm = 0;  // SET only
};

struct Program {
  std::string name = "prog";
  std::vector<Instr> code;
  std::vector<Nat> data;

  Reg reg_count() const;
};

struct RunResult {
  enum class Status { Halted, OutOfBudget, OracleUnknown, Error };
  Status status = Status::Error;
  Nat output = 0;
  std::set<Nat> use;  // every queried code
  std::uint64_t steps = 0;
  Nat unknown_code = 0;  // the query that returned Unknown, if any
  std::string error;

  bool halted() const { return status == Status::Halted; }
};

RunResult run_program(const Program& p, const Oracle& oracle, const Nat& input,
                      std::uint64_t step_budget);

// Structural sanity: jump targets inside the code, at least one HALT reachable
// is not checked, but every target must exist.
void validate_program(const Program& p);

// Label based assembly for building programs in code.
class Builder {
 public:
  explicit Builder(std::string name) : name_(std::move(name)) {}

  using Label = std::size_t;
  Label make_label();
  void bind(Label l);

  void set(Reg d, Nat imm);
  void mov(Reg d, Reg s);
  void add(Reg d, Reg a, Reg b);
  void sub(Reg d, Reg a, Reg b);
  void pair_op(Reg d, Reg a, Reg b);
  void fst(Reg d, Reg s);
  void snd(Reg d, Reg s);
  void ldd(Reg d, Reg i);
  void ldl(Reg d);
  void qry(Reg d, Reg a);
  void jmp(Label t);
  void jz(Reg r, Label t);
  void jeq(Reg a, Reg b, Label t);
  void jlt(Reg a, Reg b, Label t);
  void halt(Reg r);

  void push_data(Nat v) { data_.push_back(std::move(v)); }

  // Splice `callee` in as a subroutine: runs it on the value in `in`, leaves
  // its output in `out`, then continues. Callee registers and data indices
  // are remapped above everything used so far.
  void inline_program(const Program& callee, Reg in, Reg out);

  Reg fresh_reg();  // first register index not used yet

  Program build();

 private:
  struct Pending {
    std::size_t instr;
    Label label;
  };
  void emit(Instr i);

  std::string name_;
  std::vector<Instr> code_;
  std::vector<Nat> data_;
  std::vector<std::ptrdiff_t> labels_;  // -1 until bound
  std::vector<Pending> pending_;
  Reg max_reg_ = 0;
};

// One instruction per line, as listed above. Data, when present, is a line
// "DATA v1,v2,..." before the instructions.
std::string serialize_program(const Program& p);
Program parse_program(const std::string& name, const std::vector<std::string>& lines);

// Canned programs.
Program identity_program();
Program constant_program(const Nat& k);
// Looks up f(x) in a join oracle by scanning y = 0,1,2,... for pair(x,y) in
// the graph part. Fine for small valued maps; budget bounded like everything.
Program join_lookup_program();
// Swap 0 and 1, fix everything else.
Program swap01_program();
// 1 if the input is even else 0, by repeated subtraction.
Program evens_program();

}  // namespace vm
}  // namespace stagecraft
