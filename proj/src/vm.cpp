#include "stagecraft/vm.hpp"

#include <algorithm>
#include <sstream>

#include "stagecraft/coding.hpp"

namespace stagecraft {
namespace vm {

namespace {

// Apply fn to every operand of `i` that names a register.
template <typename Fn>
void for_each_reg(Instr& i, Fn fn) {
  switch (i.op) {
    case Op::Set: fn(i.a); break;
    case Op::Mov: case Op::Fst: case Op::Snd: case Op::Ldd: case Op::Qry:
      fn(i.a); fn(i.b); break;
    case Op::Add: case Op::Sub: case Op::Pair:
      fn(i.a); fn(i.b); fn(i.c); break;
    case Op::Ldl: case Op::Halt: fn(i.a); break;
    case Op::Jmp: break;
    case Op::Jz: fn(i.a); break;
    case Op::Jeq: case Op::Jlt: fn(i.a); fn(i.b); break;
  }
}

// Pointer to the jump-target operand, or null for non-jumps.
Reg* jump_slot(Instr& i) {
  switch (i.op) {
    case Op::Jmp: return &i.a;
    case Op::Jz: return &i.b;
    case Op::Jeq: case Op::Jlt: return &i.c;
    default: return nullptr;
  }
}

const char* op_name(Op o) {
  switch (o) {
    case Op::Set: return "SET";
    case Op::Mov: return "MOV";
    case Op::Add: return "ADD";
    case Op::Sub: return "SUB";
    case Op::Pair: return "PAIR";
    case Op::Fst: return "FST";
    case Op::Snd: return "SND";
    case Op::Ldd: return "LDD";
    case Op::Ldl: return "LDL";
    case Op::Qry: return "QRY";
    case Op::Jmp: return "JMP";
    case Op::Jz: return "JZ";
    case Op::Jeq: return "JEQ";
    case Op::Jlt: return "JLT";
    case Op::Halt: return "HALT";
  }
  return "?";
}

}  // namespace

Reg Program::reg_count() const {
  Reg top = 0;
  for (auto instr : code) {
    for_each_reg(instr, [&](Reg r) { top = std::max(top, r); });
  }
  return top + 1;
}

void validate_program(const Program& p) {
  for (std::size_t i = 0; i < p.code.size(); ++i) {
    Instr instr = p.code[i];
    if (Reg* t = jump_slot(instr)) {
      if (*t >= p.code.size()) {
        throw ParseError("program '" + p.name + "': jump target " +
                         std::to_string(*t) + " out of range at instruction " +
                         std::to_string(i));
      }
    }
  }
}

RunResult run_program(const Program& p, const Oracle& oracle, const Nat& input,
                      std::uint64_t step_budget) {
  RunResult res;
  std::vector<Nat> reg(p.reg_count(), Nat(0));
  reg[0] = input;
  std::size_t pc = 0;
  while (true) {
    if (pc >= p.code.size()) {
      res.status = RunResult::Status::Error;
      res.error = "ran past the end of the program";
      return res;
    }
    if (res.steps >= step_budget) {
      res.status = RunResult::Status::OutOfBudget;
      return res;
    }
    ++res.steps;
    const Instr& in = p.code[pc];
    switch (in.op) {
      case Op::Set: reg[in.a] = in.imm; break;
      case Op::Mov: reg[in.a] = reg[in.b]; break;
      case Op::Add: reg[in.a] = reg[in.b] + reg[in.c]; break;
      case Op::Sub:
        reg[in.a] = reg[in.b] > reg[in.c] ? Nat(reg[in.b] - reg[in.c]) : Nat(0);
        break;
      case Op::Pair: reg[in.a] = pair(reg[in.b], reg[in.c]); break;
      case Op::Fst: reg[in.a] = unpair(reg[in.b]).first; break;
      case Op::Snd: reg[in.a] = unpair(reg[in.b]).second; break;
      case Op::Ldd: {
        const Nat& ix = reg[in.b];
        if (ix < p.data.size()) {
          reg[in.a] = p.data[to_size(ix, "data index")];
        } else {
          reg[in.a] = 0;
        }
        break;
      }
      case Op::Ldl: reg[in.a] = p.data.size(); break;
      case Op::Qry: {
        const Nat q = reg[in.b];
        res.use.insert(q);
        Trit t = oracle.query(q);
        if (t == Trit::Unknown) {
          res.status = RunResult::Status::OracleUnknown;
          res.unknown_code = q;
          return res;
        }
        reg[in.a] = t == Trit::Yes ? 1 : 0;
        break;
      }
      case Op::Jmp: pc = in.a; continue;
      case Op::Jz:
        if (reg[in.a] == 0) { pc = in.b; continue; }
        break;
      case Op::Jeq:
        if (reg[in.a] == reg[in.b]) { pc = in.c; continue; }
        break;
      case Op::Jlt:
        if (reg[in.a] < reg[in.b]) { pc = in.c; continue; }
        break;
      case Op::Halt:
        res.status = RunResult::Status::Halted;
        res.output = reg[in.a];
        return res;
    }
    ++pc;
  }
}

Builder::Label Builder::make_label() {
  labels_.push_back(-1);
  return labels_.size() - 1;
}

void Builder::bind(Label l) {
  labels_.at(l) = static_cast<std::ptrdiff_t>(code_.size());
}

void Builder::emit(Instr i) {
  for_each_reg(i, [&](Reg r) { max_reg_ = std::max(max_reg_, r); });
  code_.push_back(std::move(i));
}

void Builder::set(Reg d, Nat imm) { emit({Op::Set, d, 0, 0, std::move(imm)}); }
void Builder::mov(Reg d, Reg s) { emit({Op::Mov, d, s, 0, 0}); }
void Builder::add(Reg d, Reg a, Reg b) { emit({Op::Add, d, a, b, 0}); }
void Builder::sub(Reg d, Reg a, Reg b) { emit({Op::Sub, d, a, b, 0}); }
void Builder::pair_op(Reg d, Reg a, Reg b) { emit({Op::Pair, d, a, b, 0}); }
void Builder::fst(Reg d, Reg s) { emit({Op::Fst, d, s, 0, 0}); }
void Builder::snd(Reg d, Reg s) { emit({Op::Snd, d, s, 0, 0}); }
void Builder::ldd(Reg d, Reg i) { emit({Op::Ldd, d, i, 0, 0}); }
void Builder::ldl(Reg d) { emit({Op::Ldl, d, 0, 0, 0}); }
void Builder::qry(Reg d, Reg a) { emit({Op::Qry, d, a, 0, 0}); }

void Builder::jmp(Label t) {
  pending_.push_back({code_.size(), t});
  emit({Op::Jmp, 0, 0, 0, 0});
}
void Builder::jz(Reg r, Label t) {
  pending_.push_back({code_.size(), t});
  emit({Op::Jz, r, 0, 0, 0});
}
void Builder::jeq(Reg a, Reg b, Label t) {
  pending_.push_back({code_.size(), t});
  emit({Op::Jeq, a, b, 0, 0});
}
void Builder::jlt(Reg a, Reg b, Label t) {
  pending_.push_back({code_.size(), t});
  emit({Op::Jlt, a, b, 0, 0});
}
void Builder::halt(Reg r) { emit({Op::Halt, r, 0, 0, 0}); }

Reg Builder::fresh_reg() { return max_reg_ + 1; }

void Builder::inline_program(const Program& callee, Reg in, Reg out) {
  const Reg base = max_reg_ + 1;
  const Reg ncallee = callee.reg_count();
  const Reg off_reg = base + ncallee;
  const Reg tmp = off_reg + 1;
  const Reg lim = off_reg + 2;
  const bool uses_data = std::any_of(
      callee.code.begin(), callee.code.end(),
      [](const Instr& i) { return i.op == Op::Ldd; });
  const bool has_data = !callee.data.empty();
  const std::size_t data_offset = data_.size();

  // Per-instruction expansion sizes, then prefix sums for jump remapping.
  auto width = [&](const Instr& i) -> std::size_t {
    switch (i.op) {
      case Op::Halt: return 2;           // MOV out, r ; JMP end
      case Op::Ldl: return 1;            // SET d, |callee data|
      case Op::Ldd: return has_data ? 6 : 1;  // guarded offset load / SET d,0
      default: return 1;
    }
  };
  std::vector<std::size_t> place(callee.code.size() + 1, 0);
  std::size_t body_start = code_.size() + (uses_data && has_data ? 2 : 1);
  place[0] = body_start;
  for (std::size_t j = 0; j < callee.code.size(); ++j) {
    place[j + 1] = place[j] + width(callee.code[j]);
  }
  const std::size_t after = place[callee.code.size()];

  if (uses_data && has_data) set(off_reg, Nat(data_offset));
  mov(base, in);

  auto rmap = [&](Reg r) { return base + r; };
  for (const Instr& orig : callee.code) {
    Instr i = orig;
    switch (i.op) {
      case Op::Halt:
        mov(out, rmap(i.a));
        emit({Op::Jmp, static_cast<Reg>(after), 0, 0, 0});
        break;
      case Op::Ldl:
        set(rmap(i.a), Nat(callee.data.size()));
        break;
      case Op::Ldd: {
        if (!has_data) {
          set(rmap(i.a), 0);
          break;
        }
        // Reads past the callee's own data must still give 0 even though
        // more data may sit after it in the combined segment.
        std::size_t here = code_.size();
        set(lim, Nat(callee.data.size()));
        emit({Op::Jlt, rmap(i.b), lim, static_cast<Reg>(here + 4), 0});
        set(rmap(i.a), 0);
        emit({Op::Jmp, static_cast<Reg>(here + 6), 0, 0, 0});
        add(tmp, rmap(i.b), off_reg);
        ldd(rmap(i.a), tmp);
        break;
      }
      default: {
        if (Reg* t = jump_slot(i)) *t = static_cast<Reg>(place[*t]);
        for_each_reg(i, [&](Reg& r) { r = rmap(r); });
        emit(i);
        break;
      }
    }
  }
  for (const Nat& v : callee.data) data_.push_back(v);
  max_reg_ = std::max(max_reg_, lim);
}

Program Builder::build() {
  for (const Pending& p : pending_) {
    std::ptrdiff_t target = labels_.at(p.label);
    if (target < 0) throw Error("unbound label in program '" + name_ + "'");
    Instr& i = code_[p.instr];
    Reg* t = jump_slot(i);
    *t = static_cast<Reg>(target);
  }
  Program prog;
  prog.name = name_;
  prog.code = code_;
  prog.data = data_;
  validate_program(prog);
  return prog;
}

std::string serialize_program(const Program& p) {
  std::ostringstream out;
  if (!p.data.empty()) {
    out << "DATA ";
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      if (i) out << ",";
      out << p.data[i];
    }
    out << "\n";
  }
  for (Instr instr : p.code) {
    out << op_name(instr.op);
    switch (instr.op) {
      case Op::Set: out << " " << instr.a << " " << instr.imm; break;
      case Op::Mov: case Op::Fst: case Op::Snd: case Op::Ldd: case Op::Qry:
        out << " " << instr.a << " " << instr.b; break;
      case Op::Add: case Op::Sub: case Op::Pair:
        out << " " << instr.a << " " << instr.b << " " << instr.c; break;
      case Op::Ldl: case Op::Halt: out << " " << instr.a; break;
      case Op::Jmp: out << " " << instr.a; break;
      case Op::Jz: out << " " << instr.a << " " << instr.b; break;
      case Op::Jeq: case Op::Jlt:
        out << " " << instr.a << " " << instr.b << " " << instr.c; break;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

Reg parse_reg(const std::string& tok, const std::string& ctx) {
  try {
    unsigned long v = std::stoul(tok);
    if (v > 0xffffffffUL) throw std::out_of_range("reg");
    return static_cast<Reg>(v);
  } catch (const std::exception&) {
    throw ParseError("bad operand '" + tok + "' in " + ctx);
  }
}

Nat parse_nat(const std::string& tok, const std::string& ctx) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(),
                                  [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError("bad number '" + tok + "' in " + ctx);
  }
  return Nat(tok);
}

}  // namespace

Program parse_program(const std::string& name, const std::vector<std::string>& lines) {
  Program p;
  p.name = name;
  for (const std::string& raw : lines) {
    std::istringstream in(raw);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string ctx = "program '" + name + "' line '" + raw + "'";
    if (tok[0] == "DATA") {
      std::string rest;
      for (std::size_t i = 1; i < tok.size(); ++i) rest += tok[i];
      std::istringstream ds(rest);
      for (std::string item; std::getline(ds, item, ',');) {
        p.data.push_back(parse_nat(item, ctx));
      }
      continue;
    }
    auto want = [&](std::size_t n) {
      if (tok.size() != n + 1) {
        throw ParseError("wrong operand count in " + ctx);
      }
    };
    Instr i;
    const std::string& op = tok[0];
    if (op == "SET") { want(2); i = {Op::Set, parse_reg(tok[1], ctx), 0, 0, parse_nat(tok[2], ctx)}; }
    else if (op == "MOV") { want(2); i = {Op::Mov, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), 0, 0}; }
    else if (op == "ADD") { want(3); i = {Op::Add, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), parse_reg(tok[3], ctx), 0}; }
    else if (op == "SUB") { want(3); i = {Op::Sub, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), parse_reg(tok[3], ctx), 0}; }
    else if (op == "PAIR") { want(3); i = {Op::Pair, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), parse_reg(tok[3], ctx), 0}; }
    else if (op == "FST") { want(2); i = {Op::Fst, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), 0, 0}; }
    else if (op == "SND") { want(2); i = {Op::Snd, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), 0, 0}; }
    else if (op == "LDD") { want(2); i = {Op::Ldd, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), 0, 0}; }
    else if (op == "LDL") { want(1); i = {Op::Ldl, parse_reg(tok[1], ctx), 0, 0, 0}; }
    else if (op == "QRY") { want(2); i = {Op::Qry, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), 0, 0}; }
    else if (op == "JMP") { want(1); i = {Op::Jmp, parse_reg(tok[1], ctx), 0, 0, 0}; }
    else if (op == "JZ") { want(2); i = {Op::Jz, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), 0, 0}; }
    else if (op == "JEQ") { want(3); i = {Op::Jeq, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), parse_reg(tok[3], ctx), 0}; }
    else if (op == "JLT") { want(3); i = {Op::Jlt, parse_reg(tok[1], ctx), parse_reg(tok[2], ctx), parse_reg(tok[3], ctx), 0}; }
    else if (op == "HALT") { want(1); i = {Op::Halt, parse_reg(tok[1], ctx), 0, 0, 0}; }
    else { throw ParseError("unknown opcode in " + ctx); }
    p.code.push_back(std::move(i));
  }
  validate_program(p);
  return p;
}

Program identity_program() {
  Builder b("identity");
  b.halt(0);
  return b.build();
}

Program constant_program(const Nat& k) {
  Builder b("const");
  b.set(1, k);
  b.halt(1);
  return b.build();
}

Program join_lookup_program() {
  Builder b("join-lookup");
  auto loop = b.make_label();
  auto next = b.make_label();
  b.set(4, 1);
  b.bind(loop);
  b.pair_op(2, 0, 1);   // p = pair(x, y)
  b.add(3, 2, 2);
  b.add(3, 3, 2);       // 3p
  b.add(3, 3, 4);       // 3p + 1
  b.qry(5, 3);
  b.jz(5, next);
  b.halt(1);
  b.bind(next);
  b.add(1, 1, 4);
  b.jmp(loop);
  return b.build();
}

Program swap01_program() {
  Builder b("swap01");
  auto one = b.make_label();
  auto zero = b.make_label();
  b.set(1, 0);
  b.set(2, 1);
  b.jeq(0, 1, one);
  b.jeq(0, 2, zero);
  b.halt(0);
  b.bind(one);
  b.halt(2);
  b.bind(zero);
  b.halt(1);
  return b.build();
}

Program evens_program() {
  Builder b("evens");
  auto loop = b.make_label();
  auto done = b.make_label();
  auto even = b.make_label();
  b.set(1, 2);
  b.set(2, 1);
  b.bind(loop);
  b.jlt(0, 1, done);
  b.sub(0, 0, 1);
  b.jmp(loop);
  b.bind(done);
  b.jz(0, even);
  b.halt(3);
  b.bind(even);
  b.halt(2);
  return b.build();
}

}  // namespace vm
}  // namespace stagecraft
