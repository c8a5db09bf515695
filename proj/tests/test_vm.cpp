#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "stagecraft/io.hpp"
#include "stagecraft/vm.hpp"

using namespace stagecraft;
using vm::Program;
using vm::RunResult;

namespace {

Oracle no_oracle() {
  return Oracle("none", [](const Nat&) { return Trit::No; });
}

Nat run_val(const Program& p, const Oracle& o, const Nat& in, std::uint64_t budget = 10000) {
  RunResult r = vm::run_program(p, o, in, budget);
  REQUIRE(r.status == RunResult::Status::Halted);
  return r.output;
}

}  // namespace

TEST_CASE("arithmetic and pairing ops compute what they say") {
  vm::Builder b("ops");
  // out = pair(in + 3, in - 5) with truncated subtraction
  b.set(1, 3);
  b.add(2, 0, 1);
  b.set(3, 5);
  b.sub(4, 0, 3);
  b.pair_op(5, 2, 4);
  b.halt(5);
  Program p = b.build();
  CHECK(run_val(p, no_oracle(), 10) == pair(13, 5));
  CHECK(run_val(p, no_oracle(), 2) == pair(5, 0));  // 2-5 truncates to 0
}

TEST_CASE("unpair ops invert pairing") {
  vm::Builder b("proj");
  b.fst(1, 0);
  b.snd(2, 0);
  b.pair_op(3, 1, 2);
  b.halt(3);
  Program p = b.build();
  for (std::uint64_t n = 0; n < 100; ++n) CHECK(run_val(p, no_oracle(), Nat(n)) == n);
}

TEST_CASE("data loads index the data vector with zero past the end") {
  vm::Builder b("data");
  b.push_data(7);
  b.push_data(11);
  b.ldd(1, 0);  // data[r0]
  b.ldl(2);
  b.pair_op(3, 1, 2);
  b.halt(3);
  Program p = b.build();
  CHECK(run_val(p, no_oracle(), 0) == pair(7, 2));
  CHECK(run_val(p, no_oracle(), 1) == pair(11, 2));
  CHECK(run_val(p, no_oracle(), 9) == pair(0, 2));
}

TEST_CASE("oracle queries record their use set and propagate unknowns") {
  Oracle evens("evens", [](const Nat& n) { return trit_of(n % 2 == 0); });
  vm::Builder b("qry");
  b.qry(1, 0);
  b.halt(1);
  Program p = b.build();
  RunResult r = vm::run_program(p, evens, 4, 100);
  CHECK(r.halted());
  CHECK(r.output == 1);
  CHECK(r.use == std::set<Nat>{4});
  r = vm::run_program(p, evens, 5, 100);
  CHECK(r.output == 0);

  Oracle spotty("spotty", [](const Nat& n) {
    return n == 3 ? Trit::Unknown : Trit::Yes;
  });
  r = vm::run_program(p, spotty, 3, 100);
  CHECK(r.status == RunResult::Status::OracleUnknown);
  CHECK(r.unknown_code == 3);
}

TEST_CASE("step budget cuts off loops") {
  vm::Builder b("spin");
  auto top = b.make_label();
  b.bind(top);
  b.jmp(top);
  Program p = b.build();
  RunResult r = vm::run_program(p, no_oracle(), 0, 50);
  CHECK(r.status == RunResult::Status::OutOfBudget);
  CHECK(r.steps == 50);
}

TEST_CASE("conditional jumps branch on the right comparisons") {
  // out = 1 if in < 5, 2 if in == 5, 3 otherwise
  vm::Builder b("cmp");
  auto lt = b.make_label();
  auto eq = b.make_label();
  b.set(1, 5);
  b.jlt(0, 1, lt);
  b.jeq(0, 1, eq);
  b.set(2, 3);
  b.halt(2);
  b.bind(lt);
  b.set(2, 1);
  b.halt(2);
  b.bind(eq);
  b.set(2, 2);
  b.halt(2);
  Program p = b.build();
  CHECK(run_val(p, no_oracle(), 0) == 1);
  CHECK(run_val(p, no_oracle(), 4) == 1);
  CHECK(run_val(p, no_oracle(), 5) == 2);
  CHECK(run_val(p, no_oracle(), 6) == 3);
  CHECK(run_val(p, no_oracle(), 100) == 3);
}

TEST_CASE("canned programs behave as documented") {
  Oracle o = no_oracle();
  for (std::uint64_t n = 0; n < 20; ++n) {
    CHECK(run_val(vm::identity_program(), o, Nat(n)) == n);
    CHECK(run_val(vm::constant_program(42), o, Nat(n)) == 42);
    CHECK(run_val(vm::evens_program(), o, Nat(n)) == (n % 2 == 0 ? 1 : 0));
  }
  CHECK(run_val(vm::swap01_program(), o, 0) == 1);
  CHECK(run_val(vm::swap01_program(), o, 1) == 0);
  CHECK(run_val(vm::swap01_program(), o, 7) == 7);
}

TEST_CASE("join lookup reads a function graph out of a join oracle") {
  auto square = [](const Nat& x) { return MapResult::of(x * x); };
  Oracle left("l", [](const Nat&) { return Trit::No; });
  Oracle right("r", [](const Nat&) { return Trit::No; });
  Oracle j = join_oracle(left, square, right);
  Program lk = vm::join_lookup_program();
  for (std::uint64_t n = 0; n < 8; ++n) {
    CHECK(run_val(lk, j, Nat(n), 100000) == n * n);
  }
}

TEST_CASE("programs survive a serialize parse round trip") {
  std::vector<Program> samples = {
      vm::identity_program(), vm::constant_program(9), vm::join_lookup_program(),
      vm::swap01_program(), vm::evens_program(),
  };
  for (const Program& p : samples) {
    std::string text = vm::serialize_program(p);
    std::istringstream in(text);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    Program q = vm::parse_program(p.name, lines);
    CHECK(q.data == p.data);
    REQUIRE(q.code.size() == p.code.size());
    // behavior check: same outputs on a shared oracle
    Oracle o("mod3", [](const Nat& n) { return trit_of(n % 3 == 0); });
    for (std::uint64_t n = 0; n < 12; ++n) {
      RunResult a = vm::run_program(p, o, Nat(n), 100000);
      RunResult b = vm::run_program(q, o, Nat(n), 100000);
      CHECK(a.status == b.status);
      if (a.halted()) CHECK(a.output == b.output);
    }
  }
}

TEST_CASE("validation rejects jump targets past the end") {
  Program p;
  p.code.push_back({vm::Op::Jmp, 5, 0, 0, 0});
  CHECK_THROWS_AS(vm::validate_program(p), Error);
}

TEST_CASE("inlining a program runs it as a subroutine") {
  vm::Builder b("twice-evens");
  b.inline_program(vm::evens_program(), 0, 1);
  // then double the answer
  b.add(2, 1, 1);
  b.halt(2);
  Program p = b.build();
  CHECK(run_val(p, no_oracle(), 4) == 2);
  CHECK(run_val(p, no_oracle(), 5) == 0);

  // inlined copy must not clobber the caller's registers
  vm::Builder b2("keep");
  b2.set(3, 77);
  b2.inline_program(vm::swap01_program(), 0, 1);
  b2.pair_op(4, 1, 3);
  b2.halt(4);
  Program q = b2.build();
  CHECK(run_val(q, no_oracle(), 0) == pair(1, 77));
}

TEST_CASE("oracle helpers answer from their sources") {
  Presentation r = rado_graph();
  Oracle d = diagram_oracle(r);
  CHECK(d.query(encode_pos_rel(0, {Nat(0), Nat(1)})) == Trit::Yes);
  CHECK(d.query(encode_pos_rel(0, {Nat(0), Nat(2)})) == Trit::No);
  CHECK(d.query(pair(9, 9)) == Trit::No);  // junk is simply not in the diagram

  Oracle f = finite_set_oracle({Nat(2), Nat(5)});
  CHECK(f.query(2) == Trit::Yes);
  CHECK(f.query(3) == Trit::No);

  int calls = 0;
  Oracle counted("c", [&calls](const Nat&) {
    ++calls;
    return Trit::Yes;
  });
  Oracle memo = memoize_oracle(counted);
  memo.query(1);
  memo.query(1);
  memo.query(1);
  CHECK(calls == 1);

  Oracle left("l", [](const Nat& n) { return trit_of(n == 4); });
  Oracle right("r", [](const Nat& n) { return trit_of(n == 6); });
  auto inc = [](const Nat& x) { return MapResult::of(x + 1); };
  Oracle j = join_oracle(left, inc, right);
  CHECK(j.query(join_left(4)) == Trit::Yes);
  CHECK(j.query(join_left(5)) == Trit::No);
  CHECK(j.query(join_right(6)) == Trit::Yes);
  CHECK(j.query(join_fun(pair(3, 4))) == Trit::Yes);
  CHECK(j.query(join_fun(pair(3, 5))) == Trit::No);
  Oracle back = join_part_oracle(j, JoinPart::Left);
  CHECK(back.query(4) == Trit::Yes);
  CHECK(back.query(5) == Trit::No);
}
