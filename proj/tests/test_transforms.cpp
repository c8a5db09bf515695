#include <doctest.h>

#include <vector>

#include "stagecraft/registry.hpp"
#include "stagecraft/transforms.hpp"

using namespace stagecraft;

namespace {

Nat run_out(const vm::Program& p, const Oracle& o, const Nat& in) {
  vm::RunResult r = vm::run_program(p, o, in, 200000);
  REQUIRE(r.status == vm::RunResult::Status::Halted);
  return r.output;
}

}  // namespace

TEST_CASE("stage programs report one past the least firing axiom") {
  Oracle d = diagram_oracle(rado_graph());
  RunLimits lim;

  vm::Program sid = stage_program(*identity_stream(), QuerySide::Direct, 64, "s-id");
  Nat member = encode_pos_rel(0, {Nat(0), Nat(1)});
  CHECK(run_out(sid, d, member) == member + 1);
  CHECK(run_out(sid, d, encode_pos_rel(0, {Nat(0), Nat(2)})) == 0);

  vm::Program sc = stage_program(*complement_stream(), QuerySide::Direct, 64, "s-comp");
  Nat flipped = encode_neg_rel(0, {Nat(0), Nat(1)});
  CHECK(run_out(sc, d, flipped) == member + 1);  // axiom index is the unflipped code
  CHECK(run_out(sc, d, member) == 0);            // complement never re-emits the edge

  // finite streams embed their axiom table
  StreamPtr fin = finite_stream("fin", {make_axiom({Nat(9)}, 5), make_axiom({}, 5)});
  vm::Program sf = stage_program(*fin, QuerySide::Direct, 64, "s-fin");
  Oracle empty = finite_set_oracle({});
  CHECK(run_out(sf, empty, 5) == 2);
  CHECK(run_out(sf, empty, 7) == 0);
  Oracle has9 = finite_set_oracle({Nat(9)});
  CHECK(run_out(sf, has9, 5) == 1);
}

TEST_CASE("universe programs accept exactly the staged element codes") {
  Oracle d = diagram_oracle(rado_graph());
  vm::Program u = universe_program(*complement_stream(), QuerySide::Direct, 64, "u-comp");
  // stage of b=b under complement is code(b=b)+1, eq facts pass through flip
  Nat s0 = encode_pos_eq(0, 0) + 1;
  CHECK(run_out(u, d, pair(0, s0)) == 1);
  CHECK(run_out(u, d, pair(0, s0 + 1)) == 0);
  CHECK(run_out(u, d, pair(0, 0)) == 0);
  Nat s3 = encode_pos_eq(3, 3) + 1;
  CHECK(run_out(u, d, pair(3, s3)) == 1);
  CHECK(run_out(u, d, pair(4, s3)) == 0);
}

TEST_CASE("the staged upgrade of the complement functor verifies end to end") {
  RunLimits lim;
  FunctorBundle f = complement_functor_bundle();
  ComputableUpgrade up = enum_to_computable(f, lim);
  CHECK(up.functor.phi.has_value());

  Presentation r = rado_graph();
  UpgradeReport rep = check_upgrade(f, up, r, 10, 300, lim);
  CHECK(rep.lambda_injective.ok == Trit::Yes);
  CHECK(rep.lambda_literal.ok == Trit::Yes);
  CHECK(rep.decides.ok == Trit::Yes);
  CHECK(rep.exact.ok == Trit::Yes);
  CHECK(rep.ok());

  // the element witness sends b to pair(b, stage of b=b)
  Oracle d = diagram_oracle(r);
  CHECK(run_out(up.lambda, d, 0) == pair(0, encode_pos_eq(0, 0) + 1));
  CHECK(run_out(up.lambda, d, 1) == pair(1, encode_pos_eq(1, 1) + 1));
}

TEST_CASE("a starved decider leaves totality undecided instead of failing") {
  RunLimits lim;
  FunctorBundle f = complement_functor_bundle();
  ComputableUpgrade up = enum_to_computable(f, lim);
  RunLimits starved;
  starved.steps = 3;  // decider cannot finish a single fact
  UpgradeReport rep = check_upgrade(f, up, rado_graph(), 4, 50, starved);
  CHECK(rep.decides.ok == Trit::Unknown);
  CHECK(rep.decides.ok != Trit::No);
}

TEST_CASE("pseudo inverse witness for complement against itself checks out") {
  BiTransformWitness w = complement_bitransform_witness();
  Presentation r = rado_graph();
  RunLimits lim;
  PseudoInverseReport pr = check_pseudo_inverse(w, r, r, 8, lim);
  CHECK(pr.a_injective.ok == Trit::Yes);
  CHECK(pr.a_literal.ok == Trit::Yes);
  CHECK(pr.b_injective.ok == Trit::Yes);
  CHECK(pr.b_literal.ok == Trit::Yes);
  CHECK(pr.agreement.ok == Trit::Yes);
  CHECK(pr.ok());
}

TEST_CASE("upgraded round trip maps stay injective and close the square") {
  BiTransformWitness w = complement_bitransform_witness();
  Presentation r = rado_graph();
  RunLimits lim;
  BiTransformUpgrade u = bitransform_upgrade(w, lim);
  REQUIRE(u.gamma_a != nullptr);
  REQUIRE(u.gamma_b != nullptr);
  CHECK(check_bitransform_gammas(w, u, r, r, 8, lim).ok == Trit::Yes);
  CHECK(check_bitransform_square(w, u, r, 8, lim).ok == Trit::Yes);
}

TEST_CASE("gamma recipes evaluate through a bound context") {
  BiTransformWitness w = complement_bitransform_witness();
  RunLimits lim;
  BiTransformUpgrade u = bitransform_upgrade(w, lim);
  Presentation r = rado_graph();
  EvalContext ctx = bind_gamma_context(w, u, 'a', r, lim);
  MapResult m = eval_map(*u.gamma_a, ctx, 0);
  REQUIRE(m.is_value());
  // double complement re-emits b=b late: the staged image element is a pair
  auto [b, s] = unpair(m.value);
  CHECK(b == 0);
  CHECK(s > 0);
}

TEST_CASE("interpretation to functor names image elements by least class reps") {
  RunLimits lim;
  auto I = std::make_shared<EffectiveInterpretation>(interp_pair_intersection());
  FunctorBundle f = interp_to_functor(I, Signature::finite({}), lim);
  CHECK(f.interp != nullptr);
  REQUIRE(f.psi != nullptr);
  ImageView v = functor_image(f, pure_equality(), lim);
  CHECK(v.universe(5) == Trit::Yes);    // [1,0], the least code for {0,1}
  CHECK(v.universe(6) == Trit::No);     // [0,1] is equivalent but not least
  CHECK(v.universe(0) == Trit::Unknown);  // junk shape, never emitted
  CHECK(certified_universe(v, 19) == std::vector<Nat>{5, 8, 12, 13, 17, 18});
}

TEST_CASE("class naming is well defined, idempotent, and catches rigged canons") {
  CHECK(check_class_map(equiv_multiset(), 300).ok == Trit::Yes);
  CHECK(check_class_idempotent(equiv_multiset(), {Nat(0), Nat(5), Nat(20), Nat(33)}).ok ==
        Trit::Yes);

  ComputableEquiv rigged = equiv_code();
  rigged.canon = [](const Nat& x) { return x - (x % 2); };  // collapses odd onto even
  Outcome out = check_class_map(rigged, 10);
  CHECK(out.ok == Trit::No);
  CHECK(out.has_witness);
}

TEST_CASE("synthesized interpretation certifies the functor image both ways") {
  RunLimits lim;
  FunctorBundle f = complement_functor_bundle();
  InterpSynthesis s = functor_to_interp(f, lim);
  REQUIRE(s.sigma != nullptr);
  REQUIRE(s.star != nullptr);
  CHECK(s.skipped.empty());
  Presentation r = rado_graph();
  CHECK(crosscheck_star(s, r, 12, lim).ok == Trit::Yes);

  // star domain tuples append the disjunct index; dropping it recovers sigma's
  Nat el = 3;
  std::vector<Nat> sec = s.star->section_candidates(el, lim);
  REQUIRE(!sec.empty());
  CHECK(dom_status(*s.star, r, sec.front(), 4000) == Trit::Yes);
  std::vector<Nat> t = dec_tuple(sec.front());
  REQUIRE(t.size() >= 2);
  CHECK(t[t.size() - 2] == el);  // certified element sits before the index
}

TEST_CASE("round trip through the synthesized interpretation lands home") {
  RunLimits lim;
  RoundTripReport rep = round_trip_report(complement_functor_bundle(), rado_graph(), 10, lim);
  CHECK(rep.map_defined.ok == Trit::Yes);
  CHECK(rep.map_injective.ok == Trit::Yes);
  CHECK(rep.literal_preserving.ok == Trit::Yes);
  CHECK(rep.square_commutes.ok == Trit::Yes);
  CHECK(rep.ok());
}

TEST_CASE("prepending shifts the row index by one") {
  vm::Program head = vm::constant_program(9);
  vm::Program seq = vm::evens_program();
  vm::Program p = prepend_computable(head, seq);
  Oracle o("none", [](const Nat&) { return Trit::No; });
  for (std::uint64_t x = 0; x < 30; ++x) {
    CHECK(run_out(p, o, pair(0, Nat(x))) == 9);
  }
  for (std::uint64_t i = 0; i < 4; ++i) {
    for (std::uint64_t x = 0; x < 10; ++x) {
      Nat want = run_out(seq, o, pair(Nat(i), Nat(x)));
      CHECK(run_out(p, o, pair(Nat(i + 1), Nat(x))) == want);
    }
  }

  // nesting twice pushes the first head two rows down
  vm::Program q = prepend_computable(vm::constant_program(4), p);
  CHECK(run_out(q, o, pair(0, 5)) == 4);
  CHECK(run_out(q, o, pair(1, 5)) == 9);
  CHECK(run_out(q, o, pair(2, 4)) == run_out(seq, o, pair(0, 4)));
}

TEST_CASE("negative controls fail with concrete witnesses") {
  RunConfig cfg;
  Outcome broken_arrow = run_broken_arrow_control(cfg);
  CHECK(broken_arrow.ok == Trit::No);
  CHECK(broken_arrow.has_witness);
  CHECK(broken_arrow.witness == 1);  // constant arrow moves 1 onto 0

  Outcome broken_sim = run_broken_sim_control(cfg);
  CHECK(broken_sim.ok == Trit::No);
  CHECK(broken_sim.has_witness);
}
