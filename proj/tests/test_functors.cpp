#include <doctest.h>

#include <vector>

#include "stagecraft/functors.hpp"

using namespace stagecraft;

namespace {

FunctorBundle complement_bundle() {
  FunctorBundle f;
  f.name = "comp-test";
  f.source = graph_signature();
  f.target = graph_signature();
  f.psi = complement_stream();
  f.phi_star = vm::join_lookup_program();
  f.arrow_recipe = map_ref("f");
  return f;
}

MapFn identity_fn() {
  return [](const Nat& x) { return MapResult::of(x); };
}

MapFn swap01_fn() {
  return [](const Nat& x) {
    if (x == 0) return MapResult::of(1);
    if (x == 1) return MapResult::of(0);
    return MapResult::of(x);
  };
}

}  // namespace

TEST_CASE("image view resolves facts through the enumeration side") {
  RunLimits lim;
  ImageView v = functor_image(complement_bundle(), rado_graph(), lim);
  CHECK(v.fact(encode_neg_rel(0, {Nat(0), Nat(1)})) == Trit::Yes);
  CHECK(v.fact(encode_pos_rel(0, {Nat(0), Nat(1)})) == Trit::No);
  CHECK(v.fact(encode_pos_rel(0, {Nat(0), Nat(2)})) == Trit::Yes);
  CHECK(v.universe(3) == Trit::Yes);
  CHECK(certified_universe(v, 10) == std::vector<Nat>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("image views nest, double complement is the original graph") {
  RunLimits lim;
  ImageView inner = functor_image(complement_bundle(), rado_graph(), lim);
  ImageView outer = functor_image_over(complement_bundle(), inner.as_oracle(), lim);
  Presentation r = rado_graph();
  for (std::uint64_t a = 0; a < 4; ++a) {
    for (std::uint64_t b = 0; b < 4; ++b) {
      Nat pos = encode_pos_rel(0, {Nat(a), Nat(b)});
      CHECK(outer.fact(pos) == trit_of(r.fact_truth(pos)));
    }
  }
}

TEST_CASE("image view runs a decider program when one is present") {
  // decider: 1 iff the queried code is in the base oracle, so the image is
  // the base diagram itself
  vm::Builder b("echo");
  b.qry(1, 0);
  b.halt(1);
  FunctorBundle f;
  f.name = "echo";
  f.source = graph_signature();
  f.target = graph_signature();
  f.phi = b.build();
  RunLimits lim;
  ImageView v = functor_image(f, rado_graph(), lim);
  CHECK(v.fact(encode_pos_rel(0, {Nat(0), Nat(1)})) == Trit::Yes);
  CHECK(v.fact(encode_pos_rel(0, {Nat(0), Nat(2)})) == Trit::No);

  RunLimits starved;
  starved.steps = 1;
  ImageView s = functor_image(f, rado_graph(), starved);
  CHECK(s.fact(encode_pos_rel(0, {Nat(0), Nat(1)})) == Trit::Unknown);
}

TEST_CASE("asserting both signs of an atom is reported ill formed") {
  Nat pos = encode_pos_rel(0, {Nat(0), Nat(1)});
  Nat neg = negate_fact(pos);
  FunctorBundle f;
  f.name = "contradictory";
  f.source = graph_signature();
  f.target = graph_signature();
  f.psi = finite_stream("both-signs", {make_axiom({}, pos), make_axiom({}, neg)});
  RunLimits lim;
  ImageView v = functor_image(f, rado_graph(), lim);
  CHECK(v.fact(pos) == Trit::Yes);
  CHECK_THROWS_AS((void)v.fact(neg), IllFormedError);
}

TEST_CASE("arrow evaluation prefers the recipe and falls back to the program") {
  RunLimits lim;
  Presentation r = rado_graph();
  Presentation rs = r.relabeled("rado-swapped",
                                [](const Nat& x) -> Nat { return x == 0 ? 1 : x == 1 ? 0 : x; },
                                [](const Nat& x) -> Nat { return x == 0 ? 1 : x == 1 ? 0 : x; });
  FunctorBundle f = complement_bundle();
  MapFn via_recipe = functor_map_iso(f, r, swap01_fn(), rs, lim);
  f.arrow_recipe = nullptr;  // now the join scanning program must answer
  MapFn via_prog = functor_map_iso(f, r, swap01_fn(), rs, lim);
  for (std::uint64_t x = 0; x < 6; ++x) {
    MapResult a = via_recipe(Nat(x));
    MapResult b = via_prog(Nat(x));
    REQUIRE(a.is_value());
    REQUIRE(b.is_value());
    Nat want = x == 0 ? 1 : x == 1 ? 0 : x;
    CHECK(a.value == want);
    CHECK(b.value == want);
  }
}

TEST_CASE("functor laws hold for the complement functor on rado") {
  RunLimits lim;
  std::vector<Presentation> ps = {rado_graph()};
  std::vector<SampleIso> isos = {{"id", "rado", "rado", identity_fn()}};
  LawReport rep = check_functor_laws(complement_bundle(), ps, isos, 15, lim);
  CHECK(rep.identity_law.ok == Trit::Yes);
  CHECK(rep.composition_law.ok == Trit::Yes);
  CHECK(rep.all_pass());
}

TEST_CASE("a constant arrow program breaks the identity law with a witness") {
  FunctorBundle f = complement_bundle();
  f.arrow_recipe = nullptr;
  f.phi_star = vm::constant_program(0);
  RunLimits lim;
  std::vector<Presentation> ps = {rado_graph()};
  std::vector<SampleIso> isos = {{"id", "rado", "rado", identity_fn()}};
  LawReport rep = check_functor_laws(f, ps, isos, 15, lim);
  CHECK(rep.identity_law.ok == Trit::No);
  CHECK(rep.identity_law.has_witness);
  CHECK(rep.identity_law.witness == 1);  // 0 maps to 0, the break shows at 1
}

TEST_CASE("laws are undecided when no certified element gets checked") {
  RunLimits lim;
  std::vector<Presentation> ps = {rado_graph()};
  std::vector<SampleIso> isos = {{"id", "rado", "rado", identity_fn()}};
  LawReport rep = check_functor_laws(complement_bundle(), ps, isos, 0, lim);
  CHECK(rep.identity_law.ok == Trit::Unknown);

  // a caller supplied element list replaces the blind prefix scan
  auto hook = [](const Presentation&) { return std::vector<Nat>{0, 1, 2}; };
  LawReport rep2 = check_functor_laws(complement_bundle(), ps, isos, 0, lim, hook);
  CHECK(rep2.identity_law.ok == Trit::Yes);
  CHECK(rep2.composition_law.ok == Trit::Yes);
}

TEST_CASE("composition law is exercised across distinct endpoints") {
  RunLimits lim;
  auto sw = [](const Nat& x) -> Nat { return x == 0 ? 1 : x == 1 ? 0 : x; };
  Presentation r = rado_graph();
  Presentation rs = r.relabeled("rado-swapped", sw, sw);
  std::vector<Presentation> ps = {r, rs};
  std::vector<SampleIso> isos = {
      {"swap", "rado", "rado-swapped", swap01_fn()},
      {"unswap", "rado-swapped", "rado", swap01_fn()},
  };
  LawReport rep = check_functor_laws(complement_bundle(), ps, isos, 10, lim);
  CHECK(rep.identity_law.ok == Trit::Yes);
  CHECK(rep.composition_law.ok == Trit::Yes);
}

TEST_CASE("enumeration outputs from a subdiagram persist in the superdiagram") {
  Presentation r = rado_graph();
  FiniteDiagram small = r.restrict_to({Nat(0), Nat(1)});
  FiniteDiagram big = r.restrict_to({Nat(0), Nat(1), Nat(2), Nat(3)});
  Outcome out = check_substructure_preservation(complement_bundle(), small, big, 2000);
  CHECK(out.ok == Trit::Yes);

  // the precondition (first diagram inside the second) is enforced
  CHECK_THROWS_AS(
      check_substructure_preservation(complement_bundle(), big, small, 2000), Error);
}

TEST_CASE("binding a functor keeps all realizations available") {
  FunctorBundle f = complement_bundle();
  BoundFunctor b = bind_functor(f);
  CHECK(b.name == f.name);
  CHECK(b.psi == f.psi);
  CHECK(b.phi_star.has_value());
  CHECK(b.arrow_recipe == f.arrow_recipe);
}
