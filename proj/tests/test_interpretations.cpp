#include <doctest.h>

#include <vector>

#include "stagecraft/interpretations.hpp"

using namespace stagecraft;

namespace {

// x0 != x1 over one free component of width 2, no witnesses
Disjunct distinct_pair() {
  Disjunct d;
  d.free_split = {2};
  d.literals = {lit_eq(Term::v(0), Term::v(1), false)};
  return d;
}

// exists w: edge(x0, w), one free component of width 1
Disjunct has_neighbor() {
  Disjunct d;
  d.free_split = {1};
  d.witness_arity = 1;
  d.literals = {lit_rel(0, {Term::v(0), Term::v(1)})};
  return d;
}

}  // namespace

TEST_CASE("literal instantiation reads the flattened assignment") {
  Literal l = lit_rel(0, {Term::v(0), Term::v(2), Term::c(9)}, false);
  Fact f = instantiate_literal(l, {Nat(4), Nat(5)}, {Nat(6)});
  CHECK(f.kind == FactKind::NegRel);
  CHECK(f.rel == 0);
  CHECK(f.args == std::vector<Nat>{4, 6, 9});
  CHECK_THROWS_AS(instantiate_literal(l, {Nat(4)}, {}), Error);
}

TEST_CASE("layouts admit only matching component shapes") {
  Disjunct d = distinct_pair();
  CHECK(layout_matches(d, {{Nat(1), Nat(2)}}));
  CHECK_FALSE(layout_matches(d, {{Nat(1)}}));
  CHECK_FALSE(layout_matches(d, {{Nat(1)}, {Nat(2)}}));
  Disjunct two;
  two.free_split = {1, 1};
  CHECK(two.free_arity() == 2);
  CHECK(layout_matches(two, {{Nat(1)}, {Nat(2)}}));
  CHECK_FALSE(layout_matches(two, {{Nat(1), Nat(2)}}));
}

TEST_CASE("quantifier free evaluation respects signs on both backends") {
  Presentation r = rado_graph();
  Disjunct d;
  d.free_split = {2};
  d.literals = {lit_rel(0, {Term::v(0), Term::v(1)}),
                lit_eq(Term::v(0), Term::v(0))};
  CHECK(eval_qf(d, r, {Nat(0), Nat(1)}, {}));
  CHECK_FALSE(eval_qf(d, r, {Nat(0), Nat(2)}, {}));

  FiniteDiagram dg = r.restrict_to({Nat(0), Nat(1), Nat(2)});
  CHECK(eval_qf(d, dg, {Nat(0), Nat(1)}, {}));
  CHECK_FALSE(eval_qf(d, dg, {Nat(0), Nat(2)}, {}));
}

TEST_CASE("existential truth over a finite diagram draws witnesses from support") {
  Presentation r = rado_graph();
  FamilyPtr fam = literal_family("nbr", {has_neighbor()});
  FiniteDiagram dg = r.restrict_to({Nat(2), Nat(3)});  // no 2-3 edge
  CHECK(eval_sigma1_finite(*fam, dg, std::vector<Nat>{Nat(2)}, 5) ==
        SemiVerdict::Inconclusive);
  FiniteDiagram dg2 = r.restrict_to({Nat(2), Nat(3), Nat(4)});  // 2-4 is an edge
  CHECK(eval_sigma1_finite(*fam, dg2, std::vector<Nat>{Nat(2)}, 5) == SemiVerdict::Yes);
  // disjunct bound zero sees nothing
  CHECK(eval_sigma1_finite(*fam, dg2, std::vector<Nat>{Nat(2)}, 0) ==
        SemiVerdict::Inconclusive);
}

TEST_CASE("budgeted existential truth dovetails witnesses over a presentation") {
  Presentation r = rado_graph();
  FamilyPtr fam = literal_family("nbr", {has_neighbor()});
  CHECK(eval_sigma1_budget(*fam, r, std::vector<Nat>{Nat(0)}, 500) == SemiVerdict::Yes);
  CHECK(eval_sigma1_budget(*fam, r, std::vector<Nat>{Nat(0)}, 0) ==
        SemiVerdict::Inconclusive);
  // empty graph never satisfies the neighbor formula
  CHECK(eval_sigma1_budget(*fam, empty_graph(), std::vector<Nat>{Nat(0)}, 500) ==
        SemiVerdict::Inconclusive);
  CHECK_FALSE(empty_family("none")->disjunct(0).has_value());
}

TEST_CASE("builtin equivalences decide what their names say") {
  Nat t12 = enc_tuple({Nat(1), Nat(2)});
  Nat t21 = enc_tuple({Nat(2), Nat(1)});
  Nat t32 = enc_tuple({Nat(3), Nat(2)});
  Nat t13 = enc_tuple({Nat(1), Nat(3)});

  ComputableEquiv code = equiv_code();
  CHECK(code.same(t12, t12));
  CHECK_FALSE(code.same(t12, t21));

  ComputableEquiv last = equiv_last_coord();
  CHECK(last.same(t12, t32));
  CHECK_FALSE(last.same(t12, t13));

  ComputableEquiv ms = equiv_multiset();
  CHECK(ms.same(t12, t21));
  CHECK_FALSE(ms.same(t12, t32));
  CHECK(ms.same(enc_tuple({Nat(1), Nat(1), Nat(2)}), enc_tuple({Nat(2), Nat(1), Nat(1)})));
  CHECK_FALSE(ms.same(enc_tuple({Nat(1), Nat(2)}), enc_tuple({Nat(1), Nat(1), Nat(2)})));

  ComputableEquiv dl = equiv_drop_last();
  CHECK(dl.same(t12, t13));
  CHECK_FALSE(dl.same(t12, t32));

  ComputableEquiv all = equiv_everything();
  CHECK(all.same(t12, t32));

  ComputableEquiv tab = equiv_table("swap", {{t12, t21}});
  CHECK(tab.same(t12, t21));
  CHECK(tab.same(t21, t12));
  CHECK(tab.same(t32, t32));
  CHECK_FALSE(tab.same(t12, t32));
}

TEST_CASE("class codes are least representatives and idempotent") {
  ComputableEquiv ms = equiv_multiset();
  Nat t12 = enc_tuple({Nat(1), Nat(2)});
  Nat t21 = enc_tuple({Nat(2), Nat(1)});
  Nat least = t12 < t21 ? t12 : t21;
  CHECK(class_code(ms, t12) == least);
  CHECK(class_code(ms, t21) == least);
  CHECK(class_code(ms, class_code(ms, t21)) == class_code(ms, t21));
  // singletons map to themselves
  CHECK(class_code(equiv_code(), 17) == 17);
}

TEST_CASE("members below enumerates a class prefix in order") {
  ComputableEquiv dl = equiv_drop_last();
  Nat t10 = enc_tuple({Nat(1), Nat(0)});  // 5
  std::vector<Nat> mem = dl.members_below(t10, 60);
  REQUIRE(!mem.empty());
  CHECK(std::is_sorted(mem.begin(), mem.end()));
  for (const Nat& m : mem) {
    CHECK(m < 60);
    CHECK(dl.same(m, t10));
  }
  // [1,0] and [1,2] share the dropped-last class; [1,2] codes as 20
  CHECK(std::count(mem.begin(), mem.end(), Nat(20)) == 1);
}

TEST_CASE("identity interpretation of pure equality keeps singleton tuples") {
  EffectiveInterpretation I = interp_identity_pure();
  Presentation p = pure_equality();
  Nat single = enc_tuple({Nat(3)});
  CHECK(dom_status(I, p, single, 2000) == Trit::Yes);
  CHECK(dom_status(I, p, enc_tuple({Nat(1), Nat(2)}), 2000) == Trit::No);
  MapResult r = least_rep(I, p, single, RunLimits{});
  REQUIRE(r.is_value());
  CHECK(r.value == single);
}

TEST_CASE("pair interpretation sorts out its domain and classes") {
  EffectiveInterpretation I = interp_pair_intersection();
  Presentation p = pure_equality();
  // {0,1} as [0,1] and [1,0]; both in the domain, same class
  Nat a = enc_tuple({Nat(0), Nat(1)});  // 6
  Nat b = enc_tuple({Nat(1), Nat(0)});  // 5
  CHECK(dom_status(I, p, a, 5000) == Trit::Yes);
  CHECK(dom_status(I, p, b, 5000) == Trit::Yes);
  CHECK(I.sim.same(a, b));
  CHECK_FALSE(I.sim.same(a, enc_tuple({Nat(0), Nat(2)})));
  // degenerate pairs are certified out
  CHECK(dom_status(I, p, enc_tuple({Nat(2), Nat(2)}), 5000) == Trit::No);
  CHECK(dom_status(I, p, enc_tuple({Nat(1)}), 5000) == Trit::No);

  MapResult r = least_rep(I, p, a, RunLimits{});
  REQUIRE(r.is_value());
  CHECK(r.value == 5);  // [1,0] is the least code for {0,1}
}

TEST_CASE("quotient fragment of the pair interpretation starts with six reps") {
  EffectiveInterpretation I = interp_pair_intersection();
  Presentation p = pure_equality();
  QuotientFragment q = build_quotient_fragment(I, p, 19, 5000);
  CHECK(q.reps == std::vector<Nat>{5, 8, 12, 13, 17, 18});
  CHECK(q.undecided == 0);
  // rep ids relate exactly like the two element sets they name
  auto edge = [&](std::uint64_t i, std::uint64_t j) {
    return q.diagram.contains(encode_pos_rel(0, {Nat(i), Nat(j)}));
  };
  // reps decode to {1,0},{2,0},{3,0},{2,1},{4,0},{3,1}
  CHECK(edge(0, 1));        // {0,1} meets {0,2}
  CHECK(edge(0, 3));        // {0,1} meets {1,2}
  CHECK_FALSE(edge(1, 5));  // {0,2} vs {1,3}
  CHECK_FALSE(edge(2, 2));
  CHECK(q.diagram.consistent());
  // sampled tuples map onto their least representative
  CHECK(q.class_of.at(Nat(6)) == 5);
}

TEST_CASE("congruence holds for honest pairs and breaks for rigged ones") {
  EffectiveInterpretation I = interp_pair_intersection();
  Presentation p = pure_equality();
  std::vector<std::pair<Nat, Nat>> good = {
      {enc_tuple({Nat(0), Nat(1)}), enc_tuple({Nat(1), Nat(0)})},
      {enc_tuple({Nat(2), Nat(3)}), enc_tuple({Nat(3), Nat(2)})},
  };
  CHECK(check_congruence(I, p, good, 4000).ok == Trit::Yes);

  EffectiveInterpretation broken = I;
  broken.sim = equiv_everything();
  std::vector<std::pair<Nat, Nat>> mixed = {
      {enc_tuple({Nat(0), Nat(1)}), enc_tuple({Nat(0), Nat(1), Nat(2)})},
  };
  Outcome out = check_congruence(broken, p, mixed, 4000);
  CHECK(out.ok == Trit::No);
  CHECK(out.has_witness);

  CHECK(check_congruence(I, p, {}, 4000).ok == Trit::Unknown);
}
