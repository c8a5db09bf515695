#include <doctest.h>

#include <set>
#include <vector>

#include "stagecraft/structures.hpp"

using namespace stagecraft;

TEST_CASE("signature declares exactly its arity list") {
  Signature g = graph_signature();
  CHECK(g.is_finite());
  CHECK(g.relation_count() == 1);
  CHECK(g.declares(0));
  CHECK_FALSE(g.declares(1));
  CHECK(g.arity(0) == 2);
  CHECK_THROWS_AS(g.arity(1), Error);

  Signature u = Signature::unbounded([](std::uint64_t) { return 3; }, "all-ternary");
  CHECK_FALSE(u.is_finite());
  CHECK(u.declares(Nat("99999999999999999999")));
  CHECK(u.arity(7) == 3);
  CHECK_THROWS_AS(u.relation_count(), Error);
}

TEST_CASE("rado edges follow the bit rule") {
  Presentation r = rado_graph();
  auto edge = [&](std::uint64_t a, std::uint64_t b) {
    return r.fact_truth(encode_pos_rel(0, {Nat(a), Nat(b)}));
  };
  // edge(m,n) for m<n iff bit m of n is set
  CHECK(edge(0, 1));        // 1 = ..01
  CHECK_FALSE(edge(0, 2));  // 2 = ..10
  CHECK(edge(1, 2));
  CHECK(edge(0, 3));
  CHECK(edge(1, 3));
  CHECK_FALSE(edge(2, 3));
  CHECK(edge(2, 4));
  // symmetric, irreflexive
  CHECK(edge(1, 0));
  CHECK(edge(2, 1));
  CHECK_FALSE(edge(5, 5));

  Presentation rc = rado_complement();
  CHECK_FALSE(rc.fact_truth(encode_pos_rel(0, {Nat(0), Nat(1)})));
  CHECK(rc.fact_truth(encode_pos_rel(0, {Nat(0), Nat(2)})));
  CHECK_FALSE(rc.fact_truth(encode_pos_rel(0, {Nat(5), Nat(5)})));
}

TEST_CASE("complete and empty graphs decide every pair the obvious way") {
  Presentation k = complete_graph();
  Presentation e = empty_graph();
  for (std::uint64_t a = 0; a < 6; ++a) {
    for (std::uint64_t b = 0; b < 6; ++b) {
      bool want = a != b;
      CHECK(k.fact_truth(encode_pos_rel(0, {Nat(a), Nat(b)})) == want);
      CHECK_FALSE(e.fact_truth(encode_pos_rel(0, {Nat(a), Nat(b)})));
    }
  }
}

TEST_CASE("equality facts are answered by identity everywhere") {
  Presentation r = rado_graph();
  CHECK(r.fact_truth(encode_pos_eq(4, 4)));
  CHECK_FALSE(r.fact_truth(encode_pos_eq(4, 5)));
  CHECK(r.fact_truth(encode_neg_eq(4, 5)));
  CHECK_FALSE(r.diagram_member(pair(7, 0)));  // junk tag, total answer
  CHECK_THROWS_AS(r.fact_truth(pair(7, 0)), MalformedFactError);
  CHECK_THROWS_AS(r.fact_truth(encode_pos_rel(3, {Nat(0), Nat(1)})), MalformedFactError);
}

TEST_CASE("triangular graph vertices enumerate two element sets") {
  // first decoded two element sets: {0,1},{0,2},{0,3},{1,2},{0,4},{1,3}
  auto want = std::vector<std::pair<Nat, Nat>>{
      {0, 1}, {0, 2}, {0, 3}, {1, 2}, {0, 4}, {1, 3}};
  for (std::size_t v = 0; v < want.size(); ++v) {
    auto [a, b] = triangular_vertex_pair(Nat(v));
    CHECK(a == want[v].first);
    CHECK(b == want[v].second);
    auto back = triangular_vertex_of_pair(want[v].first, want[v].second);
    REQUIRE(back.has_value());
    CHECK(*back == v);
    auto swapped = triangular_vertex_of_pair(want[v].second, want[v].first);
    REQUIRE(swapped.has_value());
    CHECK(*swapped == v);
  }
  CHECK_FALSE(triangular_vertex_of_pair(3, 3).has_value());

  Presentation t = triangular_graph();
  auto edge = [&](std::uint64_t v, std::uint64_t w) {
    return t.fact_truth(encode_pos_rel(0, {Nat(v), Nat(w)}));
  };
  CHECK(edge(0, 1));        // {0,1} meets {0,2}
  CHECK(edge(0, 3));        // {0,1} meets {1,2}
  CHECK_FALSE(edge(1, 5));  // {0,2} vs {1,3} are disjoint
  CHECK_FALSE(edge(2, 2));
}

TEST_CASE("diagram prefix collects exactly the true facts below the stage") {
  Presentation r = rado_graph();
  Nat stage = 2000;
  FiniteDiagram d = r.diagram_prefix(stage);
  for (const Nat& c : d.facts) {
    CHECK(c < stage);
    CHECK(r.fact_truth(c));
  }
  for (std::uint64_t c = 0; c < 2000; ++c) {
    if (d.contains(Nat(c))) continue;
    auto f = decode_fact(Nat(c));
    if (!f) continue;
    if (!r.signature().declares(f->rel) && !fact_is_eq(f->kind)) continue;
    if (!fact_is_eq(f->kind) && f->args.size() != r.signature().arity(f->rel)) continue;
    CHECK_FALSE(r.fact_truth(*f));
  }
  CHECK(d.consistent());
}

TEST_CASE("restriction lists both signs over the chosen elements") {
  Presentation r = rado_graph();
  FiniteDiagram d = r.restrict_to({Nat(0), Nat(1), Nat(2)});
  CHECK(d.support == std::set<Nat>{0, 1, 2});
  CHECK(d.contains(encode_pos_rel(0, {Nat(0), Nat(1)})));
  CHECK(d.contains(encode_neg_rel(0, {Nat(0), Nat(2)})));
  CHECK(d.contains(encode_neg_eq(0, 1)));
  CHECK(d.contains(encode_pos_eq(2, 2)));
  CHECK(d.consistent());
  // every relation atom over the support is decided one way or the other
  for (std::uint64_t a = 0; a < 3; ++a) {
    for (std::uint64_t b = 0; b < 3; ++b) {
      Nat pos = encode_pos_rel(0, {Nat(a), Nat(b)});
      CHECK((d.contains(pos) || d.contains(negate_fact(pos))));
    }
  }
}

TEST_CASE("nested restrictions agree with restricting once") {
  Presentation r = rado_graph();
  FiniteDiagram inner = r.restrict_to({Nat(1), Nat(3)});
  FiniteDiagram outer = r.restrict_to({Nat(0), Nat(1), Nat(3), Nat(5)});
  for (const Nat& c : inner.facts) CHECK(outer.contains(c));
}

TEST_CASE("inconsistent diagrams report a witness") {
  FiniteDiagram d = diagram_from_facts(
      {encode_pos_rel(0, {Nat(0), Nat(1)}), encode_neg_rel(0, {Nat(0), Nat(1)})});
  Nat w = 0;
  CHECK_FALSE(d.consistent(&w));
  CHECK((w == encode_pos_rel(0, {Nat(0), Nat(1)}) || w == encode_neg_rel(0, {Nat(0), Nat(1)})));
}

TEST_CASE("partial iso search respects decided literals") {
  Presentation k = complete_graph();
  Presentation e = empty_graph();
  FiniteDiagram k3 = k.restrict_to({Nat(0), Nat(1), Nat(2)});
  FiniteDiagram e3 = e.restrict_to({Nat(0), Nat(1), Nat(2)});
  CHECK(find_partial_isos(k3, e3, 3).empty());
  // complete graph on 3 vertices has all 6 bijections as isos
  CHECK(find_partial_isos(k3, k3, 3).size() == 6);

  Presentation r = rado_graph();
  FiniteDiagram p = r.restrict_to({Nat(0), Nat(1), Nat(2)});  // path 0-1-2
  auto isos = find_partial_isos(p, p, 3);
  // path automorphisms: identity and the end swap
  CHECK(isos.size() == 2);
  PartialIso id;
  id.map = {{0, 0}, {1, 1}, {2, 2}};
  PartialIso flip;
  flip.map = {{0, 2}, {1, 1}, {2, 0}};
  CHECK(partial_iso_respects(p, p, id));
  CHECK(partial_iso_respects(p, p, flip));
  PartialIso bad;
  bad.map = {{0, 1}, {1, 0}, {2, 2}};
  CHECK_FALSE(partial_iso_respects(p, p, bad));
}

TEST_CASE("relabeling transports facts along the renaming") {
  auto swap01 = [](const Nat& x) -> Nat {
    if (x == 0) return 1;
    if (x == 1) return 0;
    return x;
  };
  Presentation r = rado_graph().relabeled("rado-swapped", swap01, swap01);
  Presentation orig = rado_graph();
  for (std::uint64_t a = 0; a < 5; ++a) {
    for (std::uint64_t b = 0; b < 5; ++b) {
      bool want = orig.fact_truth(encode_pos_rel(0, {Nat(a), Nat(b)}));
      Nat sa = swap01(Nat(a)), sb = swap01(Nat(b));
      CHECK(r.fact_truth(encode_pos_rel(0, {sa, sb})) == want);
    }
  }
  CHECK(r.name() == "rado-swapped");
}

TEST_CASE("finite presentations answer from their diagram and flag themselves") {
  Presentation t = Presentation::from_diagram(
      "tri", graph_signature(), complete_graph().restrict_to({Nat(0), Nat(1), Nat(2)}));
  CHECK(t.is_degenerate_finite());
  CHECK(t.fact_truth(encode_pos_rel(0, {Nat(0), Nat(1)})));
  CHECK_FALSE(t.fact_truth(encode_pos_rel(0, {Nat(0), Nat(4)})));
  CHECK(t.finite_diagram().has_value());
}

TEST_CASE("builtin lookup covers the shipped presentations") {
  for (const std::string& n : builtin_presentation_names()) {
    const Presentation* p = find_builtin_presentation(n);
    REQUIRE(p != nullptr);
    CHECK(p->name() == n);
  }
  CHECK(find_builtin_presentation("no-such-structure") == nullptr);
}
