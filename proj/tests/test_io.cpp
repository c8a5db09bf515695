#include <doctest.h>

#include <string>
#include <vector>

#include "stagecraft/io.hpp"
#include "stagecraft/registry.hpp"

using namespace stagecraft;

namespace {

TextLines lines_of(const std::string& content, std::string file = "inline") {
  return split_lines(std::move(file), content);
}

}  // namespace

TEST_CASE("structures round trip through their text form") {
  SUBCASE("rule backed") {
    Presentation r = rado_graph();
    std::string text = serialize_structure(r);
    Presentation back = parse_structure("rado", lines_of(text));
    for (std::uint64_t a = 0; a < 5; ++a) {
      for (std::uint64_t b = 0; b < 5; ++b) {
        Nat c = encode_pos_rel(0, {Nat(a), Nat(b)});
        CHECK(back.fact_truth(c) == r.fact_truth(c));
      }
    }
  }
  SUBCASE("fact backed") {
    Presentation t = Presentation::from_diagram(
        "tri", graph_signature(), complete_graph().restrict_to({Nat(0), Nat(1), Nat(2)}));
    std::string text = serialize_structure(t);
    Presentation back = parse_structure("tri", lines_of(text));
    REQUIRE(back.is_degenerate_finite());
    CHECK(*back.finite_diagram() == *t.finite_diagram());
  }
}

TEST_CASE("axiom lists round trip including empty hypothesis sets") {
  StreamPtr f = finite_stream("mixed", {
      make_axiom({}, 7),
      make_axiom({Nat(3), Nat(1)}, 9),
      make_axiom({Nat(0)}, 0),
  });
  std::string text = serialize_axioms(*f, 10);
  std::vector<Axiom> back = parse_axioms(lines_of(text));
  REQUIRE(back.size() == 3);
  CHECK(back[0] == make_axiom({}, 7));
  CHECK(back[1] == make_axiom({Nat(1), Nat(3)}, 9));
  CHECK(back[2] == make_axiom({Nat(0)}, 0));
}

TEST_CASE("program files hold one block per program") {
  std::string text = serialize_prog_block(vm::evens_program()) +
                     serialize_prog_block(vm::swap01_program());
  std::vector<vm::Program> progs = parse_programs(lines_of(text));
  REQUIRE(progs.size() == 2);
  CHECK(progs[0].name == vm::evens_program().name);
  CHECK(progs[1].name == vm::swap01_program().name);
  Oracle o("none", [](const Nat&) { return Trit::No; });
  for (std::uint64_t n = 0; n < 6; ++n) {
    CHECK(vm::run_program(progs[0], o, Nat(n), 10000).output == (n % 2 == 0 ? 1 : 0));
  }
  CHECK_THROWS_AS(parse_programs(lines_of("# nothing here")), ParseError);
}

TEST_CASE("functor bundles round trip with every realization intact") {
  RunLimits lim;
  FunctorBundle f = complement_functor_bundle();
  std::string text = serialize_functor(f, 64);
  FunctorBundle back = parse_functor(lines_of(text), lim);
  CHECK(back.name == f.name);
  CHECK(back.source == f.source);
  CHECK(back.target == f.target);
  REQUIRE(back.psi != nullptr);
  CHECK(back.psi->shape() == OperatorStream::Shape::Complement);
  REQUIRE(back.phi_star.has_value());
  REQUIRE(back.arrow_recipe != nullptr);
  CHECK(serialize_recipe(*back.arrow_recipe) == serialize_recipe(*f.arrow_recipe));

  // truncated axiom lists reload as finite streams and still verify
  FunctorBundle fin = f;
  fin.psi = finite_stream("prefix", {make_axiom({Nat(1)}, 2)});
  std::string text2 = serialize_functor(fin, 64);
  FunctorBundle back2 = parse_functor(lines_of(text2), lim);
  REQUIRE(back2.psi != nullptr);
  CHECK(back2.psi->length() == Nat(1));
}

TEST_CASE("staged functors serialize with decider and recipe") {
  RunLimits lim;
  ComputableUpgrade up = enum_to_computable(complement_functor_bundle(), lim);
  std::string text = serialize_functor(up.functor, 64);
  FunctorBundle back = parse_functor(lines_of(text), lim);
  REQUIRE(back.phi.has_value());
  REQUIRE(back.arrow_recipe != nullptr);
  // the reloaded decider answers like the original over the same diagram
  Oracle d = diagram_oracle(rado_graph());
  for (std::uint64_t c = 0; c < 40; ++c) {
    vm::RunResult a = vm::run_program(*up.functor.phi, d, Nat(c), 100000);
    vm::RunResult b = vm::run_program(*back.phi, d, Nat(c), 100000);
    REQUIRE(a.halted());
    REQUIRE(b.halted());
    CHECK(a.output == b.output);
  }
}

TEST_CASE("interpretations round trip in the explicit family form") {
  RunLimits lim;
  EffectiveInterpretation I = interp_pair_intersection();
  std::string text = serialize_interpretation(I, 16);
  auto back = parse_interpretation(lines_of(text), lim);
  REQUIRE(back != nullptr);
  CHECK(back->name == I.name);
  CHECK(back->target == I.target);
  Presentation p = pure_equality();
  Nat a = enc_tuple({Nat(0), Nat(1)});
  CHECK(dom_status(*back, p, a, 5000) == dom_status(I, p, a, 5000));
  CHECK(back->sim.same(enc_tuple({Nat(0), Nat(1)}), enc_tuple({Nat(1), Nat(0)})));
}

TEST_CASE("builtin and synthesized interpretation shortcuts parse") {
  RunLimits lim;
  auto builtin = parse_interpretation(
      lines_of("INTERP pair-intersection\nBUILTIN pair-intersection\nEND"), lim);
  REQUIRE(builtin != nullptr);
  CHECK(builtin->sim.same(enc_tuple({Nat(0), Nat(1)}), enc_tuple({Nat(1), Nat(0)})));

  std::string synth = "INTERP complement-star\nSYNTH star\n" +
                      serialize_functor(complement_functor_bundle(), 64) + "END\n";
  auto star = parse_interpretation(lines_of(synth), lim);
  REQUIRE(star != nullptr);
  // the star domain certifies some tuple for a small target element
  std::vector<Nat> cand = star->section_candidates(Nat(3), lim);
  REQUIRE(!cand.empty());
  CHECK(dom_status(*star, rado_graph(), cand.front(), 4000) == Trit::Yes);
}

TEST_CASE("artifact kinds are sniffed from the first significant line") {
  CHECK(sniff_artifact(lines_of("SIG 1\nAR 0 2\nRULE rado")) == ArtifactKind::Structure);
  CHECK(sniff_artifact(lines_of("AXIOM 0 -> 0")) == ArtifactKind::Axioms);
  CHECK(sniff_artifact(lines_of("FUNCTOR f\nEND")) == ArtifactKind::Functor);
  CHECK(sniff_artifact(lines_of("INTERP i\nEND")) == ArtifactKind::Interpretation);
  CHECK(sniff_artifact(lines_of("# comment\n\nPROG p\nHALT 0\nENDPROG")) ==
        ArtifactKind::Programs);
  CHECK(sniff_artifact(lines_of("whatever")) == ArtifactKind::Unknown);
}

TEST_CASE("config files override only the keys they set") {
  RunConfig base;
  RunConfig cfg = parse_config(lines_of("stage=500\nprefix=9\nbudget=123\nstrict=1"), base);
  CHECK(cfg.stage == 500);
  CHECK(cfg.prefix == 9);
  CHECK(cfg.limits.steps == 123);
  CHECK(cfg.limits.axioms == 123);
  CHECK(cfg.strict);
  CHECK(cfg.format == ReportFormat::Text);

  RunConfig cfg2 = parse_config(lines_of("format=structured\nsteps=7"), base);
  CHECK(cfg2.format == ReportFormat::Structured);
  CHECK(cfg2.limits.steps == 7);
  CHECK(cfg2.limits.axioms == base.limits.axioms);
  CHECK(cfg2.stage == base.stage);
}

TEST_CASE("parse errors name the file and line") {
  try {
    parse_config(lines_of("stage=500\nbogus=1", "conf.txt"), RunConfig{});
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("conf.txt") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_structure("x", lines_of("SIG notanumber")), ParseError);
  CHECK_THROWS_AS(parse_functor(lines_of("FUNCTOR f\nPSI RULE nosuch\nEND"), RunLimits{}),
                  ParseError);
}

TEST_CASE("reports render deterministically sorted by check name") {
  Report r;
  r.add("zeta", Outcome::pass());
  r.add("alpha", Outcome::fail(7, "broke"));
  r.add("mid", Outcome::undecided("later"));
  std::string text = r.to_text();
  CHECK(text.find("CHECK alpha fail witness=7") != std::string::npos);
  CHECK(text.find("CHECK mid inconclusive") != std::string::npos);
  CHECK(text.find("CHECK zeta pass") != std::string::npos);
  CHECK(text.find("alpha") < text.find("mid"));
  CHECK(text.find("mid") < text.find("zeta"));
  CHECK(text.find("SUMMARY") != std::string::npos);
  CHECK(r.passes() == 1);
  CHECK(r.failures() == 1);
  CHECK(r.inconclusive() == 1);

  Report swapped;
  swapped.add("mid", Outcome::undecided("later"));
  swapped.add("alpha", Outcome::fail(7, "broke"));
  swapped.add("zeta", Outcome::pass());
  CHECK(swapped.to_text() == text);
  CHECK(swapped.to_structured() == r.to_structured());
}

TEST_CASE("the example registry lists six runnable scenarios") {
  const auto& reg = example_registry();
  REQUIRE(reg.size() == 6);
  for (std::size_t i = 1; i < reg.size(); ++i) CHECK(reg[i - 1].name < reg[i].name);
  for (const ExampleBundle& e : reg) {
    CHECK(find_example(e.name) == &e);
    CHECK(!e.summary.empty());
    CHECK(!e.checks.empty());
    CHECK(e.run != nullptr);
  }
  CHECK(find_example("no-such-example") == nullptr);
}

TEST_CASE("shipped artifact files parse and verify clean") {
  RunConfig cfg;
  const char* files[] = {
      "artifacts/complement.functor", "artifacts/identity.functor",
      "artifacts/rado.structure",     "artifacts/triangle.structure",
      "artifacts/pair-intersection.interp", "artifacts/identity-prefix.axioms",
      "artifacts/evens-then-identity.progs",
  };
  for (const char* f : files) {
    CAPTURE(f);
    Report rep = verify_artifact(read_text_file(f), cfg);
    CHECK_FALSE(rep.has_fail());
  }
}
