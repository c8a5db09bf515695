#include "stagecraft/registry.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stagecraft/coding.hpp"
#include "stagecraft/maps.hpp"
#include "stagecraft/oracle.hpp"
#include "stagecraft/structures.hpp"
#include "stagecraft/vm.hpp"

namespace stagecraft {

namespace {

// Fail is final; undecided only downgrades a pass.
class Probe {
 public:
  void fail(Nat w, std::string note) {
    if (out_.ok != Trit::No) out_ = Outcome::fail(std::move(w), std::move(note));
  }
  void undecided(std::string note) {
    if (out_.ok == Trit::Yes) out_ = Outcome::undecided(std::move(note));
  }
  const Outcome& take() const { return out_; }

 private:
  Outcome out_ = Outcome::pass();
};

std::vector<SampleIso> automorphism_isos(const std::string& pname) {
  return {{"id", pname, pname, identity_map_fn()},
          {"swap01", pname, pname, swap01_map_fn()}};
}

void add_laws(Report& r, const std::string& prefix, const LawReport& lr) {
  r.add(prefix + ".identity", lr.identity_law);
  r.add(prefix + ".composition", lr.composition_law);
}

// The shared skeleton of the enumerable-functor examples: functor laws on
// sample isomorphisms, monotonicity over nested finite diagrams, then the
// stage construction with its witness checks, then laws again on the
// upgraded functor.
Report run_enum_functor_example(const FunctorBundle& f,
                                const std::vector<Presentation>& ps,
                                const std::vector<SampleIso>& isos, const RunConfig& cfg) {
  Report r;
  add_laws(r, "laws", check_functor_laws(f, ps, isos, cfg.prefix, cfg.limits));

  const Presentation& base = ps.front();
  FiniteDiagram d1 = base.restrict_to({Nat(0), Nat(1), Nat(2)});
  FiniteDiagram d2 = base.restrict_to({Nat(0), Nat(1), Nat(2), Nat(3), Nat(4)});
  r.add("preserves.substructure", check_substructure_preservation(f, d1, d2, cfg.stage));

  ComputableUpgrade up = enum_to_computable(f, cfg.limits);
  UpgradeReport ur = check_upgrade(f, up, base, cfg.prefix, Nat(500), cfg.limits);
  r.add("upgrade.map.injective", ur.lambda_injective);
  r.add("upgrade.map.literal", ur.lambda_literal);
  r.add("upgrade.decides", ur.decides);
  r.add("upgrade.exact", ur.exact);

  LawReport ul = check_functor_laws(up.functor, ps, isos, cfg.prefix, cfg.limits,
                                    staged_sample_hook(f, up, cfg.prefix, cfg.limits));
  add_laws(r, "upgrade.laws", ul);
  return r;
}

std::vector<std::string> enum_functor_checks() {
  return {"laws.identity",        "laws.composition",  "preserves.substructure",
          "upgrade.map.injective", "upgrade.map.literal", "upgrade.decides",
          "upgrade.exact",        "upgrade.laws.identity", "upgrade.laws.composition"};
}

Report run_identity_example(const RunConfig& cfg) {
  Presentation pe = pure_equality();
  FunctorBundle f = identity_functor_bundle(pe.signature());
  return run_enum_functor_example(f, {pe}, automorphism_isos(pe.name()), cfg);
}

Report run_complement_complete(const RunConfig& cfg) {
  Presentation cg = complete_graph();
  return run_enum_functor_example(complement_functor_bundle(), {cg},
                                  automorphism_isos(cg.name()), cfg);
}

Report run_complement_rado(const RunConfig& cfg) {
  Presentation rado = rado_graph();
  Presentation sw = rado_swapped();
  std::vector<SampleIso> isos = {{"id", rado.name(), rado.name(), identity_map_fn()},
                                 {"swap01", rado.name(), sw.name(), swap01_map_fn()},
                                 {"swap01-back", sw.name(), rado.name(), swap01_map_fn()}};
  FunctorBundle f = complement_functor_bundle();
  Report r = run_enum_functor_example(f, {rado, sw}, isos, cfg);

  RoundTripReport rt = round_trip_report(f, rado, cfg.prefix, cfg.limits);
  r.add("roundtrip.defined", rt.map_defined);
  r.add("roundtrip.injective", rt.map_injective);
  r.add("roundtrip.literal", rt.literal_preserving);
  r.add("roundtrip.square", rt.square_commutes);

  InterpSynthesis syn = functor_to_interp(f, cfg.limits);
  r.add("interp.crosscheck", crosscheck_star(syn, rado, cfg.prefix, cfg.limits));
  auto pairs = sigma_congruence_pairs(syn, rado, 200, cfg.limits);
  r.add("interp.congruence",
        pairs.empty()
            ? Outcome::undecided("no certified equivalent pairs within budget")
            : check_congruence(*syn.sigma, rado, pairs, cfg.limits.axioms));
  return r;
}

// Fragment of the quotient the pair interpretation carves out of pure
// equality, matched against the reference graph by brute force search.
Outcome fragment_matches(const EffectiveInterpretation& I, const RunConfig& cfg) {
  // Codes below 19 certify exactly the first six classes of unordered pairs.
  QuotientFragment q = build_quotient_fragment(I, pure_equality(), Nat(19),
                                               cfg.limits.axioms);
  if (q.reps.size() < 6) {
    return Outcome::undecided("fewer than six classes resolved within budget");
  }
  if (q.reps.size() > 6) {
    return Outcome::fail(q.reps[6], "unexpected extra class representative");
  }
  std::vector<Nat> verts;
  for (const Nat& rep : q.reps) {
    std::vector<Nat> l = dec_tuple(rep);
    if (l.size() != 2) return Outcome::fail(rep, "representative is not a pair");
    auto v = triangular_vertex_of_pair(std::min(l[0], l[1]), std::max(l[0], l[1]));
    if (!v) return Outcome::undecided("reference vertex lookup gave up");
    verts.push_back(*v);
  }
  FiniteDiagram ref = triangular_graph().restrict_to(verts);
  std::vector<PartialIso> isos = find_partial_isos(q.diagram, ref, 6);
  if (isos.empty()) {
    return Outcome::fail(q.reps[0], "no isomorphism onto the reference fragment");
  }
  return Outcome::pass();
}

Report run_pair_interp(const RunConfig& cfg) {
  auto I = std::make_shared<EffectiveInterpretation>(interp_pair_intersection());
  Report r;
  r.add("classes.welldefined", check_class_map(I->sim, Nat(300)));
  std::vector<Nat> samples;
  for (std::uint64_t t = 0; t <= 100; ++t) samples.push_back(Nat(t));
  r.add("classes.idempotent", check_class_idempotent(I->sim, samples));

  // Swapped pairs name the same unordered pair, so they must be congruent.
  std::vector<std::pair<Nat, Nat>> pairs;
  for (std::uint64_t x = 0; pairs.size() < 200; ++x) {
    for (std::uint64_t y = x + 1; pairs.size() < 200 && y <= x + 20; ++y) {
      pairs.push_back({enc_tuple({Nat(x), Nat(y)}), enc_tuple({Nat(y), Nat(x)})});
    }
  }
  r.add("congruence", check_congruence(*I, pure_equality(), pairs, cfg.limits.axioms));
  r.add("fragment.matches", fragment_matches(*I, cfg));
  return r;
}

Report run_prepend(const RunConfig& cfg) {
  vm::Program head = vm::evens_program();
  vm::Program tail = vm::identity_program();
  vm::Program p1 = prepend_computable(head, tail);
  vm::Program p2 = prepend_computable(vm::swap01_program(), p1);
  vm::Program p3 = prepend_computable(vm::constant_program(Nat(7)), p2);

  Oracle none;
  MapFn fhead = bind_program(head, none, cfg.limits);
  MapFn ftail = bind_program(tail, none, cfg.limits);
  MapFn f1 = bind_program(p1, none, cfg.limits);
  MapFn f3 = bind_program(p3, none, cfg.limits);
  MapFn fswap = bind_program(vm::swap01_program(), none, cfg.limits);

  auto agree = [](Probe& pr, const MapResult& got, const MapResult& want, const Nat& at) {
    if (got.status == MapResult::Status::Unknown ||
        want.status == MapResult::Status::Unknown) {
      pr.undecided("row lookup ran out of budget at " + at.str());
      return;
    }
    if (!got.is_value() || !want.is_value() || got.value != want.value) {
      pr.fail(at, "sequence rows disagree at " + at.str());
    }
  };

  Probe head0, shift, nhead, nshift;
  for (std::uint64_t x = 0; x <= 100; ++x) {
    Nat xv(x);
    agree(head0, f1(pair(0, xv)), fhead(xv), pair(0, xv));
    for (std::uint64_t i = 0; i < 3; ++i) {
      Nat in = pair(Nat(i) + 1, xv);
      agree(shift, f1(in), ftail(pair(Nat(i), xv)), in);
    }
    agree(nhead, f3(pair(0, xv)), MapResult::of(Nat(7)), pair(0, xv));
    agree(nhead, f3(pair(1, xv)), fswap(xv), pair(1, xv));
    agree(nhead, f3(pair(2, xv)), fhead(xv), pair(2, xv));
    for (std::uint64_t i = 0; i < 3; ++i) {
      Nat in = pair(Nat(i) + 3, xv);
      agree(nshift, f3(in), ftail(pair(Nat(i), xv)), in);
    }
  }

  Report r;
  r.add("prepend.head", head0.take());
  r.add("prepend.shift", shift.take());
  r.add("prepend.nested.head", nhead.take());
  r.add("prepend.nested.shift", nshift.take());
  return r;
}

Report run_bitransform(const RunConfig& cfg) {
  BiTransformWitness w = complement_bitransform_witness();
  Presentation rado = rado_graph();
  Report r;
  PseudoInverseReport pr = check_pseudo_inverse(w, rado, rado, cfg.prefix, cfg.limits);
  r.add("pseudo.a.injective", pr.a_injective);
  r.add("pseudo.a.literal", pr.a_literal);
  r.add("pseudo.b.injective", pr.b_injective);
  r.add("pseudo.b.literal", pr.b_literal);
  r.add("pseudo.agreement", pr.agreement);

  BiTransformUpgrade u = bitransform_upgrade(w, cfg.limits);
  r.add("gamma.maps", check_bitransform_gammas(w, u, rado, rado, cfg.prefix, cfg.limits));
  r.add("gamma.square", check_bitransform_square(w, u, rado, cfg.prefix, cfg.limits));
  return r;
}

}  // namespace

MapFn identity_map_fn() {
  return [](const Nat& x) { return MapResult::of(x); };
}

MapFn swap01_map_fn() {
  return [](const Nat& x) {
    if (x == 0) return MapResult::of(Nat(1));
    if (x == 1) return MapResult::of(Nat(0));
    return MapResult::of(x);
  };
}

FunctorBundle identity_functor_bundle(Signature sig) {
  FunctorBundle f;
  f.name = "identity";
  f.source = sig;
  f.target = std::move(sig);
  f.psi = identity_stream();
  f.phi_star = vm::join_lookup_program();
  f.arrow_recipe = map_ref("f");
  return f;
}

FunctorBundle complement_functor_bundle() {
  FunctorBundle f;
  f.name = "complement";
  f.source = graph_signature();
  f.target = graph_signature();
  f.psi = complement_stream();
  f.phi_star = vm::join_lookup_program();
  f.arrow_recipe = map_ref("f");
  return f;
}

BiTransformWitness complement_bitransform_witness() {
  BiTransformWitness w;
  w.f = complement_functor_bundle();
  w.g = complement_functor_bundle();
  w.g.name = "complement-back";  // contexts key functors by name
  w.lambda_a = vm::identity_program();
  w.lambda_b = vm::identity_program();
  return w;
}

Presentation rado_swapped() {
  auto swap = [](const Nat& x) {
    if (x == 0) return Nat(1);
    if (x == 1) return Nat(0);
    return x;
  };
  return rado_graph().relabeled("rado-swapped", swap, swap);
}

std::function<std::vector<Nat>(const Presentation&)> staged_sample_hook(
    const FunctorBundle& f, const ComputableUpgrade& up, const Nat& prefix,
    const RunLimits& limits) {
  vm::Program lambda = up.lambda;
  return [f, lambda, prefix, limits](const Presentation& p) {
    ImageView view = functor_image(f, p, limits);
    MapFn lam = bind_program(lambda, diagram_oracle(p), limits);
    std::vector<Nat> out;
    for (const Nat& b : certified_universe(view, prefix)) {
      MapResult m = lam(b);
      if (m.is_value()) out.push_back(m.value);
    }
    return out;
  };
}

std::vector<std::pair<Nat, Nat>> sigma_congruence_pairs(const InterpSynthesis& syn,
                                                        const Presentation& p,
                                                        std::size_t want,
                                                        const RunLimits& limits) {
  std::vector<std::pair<Nat, Nat>> out;
  if (!syn.sigma || !syn.sigma->section_candidates) return out;
  const EffectiveInterpretation& I = *syn.sigma;
  for (std::uint64_t b = 0; out.size() < want && b < 64; ++b) {
    std::vector<Nat> cands = I.section_candidates(Nat(b), limits);
    if (cands.empty()) continue;
    Nat t1 = cands.front();
    if (dom_status(I, p, t1, limits.axioms) != Trit::Yes) continue;
    std::vector<Nat> tup = dec_tuple(t1);
    // Pad with values that leave the original slots findable.
    for (std::uint64_t z = 0; out.size() < want && z < 8; ++z) {
      std::vector<Nat> padded;
      padded.push_back(Nat(z) + 100);
      padded.insert(padded.end(), tup.begin(), tup.end());
      Nat t2 = enc_tuple(padded);
      if (!I.sim.same(t1, t2)) continue;
      if (dom_status(I, p, t2, limits.axioms) != Trit::Yes) continue;
      out.push_back({t1, t2});
    }
  }
  return out;
}

FunctorBundle broken_arrow_functor() {
  FunctorBundle f = complement_functor_bundle();
  f.name = "complement-broken";
  f.arrow_recipe = nullptr;  // force the program realization
  f.phi_star = vm::constant_program(Nat(0));
  return f;
}

std::shared_ptr<const EffectiveInterpretation> broken_sim_interp() {
  auto I = std::make_shared<EffectiveInterpretation>(interp_pair_intersection());
  I->name = "pair-intersection-broken";
  I->sim = equiv_everything();
  return I;
}

Outcome run_broken_arrow_control(const RunConfig& cfg) {
  FunctorBundle bad = broken_arrow_functor();
  Presentation rado = rado_graph();
  std::vector<SampleIso> isos = {{"id", rado.name(), rado.name(), identity_map_fn()}};
  LawReport lr = check_functor_laws(bad, {rado}, isos, cfg.prefix, cfg.limits);
  return lr.identity_law;
}

Outcome run_broken_sim_control(const RunConfig& cfg) {
  auto I = broken_sim_interp();
  // The collapsed relation declares a pair and a triple equivalent; the
  // triple is provably outside the domain, so congruence must break.
  std::vector<std::pair<Nat, Nat>> pairs = {
      {enc_tuple({Nat(0), Nat(1)}), enc_tuple({Nat(0), Nat(1), Nat(2)})},
      {enc_tuple({Nat(1), Nat(0)}), enc_tuple({Nat(2), Nat(3)})}};
  return check_congruence(*I, pure_equality(), pairs, cfg.limits.axioms);
}

const std::vector<ExampleBundle>& example_registry() {
  static const std::vector<ExampleBundle> reg = [] {
    std::vector<ExampleBundle> v;
    v.push_back({"identity-functor",
                 "identity functor on pure equality, staged and law checked",
                 enum_functor_checks(), run_identity_example});
    v.push_back({"complement-complete",
                 "graph complement functor on the complete graph",
                 enum_functor_checks(), run_complement_complete});
    {
      std::vector<std::string> checks = enum_functor_checks();
      for (const char* c : {"roundtrip.defined", "roundtrip.injective", "roundtrip.literal",
                            "roundtrip.square", "interp.crosscheck", "interp.congruence"}) {
        checks.push_back(c);
      }
      v.push_back({"complement-rado",
                   "graph complement functor on the random graph, with the "
                   "interpretation round trip",
                   std::move(checks), run_complement_rado});
    }
    v.push_back({"pair-intersection-interp",
                 "unordered pairs meeting in one point, interpreted over pure equality",
                 {"classes.welldefined", "classes.idempotent", "congruence",
                  "fragment.matches"},
                 run_pair_interp});
    v.push_back({"prepend-evens",
                 "the parity sequence prepended onto an identity-coded sequence",
                 {"prepend.head", "prepend.shift", "prepend.nested.head",
                  "prepend.nested.shift"},
                 run_prepend});
    v.push_back({"bitransform-rado",
                 "complement against itself on the random graph, upgraded on both sides",
                 {"pseudo.a.injective", "pseudo.a.literal", "pseudo.b.injective",
                  "pseudo.b.literal", "pseudo.agreement", "gamma.maps", "gamma.square"},
                 run_bitransform});
    std::sort(v.begin(), v.end(),
              [](const ExampleBundle& a, const ExampleBundle& b) { return a.name < b.name; });
    return v;
  }();
  return reg;
}

const ExampleBundle* find_example(const std::string& name) {
  for (const ExampleBundle& e : example_registry()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

const Presentation* matching_builtin(const Signature& sig) {
  static const std::vector<Presentation> builtins = [] {
    std::vector<Presentation> v;
    for (const std::string& n : builtin_presentation_names()) {
      if (auto p = find_builtin_presentation(n)) v.push_back(*p);
    }
    return v;
  }();
  for (const Presentation& p : builtins) {
    if (p.signature() == sig) return &p;
  }
  return nullptr;
}

Report verify_structure_file(const TextLines& t, const RunConfig&) {
  Report r;
  Presentation p = parse_structure("loaded", t);
  r.add("structure.parses", Outcome::pass());
  std::string once = serialize_structure(p);
  Presentation again = parse_structure("loaded", split_lines(t.file, once));
  r.add("structure.roundtrip",
        serialize_structure(again) == once
            ? Outcome::pass()
            : Outcome::fail(0, "serialized form is not stable"));
  Outcome consistent = Outcome::pass();
  if (p.is_degenerate_finite()) {
    Nat w;
    if (!p.finite_diagram()->consistent(&w)) {
      consistent = Outcome::fail(w, "both signs of one atom");
    }
  }
  r.add("structure.consistent", consistent);
  return r;
}

Report verify_axioms_file(const TextLines& t, const RunConfig& cfg) {
  Report r;
  std::vector<Axiom> axs = parse_axioms(t);
  r.add("axioms.parse", Outcome::pass());
  StreamPtr s = finite_stream(t.file, axs);
  FunctorBundle f;
  f.name = "loaded";
  f.source = Signature::finite({});
  f.target = Signature::finite({});
  f.psi = s;
  Presentation pe = pure_equality();
  FiniteDiagram d1 = pe.restrict_to({Nat(0), Nat(1)});
  FiniteDiagram d2 = pe.restrict_to({Nat(0), Nat(1), Nat(2), Nat(3)});
  r.add("axioms.monotone", check_substructure_preservation(f, d1, d2, cfg.stage));
  return r;
}

Report verify_functor_file(const TextLines& t, const RunConfig& cfg) {
  Report r;
  FunctorBundle f = parse_functor(t, cfg.limits);
  r.add("functor.parses", Outcome::pass());
  const Presentation* src = matching_builtin(f.source);
  if (!src) {
    r.add("functor.laws.identity",
          Outcome::undecided("no built-in structure matches the source signature"));
    return r;
  }
  std::vector<SampleIso> isos = {{"id", src->name(), src->name(), identity_map_fn()}};
  LawReport lr = check_functor_laws(f, {*src}, isos, cfg.prefix, cfg.limits);
  r.add("functor.laws.identity", lr.identity_law);
  if (f.psi) {
    FiniteDiagram d1 = src->restrict_to({Nat(0), Nat(1), Nat(2)});
    FiniteDiagram d2 = src->restrict_to({Nat(0), Nat(1), Nat(2), Nat(3), Nat(4)});
    r.add("functor.preserves.substructure",
          check_substructure_preservation(f, d1, d2, cfg.stage));
  }
  if (f.psi && f.phi) {
    // The decider and the enumeration must tell the same story.
    ImageView dec(f, *src, cfg.limits);
    Probe agree;
    Oracle base = diagram_oracle(*src);
    for (std::uint64_t c = 0; c < 100; ++c) {
      Trit got = dec.fact(Nat(c));
      Trit want = member_trit(*f.psi, base, Nat(c), cfg.limits);
      if (got == Trit::Unknown || want == Trit::Unknown) {
        agree.undecided("code " + std::to_string(c) + " undecided");
        continue;
      }
      if (got != want) agree.fail(Nat(c), "decider disagrees with the enumeration");
    }
    r.add("functor.decider.agrees", agree.take());
  }
  return r;
}

Report verify_programs_file(const TextLines& t, const RunConfig&) {
  Report r;
  std::vector<vm::Program> progs = parse_programs(t);
  r.add("programs.parse", Outcome::pass());
  Probe stable;
  for (const vm::Program& p : progs) {
    std::string once = serialize_prog_block(p);
    TextLines body = split_lines(t.file, once);
    vm::Program again = parse_programs(body).front();
    if (serialize_prog_block(again) != once) {
      stable.fail(0, "program '" + p.name + "' does not round trip");
    }
  }
  r.add("programs.roundtrip", stable.take());
  return r;
}

Report verify_interp_file(const TextLines& t, const RunConfig& cfg) {
  Report r;
  std::shared_ptr<const EffectiveInterpretation> I = parse_interpretation(t, cfg.limits);
  r.add("interp.parses", Outcome::pass());
  r.add("classes.welldefined", check_class_map(I->sim, Nat(300)));
  std::vector<Nat> samples;
  for (std::uint64_t c = 0; c <= 100; ++c) samples.push_back(Nat(c));
  r.add("classes.idempotent", check_class_idempotent(I->sim, samples));
  Presentation host = pure_equality();
  if (I->sim.members_below) {
    std::vector<std::pair<Nat, Nat>> pairs;
    for (std::uint64_t c = 0; c < 100 && pairs.size() < 50; ++c) {
      for (const Nat& m : I->sim.members_below(Nat(c), Nat(c))) {
        if (m != Nat(c)) pairs.push_back({m, Nat(c)});
      }
    }
    r.add("congruence",
          pairs.empty() ? Outcome::undecided("no equivalent pairs below the scan bound")
                        : check_congruence(*I, host, pairs, cfg.limits.axioms));
  } else {
    r.add("congruence", Outcome::undecided("relation has no class enumeration hook"));
  }
  return r;
}

}  // namespace

Report verify_artifact(const TextLines& t, const RunConfig& cfg) {
  switch (sniff_artifact(t)) {
    case ArtifactKind::Structure:
      return verify_structure_file(t, cfg);
    case ArtifactKind::Axioms:
      return verify_axioms_file(t, cfg);
    case ArtifactKind::Functor:
      return verify_functor_file(t, cfg);
    case ArtifactKind::Interpretation:
      return verify_interp_file(t, cfg);
    case ArtifactKind::Programs:
      return verify_programs_file(t, cfg);
    case ArtifactKind::Unknown:
      break;
  }
  throw ParseError(t.file + ":1: unrecognized artifact; expected SIG, AXIOM, FUNCTOR or INTERP");
}

}  // namespace stagecraft
