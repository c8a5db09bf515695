#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/functors.hpp"
#include "stagecraft/interpretations.hpp"
#include "stagecraft/maps.hpp"
#include "stagecraft/operators.hpp"
#include "stagecraft/structures.hpp"
#include "stagecraft/vm.hpp"

namespace stagecraft {

// Which component of a join oracle the emitted program's queries target.
// Direct queries the oracle as given; Left and Right address one diagram of
// a join through the residue layout.
enum class QuerySide { Direct, Left, Right };

// Program computing, for a fact code t, the least stage at which the stream
// emits t over the queried diagram: one past the least firing axiom index,
// 0 when no axiom can fire. Identity and complement streams compile to a
// couple of queries; finite and synthesized streams embed their axiom table
// up to table_budget entries. A synthesized stream past its table cannot
// deny, so the program loops there and the run surfaces as inconclusive
// rather than a wrong 0.
vm::Program stage_program(const OperatorStream& psi, QuerySide side,
                          std::uint64_t table_budget, std::string name);

// Decides pair(b, s): is s exactly the stage at which b=b appears?
vm::Program universe_program(const OperatorStream& psi, QuerySide side,
                             std::uint64_t table_budget, std::string name);

struct ComputableUpgrade {
  FunctorBundle functor;  // fact decider plus staged arrow realization
  vm::Program lambda;     // element map b -> pair(b, stage of b=b), run over
                          // the source structure's diagram
};

// The stage construction: from a functor given by an enumeration operator,
// a functor of the same shape whose images are decidable. Elements become
// pair(b, s) with s the least stage enumerating b=b; facts are decided by
// pulling them back and checking stages; the arrow conjugates the original
// arrow with the stage maps on both ends. `lambda` witnesses that each
// image is isomorphic to the original one.
ComputableUpgrade enum_to_computable(const FunctorBundle& f, const RunLimits& limits);

struct UpgradeReport {
  Outcome lambda_injective;  // the stage map embeds F(A) into F'(A) without collisions
  Outcome lambda_literal;    // and preserves every decided literal
  Outcome decides;           // the fact decider answers every code below the bound
  Outcome exact;             // and agrees with the enumeration-side recomputation

  bool ok() const {
    return lambda_injective.ok == Trit::Yes && lambda_literal.ok == Trit::Yes &&
           decides.ok == Trit::Yes && exact.ok == Trit::Yes;
  }
};

// Verifies one upgrade against its source functor at one presentation: the
// lambda witness is an embedding on the first `prefix` certified image
// elements, and the decider is total and correct on fact codes below
// `fact_bound`, judged against stages recomputed from the enumeration side.
UpgradeReport check_upgrade(const FunctorBundle& f, const ComputableUpgrade& up,
                            const Presentation& p, const Nat& prefix, const Nat& fact_bound,
                            const RunLimits& limits);

// A claimed pseudo-inverse pair: two functors and, for each side, a program
// mapping a structure into the round-trip image over that structure's
// diagram.
struct BiTransformWitness {
  FunctorBundle f;
  FunctorBundle g;
  vm::Program lambda_a;  // over D(A): A -> G(F(A))
  vm::Program lambda_b;  // over D(B): B -> F(G(B))
};

struct PseudoInverseReport {
  Outcome a_injective;
  Outcome a_literal;
  Outcome b_injective;
  Outcome b_literal;
  Outcome agreement;  // F applied to lambda_a matches lambda_b on F(A)

  bool ok() const {
    return a_injective.ok == Trit::Yes && a_literal.ok == Trit::Yes &&
           b_injective.ok == Trit::Yes && b_literal.ok == Trit::Yes &&
           agreement.ok == Trit::Yes;
  }
};

// Verifies the pseudo-inverse conditions at one presentation per side:
// both round-trip maps are injective literal-preserving embeddings on the
// prefix, and the two witnesses agree after applying f.
PseudoInverseReport check_pseudo_inverse(const BiTransformWitness& w,
                                         const Presentation& pa, const Presentation& pb,
                                         const Nat& prefix, const RunLimits& limits);

struct BiTransformUpgrade {
  ComputableUpgrade f_up;
  ComputableUpgrade g_up;
  // Round-trip maps for the upgraded pair. gamma_a needs oracles named
  // "A~", "F(A~)", "F'(A~)"; gamma_b needs "B~", "G(B~)", "G'(B~)".
  MapRecipePtr gamma_a;
  MapRecipePtr gamma_b;
};

// Upgrades both functors of a pseudo-inverse pair and emits the round-trip
// maps of the upgraded pair as compositions of the original witnesses with
// the stage maps. Pure: failed preconditions surface in the checks below,
// not here.
BiTransformUpgrade bitransform_upgrade(const BiTransformWitness& w, const RunLimits& limits);

// A context binding everything one gamma recipe names, over a concrete
// structure. side is 'a' or 'b'.
EvalContext bind_gamma_context(const BiTransformWitness& w, const BiTransformUpgrade& u,
                               char side, const Presentation& p, const RunLimits& limits);

// Injectivity of both gamma maps on the prefix, with image elements
// certified inside the expected image universes and equal to independently
// recomputed stage values.
Outcome check_bitransform_gammas(const BiTransformWitness& w, const BiTransformUpgrade& u,
                                 const Presentation& pa, const Presentation& pb,
                                 const Nat& prefix, const RunLimits& limits);

// The upgraded square at one source structure: gamma_b instantiated over
// the upgraded image agrees with the upgraded f applied to gamma_a,
// pointwise on elements derived from the first `prefix` source elements.
Outcome check_bitransform_square(const BiTransformWitness& w, const BiTransformUpgrade& u,
                                 const Presentation& pa, const Nat& prefix,
                                 const RunLimits& limits);

// From an interpretation, the functor whose images are its quotients. The
// axiom stream instantiates the defining families into finite certificate
// sets, naming each domain class by its least equivalent tuple code; the
// arrow lifts an isomorphism over the domain tuples and renames.
FunctorBundle interp_to_functor(std::shared_ptr<const EffectiveInterpretation> I,
                                Signature source, const RunLimits& limits);

// Class naming is well defined: two tuple codes below the bound get the
// same name exactly when equivalent.
Outcome check_class_map(const ComputableEquiv& sim, const Nat& bound);
// And idempotent: renaming a name changes nothing.
Outcome check_class_idempotent(const ComputableEquiv& sim, const std::vector<Nat>& samples);

struct InterpSynthesis {
  // The one-sided form: domain certified by positive evidence only.
  std::shared_ptr<const EffectiveInterpretation> sigma;
  // The two-sided star form, which appends the certifying disjunct index to
  // each domain tuple so membership is refutable. This is the artifact the
  // transform is named for.
  std::shared_ptr<const EffectiveInterpretation> star;
  std::vector<std::string> skipped;  // axioms bypassed as malformed, logged
};

// From the enumeration side of a functor, the interpretation whose domain
// tuples spell out finite certificates drawn from the axiom stream: a tuple
// lists the elements a certificate mentions, the element it certifies, and
// (star form) the index of the disjunct that checks it.
InterpSynthesis functor_to_interp(const FunctorBundle& f, const RunLimits& limits);

// Star and plain domain forms certify consistently for the target elements
// below the bound, and star refutation never hits a certified tuple.
Outcome crosscheck_star(const InterpSynthesis& s, const Presentation& p, const Nat& bound,
                        const RunLimits& limits);

// Decision program for the sequence with X prepended: row 0 answers X, row
// i+1 answers the input program's row i. Input codes are pair(row, x).
vm::Program prepend_computable(const vm::Program& x, const vm::Program& seq);

struct RoundTripReport {
  Outcome map_defined;         // section then class naming resolves on the prefix
  Outcome map_injective;
  Outcome literal_preserving;
  Outcome square_commutes;     // against the identity sample isomorphism

  bool ok() const {
    return map_defined.ok == Trit::Yes && map_injective.ok == Trit::Yes &&
           literal_preserving.ok == Trit::Yes && square_commutes.ok == Trit::Yes;
  }
};

// Functor to interpretation and back, checked to land where it started: the
// composite of the star section with class naming embeds the image of f in
// the rebuilt image, and commutes with both arrow realizations for the
// identity sample isomorphism.
RoundTripReport round_trip_report(const FunctorBundle& f, const Presentation& p,
                                  const Nat& prefix, const RunLimits& limits);

}  // namespace stagecraft
