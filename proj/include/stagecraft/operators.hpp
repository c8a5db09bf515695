#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/oracle.hpp"
#include "stagecraft/structures.hpp"
#include "stagecraft/vm.hpp"

namespace stagecraft {

// One enumeration axiom: if every code in `inputs` is in the oracle set,
// the operator emits `output`.
struct Axiom {
  std::vector<Nat> inputs;  // sorted, no duplicates
  Nat output;

  bool operator==(const Axiom&) const = default;
};

Axiom make_axiom(std::vector<Nat> inputs, Nat output);

// An enumeration operator is an indexed stream of axioms. The stage-x
// approximation uses the first x axioms. Streams may be infinite; indices
// with no axiom (finite streams past the end) return nullopt.
class OperatorStream {
 public:
  // Structural shape, used to pick a translation strategy when a stream is
  // compiled to a decision program. Synth covers everything irregular.
  enum class Shape { Identity, Complement, Finite, Synth };

  virtual ~OperatorStream() = default;

  virtual const std::string& name() const = 0;
  virtual std::optional<Axiom> axiom(const Nat& index) const = 0;
  virtual Shape shape() const { return Shape::Synth; }

  // Finite streams report their length so callers can stop early.
  virtual std::optional<Nat> length() const { return std::nullopt; }

  // Visit axioms whose output is `target`, in increasing index order,
  // spending at most `limits.axioms` work. The visitor returns false to stop.
  // Returns true when the visit provably covered every axiom with that
  // output; false when more could exist beyond the budget.
  //
  // The base implementation scans indices below the budget. Streams whose
  // axioms have invertible structure override this with a direct lookup.
  virtual bool visit_candidates(
      const Nat& target, const RunLimits& limits,
      const std::function<bool(const Nat& index, const Axiom& ax)>& visit) const;
};

using StreamPtr = std::shared_ptr<const OperatorStream>;

// Axioms ({c}, c) in code order: the identity operator on diagrams.
StreamPtr identity_stream();
// Axioms ({c}, flip(c)) where flip swaps the relation-fact signs: maps a
// graph diagram to the diagram of its complement.
StreamPtr complement_stream();
// A fixed axiom list.
StreamPtr finite_stream(std::string name, std::vector<Axiom> axioms);

// { b : (α,b) among the first `stage` axioms, α ⊆ oracle }.
std::set<Nat> enum_apply_stage(const OperatorStream& psi, const std::set<Nat>& oracle,
                               const Nat& stage);

// Semi-decision of target ∈ Ψ^oracle: scans the first `budget` axioms.
// Never answers no.
SemiVerdict enum_member(const OperatorStream& psi, const Oracle& oracle,
                        const Nat& target, std::uint64_t budget);
// Same against a growing diagram: stage-b oracle is the diagram prefix b.
SemiVerdict enum_member_growing(const OperatorStream& psi, const Presentation& p,
                                const Nat& target, std::uint64_t budget);

// Three-valued membership via candidate lookup. Yes needs a firing axiom;
// No needs an exhaustive candidate visit with every candidate refuted by
// the oracle; anything else is Unknown.
Trit member_trit(const OperatorStream& psi, const Oracle& oracle, const Nat& target,
                 const RunLimits& limits);

// Least stage x with target ∈ Ψ_x, i.e. one past the least firing axiom
// index. Known only when every earlier candidate is decidedly refuted.
struct StageResult {
  enum class Kind { At, Never, Unknown };
  Kind kind = Kind::Unknown;
  Nat stage = 0;

  static StageResult at(Nat s) { return {Kind::At, std::move(s)}; }
  static StageResult never() { return {Kind::Never, 0}; }
  static StageResult unknown() { return {Kind::Unknown, 0}; }
};
StageResult mu_stage(const OperatorStream& psi, const Oracle& oracle, const Nat& target,
                     const RunLimits& limits);

// g after f as one program; the input runs through f, its output through g.
vm::Program compose_iso_programs(const vm::Program& f, const vm::Program& g);

}  // namespace stagecraft
