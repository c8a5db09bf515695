#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/coding.hpp"
#include "stagecraft/oracle.hpp"
#include "stagecraft/structures.hpp"

namespace stagecraft {

// A term is a variable into the flattened (free ++ witness) assignment or a
// constant element.
struct Term {
  bool is_const = false;
  std::size_t var = 0;
  Nat value = 0;

  static Term v(std::size_t i) { return Term{false, i, 0}; }
  static Term c(Nat n) { return Term{true, 0, std::move(n)}; }
  bool operator==(const Term&) const = default;
};

// One signed atom: equality (exactly two terms) or a relation over terms.
struct Literal {
  bool positive = true;
  bool is_eq = true;
  Nat rel = 0;
  std::vector<Term> args;

  bool operator==(const Literal&) const = default;
};

Literal lit_eq(Term a, Term b, bool positive = true);
Literal lit_rel(Nat rel, std::vector<Term> args, bool positive = true);

// A conjunction of literals with its variable layout. Free variables come
// first, grouped into components (the caller may pass a tuple of tuples,
// flattened in order); witness variables follow the free ones.
struct Disjunct {
  std::vector<std::size_t> free_split;  // component lengths
  std::size_t witness_arity = 0;
  std::vector<Literal> literals;

  std::size_t free_arity() const;
  bool operator==(const Disjunct&) const = default;
};

// An existential family: an indexed stream of disjuncts, satisfied when some
// disjunct with a matching layout holds for some witness assignment.
class Sigma1Family {
 public:
  virtual ~Sigma1Family() = default;
  virtual const std::string& name() const = 0;
  virtual std::optional<Disjunct> disjunct(const Nat& j) const = 0;
  virtual std::optional<Nat> length() const { return std::nullopt; }

  // Indices of disjuncts that might accept these components, ascending.
  // nullopt means no structured lookup: scan indices from zero.
  virtual std::optional<std::vector<Nat>> accepting_candidates(
      const std::vector<std::vector<Nat>>& components, const RunLimits& limits) const {
    (void)components;
    (void)limits;
    return std::nullopt;
  }
};

using FamilyPtr = std::shared_ptr<const Sigma1Family>;

class LiteralFamily final : public Sigma1Family {
 public:
  LiteralFamily(std::string name, std::vector<Disjunct> disjuncts)
      : name_(std::move(name)), disjuncts_(std::move(disjuncts)) {}
  const std::string& name() const override { return name_; }
  std::optional<Disjunct> disjunct(const Nat& j) const override;
  std::optional<Nat> length() const override { return Nat(disjuncts_.size()); }

 private:
  std::string name_;
  std::vector<Disjunct> disjuncts_;
};

FamilyPtr literal_family(std::string name, std::vector<Disjunct> disjuncts);
FamilyPtr empty_family(std::string name);

// Does this disjunct accept the component layout?
bool layout_matches(const Disjunct& d, const std::vector<std::vector<Nat>>& components);

// The fact a literal asserts under an assignment, sign and all. Throws
// invalid-input when a variable runs past the assignment.
Fact instantiate_literal(const Literal& l, const std::vector<Nat>& free,
                         const std::vector<Nat>& witness);

// Conjunction truth against a finite diagram. Every element referenced must
// lie in the diagram's support.
bool eval_qf(const Disjunct& d, const FiniteDiagram& dg, const std::vector<Nat>& free,
             const std::vector<Nat>& witness);
// Conjunction truth against a full presentation (total).
bool eval_qf(const Disjunct& d, const Presentation& p, const std::vector<Nat>& free,
             const std::vector<Nat>& witness);

// Existential truth with disjunct indices below jBound and witnesses drawn
// from the diagram's support. Monotone in jBound and in the diagram.
SemiVerdict eval_sigma1_finite(const Sigma1Family& fam, const FiniteDiagram& dg,
                               const std::vector<std::vector<Nat>>& components,
                               const Nat& jBound);
SemiVerdict eval_sigma1_finite(const Sigma1Family& fam, const FiniteDiagram& dg,
                               const std::vector<Nat>& free, const Nat& jBound);

// Existential truth over a presentation, dovetailing disjunct index and
// witness support until `budget` evaluations are spent. Yes is final.
SemiVerdict eval_sigma1_budget(const Sigma1Family& fam, const Presentation& p,
                               const std::vector<std::vector<Nat>>& components,
                               std::uint64_t budget);
SemiVerdict eval_sigma1_budget(const Sigma1Family& fam, const Presentation& p,
                               const std::vector<Nat>& free, std::uint64_t budget);

// A total decidable equivalence on tuple codes.
struct ComputableEquiv {
  std::string name;
  std::function<bool(const Nat&, const Nat&)> same;
  // Class members strictly below `bound`, increasing, complete when set.
  std::function<std::vector<Nat>(const Nat& of, const Nat& bound)> members_below;
  // Least equivalent code, when computing it directly beats enumerating the
  // class. Classes of tuple-shaped relations can hold astronomically many
  // members below a real code, so class_code prefers this hook.
  std::function<Nat(const Nat&)> canon;
};

ComputableEquiv equiv_code();        // plain code equality
ComputableEquiv equiv_last_coord(); // decoded lists, equal last elements
ComputableEquiv equiv_multiset();   // decoded lists agree as multisets
ComputableEquiv equiv_drop_last();  // decoded lists equal after dropping the last entry
ComputableEquiv equiv_everything(); // deliberately broken: one big class
ComputableEquiv equiv_table(std::string name, std::vector<std::pair<Nat, Nat>> pairs);

// The least code equivalent to `t`: the canonical name of t's class. Total
// and oracle free, since sim is.
Nat class_code(const ComputableEquiv& sim, const Nat& t);

struct EffectiveInterpretation {
  std::string name;
  FamilyPtr dom_pos;
  FamilyPtr dom_neg;
  ComputableEquiv sim;
  std::vector<FamilyPtr> rel_pos;
  std::vector<FamilyPtr> rel_neg;
  Signature target;
  // Which coordinates of a domain tuple are structure elements (movable by
  // an isomorphism lift). Null means every coordinate.
  std::function<std::vector<bool>(const std::vector<Nat>&)> lift_mask;
  // Expected quotient element for a domain tuple, for verification only.
  std::function<std::optional<Nat>(const Nat&)> reference_map;
  // Candidate domain tuples whose class should carry the given target
  // element, cheapest first. Lets a section avoid a blind tuple scan.
  std::function<std::vector<Nat>(const Nat&, const RunLimits&)> section_candidates;
};

// Domain membership of one tuple code: Yes via dom_pos, No via dom_neg,
// Unknown when neither certifies within budget. Both certifying is an
// ill-formed interpretation and throws with the tuple as witness.
Trit dom_status(const EffectiveInterpretation& I, const Presentation& p,
                const Nat& tuple_code, std::uint64_t budget);

// Least certified tuple code equivalent to `tuple_code` (the canonical
// representative). Value only when minimality is established.
MapResult least_rep(const EffectiveInterpretation& I, const Presentation& p,
                    const Nat& tuple_code, const RunLimits& limits);

struct QuotientFragment {
  FiniteDiagram diagram;        // over representative ids 0..k-1
  std::vector<Nat> reps;        // representative tuple codes: the blind code
                                // scan in order, then any section-only finds
  std::map<Nat, Nat> class_of;  // certified sampled tuple -> its rep
  std::uint64_t undecided = 0;  // sampled tuples that resolved neither way
};

QuotientFragment build_quotient_fragment(const EffectiveInterpretation& I,
                                         const Presentation& p, const Nat& tuple_code_bound,
                                         std::uint64_t budget);

// For sim-equivalent certified pairs, decided relation memberships must
// agree in every slot against a pool of certified partners.
Outcome check_congruence(const EffectiveInterpretation& I, const Presentation& p,
                         const std::vector<std::pair<Nat, Nat>>& samples,
                         std::uint64_t budget);

// Interpretation of the pure equality structure in itself: domain is the
// 1-tuples, sim is code equality.
EffectiveInterpretation interp_identity_pure();
// Unordered pairs over pure equality, adjacent when they share exactly one
// element: interprets the triangular graph.
EffectiveInterpretation interp_pair_intersection();

}  // namespace stagecraft
