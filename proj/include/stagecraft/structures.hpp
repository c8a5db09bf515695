#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stagecraft/coding.hpp"
#include "stagecraft/common.hpp"

namespace stagecraft {

// Relational signature. Either a finite arity list or an arity rule for
// signatures with one relation symbol per natural. All shipped structures are
// finite; the rule form exists for relation sequences indexed by omega.
class Signature {
 public:
  Signature() = default;
  static Signature finite(std::vector<std::uint64_t> arities);
  static Signature unbounded(std::function<std::uint64_t(std::uint64_t)> arity_rule,
                             std::string rule_name);

  bool is_finite() const { return arities_.has_value(); }
  std::uint64_t relation_count() const;  // throws on unbounded
  bool declares(const Nat& rel) const;
  std::uint64_t arity(const Nat& rel) const;  // throws if not declared
  const std::string& rule_name() const { return rule_name_; }
  const std::vector<std::uint64_t>& arities() const;

  bool operator==(const Signature& other) const;

 private:
  std::optional<std::vector<std::uint64_t>> arities_;
  std::function<std::uint64_t(std::uint64_t)> rule_;
  std::string rule_name_;
};

// A finite chunk of an atomic diagram: a set of fact codes plus the elements
// they mention.
struct FiniteDiagram {
  std::set<Nat> facts;
  std::set<Nat> support;

  bool contains(const Nat& code) const { return facts.count(code) > 0; }
  // No atom may appear with both signs.
  bool consistent(Nat* witness = nullptr) const;
  bool operator==(const FiniteDiagram&) const = default;
};

FiniteDiagram diagram_from_facts(const std::set<Nat>& facts);

// A presentation with universe omega (or a finite initial segment, flagged as
// degenerate), given by a total truth rule on well formed facts.
class Presentation {
 public:
  using RelRule = std::function<bool(const Nat& rel, const std::vector<Nat>& args)>;

  Presentation() = default;
  Presentation(std::string name, Signature sig, RelRule rel_truth);

  // Finite structure loaded from an exhaustive fact list. Flagged degenerate.
  static Presentation from_diagram(std::string name, Signature sig, FiniteDiagram d);

  const std::string& name() const { return name_; }
  const Signature& signature() const { return sig_; }
  bool is_degenerate_finite() const { return finite_.has_value(); }
  const std::optional<FiniteDiagram>& finite_diagram() const { return finite_; }

  // Truth of a well formed fact. Malformed codes and facts outside the
  // signature raise MalformedFactError. Equality facts are answered by the
  // standard identity on naturals.
  bool fact_truth(const Nat& code) const;
  bool fact_truth(const Fact& f) const;

  // Total membership test for the atomic diagram as a subset of omega:
  // malformed or out of signature codes are simply not in the diagram.
  bool diagram_member(const Nat& code) const;

  // All true facts with code < stage.
  FiniteDiagram diagram_prefix(const Nat& stage) const;

  // Both-signed facts over the listed elements, for every declared relation
  // and equality. Requires a finite signature.
  FiniteDiagram restrict_to(const std::vector<Nat>& elems) const;

  // Rename elements by `fwd` (with inverse `bwd`): the new structure holds
  // R(fwd(a1),...) exactly when this one holds R(a1,...).
  Presentation relabeled(std::string name, std::function<Nat(const Nat&)> fwd,
                         std::function<Nat(const Nat&)> bwd) const;

 private:
  std::string name_;
  Signature sig_;
  RelRule rel_truth_;
  std::optional<FiniteDiagram> finite_;
};

// Injective finite map presented as sorted (from, to) pairs.
struct PartialIso {
  std::map<Nat, Nat> map;

  bool operator==(const PartialIso&) const = default;
  bool operator<(const PartialIso& o) const { return map < o.map; }
};

// All injective maps of exactly `size` between the supports that preserve
// every literal decided on both sides. Hard cap: size <= 8.
std::vector<PartialIso> find_partial_isos(const FiniteDiagram& d1, const FiniteDiagram& d2,
                                          std::size_t size);

// Whether one given map preserves every literal decided on both sides.
bool partial_iso_respects(const FiniteDiagram& d1, const FiniteDiagram& d2, const PartialIso& m);

// Built-in presentations, all with universe omega.
Signature graph_signature();
Presentation pure_equality();
Presentation rado_graph();         // edge(m,n) for m<n iff bit m of n is 1
Presentation rado_complement();    // edge complemented, used as a target copy
Presentation complete_graph();
Presentation empty_graph();
Presentation triangular_graph();   // vertices are unordered pairs in first-seen
                                   // dec_tuple order, edges join meeting pairs

// Canonical enumeration behind triangular_graph: the v-th two element set in
// the order their codes first decode, and the inverse lookup.
std::pair<Nat, Nat> triangular_vertex_pair(const Nat& v);
std::optional<Nat> triangular_vertex_of_pair(const Nat& a, const Nat& b,
                                             std::uint64_t scan_budget = 1 << 20);

const Presentation* find_builtin_presentation(const std::string& name);
std::vector<std::string> builtin_presentation_names();

}  // namespace stagecraft
