#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "stagecraft/common.hpp"
#include "stagecraft/structures.hpp"

namespace stagecraft {

// Outcome of applying a partial map to one input. `OutsideDomain` is a
// certified rejection (the input provably is not a legal argument), while
// `Unknown` means a budget ran out first.
struct MapResult {
  enum class Status { Value, OutsideDomain, Unknown };
  Status status = Status::Unknown;
  Nat value = 0;
  Nat witness = 0;  // for OutsideDomain: the code that failed validation

  static MapResult of(Nat v) { return {Status::Value, std::move(v), 0}; }
  static MapResult outside(Nat w) { return {Status::OutsideDomain, 0, std::move(w)}; }
  static MapResult unknown() { return {}; }
  static MapResult unknown(Nat w) { return {Status::Unknown, 0, std::move(w)}; }
  bool is_value() const { return status == Status::Value; }
};

// A queryable set of naturals. Total oracles (presentation diagrams, finite
// sets) always answer Yes or No; derived oracles built from budget bounded
// views may answer Unknown, which aborts the consuming run as inconclusive.
class Oracle {
 public:
  Oracle() = default;
  Oracle(std::string label, std::function<Trit(const Nat&)> fn)
      : label_(std::move(label)), fn_(std::move(fn)) {}

  Trit query(const Nat& code) const { return fn_ ? fn_(code) : Trit::No; }
  const std::string& label() const { return label_; }

 private:
  std::string label_;
  std::function<Trit(const Nat&)> fn_;
};

Oracle diagram_oracle(const Presentation& p);
Oracle finite_set_oracle(const std::set<Nat>& facts);

// Memoizing wrapper. Useful when the underlying oracle recomputes expensive
// views; cached answers include Unknown because the budget is fixed per view.
Oracle memoize_oracle(Oracle inner);

// Join of two diagrams and a function graph under the residue layout:
// 3n left diagram, 3n+1 graph pair codes, 3n+2 right diagram. `apply` answers
// the graph queries: pair(x,y) is in iff apply(x) yields the value y.
Oracle join_oracle(Oracle left, std::function<MapResult(const Nat&)> apply, Oracle right,
                   std::string label = "join");

// One diagram component of a join oracle, re-exposed on its own.
Oracle join_part_oracle(Oracle join, JoinPart part);

}  // namespace stagecraft
