#include "stagecraft/operators.hpp"

#include <algorithm>

#include "stagecraft/coding.hpp"

namespace stagecraft {

Axiom make_axiom(std::vector<Nat> inputs, Nat output) {
  std::sort(inputs.begin(), inputs.end());
  inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
  return Axiom{std::move(inputs), std::move(output)};
}

bool OperatorStream::visit_candidates(
    const Nat& target, const RunLimits& limits,
    const std::function<bool(const Nat&, const Axiom&)>& visit) const {
  Nat bound = limits.axioms;
  if (auto len = length(); len && *len < bound) bound = *len;
  for (Nat i = 0; i < bound; ++i) {
    auto ax = axiom(i);
    if (!ax) break;
    if (ax->output == target) {
      if (!visit(i, *ax)) return false;
    }
  }
  auto len = length();
  return len && *len <= limits.axioms;
}

namespace {

class IdentityStream final : public OperatorStream {
 public:
  const std::string& name() const override {
    static const std::string n = "identity";
    return n;
  }
  std::optional<Axiom> axiom(const Nat& index) const override {
    return Axiom{{index}, index};
  }
  Shape shape() const override { return Shape::Identity; }
  bool visit_candidates(
      const Nat& target, const RunLimits&,
      const std::function<bool(const Nat&, const Axiom&)>& visit) const override {
    visit(target, Axiom{{target}, target});
    return true;
  }
};

class ComplementStream final : public OperatorStream {
 public:
  const std::string& name() const override {
    static const std::string n = "complement";
    return n;
  }
  std::optional<Axiom> axiom(const Nat& index) const override {
    return Axiom{{index}, flip_rel_sign(index)};
  }
  Shape shape() const override { return Shape::Complement; }
  bool visit_candidates(
      const Nat& target, const RunLimits&,
      const std::function<bool(const Nat&, const Axiom&)>& visit) const override {
    // flip is an involution, so the only axiom emitting `target` sits at
    // index flip(target).
    Nat src = flip_rel_sign(target);
    visit(src, Axiom{{src}, target});
    return true;
  }
};

class FiniteStream final : public OperatorStream {
 public:
  FiniteStream(std::string name, std::vector<Axiom> axioms)
      : name_(std::move(name)), axioms_(std::move(axioms)) {}
  const std::string& name() const override { return name_; }
  std::optional<Axiom> axiom(const Nat& index) const override {
    if (index >= axioms_.size()) return std::nullopt;
    return axioms_[to_size(index, "axiom index")];
  }
  std::optional<Nat> length() const override { return Nat(axioms_.size()); }
  Shape shape() const override { return Shape::Finite; }

 private:
  std::string name_;
  std::vector<Axiom> axioms_;
};

}  // namespace

StreamPtr identity_stream() { return std::make_shared<IdentityStream>(); }
StreamPtr complement_stream() { return std::make_shared<ComplementStream>(); }
StreamPtr finite_stream(std::string name, std::vector<Axiom> axioms) {
  return std::make_shared<FiniteStream>(std::move(name), std::move(axioms));
}

std::set<Nat> enum_apply_stage(const OperatorStream& psi, const std::set<Nat>& oracle,
                               const Nat& stage) {
  std::set<Nat> out;
  Nat bound = stage;
  if (auto len = psi.length(); len && *len < bound) bound = *len;
  for (Nat i = 0; i < bound; ++i) {
    auto ax = psi.axiom(i);
    if (!ax) break;
    bool fires = std::all_of(ax->inputs.begin(), ax->inputs.end(),
                             [&](const Nat& c) { return oracle.count(c) > 0; });
    if (fires) out.insert(ax->output);
  }
  return out;
}

SemiVerdict enum_member(const OperatorStream& psi, const Oracle& oracle,
                        const Nat& target, std::uint64_t budget) {
  Nat bound = budget;
  if (auto len = psi.length(); len && *len < bound) bound = *len;
  for (Nat i = 0; i < bound; ++i) {
    auto ax = psi.axiom(i);
    if (!ax) break;
    if (ax->output != target) continue;
    bool fires = std::all_of(ax->inputs.begin(), ax->inputs.end(),
                             [&](const Nat& c) { return oracle.query(c) == Trit::Yes; });
    if (fires) return SemiVerdict::Yes;
  }
  return SemiVerdict::Inconclusive;
}

SemiVerdict enum_member_growing(const OperatorStream& psi, const Presentation& p,
                                const Nat& target, std::uint64_t budget) {
  // The stage-b view of a growing diagram is its prefix below b.
  FiniteDiagram seen = p.diagram_prefix(Nat(budget));
  Nat bound = budget;
  if (auto len = psi.length(); len && *len < bound) bound = *len;
  for (Nat i = 0; i < bound; ++i) {
    auto ax = psi.axiom(i);
    if (!ax) break;
    if (ax->output != target) continue;
    bool fires = std::all_of(ax->inputs.begin(), ax->inputs.end(),
                             [&](const Nat& c) { return seen.contains(c); });
    if (fires) return SemiVerdict::Yes;
  }
  return SemiVerdict::Inconclusive;
}

namespace {

// Shared candidate walk for member_trit and mu_stage. Reports the least
// firing index (with all earlier candidates refuted), whether anything
// fired at all, and whether any candidate is unresolved.
struct CandidateScan {
  bool exhaustive = false;
  bool any_fired = false;
  bool any_unknown = false;
  bool prefix_clean = true;  // every candidate before the hit refuted
  Nat least_index = 0;
};

CandidateScan scan_candidates(const OperatorStream& psi, const Oracle& oracle,
                              const Nat& target, const RunLimits& limits) {
  CandidateScan s;
  s.exhaustive = psi.visit_candidates(
      target, limits, [&](const Nat& index, const Axiom& ax) {
        Trit fire = Trit::Yes;
        for (const Nat& c : ax.inputs) {
          Trit t = oracle.query(c);
          if (t == Trit::No) { fire = Trit::No; break; }
          if (t == Trit::Unknown) fire = Trit::Unknown;
        }
        if (fire == Trit::Yes) {
          s.any_fired = true;
          s.least_index = index;
          return false;  // later candidates cannot lower the index
        }
        if (fire == Trit::Unknown) {
          s.any_unknown = true;
          s.prefix_clean = false;
        }
        return true;
      });
  return s;
}

}  // namespace

Trit member_trit(const OperatorStream& psi, const Oracle& oracle, const Nat& target,
                 const RunLimits& limits) {
  CandidateScan s = scan_candidates(psi, oracle, target, limits);
  if (s.any_fired) return Trit::Yes;
  if (s.exhaustive && !s.any_unknown) return Trit::No;
  return Trit::Unknown;
}

StageResult mu_stage(const OperatorStream& psi, const Oracle& oracle, const Nat& target,
                     const RunLimits& limits) {
  CandidateScan s = scan_candidates(psi, oracle, target, limits);
  if (s.any_fired && s.prefix_clean) return StageResult::at(s.least_index + 1);
  if (s.any_fired) return StageResult::unknown();
  if (s.exhaustive && !s.any_unknown) return StageResult::never();
  return StageResult::unknown();
}

vm::Program compose_iso_programs(const vm::Program& f, const vm::Program& g) {
  vm::Builder b(g.name + "." + f.name);
  vm::Reg mid = 1;
  vm::Reg out = 2;
  b.inline_program(f, 0, mid);
  b.inline_program(g, mid, out);
  b.halt(out);
  return b.build();
}

}  // namespace stagecraft
