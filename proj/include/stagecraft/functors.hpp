#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/maps.hpp"
#include "stagecraft/operators.hpp"
#include "stagecraft/oracle.hpp"
#include "stagecraft/structures.hpp"
#include "stagecraft/vm.hpp"

namespace stagecraft {

// A functor as it ships in a bundle file: at least one of the image
// realizations (an enumeration operator psi, or a fact decider phi) plus an
// arrow realization. The recipe is preferred at evaluation time, the program
// is the serializable join-oracle witness; see BoundFunctor for why.
struct FunctorBundle {
  std::string name;
  Signature source;
  Signature target;
  StreamPtr psi;
  std::optional<vm::Program> phi;
  std::optional<vm::Program> phi_star;
  MapRecipePtr arrow_recipe;
  // For functors built out of an interpretation: the recipe names it.
  std::shared_ptr<const EffectiveInterpretation> interp;
  // Functors the arrow recipe refers to by name (conjugation components).
  std::vector<std::shared_ptr<const FunctorBundle>> carried;
};

inline bool has_enumeration_side(const FunctorBundle& f) { return f.psi != nullptr; }
inline bool has_decision_side(const FunctorBundle& f) { return f.phi.has_value(); }

// Budgeted view of the image structure's diagram. Facts resolve to Yes/No
// where the realization decides them within the limits and Unknown
// otherwise; answers are cached. Deciding both signs of one atom throws an
// ill-formed error carrying the positive atom's code. Copies share state.
// The base may itself be another image's oracle, so views nest.
class ImageView {
 public:
  ImageView(FunctorBundle f, Oracle base, RunLimits limits);
  ImageView(FunctorBundle f, const Presentation& p, RunLimits limits);

  Trit fact(const Nat& code) const;
  // Membership of an element in the image universe: the fact x = x.
  Trit universe(const Nat& x) const;
  Oracle as_oracle() const;  // shares this view's cache
  const std::string& label() const;

 private:
  struct State;
  std::shared_ptr<State> s_;
};

ImageView functor_image(const FunctorBundle& f, const Presentation& p,
                        const RunLimits& limits);
ImageView functor_image_over(const FunctorBundle& f, Oracle base, const RunLimits& limits);

// Elements below `bound` whose universe fact resolves Yes, increasing.
std::vector<Nat> certified_universe(const ImageView& view, const Nat& bound);

// The image of an isomorphism: runs the bundle's arrow realization against
// the join of the two diagrams with `iso` in the function slot.
MapFn functor_map_iso(const FunctorBundle& f, const Presentation& pa, MapFn iso,
                      const Presentation& pb, const RunLimits& limits);
MapFn functor_map_iso_over(const FunctorBundle& f, Oracle left, MapFn iso, Oracle right,
                           const RunLimits& limits);

// An isomorphism sample for law checking, with named endpoints.
struct SampleIso {
  std::string name;
  std::string src;
  std::string dst;
  MapFn fn;
};

struct LawReport {
  Outcome identity_law;
  Outcome composition_law;

  bool all_pass() const {
    return identity_law.ok == Trit::Yes && composition_law.ok == Trit::Yes;
  }
};

// Pointwise check of F(id) = id on every image-certified element below
// `prefix`, and of F(g.f) = F(g).F(f) for every composable sample pair.
// `sample_elements`, when set, replaces the blind below-prefix scan with the
// caller's element list per presentation (needed when image elements are
// staged pair codes that no small scan reaches). A presentation contributing
// zero checked elements leaves the law undecided.
LawReport check_functor_laws(const FunctorBundle& f,
                             const std::vector<Presentation>& presentations,
                             const std::vector<SampleIso>& isos, const Nat& prefix,
                             const RunLimits& limits,
                             const std::function<std::vector<Nat>(const Presentation&)>&
                                 sample_elements = {});

// Monotonicity of the enumeration side: with d1 a subset of d2, every output
// fired from d1 by the first `stage` axioms must also fire from d2.
Outcome check_substructure_preservation(const FunctorBundle& f, const FiniteDiagram& d1,
                                        const FiniteDiagram& d2, const Nat& stage);

// The bundle's pieces in the shape recipe evaluation wants.
BoundFunctor bind_functor(const FunctorBundle& f);

}  // namespace stagecraft
