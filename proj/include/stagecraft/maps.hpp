#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/interpretations.hpp"
#include "stagecraft/operators.hpp"
#include "stagecraft/oracle.hpp"
#include "stagecraft/vm.hpp"

namespace stagecraft {

struct MapNode;
using MapRecipePtr = std::shared_ptr<const MapNode>;
using MapFn = std::function<MapResult(const Nat&)>;

// Element maps emitted by transforms are recipes: serializable trees whose
// leaves name programs, functors, interpretations and diagrams. A recipe is
// bound to concrete objects through an EvalContext at verification time.
struct MapNode {
  enum class Kind {
    Identity,      // x -> x
    Vm,            // run a program against the named oracle
    Ref,           // a map bound by name in the context
    Compose,       // children applied left to right
    Stage,         // x -> pair(x, s), s the least stage enumerating x=x
    StageInv,      // pair(x, s) -> x when s is that least stage
    FunctorArrow,  // image of the inner iso under a functor (join oracle)
    TupleLift,     // tuple code -> tuple code, inner map on element slots
    ClassCode,     // tuple code -> least equivalent tuple code (pure)
    StarSection,   // element -> least certified domain tuple carrying it
  };
  Kind kind = Kind::Identity;
  std::string name;                    // Vm: program label; Ref: map name
  vm::Program prog;                    // Vm
  std::string oracle;                  // Vm: oracle name
  std::vector<MapRecipePtr> children;  // Compose
  std::string functor;                 // Stage/StageInv/FunctorArrow
  std::string side;                    // Stage/StageInv: diagram; StarSection: presentation
  MapRecipePtr inner;                  // FunctorArrow/TupleLift
  std::string left, right;             // FunctorArrow: join diagram names
  std::string interp;                  // TupleLift/ClassCode/StarSection
};

MapRecipePtr map_identity();
MapRecipePtr map_vm(std::string name, vm::Program prog, std::string oracle);
MapRecipePtr map_ref(std::string name);
MapRecipePtr map_compose(std::vector<MapRecipePtr> children);
MapRecipePtr map_stage(std::string functor, std::string side);
MapRecipePtr map_stage_inv(std::string functor, std::string side);
MapRecipePtr map_functor_arrow(std::string functor, MapRecipePtr inner, std::string left,
                               std::string right);
MapRecipePtr map_tuple_lift(std::string interp, MapRecipePtr inner);
MapRecipePtr map_class_code(std::string interp);
MapRecipePtr map_star_section(std::string interp, std::string side);

// A functor's computational pieces as a recipe context sees them. When both
// arrow realizations exist the recipe wins: programs read function values
// out of the join graph by scanning, which dies on large codes, while the
// recipe calls the inner map directly. The program stays the serializable
// witness, checked against the recipe on small inputs.
struct BoundFunctor {
  std::string name;
  StreamPtr psi;                        // enumerable side (may be null)
  std::optional<vm::Program> phi;       // computable decider (may be absent)
  std::optional<vm::Program> phi_star;  // arrow program over a join oracle
  MapRecipePtr arrow_recipe;            // preferred arrow realization
  std::shared_ptr<const EffectiveInterpretation> interp;  // for interp-built functors
  std::vector<BoundFunctor> carried;    // functors the recipe names
};

struct EvalContext {
  std::map<std::string, Oracle> oracles;  // diagrams and joins by name
  std::map<std::string, BoundFunctor> functors;
  std::map<std::string, std::shared_ptr<const EffectiveInterpretation>> interps;
  std::map<std::string, std::shared_ptr<const Presentation>> presentations;
  std::map<std::string, MapFn> maps;  // bound element maps for Ref nodes
  RunLimits limits;
};

MapResult eval_map(const MapNode& m, const EvalContext& ctx, const Nat& input);
// Close a recipe over a context copy, yielding a reusable element map.
MapFn bind_map(MapRecipePtr m, EvalContext ctx);
// Run a program against a fixed oracle as an element map. Out-of-budget and
// oracle gaps surface as Unknown; program faults throw.
MapFn bind_program(vm::Program prog, Oracle oracle, RunLimits limits);

// Canonical one-line text form, e.g. compose(stage(F,A),vm(p,join)).
std::string serialize_recipe(const MapNode& m);
// Inverse of serialize_recipe; programs are resolved by name through the
// lookup (they serialize separately as PROG blocks).
MapRecipePtr parse_recipe(const std::string& text,
                          const std::map<std::string, vm::Program>& programs);

}  // namespace stagecraft
