#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stagecraft/functors.hpp"
#include "stagecraft/interpretations.hpp"
#include "stagecraft/io.hpp"
#include "stagecraft/report.hpp"
#include "stagecraft/transforms.hpp"

namespace stagecraft {

// A named verification scenario. `checks` lists every check name the run
// emits, so callers know the coverage to expect before spending the budget.
struct ExampleBundle {
  std::string name;
  std::string summary;
  std::vector<std::string> checks;
  std::function<Report(const RunConfig&)> run;
};

const std::vector<ExampleBundle>& example_registry();
const ExampleBundle* find_example(const std::string& name);

// Shipped fixtures, reused by tests and file round trips.
FunctorBundle identity_functor_bundle(Signature sig);
FunctorBundle complement_functor_bundle();
BiTransformWitness complement_bitransform_witness();
Presentation rado_swapped();
MapFn identity_map_fn();
MapFn swap01_map_fn();

// Image elements of an upgraded functor, found by pushing the certified
// source-image prefix through the stage witness. The upgraded elements are
// pair codes far beyond any blind scan, so law checks need this hook.
std::function<std::vector<Nat>(const Presentation&)> staged_sample_hook(
    const FunctorBundle& f, const ComputableUpgrade& up, const Nat& prefix,
    const RunLimits& limits);

// Certified equivalent pairs of the plain synthesized domain: each section
// tuple paired with a padded variant that names the same class.
std::vector<std::pair<Nat, Nat>> sigma_congruence_pairs(const InterpSynthesis& syn,
                                                        const Presentation& p,
                                                        std::size_t want,
                                                        const RunLimits& limits);

// Deliberately wrong fixtures for the failure-detection checks. Both probes
// must come back `fail` carrying a concrete witness code.
FunctorBundle broken_arrow_functor();
std::shared_ptr<const EffectiveInterpretation> broken_sim_interp();
Outcome run_broken_arrow_control(const RunConfig& cfg);
Outcome run_broken_sim_control(const RunConfig& cfg);

// Verification of a parsed artifact file: shape checks plus whatever
// semantic checks the artifact kind supports.
Report verify_artifact(const TextLines& t, const RunConfig& cfg);

}  // namespace stagecraft
