#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/interpretations.hpp"
#include "stagecraft/functors.hpp"
#include "stagecraft/operators.hpp"
#include "stagecraft/report.hpp"
#include "stagecraft/structures.hpp"
#include "stagecraft/vm.hpp"

namespace stagecraft {

// Every artifact is line based text with decimal codes, so files diff and
// round trip exactly. Parse errors carry file and line number.

struct TextLines {
  std::string file;  // label for error messages
  std::vector<std::string> lines;
};

TextLines read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
TextLines split_lines(std::string file, const std::string& content);

// Structures: SIG <count>, AR <i> <arity> per relation, then either
// RULE <builtin-name> or exhaustive FACT <code> lines.
std::string serialize_structure(const Presentation& p);
Presentation parse_structure(std::string name, const TextLines& t);

// Enumeration operators: AXIOM c1,c2,...,ck -> b per axiom (k may be 0).
std::string serialize_axioms(const OperatorStream& s, std::uint64_t count);
std::vector<Axiom> parse_axioms(const TextLines& t);

// Oracle programs: PROG <name>, the instruction lines, ENDPROG.
std::string serialize_prog_block(const vm::Program& p);
// A file of free-standing program blocks.
std::vector<vm::Program> parse_programs(const TextLines& t);

// Interpretations. Literal families serialize as
//   FAM <name> free=<k>
//   DISJ wit=<m> [split=k1,k2,...] : <sign><atom> & ...
// with atoms Eq(t,t) or R<idx>(t,...), terms x<i> free, y<i> witness, c<n>
// constant. A bundle is INTERP <name>, TARGET signature, SIM <rule>, the
// DOMPOS/DOMNEG/RELPOS <r>/RELNEG <r> family sections, END. Two shortcut
// forms skip the sections: BUILTIN <name> references a built-in bundle, and
// SYNTH <star|plain> followed by an embedded functor block rebuilds the
// interpretation from that functor.
std::string serialize_interpretation(const EffectiveInterpretation& I,
                                     std::uint64_t family_prefix);
std::shared_ptr<const EffectiveInterpretation> parse_interpretation(const TextLines& t,
                                                                    const RunLimits& limits);

// Functor bundles: FUNCTOR <name>, SOURCE/TARGET signatures, a PSI clause
// (RULE <builtin> | AXIOMS <k> | INTERP ... | NONE), optional PHI/PHISTAR
// program blocks, named RECIPEPROG blocks, optional RECIPE line, optional
// CARRIED <k> nested bundles, END.
std::string serialize_functor(const FunctorBundle& f, std::uint64_t axiom_prefix);
FunctorBundle parse_functor(const TextLines& t, const RunLimits& limits);

// What kind of artifact a file holds, from its first significant line.
enum class ArtifactKind { Structure, Axioms, Functor, Interpretation, Programs, Unknown };
ArtifactKind sniff_artifact(const TextLines& t);

// Run configuration, overridable per flag. `budget` tracks the last value
// set through the combined knob so the CLI can echo it.
struct RunConfig {
  Nat stage = 2000;
  Nat prefix = 20;
  RunLimits limits;
  ReportFormat format = ReportFormat::Text;
  bool strict = false;
};

// key=value lines: stage, prefix, budget (sets both limits), steps, axioms,
// format (text|structured), strict (0|1). Unknown keys are errors.
RunConfig parse_config(const TextLines& t, RunConfig base);

}  // namespace stagecraft
