#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"
#include "stagecraft/io.hpp"
#include "stagecraft/registry.hpp"
#include "stagecraft/structures.hpp"
#include "stagecraft/transforms.hpp"

using namespace stagecraft;

namespace {

RunConfig env_config() {
  RunConfig cfg;
  if (const char* path = std::getenv("STAGECRAFT_CONFIG"); path && *path) {
    cfg = parse_config(read_text_file(path), cfg);
  }
  return cfg;
}

// The host signature an interpretation reads, recovered from the relation
// symbols its families mention. Gaps default to binary.
Signature derive_source_signature(const EffectiveInterpretation& I) {
  std::map<std::uint64_t, std::uint64_t> arities;
  auto scan = [&](const FamilyPtr& fam) {
    if (!fam) return;
    Nat bound(64);
    if (auto len = fam->length(); len && *len < bound) bound = *len;
    for (Nat j = 0; j < bound; ++j) {
      auto d = fam->disjunct(j);
      if (!d) continue;
      for (const Literal& l : d->literals) {
        if (l.is_eq) continue;
        std::uint64_t r = to_u64(l.rel, "relation index");
        std::uint64_t a = l.args.size();
        auto [it, fresh] = arities.emplace(r, a);
        if (!fresh && it->second < a) it->second = a;
      }
    }
  };
  scan(I.dom_pos);
  scan(I.dom_neg);
  for (const FamilyPtr& f : I.rel_pos) scan(f);
  for (const FamilyPtr& f : I.rel_neg) scan(f);
  if (arities.empty()) return Signature::finite({});
  std::vector<std::uint64_t> v(arities.rbegin()->first + 1, 2);
  for (const auto& [r, a] : arities) v[r] = a;
  return Signature::finite(std::move(v));
}

int run_verify(const std::string& target, const RunConfig& cfg) {
  Report rep;
  try {
    if (const ExampleBundle* ex = find_example(target)) {
      rep = ex->run(cfg);
    } else {
      rep = verify_artifact(read_text_file(target), cfg);
    }
  } catch (const IllFormedError& e) {
    rep.add("artifact.wellformed", Outcome::fail(e.witness(), e.what()));
  }
  std::cout << rep.render(cfg.format);
  if (rep.has_fail()) return 1;
  if (cfg.strict && rep.inconclusive() > 0) return 1;
  return 0;
}

int run_transform(const std::string& in, const std::string& to, const std::string& out,
                  const RunConfig& cfg) {
  TextLines t = read_text_file(in);
  std::string payload;
  if (to == "enum2comp") {
    FunctorBundle f = parse_functor(t, cfg.limits);
    if (!f.psi) throw InvalidInputError("enum2comp wants a functor with an enumeration side");
    ComputableUpgrade up = enum_to_computable(f, cfg.limits);
    payload = serialize_functor(up.functor, 64);
  } else if (to == "interp2functor") {
    auto I = parse_interpretation(t, cfg.limits);
    FunctorBundle f = interp_to_functor(I, derive_source_signature(*I), cfg.limits);
    payload = serialize_functor(f, 64);
  } else if (to == "functor2interp") {
    FunctorBundle f = parse_functor(t, cfg.limits);
    if (!f.psi) throw InvalidInputError("functor2interp wants a functor with an enumeration side");
    // The star form re-synthesizes from the carried functor on load.
    payload = "INTERP " + f.name + "-star\nSYNTH star\n" + serialize_functor(f, 64) + "END\n";
  } else if (to == "prepend") {
    std::vector<vm::Program> progs = parse_programs(t);
    if (progs.size() != 2) {
      throw InvalidInputError("prepend wants exactly two programs: the new head row, "
                              "then the sequence");
    }
    vm::Program joined = prepend_computable(progs[0], progs[1]);
    joined.name = "prepended";
    payload = serialize_prog_block(joined);
  } else {
    throw InvalidInputError("unknown transform direction '" + to + "'");
  }
  write_text_file(out, payload);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for staged functors, interpretations and their transforms"};
  app.require_subcommand(1);

  std::uint64_t stage = 0, prefix = 0, budget = 0;
  std::string format;
  bool strict = false;
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--stage", stage, "axiom stage bound for enumeration checks");
    cmd->add_option("--prefix", prefix, "element prefix bound for map checks");
    cmd->add_option("--budget", budget, "step and axiom budget for every run");
    cmd->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"text", "structured"}));
    cmd->add_flag("--strict", strict, "inconclusive checks fail the run");
  };

  CLI::App* list = app.add_subcommand("list", "print the registered example names");
  CLI::App* verify = app.add_subcommand("verify", "run the checks of an example or file");
  std::string target;
  verify->add_option("target", target, "example name or artifact file")->required();
  add_run_flags(verify);

  CLI::App* transform =
      app.add_subcommand("transform", "rewrite an artifact into another realization");
  std::string in, to, out;
  transform->add_option("input", in, "artifact file")->required();
  transform->add_option("--to", to, "target realization")
      ->required()
      ->check(CLI::IsMember({"enum2comp", "interp2functor", "functor2interp", "prepend"}));
  transform->add_option("--out", out, "output file")->required();
  add_run_flags(transform);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      for (const ExampleBundle& e : example_registry()) std::cout << e.name << "\n";
      return 0;
    }
    RunConfig cfg = env_config();
    auto flags = verify->parsed() ? verify : transform;
    if (flags->count("--stage")) cfg.stage = stage;
    if (flags->count("--prefix")) cfg.prefix = prefix;
    if (flags->count("--budget")) {
      cfg.limits.steps = budget;
      cfg.limits.axioms = budget;
    }
    if (flags->count("--format")) {
      cfg.format = format == "structured" ? ReportFormat::Structured : ReportFormat::Text;
    }
    if (flags->count("--strict")) cfg.strict = strict;
    if (verify->parsed()) return run_verify(target, cfg);
    return run_transform(in, to, out, cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
