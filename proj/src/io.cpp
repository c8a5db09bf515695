#include "stagecraft/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "stagecraft/coding.hpp"
#include "stagecraft/maps.hpp"
#include "stagecraft/transforms.hpp"

namespace stagecraft {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

bool is_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Line reader that skips blanks and # comments and reports positions.
class Cursor {
 public:
  explicit Cursor(const TextLines& t) : t_(t) { skip(); }

  bool eof() const { return i_ >= t_.lines.size(); }

  const std::string& peek() const {
    if (eof()) fail("unexpected end of file");
    return cur_;
  }

  std::string next() {
    std::string line = peek();
    ++i_;
    skip();
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t ln = eof() ? t_.lines.size() : i_ + 1;
    throw ParseError(t_.file + ":" + std::to_string(ln) + ": " + msg);
  }

  Nat nat(const std::string& tok) const {
    if (!is_digits(tok)) fail("expected a decimal number, got '" + tok + "'");
    return Nat(tok);
  }

  std::uint64_t u64(const std::string& tok) const {
    Nat n = nat(tok);
    if (n > Nat(std::uint64_t(-1))) fail("'" + tok + "' is out of range");
    return to_u64(n);
  }

 private:
  void skip() {
    while (i_ < t_.lines.size()) {
      cur_ = trim(t_.lines[i_]);
      if (!cur_.empty() && cur_[0] != '#') return;
      ++i_;
    }
  }

  const TextLines& t_;
  std::size_t i_ = 0;
  std::string cur_;
};

std::string join_codes(const std::vector<Nat>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i].str();
  }
  return out;
}

std::vector<Nat> split_codes(const Cursor& c, const std::string& s) {
  std::vector<Nat> out;
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(c.nat(item));
  }
  return out;
}

void serialize_signature(std::string& out, const std::string& head, const Signature& sig) {
  if (!sig.is_finite()) {
    throw InvalidInputError("only finite signatures serialize");
  }
  std::uint64_t n = sig.relation_count();
  out += head + " SIG " + std::to_string(n) + "\n";
  for (std::uint64_t i = 0; i < n; ++i) {
    out += "AR " + std::to_string(i) + " " + std::to_string(sig.arity(Nat(i))) + "\n";
  }
}

Signature parse_signature_body(Cursor& c, std::uint64_t count) {
  std::vector<std::uint64_t> ar(count, 0);
  std::vector<bool> seen(count, false);
  for (std::uint64_t k = 0; k < count; ++k) {
    auto tok = tokenize(c.peek());
    if (tok.size() != 3 || tok[0] != "AR") c.fail("expected an AR line");
    c.next();
    std::uint64_t i = c.u64(tok[1]);
    if (i >= count || seen[i]) c.fail("relation index " + tok[1] + " out of order");
    seen[i] = true;
    ar[i] = c.u64(tok[2]);
  }
  return Signature::finite(ar);
}

Signature parse_signature(Cursor& c, const std::string& head) {
  auto tok = tokenize(c.peek());
  if (tok.size() != 3 || tok[0] != head || tok[1] != "SIG") {
    c.fail("expected '" + head + " SIG <count>'");
  }
  c.next();
  return parse_signature_body(c, c.u64(tok[2]));
}

std::string axiom_line(const Axiom& ax) {
  return "AXIOM " + join_codes(ax.inputs) + (ax.inputs.empty() ? "-> " : " -> ") +
         ax.output.str() + "\n";
}

Axiom parse_axiom_line(Cursor& c, const std::string& line) {
  std::size_t arrow = line.find("->");
  if (line.rfind("AXIOM", 0) != 0 || arrow == std::string::npos) {
    c.fail("expected 'AXIOM c1,...,ck -> b'");
  }
  std::string left = trim(line.substr(5, arrow - 5));
  std::string right = trim(line.substr(arrow + 2));
  Axiom ax;
  ax.inputs = split_codes(c, left);
  std::sort(ax.inputs.begin(), ax.inputs.end());
  ax.inputs.erase(std::unique(ax.inputs.begin(), ax.inputs.end()), ax.inputs.end());
  ax.output = c.nat(right);
  return ax;
}

vm::Program parse_prog_body(Cursor& c) {
  auto head = tokenize(c.peek());
  if (head.size() != 2 || head[0] != "PROG") c.fail("expected 'PROG <name>'");
  c.next();
  std::vector<std::string> lines;
  while (c.peek() != "ENDPROG") lines.push_back(c.next());
  c.next();
  return vm::parse_program(head[1], lines);
}

std::string term_text(const Term& t, std::size_t free_arity) {
  if (t.is_const) return "c" + t.value.str();
  if (t.var < free_arity) return "x" + std::to_string(t.var);
  return "y" + std::to_string(t.var - free_arity);
}

Term parse_term(Cursor& c, const std::string& s, std::size_t free_arity) {
  if (s.size() < 2) c.fail("bad term '" + s + "'");
  std::string rest = s.substr(1);
  if (!is_digits(rest)) c.fail("bad term '" + s + "'");
  switch (s[0]) {
    case 'c':
      return Term::c(Nat(rest));
    case 'x':
      return Term::v(c.u64(rest));
    case 'y':
      return Term::v(free_arity + c.u64(rest));
    default:
      break;
  }
  c.fail("bad term '" + s + "'");
}

std::string atom_text(const Literal& l, std::size_t free_arity) {
  std::string out = l.positive ? "+" : "-";
  if (l.is_eq) {
    out += "Eq(" + term_text(l.args[0], free_arity) + "," + term_text(l.args[1], free_arity) +
           ")";
    return out;
  }
  out += "R" + l.rel.str() + "(";
  for (std::size_t i = 0; i < l.args.size(); ++i) {
    if (i) out += ",";
    out += term_text(l.args[i], free_arity);
  }
  out += ")";
  return out;
}

Literal parse_atom(Cursor& c, const std::string& s, std::size_t free_arity) {
  if (s.size() < 4 || (s[0] != '+' && s[0] != '-')) c.fail("bad atom '" + s + "'");
  bool positive = s[0] == '+';
  std::size_t open = s.find('(');
  if (open == std::string::npos || s.back() != ')') c.fail("bad atom '" + s + "'");
  std::string head = s.substr(1, open - 1);
  std::string body = s.substr(open + 1, s.size() - open - 2);
  std::vector<Term> args;
  std::istringstream in(body);
  for (std::string item; std::getline(in, item, ',');) {
    args.push_back(parse_term(c, trim(item), free_arity));
  }
  if (head == "Eq") {
    if (args.size() != 2) c.fail("Eq needs two terms in '" + s + "'");
    return lit_eq(args[0], args[1], positive);
  }
  if (head.size() < 2 || head[0] != 'R' || !is_digits(head.substr(1))) {
    c.fail("bad atom head '" + head + "'");
  }
  return lit_rel(Nat(head.substr(1)), std::move(args), positive);
}

std::string serialize_family(const Sigma1Family& fam, std::uint64_t cap) {
  auto len = fam.length();
  if (!len) {
    throw InvalidInputError("family '" + fam.name() + "' is not finitely presented");
  }
  std::uint64_t n = to_u64(*len, "family length");
  if (n > cap) {
    throw InvalidInputError("family '" + fam.name() + "' exceeds the serialization cap");
  }
  std::size_t head_free = 0;
  if (n > 0) {
    if (auto d0 = fam.disjunct(Nat(0))) head_free = d0->free_arity();
  }
  std::string out = "FAM " + fam.name() + " free=" + std::to_string(head_free) + "\n";
  for (std::uint64_t j = 0; j < n; ++j) {
    auto d = fam.disjunct(Nat(j));
    if (!d) throw InvalidInputError("family '" + fam.name() + "' has a hole at " +
                                    std::to_string(j));
    out += "DISJ wit=" + std::to_string(d->witness_arity);
    bool plain = d->free_split.size() == 1 && d->free_split[0] == head_free;
    if (d->free_split.empty()) plain = head_free == 0;
    if (!plain) {
      out += " split=";
      for (std::size_t i = 0; i < d->free_split.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(d->free_split[i]);
      }
    }
    out += " :";
    for (std::size_t i = 0; i < d->literals.size(); ++i) {
      out += i ? " & " : " ";
      out += atom_text(d->literals[i], d->free_arity());
    }
    out += "\n";
  }
  return out;
}

FamilyPtr parse_family(Cursor& c) {
  auto head = tokenize(c.peek());
  if (head.size() != 3 || head[0] != "FAM" || head[2].rfind("free=", 0) != 0) {
    c.fail("expected 'FAM <name> free=<k>'");
  }
  c.next();
  std::size_t head_free = c.u64(head[2].substr(5));
  std::vector<Disjunct> disjuncts;
  while (!c.eof() && c.peek().rfind("DISJ", 0) == 0) {
    std::string line = c.next();
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) c.fail("DISJ line missing ':'");
    auto keys = tokenize(line.substr(4, colon - 4));
    Disjunct d;
    d.free_split = {head_free};
    bool have_wit = false;
    for (const std::string& k : keys) {
      if (k.rfind("wit=", 0) == 0) {
        d.witness_arity = c.u64(k.substr(4));
        have_wit = true;
      } else if (k.rfind("split=", 0) == 0) {
        d.free_split.clear();
        std::istringstream in(k.substr(6));
        for (std::string item; std::getline(in, item, ',');) {
          d.free_split.push_back(c.u64(trim(item)));
        }
      } else {
        c.fail("unknown DISJ key '" + k + "'");
      }
    }
    if (!have_wit) c.fail("DISJ line missing wit=");
    std::string body = trim(line.substr(colon + 1));
    if (!body.empty()) {
      std::size_t at = 0;
      while (at != std::string::npos) {
        std::size_t amp = body.find('&', at);
        std::string atom = trim(amp == std::string::npos ? body.substr(at)
                                                         : body.substr(at, amp - at));
        if (!atom.empty()) d.literals.push_back(parse_atom(c, atom, d.free_arity()));
        at = amp == std::string::npos ? amp : amp + 1;
      }
    }
    disjuncts.push_back(std::move(d));
  }
  return literal_family(head[1], std::move(disjuncts));
}

const std::map<std::string, ComputableEquiv (*)()>& sim_table() {
  static const std::map<std::string, ComputableEquiv (*)()> table = {
      {"code-eq", equiv_code},           {"last-coord-eq", equiv_last_coord},
      {"multiset-eq", equiv_multiset},   {"prefix-eq", equiv_drop_last},
      {"everything-eq", equiv_everything},
  };
  return table;
}

std::shared_ptr<const EffectiveInterpretation> builtin_interp(const std::string& name) {
  if (name == "pair-intersection") {
    return std::make_shared<EffectiveInterpretation>(interp_pair_intersection());
  }
  if (name == "identity-pure") {
    return std::make_shared<EffectiveInterpretation>(interp_identity_pure());
  }
  return nullptr;
}

FunctorBundle parse_functor_block(Cursor& c, const RunLimits& limits);

std::shared_ptr<const EffectiveInterpretation> parse_interp_block(Cursor& c,
                                                                  const RunLimits& limits) {
  auto head = tokenize(c.peek());
  if (head.size() != 2 || head[0] != "INTERP") c.fail("expected 'INTERP <name>'");
  c.next();
  auto I = std::make_shared<EffectiveInterpretation>();
  I->name = head[1];
  bool have_target = false;
  while (true) {
    auto tok = tokenize(c.peek());
    if (tok.empty()) c.fail("unexpected blank inside INTERP");
    if (tok[0] == "END") {
      c.next();
      break;
    }
    if (tok[0] == "BUILTIN" && tok.size() == 2) {
      c.next();
      auto b = builtin_interp(tok[1]);
      if (!b) c.fail("unknown built-in interpretation '" + tok[1] + "'");
      if (tokenize(c.peek())[0] != "END") c.fail("BUILTIN must be the only clause");
      c.next();
      return b;
    }
    if (tok[0] == "SYNTH" && tok.size() == 2) {
      c.next();
      bool star = tok[1] == "star";
      if (!star && tok[1] != "plain") c.fail("SYNTH wants 'star' or 'plain'");
      FunctorBundle src = parse_functor_block(c, limits);
      if (tokenize(c.peek())[0] != "END") c.fail("SYNTH block must end after its functor");
      c.next();
      InterpSynthesis syn = functor_to_interp(src, limits);
      return star ? syn.star : syn.sigma;
    }
    if (tok[0] == "TARGET") {
      I->target = parse_signature(c, "TARGET");
      have_target = true;
      continue;
    }
    if (tok[0] == "SIM" && tok.size() == 2) {
      c.next();
      auto it = sim_table().find(tok[1]);
      if (it == sim_table().end()) c.fail("unknown sim rule '" + tok[1] + "'");
      I->sim = it->second();
      continue;
    }
    if (tok[0] == "DOMPOS" && tok.size() == 1) {
      c.next();
      I->dom_pos = parse_family(c);
      continue;
    }
    if (tok[0] == "DOMNEG" && tok.size() == 1) {
      c.next();
      I->dom_neg = parse_family(c);
      continue;
    }
    if ((tok[0] == "RELPOS" || tok[0] == "RELNEG") && tok.size() == 2) {
      c.next();
      std::size_t r = c.u64(tok[1]);
      auto& fams = tok[0] == "RELPOS" ? I->rel_pos : I->rel_neg;
      if (fams.size() <= r) fams.resize(r + 1);
      fams[r] = parse_family(c);
      continue;
    }
    c.fail("unknown INTERP clause '" + tok[0] + "'");
  }
  if (!have_target) c.fail("INTERP needs a TARGET signature");
  if (!I->dom_pos) c.fail("INTERP needs a DOMPOS family");
  if (!I->sim.same) c.fail("INTERP needs a SIM rule");
  return I;
}

void collect_recipe_programs(const MapRecipePtr& r,
                             std::vector<std::pair<std::string, vm::Program>>& out) {
  if (!r) return;
  if (r->kind == MapNode::Kind::Vm) {
    bool seen = false;
    for (const auto& [n, _] : out) seen = seen || n == r->name;
    if (!seen) out.emplace_back(r->name, r->prog);
  }
  for (const auto& ch : r->children) collect_recipe_programs(ch, out);
  collect_recipe_programs(r->inner, out);
}

std::string serialize_functor_block(const FunctorBundle& f, std::uint64_t axiom_prefix) {
  std::string out = "FUNCTOR " + f.name + "\n";
  serialize_signature(out, "SOURCE", f.source);
  serialize_signature(out, "TARGET", f.target);
  if (!f.psi) {
    out += "PSI NONE\n";
  } else if (f.psi->shape() == OperatorStream::Shape::Identity) {
    out += "PSI RULE identity\n";
  } else if (f.psi->shape() == OperatorStream::Shape::Complement) {
    out += "PSI RULE complement\n";
  } else {
    bool wrote = false;
    if (f.interp) {
      try {
        std::string block = serialize_interpretation(*f.interp, 64);
        out += "PSI INTERP\n" + block;
        wrote = true;
      } catch (const InvalidInputError&) {
        // synthesized families have no finite listing; fall back to a prefix
      }
    }
    if (!wrote) {
      std::vector<Axiom> axs;
      for (std::uint64_t i = 0; i < axiom_prefix; ++i) {
        auto ax = f.psi->axiom(Nat(i));
        if (!ax) break;
        axs.push_back(std::move(*ax));
      }
      auto len = f.psi->length();
      if (!len || to_u64(*len, "stream length") > axs.size()) {
        out += "# truncated enumeration prefix\n";
      }
      out += "PSI AXIOMS " + std::to_string(axs.size()) + "\n";
      for (const Axiom& ax : axs) out += axiom_line(ax);
    }
  }
  if (f.phi) out += "PHI\n" + serialize_prog_block(*f.phi);
  if (f.phi_star) out += "PHISTAR\n" + serialize_prog_block(*f.phi_star);
  if (f.arrow_recipe) {
    std::vector<std::pair<std::string, vm::Program>> progs;
    collect_recipe_programs(f.arrow_recipe, progs);
    for (const auto& [_, p] : progs) out += serialize_prog_block(p);
    out += "RECIPE " + serialize_recipe(*f.arrow_recipe) + "\n";
  }
  if (!f.carried.empty()) {
    out += "CARRIED " + std::to_string(f.carried.size()) + "\n";
    for (const auto& ch : f.carried) out += serialize_functor_block(*ch, axiom_prefix);
  }
  out += "END\n";
  return out;
}

FunctorBundle parse_functor_block(Cursor& c, const RunLimits& limits) {
  auto head = tokenize(c.peek());
  if (head.size() != 2 || head[0] != "FUNCTOR") c.fail("expected 'FUNCTOR <name>'");
  c.next();
  FunctorBundle f;
  f.name = head[1];
  f.source = parse_signature(c, "SOURCE");
  f.target = parse_signature(c, "TARGET");
  std::map<std::string, vm::Program> progs;
  MapRecipePtr interp_arrow;
  std::string recipe_text;
  while (true) {
    auto tok = tokenize(c.peek());
    if (tok.empty()) c.fail("unexpected blank inside FUNCTOR");
    if (tok[0] == "END") {
      c.next();
      break;
    }
    if (tok[0] == "PSI") {
      if (tok.size() == 2 && tok[1] == "NONE") {
        c.next();
      } else if (tok.size() == 3 && tok[1] == "RULE") {
        c.next();
        if (tok[2] == "identity") {
          f.psi = identity_stream();
        } else if (tok[2] == "complement") {
          f.psi = complement_stream();
        } else {
          c.fail("unknown stream rule '" + tok[2] + "'");
        }
      } else if (tok.size() == 3 && tok[1] == "AXIOMS") {
        c.next();
        std::uint64_t k = c.u64(tok[2]);
        std::vector<Axiom> axs;
        for (std::uint64_t i = 0; i < k; ++i) {
          axs.push_back(parse_axiom_line(c, c.next()));
        }
        f.psi = finite_stream(f.name + ".psi", std::move(axs));
      } else if (tok.size() == 2 && tok[1] == "INTERP") {
        c.next();
        auto I = parse_interp_block(c, limits);
        FunctorBundle tmp = interp_to_functor(I, f.source, limits);
        f.psi = tmp.psi;
        f.interp = I;
        interp_arrow = tmp.arrow_recipe;
      } else {
        c.fail("bad PSI clause");
      }
      continue;
    }
    if (tok[0] == "PHI" && tok.size() == 1) {
      c.next();
      f.phi = parse_prog_body(c);
      continue;
    }
    if (tok[0] == "PHISTAR" && tok.size() == 1) {
      c.next();
      f.phi_star = parse_prog_body(c);
      continue;
    }
    if (tok[0] == "PROG") {
      vm::Program p = parse_prog_body(c);
      std::string n = p.name;
      progs.emplace(std::move(n), std::move(p));
      continue;
    }
    if (tok[0] == "RECIPE") {
      std::string line = c.next();
      recipe_text = trim(line.substr(6));
      continue;
    }
    if (tok[0] == "CARRIED" && tok.size() == 2) {
      c.next();
      std::uint64_t k = c.u64(tok[1]);
      for (std::uint64_t i = 0; i < k; ++i) {
        f.carried.push_back(
            std::make_shared<const FunctorBundle>(parse_functor_block(c, limits)));
      }
      continue;
    }
    c.fail("unknown FUNCTOR clause '" + tok[0] + "'");
  }
  if (!recipe_text.empty()) {
    f.arrow_recipe = parse_recipe(recipe_text, progs);
  } else if (interp_arrow) {
    f.arrow_recipe = interp_arrow;
  }
  return f;
}

}  // namespace

TextLines read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return split_lines(path, buf.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError(path + ": cannot write");
  out << content;
  if (!out.good()) throw InvalidInputError(path + ": write failed");
}

TextLines split_lines(std::string file, const std::string& content) {
  TextLines t;
  t.file = std::move(file);
  std::string cur;
  for (char ch : content) {
    if (ch == '\n') {
      t.lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) t.lines.push_back(std::move(cur));
  return t;
}

std::string serialize_structure(const Presentation& p) {
  const Signature& sig = p.signature();
  if (!sig.is_finite()) throw InvalidInputError("only finite signatures serialize");
  std::uint64_t n = sig.relation_count();
  std::string out = "SIG " + std::to_string(n) + "\n";
  for (std::uint64_t i = 0; i < n; ++i) {
    out += "AR " + std::to_string(i) + " " + std::to_string(sig.arity(Nat(i))) + "\n";
  }
  if (find_builtin_presentation(p.name())) {
    out += "RULE " + p.name() + "\n";
    return out;
  }
  if (const auto& d = p.finite_diagram()) {
    for (const Nat& f : d->facts) out += "FACT " + f.str() + "\n";
    return out;
  }
  throw InvalidInputError("presentation '" + p.name() +
                          "' is neither built-in nor finite, nothing to write");
}

Presentation parse_structure(std::string name, const TextLines& t) {
  Cursor c(t);
  auto head = tokenize(c.peek());
  if (head.size() != 2 || head[0] != "SIG") c.fail("expected 'SIG <count>'");
  c.next();
  Signature sig = parse_signature_body(c, c.u64(head[1]));
  if (!c.eof() && tokenize(c.peek())[0] == "RULE") {
    auto tok = tokenize(c.next());
    if (tok.size() != 2) c.fail("expected 'RULE <builtin-name>'");
    const Presentation* b = find_builtin_presentation(tok[1]);
    if (!b) c.fail("unknown built-in structure '" + tok[1] + "'");
    const Signature& bs = b->signature();
    bool match = bs.is_finite() && bs.relation_count() == sig.relation_count();
    for (std::uint64_t i = 0; match && i < sig.relation_count(); ++i) {
      match = bs.arity(Nat(i)) == sig.arity(Nat(i));
    }
    if (!match) c.fail("signature does not match built-in '" + tok[1] + "'");
    return *b;
  }
  std::set<Nat> facts;
  while (!c.eof()) {
    auto tok = tokenize(c.peek());
    if (tok[0] != "FACT" || tok.size() != 2) c.fail("expected a FACT line");
    c.next();
    facts.insert(c.nat(tok[1]));
  }
  return Presentation::from_diagram(std::move(name), std::move(sig),
                                    diagram_from_facts(facts));
}

std::string serialize_axioms(const OperatorStream& s, std::uint64_t count) {
  std::string out;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto ax = s.axiom(Nat(i));
    if (!ax) break;
    out += axiom_line(*ax);
  }
  return out;
}

std::vector<Axiom> parse_axioms(const TextLines& t) {
  Cursor c(t);
  std::vector<Axiom> out;
  while (!c.eof()) out.push_back(parse_axiom_line(c, c.next()));
  return out;
}

std::string serialize_prog_block(const vm::Program& p) {
  return "PROG " + p.name + "\n" + vm::serialize_program(p) + "ENDPROG\n";
}

std::string serialize_interpretation(const EffectiveInterpretation& I,
                                     std::uint64_t family_prefix) {
  std::string out = "INTERP " + I.name + "\n";
  serialize_signature(out, "TARGET", I.target);
  auto known = sim_table().find(I.sim.name);
  if (known == sim_table().end()) {
    throw InvalidInputError("sim rule '" + I.sim.name + "' has no file form");
  }
  out += "SIM " + I.sim.name + "\n";
  if (!I.dom_pos) throw InvalidInputError("interpretation has no domain family");
  out += "DOMPOS\n" + serialize_family(*I.dom_pos, family_prefix);
  if (I.dom_neg) out += "DOMNEG\n" + serialize_family(*I.dom_neg, family_prefix);
  for (std::size_t r = 0; r < I.rel_pos.size(); ++r) {
    if (!I.rel_pos[r]) continue;
    out += "RELPOS " + std::to_string(r) + "\n" + serialize_family(*I.rel_pos[r], family_prefix);
  }
  for (std::size_t r = 0; r < I.rel_neg.size(); ++r) {
    if (!I.rel_neg[r]) continue;
    out += "RELNEG " + std::to_string(r) + "\n" + serialize_family(*I.rel_neg[r], family_prefix);
  }
  out += "END\n";
  return out;
}

std::shared_ptr<const EffectiveInterpretation> parse_interpretation(const TextLines& t,
                                                                    const RunLimits& limits) {
  Cursor c(t);
  return parse_interp_block(c, limits);
}

std::vector<vm::Program> parse_programs(const TextLines& t) {
  Cursor c(t);
  std::vector<vm::Program> out;
  while (!c.eof()) out.push_back(parse_prog_body(c));
  if (out.empty()) {
    throw ParseError(t.file + ":1: expected at least one PROG block");
  }
  return out;
}

std::string serialize_functor(const FunctorBundle& f, std::uint64_t axiom_prefix) {
  return serialize_functor_block(f, axiom_prefix);
}

FunctorBundle parse_functor(const TextLines& t, const RunLimits& limits) {
  Cursor c(t);
  return parse_functor_block(c, limits);
}

ArtifactKind sniff_artifact(const TextLines& t) {
  Cursor c(t);
  if (c.eof()) return ArtifactKind::Unknown;
  auto tok = tokenize(c.peek());
  if (tok.empty()) return ArtifactKind::Unknown;
  if (tok[0] == "SIG") return ArtifactKind::Structure;
  if (tok[0] == "AXIOM") return ArtifactKind::Axioms;
  if (tok[0] == "FUNCTOR") return ArtifactKind::Functor;
  if (tok[0] == "INTERP") return ArtifactKind::Interpretation;
  if (tok[0] == "PROG") return ArtifactKind::Programs;
  return ArtifactKind::Unknown;
}

RunConfig parse_config(const TextLines& t, RunConfig base) {
  Cursor c(t);
  while (!c.eof()) {
    std::string line = c.next();
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) c.fail("expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    auto positive = [&](const std::string& v) {
      Nat n = c.nat(v);
      if (n == 0) c.fail("'" + key + "' must be positive");
      return n;
    };
    if (key == "stage") {
      base.stage = positive(val);
    } else if (key == "prefix") {
      base.prefix = positive(val);
    } else if (key == "budget") {
      std::uint64_t b = to_u64(positive(val), "budget");
      base.limits.steps = b;
      base.limits.axioms = b;
    } else if (key == "steps") {
      base.limits.steps = to_u64(positive(val), "steps");
    } else if (key == "axioms") {
      base.limits.axioms = to_u64(positive(val), "axioms");
    } else if (key == "format") {
      if (val == "text") {
        base.format = ReportFormat::Text;
      } else if (val == "structured") {
        base.format = ReportFormat::Structured;
      } else {
        c.fail("format must be text or structured");
      }
    } else if (key == "strict") {
      if (val == "1" || val == "true") {
        base.strict = true;
      } else if (val == "0" || val == "false") {
        base.strict = false;
      } else {
        c.fail("strict must be 0 or 1");
      }
    } else {
      c.fail("unknown config key '" + key + "'");
    }
  }
  return base;
}

}  // namespace stagecraft
