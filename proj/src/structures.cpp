#include "stagecraft/structures.hpp"

#include <algorithm>
#include <mutex>

namespace stagecraft {

Signature Signature::finite(std::vector<std::uint64_t> arities) {
  Signature s;
  s.arities_ = std::move(arities);
  return s;
}

Signature Signature::unbounded(std::function<std::uint64_t(std::uint64_t)> arity_rule,
                               std::string rule_name) {
  Signature s;
  s.rule_ = std::move(arity_rule);
  s.rule_name_ = std::move(rule_name);
  return s;
}

std::uint64_t Signature::relation_count() const {
  if (!arities_) throw InvalidInputError("signature has unboundedly many relations");
  return arities_->size();
}

bool Signature::declares(const Nat& rel) const {
  if (arities_) return rel < Nat(arities_->size());
  return rel >= 0;
}

std::uint64_t Signature::arity(const Nat& rel) const {
  if (!declares(rel)) throw MalformedFactError("relation not declared: " + rel.str());
  if (arities_) return (*arities_)[to_size(rel, "relation index")];
  return rule_(to_u64(rel, "relation index"));
}

const std::vector<std::uint64_t>& Signature::arities() const {
  if (!arities_) throw InvalidInputError("signature has unboundedly many relations");
  return *arities_;
}

bool Signature::operator==(const Signature& other) const {
  if (arities_.has_value() != other.arities_.has_value()) return false;
  if (arities_) return *arities_ == *other.arities_;
  return rule_name_ == other.rule_name_;
}

bool FiniteDiagram::consistent(Nat* witness) const {
  for (const Nat& c : facts) {
    Nat opp = negate_fact(c);
    if (opp != c && facts.count(opp)) {
      if (witness) *witness = c;
      return false;
    }
  }
  return true;
}

FiniteDiagram diagram_from_facts(const std::set<Nat>& facts) {
  FiniteDiagram d;
  d.facts = facts;
  for (const Nat& c : facts) {
    auto f = decode_fact(c);
    if (!f) throw MalformedFactError("diagram contains undecodable code " + c.str());
    for (const Nat& a : f->args) d.support.insert(a);
  }
  return d;
}

Presentation::Presentation(std::string name, Signature sig, RelRule rel_truth)
    : name_(std::move(name)), sig_(std::move(sig)), rel_truth_(std::move(rel_truth)) {}

Presentation Presentation::from_diagram(std::string name, Signature sig, FiniteDiagram d) {
  Presentation p;
  p.name_ = std::move(name);
  p.sig_ = std::move(sig);
  p.finite_ = std::move(d);
  return p;
}

bool Presentation::fact_truth(const Fact& f) const {
  if (!fact_is_eq(f.kind)) {
    if (!sig_.declares(f.rel)) {
      throw MalformedFactError("relation not declared: " + f.rel.str());
    }
    if (f.args.size() != sig_.arity(f.rel)) {
      throw MalformedFactError("arity mismatch for relation " + f.rel.str());
    }
  }
  if (finite_) {
    return finite_->contains(encode_fact(f));
  }
  if (fact_is_eq(f.kind)) {
    bool eq = f.args[0] == f.args[1];
    return f.kind == FactKind::PosEq ? eq : !eq;
  }
  bool holds = rel_truth_(f.rel, f.args);
  return f.kind == FactKind::PosRel ? holds : !holds;
}

bool Presentation::fact_truth(const Nat& code) const {
  return fact_truth(decode_fact_checked(code));
}

bool Presentation::diagram_member(const Nat& code) const {
  auto f = decode_fact(code);
  if (!f) return false;
  if (!fact_is_eq(f->kind)) {
    if (!sig_.declares(f->rel)) return false;
    if (f->args.size() != sig_.arity(f->rel)) return false;
  }
  return fact_truth(*f);
}

FiniteDiagram Presentation::diagram_prefix(const Nat& stage) const {
  FiniteDiagram out;
  for (Nat c = 0; c < stage; ++c) {
    if (!diagram_member(c)) continue;
    out.facts.insert(c);
    Fact f = *decode_fact(c);
    for (const Nat& a : f.args) out.support.insert(a);
  }
  return out;
}

FiniteDiagram Presentation::restrict_to(const std::vector<Nat>& elems) const {
  if (!sig_.is_finite()) {
    throw InvalidInputError("restriction needs a finite signature");
  }
  std::set<Nat> uniq(elems.begin(), elems.end());
  std::vector<Nat> elts(uniq.begin(), uniq.end());
  FiniteDiagram out;
  out.support = uniq;
  // Equality facts, both signs.
  for (const Nat& x : elts) {
    for (const Nat& y : elts) {
      Fact f{x == y ? FactKind::PosEq : FactKind::NegEq, 0, {x, y}};
      out.facts.insert(encode_fact(f));
    }
  }
  // Relation facts over all argument tuples from the restricted set.
  for (std::uint64_t r = 0; r < sig_.relation_count(); ++r) {
    std::uint64_t k = sig_.arity(Nat(r));
    std::vector<std::size_t> idx(k, 0);
    if (elts.empty() && k > 0) continue;
    while (true) {
      std::vector<Nat> args;
      args.reserve(k);
      for (std::size_t i = 0; i < k; ++i) args.push_back(elts[idx[i]]);
      bool holds = fact_truth(Fact{FactKind::PosRel, Nat(r), args});
      out.facts.insert(encode_fact(Fact{holds ? FactKind::PosRel : FactKind::NegRel, Nat(r), args}));
      // next tuple
      std::size_t i = 0;
      for (; i < k; ++i) {
        if (++idx[i] < elts.size()) break;
        idx[i] = 0;
      }
      if (i == k) break;
      if (k == 0) break;
    }
    if (k == 0) {
      // nullary relation: single fact with empty args
      bool holds = fact_truth(Fact{FactKind::PosRel, Nat(r), {}});
      out.facts.insert(encode_fact(Fact{holds ? FactKind::PosRel : FactKind::NegRel, Nat(r), {}}));
    }
  }
  return out;
}

Presentation Presentation::relabeled(std::string name, std::function<Nat(const Nat&)> fwd,
                                     std::function<Nat(const Nat&)> bwd) const {
  if (finite_) {
    FiniteDiagram d;
    for (const Nat& c : finite_->facts) {
      Fact f = *decode_fact(c);
      for (Nat& a : f.args) a = fwd(a);
      d.facts.insert(encode_fact(f));
    }
    for (const Nat& e : finite_->support) d.support.insert(fwd(e));
    return from_diagram(std::move(name), sig_, std::move(d));
  }
  RelRule inner = rel_truth_;
  return Presentation(std::move(name), sig_,
                      [inner, bwd](const Nat& rel, const std::vector<Nat>& args) {
                        std::vector<Nat> pre;
                        pre.reserve(args.size());
                        for (const Nat& a : args) pre.push_back(bwd(a));
                        return inner(rel, pre);
                      });
}

namespace {

// m maps a subset of d1's support into d2's support. A decided literal is a
// fact present in a diagram; the map must never send a decided literal onto
// the opposite sign on the other side.
bool respects_one_way(const FiniteDiagram& from, const FiniteDiagram& to,
                      const std::map<Nat, Nat>& m) {
  for (const Nat& c : from.facts) {
    Fact f = *decode_fact(c);
    bool all_mapped = true;
    for (Nat& a : f.args) {
      auto it = m.find(a);
      if (it == m.end()) {
        all_mapped = false;
        break;
      }
      a = it->second;
    }
    if (!all_mapped) continue;
    Nat image = encode_fact(f);
    if (to.facts.count(negate_fact(image))) return false;
  }
  return true;
}

}  // namespace

bool partial_iso_respects(const FiniteDiagram& d1, const FiniteDiagram& d2, const PartialIso& m) {
  std::map<Nat, Nat> inv;
  for (const auto& [a, b] : m.map) {
    if (!d1.support.count(a) || !d2.support.count(b)) return false;
    if (!inv.emplace(b, a).second) return false;  // not injective
  }
  return respects_one_way(d1, d2, m.map) && respects_one_way(d2, d1, inv);
}

std::vector<PartialIso> find_partial_isos(const FiniteDiagram& d1, const FiniteDiagram& d2,
                                          std::size_t size) {
  if (size > 8) {
    throw SearchBudgetError("partial isomorphism search capped at size 8");
  }
  std::vector<Nat> dom(d1.support.begin(), d1.support.end());
  std::vector<Nat> rng(d2.support.begin(), d2.support.end());
  std::vector<PartialIso> out;
  if (size > dom.size() || size > rng.size()) return out;

  // Choose which domain elements participate, then try every injection.
  std::vector<std::size_t> pick(size);
  std::vector<bool> used(rng.size(), false);
  PartialIso cur;

  std::function<void(std::size_t)> assign = [&](std::size_t depth) {
    if (depth == size) {
      if (partial_iso_respects(d1, d2, cur)) out.push_back(cur);
      return;
    }
    const Nat& a = dom[pick[depth]];
    for (std::size_t j = 0; j < rng.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      cur.map[a] = rng[j];
      assign(depth + 1);
      cur.map.erase(a);
      used[j] = false;
    }
  };

  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t depth) {
    if (depth == size) {
      assign(0);
      return;
    }
    for (std::size_t i = start; i + (size - depth - 1) < dom.size(); ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  return out;
}

Signature graph_signature() { return Signature::finite({2}); }

Presentation pure_equality() {
  return Presentation("pure-equality", Signature::finite({}),
                      [](const Nat&, const std::vector<Nat>&) { return false; });
}

namespace {

bool rado_edge(const Nat& x, const Nat& y) {
  if (x == y) return false;
  const Nat& lo = x < y ? x : y;
  const Nat& hi = x < y ? y : x;
  // bit lo of hi
  if (lo >= Nat(1u << 26)) return false;  // beyond any set bit we can meet here
  unsigned pos = lo.convert_to<unsigned>();
  return boost::multiprecision::bit_test(hi, pos);
}

}  // namespace

Presentation rado_graph() {
  return Presentation("rado", graph_signature(),
                      [](const Nat&, const std::vector<Nat>& a) { return rado_edge(a[0], a[1]); });
}

Presentation rado_complement() {
  return Presentation("rado-complement", graph_signature(),
                      [](const Nat&, const std::vector<Nat>& a) {
                        return a[0] != a[1] && !rado_edge(a[0], a[1]);
                      });
}

Presentation complete_graph() {
  return Presentation("complete", graph_signature(),
                      [](const Nat&, const std::vector<Nat>& a) { return a[0] != a[1]; });
}

Presentation empty_graph() {
  return Presentation("empty-graph", graph_signature(),
                      [](const Nat&, const std::vector<Nat>&) { return false; });
}

namespace {

// Cache of the canonical enumeration of two element sets: the v-th entry is
// the v-th tuple code that decodes to a pair of distinct naturals not seen
// (as a set) at any smaller code.
struct PairEnum {
  std::vector<std::pair<Nat, Nat>> pairs;       // v -> {lo, hi}
  std::map<std::pair<Nat, Nat>, Nat> index_of;  // {lo, hi} -> v
  Nat next_code = 0;
  std::mutex mu;

  void grow_until(const std::function<bool()>& done, std::uint64_t code_budget) {
    std::uint64_t used = 0;
    while (!done()) {
      if (used++ >= code_budget) {
        throw SearchBudgetError("pair enumeration scan budget exhausted");
      }
      Nat c = next_code++;
      std::vector<Nat> t = dec_tuple(c);
      if (t.size() != 2 || t[0] == t[1]) continue;
      std::pair<Nat, Nat> key = t[0] < t[1] ? std::make_pair(t[0], t[1])
                                            : std::make_pair(t[1], t[0]);
      if (index_of.count(key)) continue;
      index_of[key] = Nat(pairs.size());
      pairs.push_back(key);
    }
  }
};

PairEnum& pair_enum() {
  static PairEnum e;
  return e;
}

}  // namespace

std::pair<Nat, Nat> triangular_vertex_pair(const Nat& v) {
  PairEnum& e = pair_enum();
  std::lock_guard<std::mutex> lock(e.mu);
  std::size_t want = to_size(v, "vertex index");
  e.grow_until([&] { return e.pairs.size() > want; }, UINT64_MAX);
  return e.pairs[want];
}

std::optional<Nat> triangular_vertex_of_pair(const Nat& a, const Nat& b,
                                             std::uint64_t scan_budget) {
  if (a == b) return std::nullopt;
  PairEnum& e = pair_enum();
  std::lock_guard<std::mutex> lock(e.mu);
  std::pair<Nat, Nat> key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  try {
    e.grow_until([&] { return e.index_of.count(key) > 0; }, scan_budget);
  } catch (const SearchBudgetError&) {
    return std::nullopt;
  }
  return e.index_of[key];
}

Presentation triangular_graph() {
  return Presentation("triangular", graph_signature(),
                      [](const Nat&, const std::vector<Nat>& a) {
                        if (a[0] == a[1]) return false;
                        auto p = triangular_vertex_pair(a[0]);
                        auto q = triangular_vertex_pair(a[1]);
                        return p.first == q.first || p.first == q.second ||
                               p.second == q.first || p.second == q.second;
                      });
}

namespace {

const std::vector<std::pair<std::string, Presentation (*)()>>& builtin_table() {
  static const std::vector<std::pair<std::string, Presentation (*)()> > table = {
      {"pure-equality", pure_equality}, {"rado", rado_graph},
      {"rado-complement", rado_complement}, {"complete", complete_graph},
      {"empty-graph", empty_graph}, {"triangular", triangular_graph},
  };
  return table;
}

}  // namespace

const Presentation* find_builtin_presentation(const std::string& name) {
  static std::map<std::string, Presentation> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(name);
  if (it != cache.end()) return &it->second;
  for (const auto& [n, make] : builtin_table()) {
    if (n == name) {
      auto [jt, _] = cache.emplace(name, make());
      return &jt->second;
    }
  }
  return nullptr;
}

std::vector<std::string> builtin_presentation_names() {
  std::vector<std::string> out;
  for (const auto& [n, _] : builtin_table()) out.push_back(n);
  return out;
}

}  // namespace stagecraft
