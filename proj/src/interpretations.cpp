#include "stagecraft/interpretations.hpp"

#include <algorithm>
#include <set>

namespace stagecraft {

Literal lit_eq(Term a, Term b, bool positive) {
  Literal l;
  l.positive = positive;
  l.is_eq = true;
  l.args = {std::move(a), std::move(b)};
  return l;
}

Literal lit_rel(Nat rel, std::vector<Term> args, bool positive) {
  Literal l;
  l.positive = positive;
  l.is_eq = false;
  l.rel = std::move(rel);
  l.args = std::move(args);
  return l;
}

std::size_t Disjunct::free_arity() const {
  std::size_t n = 0;
  for (std::size_t k : free_split) n += k;
  return n;
}

std::optional<Disjunct> LiteralFamily::disjunct(const Nat& j) const {
  if (j >= disjuncts_.size()) return std::nullopt;
  return disjuncts_[to_size(j, "disjunct index")];
}

FamilyPtr literal_family(std::string name, std::vector<Disjunct> disjuncts) {
  return std::make_shared<LiteralFamily>(std::move(name), std::move(disjuncts));
}

FamilyPtr empty_family(std::string name) {
  return literal_family(std::move(name), {});
}

bool layout_matches(const Disjunct& d, const std::vector<std::vector<Nat>>& components) {
  std::size_t total = 0;
  for (const auto& c : components) total += c.size();
  if (d.free_arity() != total) return false;
  // Multi-component layouts must agree component by component; a single
  // component on either side only constrains the total.
  if (d.free_split.size() <= 1 || components.size() <= 1) return true;
  if (d.free_split.size() != components.size()) return false;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (d.free_split[i] != components[i].size()) return false;
  }
  return true;
}

namespace {

std::vector<Nat> flatten(const std::vector<std::vector<Nat>>& components) {
  std::vector<Nat> flat;
  for (const auto& c : components) flat.insert(flat.end(), c.begin(), c.end());
  return flat;
}

const Nat& term_value(const Term& t, const std::vector<Nat>& free,
                      const std::vector<Nat>& witness) {
  if (t.is_const) return t.value;
  if (t.var < free.size()) return free[t.var];
  std::size_t w = t.var - free.size();
  if (w < witness.size()) return witness[w];
  throw InvalidInputError("literal references variable " + std::to_string(t.var) +
                          " beyond the assignment");
}

}  // namespace

Fact instantiate_literal(const Literal& l, const std::vector<Nat>& free,
                         const std::vector<Nat>& witness) {
  Fact f;
  if (l.is_eq) {
    if (l.args.size() != 2) throw InvalidInputError("equality literal needs two terms");
    f.kind = l.positive ? FactKind::PosEq : FactKind::NegEq;
  } else {
    f.kind = l.positive ? FactKind::PosRel : FactKind::NegRel;
    f.rel = l.rel;
  }
  f.args.reserve(l.args.size());
  for (const Term& t : l.args) f.args.push_back(term_value(t, free, witness));
  return f;
}

bool eval_qf(const Disjunct& d, const FiniteDiagram& dg, const std::vector<Nat>& free,
             const std::vector<Nat>& witness) {
  for (const Literal& l : d.literals) {
    Fact f = instantiate_literal(l, free, witness);
    for (const Nat& e : f.args) {
      if (dg.support.count(e) == 0) {
        throw InvalidInputError("element " + e.str() + " outside the diagram support");
      }
    }
    if (!dg.contains(encode_fact(f))) return false;
  }
  return true;
}

bool eval_qf(const Disjunct& d, const Presentation& p, const std::vector<Nat>& free,
             const std::vector<Nat>& witness) {
  for (const Literal& l : d.literals) {
    Fact f = instantiate_literal(l, free, witness);
    try {
      if (!p.fact_truth(f)) return false;
    } catch (const MalformedFactError&) {
      // A literal outside the signature holds nowhere.
      return false;
    }
  }
  return true;
}

namespace {

// Enumerate witness tuples of the given arity over a sorted element pool,
// invoking fn until it returns true. Returns whether fn ever did.
bool witness_tuples(const std::vector<Nat>& pool, std::size_t arity,
                    const std::function<bool(const std::vector<Nat>&)>& fn) {
  std::vector<Nat> w(arity, Nat(0));
  if (arity == 0) return fn(w);
  if (pool.empty()) return false;
  std::vector<std::size_t> ix(arity, 0);
  while (true) {
    for (std::size_t i = 0; i < arity; ++i) w[i] = pool[ix[i]];
    if (fn(w)) return true;
    std::size_t k = 0;
    while (k < arity && ++ix[k] == pool.size()) ix[k++] = 0;
    if (k == arity) return false;
  }
}

}  // namespace

SemiVerdict eval_sigma1_finite(const Sigma1Family& fam, const FiniteDiagram& dg,
                               const std::vector<std::vector<Nat>>& components,
                               const Nat& jBound) {
  std::vector<Nat> free = flatten(components);
  std::vector<Nat> pool(dg.support.begin(), dg.support.end());
  Nat bound = jBound;
  if (auto len = fam.length(); len && *len < bound) bound = *len;
  for (Nat j = 0; j < bound; ++j) {
    auto d = fam.disjunct(j);
    if (!d) break;
    if (!layout_matches(*d, components)) continue;
    bool hit = witness_tuples(pool, d->witness_arity, [&](const std::vector<Nat>& w) {
      return eval_qf(*d, dg, free, w);
    });
    if (hit) return SemiVerdict::Yes;
  }
  return SemiVerdict::Inconclusive;
}

SemiVerdict eval_sigma1_finite(const Sigma1Family& fam, const FiniteDiagram& dg,
                               const std::vector<Nat>& free, const Nat& jBound) {
  return eval_sigma1_finite(fam, dg, std::vector<std::vector<Nat>>{free}, jBound);
}

namespace {

// Witness search for one disjunct over growing supports {0..s-1}, charging
// `work` per evaluation. True means a witness was found.
bool search_disjunct(const Disjunct& d, const Presentation& p, const std::vector<Nat>& free,
                     std::uint64_t budget, std::uint64_t& work) {
  if (d.witness_arity == 0) {
    if (work >= budget) return false;
    ++work;
    return eval_qf(d, p, free, {});
  }
  for (std::uint64_t s = 1; work < budget; ++s) {
    // New tuples at stage s: max coordinate exactly s-1.
    std::vector<Nat> pool;
    pool.reserve(s);
    for (std::uint64_t v = 0; v < s; ++v) pool.emplace_back(v);
    bool hit = false;
    witness_tuples(pool, d.witness_arity, [&](const std::vector<Nat>& w) {
      if (s > 1 && std::none_of(w.begin(), w.end(),
                                [&](const Nat& x) { return x == s - 1; })) {
        return false;
      }
      if (work >= budget) return true;  // stop enumerating, budget gone
      ++work;
      if (eval_qf(d, p, free, w)) {
        hit = true;
        return true;
      }
      return false;
    });
    if (hit) return true;
  }
  return false;
}

}  // namespace

SemiVerdict eval_sigma1_budget(const Sigma1Family& fam, const Presentation& p,
                               const std::vector<std::vector<Nat>>& components,
                               std::uint64_t budget) {
  std::vector<Nat> free = flatten(components);
  std::uint64_t work = 0;
  RunLimits lim;
  lim.axioms = budget;
  if (auto cands = fam.accepting_candidates(components, lim)) {
    for (const Nat& j : *cands) {
      auto d = fam.disjunct(j);
      if (!d || !layout_matches(*d, components)) continue;
      if (search_disjunct(*d, p, free, budget, work)) return SemiVerdict::Yes;
      if (work >= budget) break;
    }
    return SemiVerdict::Inconclusive;
  }
  // Dovetail disjunct index against witness support size.
  Nat len_cap = budget;
  if (auto len = fam.length(); len && *len < len_cap) len_cap = *len;
  for (Nat j = 0; j < len_cap && work < budget; ++j) {
    auto d = fam.disjunct(j);
    if (!d) break;
    if (!layout_matches(*d, components)) continue;
    if (search_disjunct(*d, p, free, budget, work)) return SemiVerdict::Yes;
  }
  return SemiVerdict::Inconclusive;
}

SemiVerdict eval_sigma1_budget(const Sigma1Family& fam, const Presentation& p,
                               const std::vector<Nat>& free, std::uint64_t budget) {
  return eval_sigma1_budget(fam, p, std::vector<std::vector<Nat>>{free}, budget);
}

ComputableEquiv equiv_code() {
  ComputableEquiv e;
  e.name = "code-eq";
  e.same = [](const Nat& a, const Nat& b) { return a == b; };
  e.members_below = [](const Nat&, const Nat&) { return std::vector<Nat>{}; };
  e.canon = [](const Nat& t) { return t; };
  return e;
}

ComputableEquiv equiv_last_coord() {
  ComputableEquiv e;
  e.name = "last-coord-eq";
  e.same = [](const Nat& a, const Nat& b) {
    auto la = dec_tuple(a);
    auto lb = dec_tuple(b);
    if (la.empty() || lb.empty()) return la.empty() && lb.empty();
    return la.back() == lb.back();
  };
  e.canon = [](const Nat& t) {
    auto l = dec_tuple(t);
    if (l.empty()) return t;
    // [i] is the least code ending in i: every longer tuple nests it.
    return enc_tuple({l.back()});
  };
  return e;
}

ComputableEquiv equiv_multiset() {
  ComputableEquiv e;
  e.name = "multiset-eq";
  e.same = [](const Nat& a, const Nat& b) {
    auto la = dec_tuple(a);
    auto lb = dec_tuple(b);
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    return la == lb;
  };
  e.members_below = [](const Nat& of, const Nat& bound) {
    auto l = dec_tuple(of);
    std::sort(l.begin(), l.end());
    std::set<Nat> out;
    do {
      Nat c = enc_tuple(l);
      if (c < bound) out.insert(c);
    } while (std::next_permutation(l.begin(), l.end()));
    return std::vector<Nat>(out.begin(), out.end());
  };
  return e;
}

ComputableEquiv equiv_drop_last() {
  ComputableEquiv e;
  e.name = "prefix-eq";
  e.same = [](const Nat& a, const Nat& b) {
    auto la = dec_tuple(a);
    auto lb = dec_tuple(b);
    if (la.empty() || lb.empty()) return a == b;
    la.pop_back();
    lb.pop_back();
    return la == lb;
  };
  e.members_below = [](const Nat& of, const Nat& bound) {
    std::vector<Nat> out;
    auto l = dec_tuple(of);
    if (l.empty()) {
      if (of < bound) out.push_back(of);
      return out;
    }
    // The class varies only in the last slot, and the code grows with it.
    for (Nat j = 0;; ++j) {
      l.back() = j;
      Nat c = enc_tuple(l);
      if (c >= bound) break;
      out.push_back(c);
    }
    return out;
  };
  e.canon = [](const Nat& t) {
    auto l = dec_tuple(t);
    if (l.empty()) return t;
    l.back() = 0;
    return enc_tuple(l);
  };
  return e;
}

Nat class_code(const ComputableEquiv& sim, const Nat& t) {
  if (sim.canon) return sim.canon(t);
  if (sim.members_below) {
    auto below = sim.members_below(t, t);
    if (!below.empty()) return below.front();
    return t;
  }
  if (t > Nat(1000000)) {
    throw InvalidInputError("class of " + t.str() + " needs a class enumerator on '" +
                            sim.name + "'");
  }
  for (Nat c = 0; c < t; ++c) {
    if (sim.same(c, t)) return c;
  }
  return t;
}

ComputableEquiv equiv_everything() {
  ComputableEquiv e;
  e.name = "everything-eq";
  e.same = [](const Nat&, const Nat&) { return true; };
  e.canon = [](const Nat&) { return Nat(0); };
  return e;
}

ComputableEquiv equiv_table(std::string name, std::vector<std::pair<Nat, Nat>> pairs) {
  // Reflexive-symmetric-transitive closure over the mentioned codes.
  auto roots = std::make_shared<std::map<Nat, Nat>>();
  std::function<Nat(const Nat&)> find = [&](const Nat& x) -> Nat {
    auto it = roots->find(x);
    if (it == roots->end() || it->second == x) return x;
    Nat r = find(it->second);
    (*roots)[x] = r;
    return r;
  };
  for (const auto& [a, b] : pairs) {
    roots->emplace(a, a);
    roots->emplace(b, b);
    Nat ra = find(a), rb = find(b);
    if (ra != rb) (*roots)[ra] = rb;
  }
  // Flatten so lookups after construction stay cheap and const.
  for (auto& [k, v] : *roots) v = find(k);
  ComputableEquiv e;
  e.name = std::move(name);
  e.same = [roots](const Nat& a, const Nat& b) {
    if (a == b) return true;
    auto ia = roots->find(a);
    auto ib = roots->find(b);
    if (ia == roots->end() || ib == roots->end()) return false;
    return ia->second == ib->second;
  };
  return e;
}

Trit dom_status(const EffectiveInterpretation& I, const Presentation& p,
                const Nat& tuple_code, std::uint64_t budget) {
  std::vector<std::vector<Nat>> comp{dec_tuple(tuple_code)};
  bool pos = eval_sigma1_budget(*I.dom_pos, p, comp, budget) == SemiVerdict::Yes;
  bool neg = eval_sigma1_budget(*I.dom_neg, p, comp, budget) == SemiVerdict::Yes;
  if (pos && neg) {
    throw IllFormedError("interpretation '" + I.name + "' certifies tuple " +
                             tuple_code.str() + " both inside and outside its domain",
                         tuple_code);
  }
  if (pos) return Trit::Yes;
  if (neg) return Trit::No;
  return Trit::Unknown;
}

MapResult least_rep(const EffectiveInterpretation& I, const Presentation& p,
                    const Nat& tuple_code, const RunLimits& limits) {
  std::vector<Nat> candidates;
  bool complete = true;
  if (I.sim.members_below) {
    candidates = I.sim.members_below(tuple_code, tuple_code);
  } else {
    // No structured class enumeration: scan codes below, within reason.
    if (tuple_code > Nat(limits.axioms)) return MapResult::unknown(tuple_code);
    for (Nat c = 0; c < tuple_code; ++c) {
      if (I.sim.same(c, tuple_code)) candidates.push_back(c);
    }
  }
  candidates.push_back(tuple_code);
  bool sawUnknown = false;
  for (const Nat& c : candidates) {
    Trit st = dom_status(I, p, c, limits.axioms);
    if (st == Trit::Yes) {
      if (sawUnknown) return MapResult::unknown(c);
      return MapResult::of(c);
    }
    if (st == Trit::Unknown) sawUnknown = true;
  }
  if (!sawUnknown && complete) return MapResult::outside(tuple_code);
  return MapResult::unknown(tuple_code);
}

QuotientFragment build_quotient_fragment(const EffectiveInterpretation& I,
                                         const Presentation& p, const Nat& tuple_code_bound,
                                         std::uint64_t budget) {
  QuotientFragment out;
  auto place = [&](const Nat& t) {
    Trit st = dom_status(I, p, t, budget);
    if (st == Trit::Unknown) {
      ++out.undecided;
      return;
    }
    if (st == Trit::No) return;
    for (const Nat& r : out.reps) {
      if (I.sim.same(r, t)) {
        out.class_of[t] = r;
        return;
      }
    }
    out.reps.push_back(t);
    out.class_of[t] = t;
  };
  for (Nat t = 0; t < tuple_code_bound; ++t) place(t);
  // Synthesized interpretations bury axiom indexes inside their domain
  // tuples, putting every tuple far past any blind bound. The section hook
  // names the tuples the bound cannot reach.
  if (I.section_candidates) {
    RunLimits lim;
    lim.axioms = budget;
    for (Nat b = 0; b < tuple_code_bound; ++b) {
      for (const Nat& t : I.section_candidates(b, lim)) {
        if (t < tuple_code_bound || out.class_of.count(t)) continue;
        place(t);
      }
    }
  }

  std::set<Nat> facts;
  const std::size_t k = out.reps.size();
  for (std::size_t i = 0; i < k; ++i) {
    facts.insert(encode_pos_eq(Nat(i), Nat(i)));
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) facts.insert(encode_neg_eq(Nat(i), Nat(j)));
    }
  }
  const std::uint64_t nrel = I.target.relation_count();
  for (std::uint64_t r = 0; r < nrel; ++r) {
    std::uint64_t a = I.target.arity(Nat(r));
    std::vector<std::size_t> ix(a, 0);
    if (k == 0 && a > 0) continue;
    while (true) {
      std::vector<std::vector<Nat>> comps;
      std::vector<Nat> ids;
      comps.reserve(a);
      for (std::size_t q = 0; q < a; ++q) {
        comps.push_back(dec_tuple(out.reps[ix[q]]));
        ids.emplace_back(ix[q]);
      }
      bool pos = r < I.rel_pos.size() &&
                 eval_sigma1_budget(*I.rel_pos[r], p, comps, budget) == SemiVerdict::Yes;
      bool neg = r < I.rel_neg.size() &&
                 eval_sigma1_budget(*I.rel_neg[r], p, comps, budget) == SemiVerdict::Yes;
      if (pos && neg) {
        Nat w = encode_pos_rel(Nat(r), ids);
        throw IllFormedError("interpretation '" + I.name +
                                 "' certifies both signs of relation fact " + w.str(),
                             w);
      }
      if (pos) {
        facts.insert(encode_pos_rel(Nat(r), ids));
      } else if (neg) {
        facts.insert(encode_neg_rel(Nat(r), ids));
      } else {
        ++out.undecided;
      }
      if (a == 0) break;
      std::size_t q = 0;
      while (q < a && ++ix[q] == k) ix[q++] = 0;
      if (q == a) break;
    }
  }
  out.diagram = diagram_from_facts(facts);
  // Isolated representatives still belong to the support.
  for (std::size_t i = 0; i < k; ++i) out.diagram.support.insert(Nat(i));
  return out;
}

Outcome check_congruence(const EffectiveInterpretation& I, const Presentation& p,
                         const std::vector<std::pair<Nat, Nat>>& samples,
                         std::uint64_t budget) {
  // Partners for the remaining relation slots: the first few certified
  // domain tuples.
  std::vector<Nat> pool;
  for (Nat t = 0; t < 200 && pool.size() < 8; ++t) {
    if (dom_status(I, p, t, budget) == Trit::Yes) pool.push_back(t);
  }
  if (pool.empty() && I.section_candidates) {
    RunLimits lim;
    lim.axioms = budget;
    for (Nat b = 0; b < 50 && pool.size() < 8; ++b) {
      for (const Nat& t : I.section_candidates(b, lim)) {
        if (dom_status(I, p, t, budget) == Trit::Yes) {
          pool.push_back(t);
          break;
        }
      }
    }
  }
  bool sawUnknown = false;
  auto rel_status = [&](std::uint64_t r, const std::vector<Nat>& arg_codes) -> Trit {
    std::vector<std::vector<Nat>> comps;
    comps.reserve(arg_codes.size());
    for (const Nat& c : arg_codes) comps.push_back(dec_tuple(c));
    bool pos = r < I.rel_pos.size() &&
               eval_sigma1_budget(*I.rel_pos[r], p, comps, budget) == SemiVerdict::Yes;
    bool neg = r < I.rel_neg.size() &&
               eval_sigma1_budget(*I.rel_neg[r], p, comps, budget) == SemiVerdict::Yes;
    if (pos && neg) {
      throw IllFormedError("interpretation '" + I.name +
                               "' certifies both signs during a congruence check",
                           arg_codes.empty() ? Nat(0) : arg_codes[0]);
    }
    if (pos) return Trit::Yes;
    if (neg) return Trit::No;
    return Trit::Unknown;
  };

  for (const auto& [t1, t2] : samples) {
    if (!I.sim.same(t1, t2)) continue;
    Trit s1 = dom_status(I, p, t1, budget);
    Trit s2 = dom_status(I, p, t2, budget);
    if (s1 == Trit::Unknown || s2 == Trit::Unknown) {
      sawUnknown = true;
      continue;
    }
    if (s1 != s2) {
      return Outcome::fail(t1, "equivalent tuples disagree on domain membership");
    }
    if (s1 != Trit::Yes) continue;
    const std::uint64_t nrel = I.target.relation_count();
    for (std::uint64_t r = 0; r < nrel; ++r) {
      std::uint64_t a = I.target.arity(Nat(r));
      if (a == 0) continue;
      for (std::uint64_t slot = 0; slot < a; ++slot) {
        // Fill the other slots with one pool tuple at a time.
        for (const Nat& partner : pool) {
          std::vector<Nat> args1(a, partner), args2(a, partner);
          args1[slot] = t1;
          args2[slot] = t2;
          Trit m1 = rel_status(r, args1);
          Trit m2 = rel_status(r, args2);
          if (m1 == Trit::Unknown || m2 == Trit::Unknown) {
            sawUnknown = true;
            continue;
          }
          if (m1 != m2) {
            return Outcome::fail(encode_pos_rel(Nat(r), args1),
                                 "equivalent tuples disagree on a relation");
          }
        }
      }
    }
  }
  if (sawUnknown) return Outcome::undecided("some samples did not resolve in budget");
  return Outcome::pass();
}

EffectiveInterpretation interp_identity_pure() {
  EffectiveInterpretation I;
  I.name = "identity-pure";
  I.dom_pos = literal_family("identity-dom", {Disjunct{{1}, 0, {}}});
  std::vector<Disjunct> neg;
  for (std::size_t k : {0u, 2u, 3u, 4u}) {
    neg.push_back(Disjunct{{k}, 0, {}});
  }
  I.dom_neg = literal_family("identity-dom-neg", std::move(neg));
  I.sim = equiv_code();
  I.target = pure_equality().signature();
  I.reference_map = [](const Nat& t) -> std::optional<Nat> {
    auto l = dec_tuple(t);
    if (l.size() != 1) return std::nullopt;
    return l[0];
  };
  return I;
}

EffectiveInterpretation interp_pair_intersection() {
  EffectiveInterpretation I;
  I.name = "pair-intersection";
  using T = Term;
  I.dom_pos = literal_family(
      "pairs", {Disjunct{{2}, 0, {lit_eq(T::v(0), T::v(1), false)}}});
  std::vector<Disjunct> neg;
  neg.push_back(Disjunct{{2}, 0, {lit_eq(T::v(0), T::v(1), true)}});
  for (std::size_t k : {0u, 1u, 3u, 4u}) {
    neg.push_back(Disjunct{{k}, 0, {}});
  }
  I.dom_neg = literal_family("pairs-neg", std::move(neg));
  I.sim = equiv_multiset();

  // Two pairs are adjacent when they share exactly one endpoint. Within the
  // domain both pairs have distinct endpoints, so pinning one matching
  // position and separating the other is enough.
  std::vector<Disjunct> pos;
  pos.push_back(Disjunct{{2, 2}, 0, {lit_eq(T::v(0), T::v(2)), lit_eq(T::v(1), T::v(3), false)}});
  pos.push_back(Disjunct{{2, 2}, 0, {lit_eq(T::v(0), T::v(3)), lit_eq(T::v(1), T::v(2), false)}});
  pos.push_back(Disjunct{{2, 2}, 0, {lit_eq(T::v(1), T::v(2)), lit_eq(T::v(0), T::v(3), false)}});
  pos.push_back(Disjunct{{2, 2}, 0, {lit_eq(T::v(1), T::v(3)), lit_eq(T::v(0), T::v(2), false)}});
  std::vector<Disjunct> negr;
  negr.push_back(Disjunct{{2, 2},
                          0,
                          {lit_eq(T::v(0), T::v(2), false), lit_eq(T::v(0), T::v(3), false),
                           lit_eq(T::v(1), T::v(2), false), lit_eq(T::v(1), T::v(3), false)}});
  negr.push_back(Disjunct{{2, 2}, 0, {lit_eq(T::v(0), T::v(2)), lit_eq(T::v(1), T::v(3))}});
  negr.push_back(Disjunct{{2, 2}, 0, {lit_eq(T::v(0), T::v(3)), lit_eq(T::v(1), T::v(2))}});
  I.rel_pos = {literal_family("meet", std::move(pos))};
  I.rel_neg = {literal_family("meet-neg", std::move(negr))};
  I.target = graph_signature();
  I.reference_map = [](const Nat& t) -> std::optional<Nat> {
    auto l = dec_tuple(t);
    if (l.size() != 2 || l[0] == l[1]) return std::nullopt;
    return triangular_vertex_of_pair(std::min(l[0], l[1]), std::max(l[0], l[1]));
  };
  return I;
}

}  // namespace stagecraft
