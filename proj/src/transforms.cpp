#include "stagecraft/transforms.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <utility>

#include "stagecraft/coding.hpp"

namespace stagecraft {

namespace {

using vm::Builder;
using vm::Reg;

// Claims a fresh register by touching it, so later fresh_reg calls move on.
Reg claim(Builder& b) {
  Reg r = b.fresh_reg();
  b.set(r, 0);
  return r;
}

// Query fact q against the chosen component of the run oracle. Left and
// Right address one diagram of a join through the residue layout.
void emit_query(Builder& b, QuerySide side, Reg q, Reg ans) {
  if (side == QuerySide::Direct) {
    b.qry(ans, q);
    return;
  }
  Reg t = claim(b);
  b.add(t, q, q);
  b.add(t, t, q);
  if (side == QuerySide::Right) {
    Reg two = claim(b);
    b.set(two, 2);
    b.add(t, t, two);
  }
  b.qry(ans, t);
}

// out = in with a flipped relation sign; equality and junk codes pass
// through unchanged, mirroring flip_rel_sign.
void emit_flip(Builder& b, Reg in, Reg out) {
  Reg tag = claim(b);
  Reg pay = claim(b);
  Reg k = claim(b);
  b.fst(tag, in);
  b.snd(pay, in);
  auto pos = b.make_label();
  auto neg = b.make_label();
  auto done = b.make_label();
  b.set(k, 2);
  b.jeq(tag, k, pos);
  b.set(k, 3);
  b.jeq(tag, k, neg);
  b.mov(out, in);
  b.jmp(done);
  b.bind(pos);
  b.set(k, 3);
  b.pair_op(out, k, pay);
  b.jmp(done);
  b.bind(neg);
  b.set(k, 2);
  b.pair_op(out, k, pay);
  b.bind(done);
}

}  // namespace

vm::Program stage_program(const OperatorStream& psi, QuerySide side,
                          std::uint64_t table_budget, std::string name) {
  Builder b(std::move(name));
  switch (psi.shape()) {
    case OperatorStream::Shape::Identity: {
      // Axiom i is ({i}, i): the stage of t is t+1 when t holds.
      Reg ans = claim(b);
      emit_query(b, side, 0, ans);
      auto miss = b.make_label();
      b.jz(ans, miss);
      Reg one = claim(b);
      b.set(one, 1);
      Reg out = claim(b);
      b.add(out, 0, one);
      b.halt(out);
      b.bind(miss);
      Reg z = claim(b);
      b.halt(z);
      return b.build();
    }
    case OperatorStream::Shape::Complement: {
      // Axiom i is ({i}, flip(i)); flip is an involution, so the one
      // candidate for t sits at index flip(t).
      Reg src = claim(b);
      emit_flip(b, 0, src);
      Reg ans = claim(b);
      emit_query(b, side, src, ans);
      auto miss = b.make_label();
      b.jz(ans, miss);
      Reg one = claim(b);
      b.set(one, 1);
      Reg out = claim(b);
      b.add(out, src, one);
      b.halt(out);
      b.bind(miss);
      Reg z = claim(b);
      b.halt(z);
      return b.build();
    }
    case OperatorStream::Shape::Finite:
    case OperatorStream::Shape::Synth:
      break;
  }

  // Table form: embed axioms as [n, inputs..., output] records and scan
  // them in order.
  std::uint64_t emitted = 0;
  for (std::uint64_t i = 0; i < table_budget; ++i) {
    auto ax = psi.axiom(Nat(i));
    if (!ax) break;
    b.push_data(Nat(ax->inputs.size()));
    for (const Nat& c : ax->inputs) b.push_data(c);
    b.push_data(ax->output);
    ++emitted;
  }
  std::optional<Nat> len = psi.length();
  bool complete = len.has_value() && *len <= Nat(emitted);

  Reg idx = claim(b);
  Reg dptr = claim(b);
  Reg one = claim(b);
  b.set(one, 1);
  Reg total = claim(b);
  b.set(total, Nat(emitted));
  Reg n = claim(b);
  Reg outpos = claim(b);
  Reg outv = claim(b);
  Reg k = claim(b);
  Reg cpos = claim(b);
  Reg cval = claim(b);
  Reg ans = claim(b);
  Reg st = claim(b);
  auto loop = b.make_label();
  auto check = b.make_label();
  auto advance = b.make_label();
  auto inner = b.make_label();
  auto fired = b.make_label();
  auto exhausted = b.make_label();
  b.bind(loop);
  b.jeq(idx, total, exhausted);
  b.ldd(n, dptr);
  b.add(outpos, dptr, n);
  b.add(outpos, outpos, one);
  b.ldd(outv, outpos);
  b.jeq(outv, 0, check);
  b.bind(advance);
  b.add(dptr, outpos, one);
  b.add(idx, idx, one);
  b.jmp(loop);
  b.bind(check);
  b.set(k, 0);
  b.bind(inner);
  b.jeq(k, n, fired);
  b.add(cpos, dptr, one);
  b.add(cpos, cpos, k);
  b.ldd(cval, cpos);
  emit_query(b, side, cval, ans);
  b.jz(ans, advance);
  b.add(k, k, one);
  b.jmp(inner);
  b.bind(fired);
  b.add(st, idx, one);
  b.halt(st);
  b.bind(exhausted);
  if (complete) {
    Reg z = claim(b);
    b.halt(z);
  } else {
    // Past a truncated table nothing can be denied; spin instead of lying,
    // so the run surfaces as out of budget.
    b.jmp(exhausted);
  }
  return b.build();
}

vm::Program universe_program(const OperatorStream& psi, QuerySide side,
                             std::uint64_t table_budget, std::string name) {
  vm::Program st = stage_program(psi, side, table_budget, name + ".stage");
  Builder b(std::move(name));
  Reg elem = claim(b);
  b.fst(elem, 0);
  Reg s = claim(b);
  b.snd(s, 0);
  Reg pp = claim(b);
  b.pair_op(pp, elem, elem);
  Reg z = claim(b);
  Reg code = claim(b);
  b.pair_op(code, z, pp);
  Reg got = claim(b);
  b.inline_program(st, code, got);
  auto no = b.make_label();
  auto yes = b.make_label();
  b.jz(got, no);
  b.jeq(got, s, yes);
  b.bind(no);
  Reg z2 = claim(b);
  b.halt(z2);
  b.bind(yes);
  Reg o = claim(b);
  b.set(o, 1);
  b.halt(o);
  return b.build();
}

namespace {

// Decider for the staged image diagram: a fact holds when its arguments
// are honestly staged elements and the pulled back fact is enumerated.
vm::Program phi_program(const FunctorBundle& f, std::uint64_t table_budget) {
  vm::Program stp =
      stage_program(*f.psi, QuerySide::Direct, table_budget, f.name + "'.stage");
  vm::Program uni =
      universe_program(*f.psi, QuerySide::Direct, table_budget, f.name + "'.elem");
  Builder b(f.name + "'.phi");
  Reg tag = claim(b);
  b.fst(tag, 0);
  Reg pay = claim(b);
  b.snd(pay, 0);
  Reg x = claim(b);
  b.fst(x, pay);
  Reg y = claim(b);
  b.snd(y, pay);
  Reg k = claim(b);
  Reg one = claim(b);
  b.set(one, 1);
  auto poseq = b.make_label();
  auto negeq = b.make_label();
  auto rels = b.make_label();
  auto no = b.make_label();
  auto yes = b.make_label();
  b.set(k, 0);
  b.jeq(tag, k, poseq);
  b.set(k, 1);
  b.jeq(tag, k, negeq);
  b.set(k, 2);
  b.jeq(tag, k, rels);
  b.set(k, 3);
  b.jeq(tag, k, rels);
  b.jmp(no);

  b.bind(poseq);
  {
    auto same = b.make_label();
    b.jeq(x, y, same);
    b.jmp(no);
    b.bind(same);
    Reg e = claim(b);
    b.inline_program(uni, x, e);
    b.jz(e, no);
    b.jmp(yes);
  }

  b.bind(negeq);
  {
    b.jeq(x, y, no);
    Reg e1 = claim(b);
    b.inline_program(uni, x, e1);
    b.jz(e1, no);
    Reg e2 = claim(b);
    b.inline_program(uni, y, e2);
    b.jz(e2, no);
    b.jmp(yes);
  }

  b.bind(rels);
  {
    std::uint64_t rc = f.target.relation_count();
    std::vector<Builder::Label> heads;
    heads.reserve(rc);
    for (std::uint64_t r = 0; r < rc; ++r) heads.push_back(b.make_label());
    for (std::uint64_t r = 0; r < rc; ++r) {
      b.set(k, Nat(r));
      b.jeq(x, k, heads[r]);
    }
    b.jmp(no);
    for (std::uint64_t r = 0; r < rc; ++r) {
      b.bind(heads[r]);
      std::uint64_t a = f.target.arity(Nat(r));
      Reg m = claim(b);
      b.mov(m, y);
      std::vector<Reg> us;
      for (std::uint64_t t = 0; t < a; ++t) {
        b.jz(m, no);
        b.sub(m, m, one);
        Reg u = claim(b);
        b.fst(u, m);
        b.snd(m, m);
        us.push_back(u);
      }
      auto len_ok = b.make_label();
      b.jz(m, len_ok);
      b.jmp(no);
      b.bind(len_ok);
      std::vector<Reg> backs;
      for (Reg u : us) {
        Reg e = claim(b);
        b.inline_program(uni, u, e);
        b.jz(e, no);
        Reg bb = claim(b);
        b.fst(bb, u);
        backs.push_back(bb);
      }
      Reg acc = claim(b);
      Reg tmp = claim(b);
      for (std::size_t i = backs.size(); i-- > 0;) {
        b.pair_op(tmp, backs[i], acc);
        b.add(acc, tmp, one);
      }
      Reg rr = claim(b);
      b.set(rr, Nat(r));
      Reg pp = claim(b);
      b.pair_op(pp, rr, acc);
      Reg cc = claim(b);
      b.pair_op(cc, tag, pp);
      Reg stv = claim(b);
      b.inline_program(stp, cc, stv);
      b.jz(stv, no);
      b.jmp(yes);
    }
  }

  b.bind(no);
  Reg zr = claim(b);
  b.halt(zr);
  b.bind(yes);
  Reg o = claim(b);
  b.set(o, 1);
  b.halt(o);
  return b.build();
}

// The original arrow program conjugated with the stage maps: unpack the
// staged element, map its core through the original arrow over the join,
// restage over the right diagram.
vm::Program arrow_program(const FunctorBundle& f, std::uint64_t table_budget) {
  vm::Program str = stage_program(*f.psi, QuerySide::Right, table_budget,
                                  f.name + "'.stage-right");
  Builder b(f.name + "'.arrow");
  Reg core = claim(b);
  b.fst(core, 0);
  Reg mapped = claim(b);
  b.inline_program(*f.phi_star, core, mapped);
  Reg pp = claim(b);
  b.pair_op(pp, mapped, mapped);
  Reg z = claim(b);
  Reg code = claim(b);
  b.pair_op(code, z, pp);
  Reg stv = claim(b);
  b.inline_program(str, code, stv);
  auto spin = b.make_label();
  b.jz(stv, spin);
  Reg out = claim(b);
  b.pair_op(out, mapped, stv);
  b.halt(out);
  b.bind(spin);
  b.jmp(spin);
  return b.build();
}

// x -> pair(x, stage of x=x), over the source diagram.
vm::Program lambda_program(const FunctorBundle& f, std::uint64_t table_budget) {
  vm::Program stp =
      stage_program(*f.psi, QuerySide::Direct, table_budget, f.name + ".stage");
  Builder b(f.name + ".stage-map");
  Reg pp = claim(b);
  b.pair_op(pp, 0, 0);
  Reg z = claim(b);
  Reg code = claim(b);
  b.pair_op(code, z, pp);
  Reg stv = claim(b);
  b.inline_program(stp, code, stv);
  auto spin = b.make_label();
  b.jz(stv, spin);
  Reg out = claim(b);
  b.pair_op(out, 0, stv);
  b.halt(out);
  b.bind(spin);
  b.jmp(spin);
  return b.build();
}

}  // namespace

ComputableUpgrade enum_to_computable(const FunctorBundle& f, const RunLimits& limits) {
  if (!f.psi) {
    throw InvalidInputError("functor '" + f.name + "' has no enumeration side to upgrade");
  }
  if (!f.target.is_finite()) {
    throw InvalidInputError("upgrading '" + f.name +
                            "' needs a finite target signature to dispatch relation facts");
  }
  ComputableUpgrade up;
  FunctorBundle g;
  g.name = f.name + "'";
  g.source = f.source;
  g.target = f.target;
  g.phi = phi_program(f, limits.axioms);
  if (f.phi_star) g.phi_star = arrow_program(f, limits.axioms);
  g.arrow_recipe = map_compose({map_stage_inv(f.name, "left"),
                                map_functor_arrow(f.name, map_ref("f"), "left", "right"),
                                map_stage(f.name, "right")});
  g.carried = {std::make_shared<const FunctorBundle>(f)};
  up.functor = std::move(g);
  up.lambda = lambda_program(f, limits.axioms);
  return up;
}

namespace {

// Mirrors the law scan in the functor checks: a counterexample is final,
// undecided points only downgrade a pass.
struct Scan {
  Outcome result = Outcome::pass();

  bool failed() const { return result.ok == Trit::No; }
  void undecided(std::string note) {
    if (result.ok == Trit::Yes) result = Outcome::undecided(std::move(note));
  }
  void fail(const Nat& w, std::string note) {
    result = Outcome::fail(w, std::move(note));
  }
};

Outcome worst(const Outcome& a, const Outcome& b) {
  if (a.ok == Trit::No) return a;
  if (b.ok == Trit::No) return b;
  if (a.ok == Trit::Unknown) return a;
  return b;
}

struct Embedding {
  Outcome defined = Outcome::pass();
  Outcome injective = Outcome::pass();
  Outcome literal = Outcome::pass();
};

std::function<Trit(const Nat&)> fact_fn(const ImageView& v) {
  return [v](const Nat& c) { return v.fact(c); };
}

std::function<Trit(const Nat&)> fact_fn(const Presentation& p) {
  return [p](const Nat& c) { return trit_of(p.diagram_member(c)); };
}

// Does m embed the listed elements into the target structure? Total on
// them, injective, and preserving every literal the source decides.
Embedding check_embedding(const std::vector<Nat>& elems,
                          const std::function<Trit(const Nat&)>& src, const Signature& sig,
                          const MapFn& m, const std::function<Trit(const Nat&)>& dst) {
  Embedding e;
  Scan def, inj, lit;
  std::vector<std::pair<Nat, Nat>> mapped;
  std::map<Nat, Nat> seen;
  if (elems.empty()) def.undecided("no source elements to map");
  for (const Nat& xv : elems) {
    MapResult r = m(xv);
    if (r.status == MapResult::Status::Unknown) {
      def.undecided("map undecided on element " + xv.str());
      continue;
    }
    if (r.status == MapResult::Status::OutsideDomain) {
      def.fail(xv, "map rejects source element " + xv.str());
      continue;
    }
    auto it = seen.find(r.value);
    if (it != seen.end()) {
      inj.fail(r.value, "elements " + it->second.str() + " and " + xv.str() +
                            " share an image");
      continue;
    }
    seen.emplace(r.value, xv);
    mapped.emplace_back(xv, r.value);
  }
  for (const auto& [xv, mx] : mapped) {
    (void)xv;
    Nat c = encode_pos_eq(mx, mx);
    Trit t = dst(c);
    if (t == Trit::No) {
      lit.fail(c, "image misses element " + mx.str());
      break;
    }
    if (t == Trit::Unknown) lit.undecided("image element " + mx.str() + " uncertified");
  }
  for (std::size_t i = 0; i < mapped.size() && !lit.failed(); ++i) {
    for (std::size_t j = i + 1; j < mapped.size(); ++j) {
      Nat c = encode_neg_eq(mapped[i].second, mapped[j].second);
      Trit t = dst(c);
      if (t == Trit::No) {
        lit.fail(c, "distinct sources collapse in the image");
        break;
      }
      if (t == Trit::Unknown) {
        lit.undecided("distinctness fact " + c.str() + " undecided");
      }
    }
  }
  if (sig.is_finite() && !mapped.empty()) {
    std::uint64_t rc = sig.relation_count();
    for (std::uint64_t r = 0; r < rc && !lit.failed(); ++r) {
      std::uint64_t a = sig.arity(Nat(r));
      if (a == 0) continue;
      std::vector<std::size_t> od(a, 0);
      const std::uint64_t cap = 4096;
      std::uint64_t visited = 0;
      bool more = true;
      while (more && visited < cap && !lit.failed()) {
        ++visited;
        std::vector<Nat> xs, ms;
        for (std::size_t p = 0; p < a; ++p) {
          xs.push_back(mapped[od[p]].first);
          ms.push_back(mapped[od[p]].second);
        }
        for (int sign = 0; sign < 2; ++sign) {
          Nat sc = sign ? encode_neg_rel(Nat(r), xs) : encode_pos_rel(Nat(r), xs);
          Trit stv = src(sc);
          if (stv == Trit::Unknown) {
            lit.undecided("source fact " + sc.str() + " undecided");
            continue;
          }
          if (stv == Trit::No) continue;
          Nat dc = sign ? encode_neg_rel(Nat(r), ms) : encode_pos_rel(Nat(r), ms);
          Trit dt = dst(dc);
          if (dt == Trit::No) {
            lit.fail(dc, "image denies a fact the source asserts");
            break;
          }
          if (dt == Trit::Unknown) lit.undecided("image fact " + dc.str() + " undecided");
        }
        std::size_t p = 0;
        for (; p < a; ++p) {
          if (++od[p] < mapped.size()) break;
          od[p] = 0;
        }
        if (p == a) more = false;
      }
      if (more && visited >= cap) {
        lit.undecided("relation " + std::to_string(r) + " sampled to the tuple cap");
      }
    }
  }
  e.defined = def.result;
  e.injective = inj.result;
  e.literal = lit.result;
  return e;
}

}  // namespace

UpgradeReport check_upgrade(const FunctorBundle& f, const ComputableUpgrade& up,
                            const Presentation& p, const Nat& prefix, const Nat& fact_bound,
                            const RunLimits& limits) {
  UpgradeReport rep;
  ImageView fa = functor_image(f, p, limits);
  ImageView fup = functor_image(up.functor, p, limits);
  Oracle dp = diagram_oracle(p);
  MapFn lam = bind_program(up.lambda, dp, limits);
  std::vector<Nat> elems = certified_universe(fa, prefix);
  Embedding emb = check_embedding(elems, fact_fn(fa), f.target, lam, fact_fn(fup));
  rep.lambda_injective = worst(emb.defined, emb.injective);
  rep.lambda_literal = emb.literal;

  // An element of the upgraded image is pair(b, s) with s the recomputed
  // least stage of b=b; anything else is junk the decider must reject.
  auto staged = [&](const Nat& u, Nat* back) -> Trit {
    auto [bb, ss] = unpair(u);
    StageResult s = mu_stage(*f.psi, dp, encode_pos_eq(bb, bb), limits);
    if (s.kind == StageResult::Kind::Unknown) return Trit::Unknown;
    if (s.kind == StageResult::Kind::Never) return Trit::No;
    if (back) *back = bb;
    return trit_of(s.stage == ss);
  };

  Scan dec, ex;
  std::uint64_t n = to_u64(fact_bound, "fact bound");
  for (std::uint64_t ci = 0; ci < n; ++ci) {
    Nat c(ci);
    Trit got = fup.fact(c);
    if (got == Trit::Unknown) {
      // A budget miss does not refute totality, so this stays inconclusive.
      dec.undecided("decider ran out of budget on code " + c.str());
      ex.undecided("code " + c.str() + " undecided");
      continue;
    }
    Trit expect = Trit::No;
    if (auto fct = decode_fact(c)) {
      switch (fct->kind) {
        case FactKind::PosEq:
          expect = fct->args[0] == fct->args[1] ? staged(fct->args[0], nullptr) : Trit::No;
          break;
        case FactKind::NegEq: {
          if (fct->args[0] == fct->args[1]) break;
          Trit l = staged(fct->args[0], nullptr);
          Trit r = staged(fct->args[1], nullptr);
          expect = (l == Trit::No || r == Trit::No)          ? Trit::No
                   : (l == Trit::Unknown || r == Trit::Unknown) ? Trit::Unknown
                                                                : Trit::Yes;
          break;
        }
        case FactKind::PosRel:
        case FactKind::NegRel: {
          if (!f.target.declares(fct->rel) ||
              f.target.arity(fct->rel) != fct->args.size()) {
            break;
          }
          std::vector<Nat> backs;
          Trit all = Trit::Yes;
          for (const Nat& a : fct->args) {
            Nat bb;
            Trit t = staged(a, &bb);
            if (t == Trit::No) {
              all = Trit::No;
              break;
            }
            if (t == Trit::Unknown) all = Trit::Unknown;
            backs.push_back(bb);
          }
          if (all != Trit::Yes) {
            expect = all;
            break;
          }
          Nat pulled = fct->kind == FactKind::PosRel ? encode_pos_rel(fct->rel, backs)
                                                     : encode_neg_rel(fct->rel, backs);
          expect = member_trit(*f.psi, dp, pulled, limits);
          break;
        }
      }
    }
    if (expect == Trit::Unknown) {
      ex.undecided("enumeration side unsettled at code " + c.str());
      continue;
    }
    if (got != expect && !ex.failed()) {
      ex.fail(c, "decider disagrees with the enumeration side at code " + c.str());
    }
  }
  rep.decides = dec.result;
  rep.exact = ex.result;
  return rep;
}

PseudoInverseReport check_pseudo_inverse(const BiTransformWitness& w, const Presentation& pa,
                                         const Presentation& pb, const Nat& prefix,
                                         const RunLimits& limits) {
  PseudoInverseReport rep;
  std::uint64_t bound = to_u64(prefix, "prefix");

  ImageView fa = functor_image(w.f, pa, limits);
  ImageView gfa = functor_image_over(w.g, fa.as_oracle(), limits);
  MapFn la = bind_program(w.lambda_a, diagram_oracle(pa), limits);
  std::vector<Nat> ea;
  for (std::uint64_t x = 0; x < bound; ++x) {
    if (pa.diagram_member(encode_pos_eq(Nat(x), Nat(x)))) ea.push_back(Nat(x));
  }
  Embedding ma = check_embedding(ea, fact_fn(pa), pa.signature(), la, fact_fn(gfa));
  rep.a_injective = worst(ma.defined, ma.injective);
  rep.a_literal = ma.literal;

  ImageView gb = functor_image(w.g, pb, limits);
  ImageView fgb = functor_image_over(w.f, gb.as_oracle(), limits);
  MapFn lb = bind_program(w.lambda_b, diagram_oracle(pb), limits);
  std::vector<Nat> eb;
  for (std::uint64_t x = 0; x < bound; ++x) {
    if (pb.diagram_member(encode_pos_eq(Nat(x), Nat(x)))) eb.push_back(Nat(x));
  }
  Embedding mb = check_embedding(eb, fact_fn(pb), pb.signature(), lb, fact_fn(fgb));
  rep.b_injective = worst(mb.defined, mb.injective);
  rep.b_literal = mb.literal;

  // Both witnesses describe the same square: mapping A into G(F(A)) and
  // then reading it back must agree with the B-side witness on F(A).
  MapFn lifted = functor_map_iso_over(w.f, diagram_oracle(pa), la, gfa.as_oracle(), limits);
  MapFn lb_on_fa = bind_program(w.lambda_b, fa.as_oracle(), limits);
  Scan agr;
  std::vector<Nat> us = certified_universe(fa, prefix);
  if (us.empty()) agr.undecided("no certified image elements below the prefix");
  for (const Nat& uv : us) {
    MapResult l = lifted(uv);
    MapResult r = lb_on_fa(uv);
    if (l.status == MapResult::Status::Unknown || r.status == MapResult::Status::Unknown) {
      agr.undecided("round trip undecided at " + uv.str());
      continue;
    }
    if (l.status != r.status || (l.is_value() && l.value != r.value)) {
      agr.fail(uv, "the two round trip witnesses disagree at " + uv.str());
      break;
    }
  }
  rep.agreement = agr.result;
  return rep;
}

BiTransformUpgrade bitransform_upgrade(const BiTransformWitness& w, const RunLimits& limits) {
  BiTransformUpgrade u;
  u.f_up = enum_to_computable(w.f, limits);
  u.g_up = enum_to_computable(w.g, limits);
  u.gamma_a =
      map_compose({map_vm(w.lambda_a.name, w.lambda_a, "A~"),
                   map_stage(w.g.name, "F(A~)"),
                   map_functor_arrow(u.g_up.functor.name, map_stage(w.f.name, "A~"),
                                     "F(A~)", "F'(A~)")});
  u.gamma_b =
      map_compose({map_vm(w.lambda_b.name, w.lambda_b, "B~"),
                   map_stage(w.f.name, "G(B~)"),
                   map_functor_arrow(u.f_up.functor.name, map_stage(w.g.name, "B~"),
                                     "G(B~)", "G'(B~)")});
  return u;
}

EvalContext bind_gamma_context(const BiTransformWitness& w, const BiTransformUpgrade& u,
                               char side, const Presentation& p, const RunLimits& limits) {
  EvalContext ctx;
  ctx.limits = limits;
  ctx.functors.emplace(w.f.name, bind_functor(w.f));
  ctx.functors.emplace(w.g.name, bind_functor(w.g));
  ctx.functors.emplace(u.f_up.functor.name, bind_functor(u.f_up.functor));
  ctx.functors.emplace(u.g_up.functor.name, bind_functor(u.g_up.functor));
  if (side == 'a') {
    ctx.oracles.emplace("A~", diagram_oracle(p));
    ctx.oracles.emplace("F(A~)", functor_image(w.f, p, limits).as_oracle());
    ctx.oracles.emplace("F'(A~)", functor_image(u.f_up.functor, p, limits).as_oracle());
  } else if (side == 'b') {
    ctx.oracles.emplace("B~", diagram_oracle(p));
    ctx.oracles.emplace("G(B~)", functor_image(w.g, p, limits).as_oracle());
    ctx.oracles.emplace("G'(B~)", functor_image(u.g_up.functor, p, limits).as_oracle());
  } else {
    throw InvalidInputError("gamma context side must be 'a' or 'b'");
  }
  return ctx;
}

Outcome check_bitransform_gammas(const BiTransformWitness& w, const BiTransformUpgrade& u,
                                 const Presentation& pa, const Presentation& pb,
                                 const Nat& prefix, const RunLimits& limits) {
  Scan scan;
  std::uint64_t bound = to_u64(prefix, "prefix");

  // One side of the upgrade: `inner` is staged first (F on side a), `outer`
  // wraps it (G on side a). The expected value is rebuilt from the witness
  // program and the stage searches, bypassing the emitted recipe.
  auto run_side = [&](char side, const Presentation& p, const FunctorBundle& inner,
                      const FunctorBundle& outer, const FunctorBundle& inner_up,
                      const FunctorBundle& outer_up, const MapRecipePtr& gamma,
                      const vm::Program& lam) {
    EvalContext ctx = bind_gamma_context(w, u, side, p, limits);
    MapFn gm = bind_map(gamma, ctx);
    ImageView mid = functor_image(inner, p, limits);
    ImageView mid_up = functor_image(inner_up, p, limits);
    ImageView out_up = functor_image_over(outer_up, mid_up.as_oracle(), limits);
    MapFn lamf = bind_program(lam, diagram_oracle(p), limits);
    Oracle dp = diagram_oracle(p);
    MapFn theta = [&inner, dp, &limits](const Nat& z) -> MapResult {
      StageResult s = mu_stage(*inner.psi, dp, encode_pos_eq(z, z), limits);
      switch (s.kind) {
        case StageResult::Kind::At:
          return MapResult::of(pair(z, s.stage));
        case StageResult::Kind::Never:
          return MapResult::outside(z);
        case StageResult::Kind::Unknown:
          break;
      }
      return MapResult::unknown(z);
    };
    MapFn lift =
        functor_map_iso_over(outer, mid.as_oracle(), theta, mid_up.as_oracle(), limits);
    std::map<Nat, Nat> seen;
    std::uint64_t checked = 0;
    for (std::uint64_t xi = 0; xi < bound && !scan.failed(); ++xi) {
      Nat x(xi);
      if (!p.diagram_member(encode_pos_eq(x, x))) continue;
      MapResult got = gm(x);
      if (got.status == MapResult::Status::Unknown) {
        scan.undecided("gamma undecided at " + x.str());
        continue;
      }
      if (got.status == MapResult::Status::OutsideDomain) {
        scan.fail(x, "gamma rejects source element " + x.str());
        break;
      }
      MapResult y = lamf(x);
      if (y.status == MapResult::Status::Unknown) {
        scan.undecided("witness undecided at " + x.str());
        continue;
      }
      if (y.status == MapResult::Status::OutsideDomain) {
        scan.fail(x, "witness rejects source element " + x.str());
        break;
      }
      MapResult y2 = lift(y.value);
      if (y2.status == MapResult::Status::Unknown) {
        scan.undecided("lifted stage map undecided at " + x.str());
        continue;
      }
      if (y2.status == MapResult::Status::OutsideDomain) {
        scan.fail(y.value, "lifted stage map rejects " + y.value.str());
        break;
      }
      StageResult s2 =
          mu_stage(*outer.psi, mid_up.as_oracle(), encode_pos_eq(y2.value, y2.value), limits);
      if (s2.kind != StageResult::Kind::At) {
        scan.undecided("outer stage of " + y2.value.str() + " unsettled");
        continue;
      }
      Nat expect = pair(y2.value, s2.stage);
      if (got.value != expect) {
        scan.fail(x, "gamma diverges from the recomputed composite at " + x.str());
        break;
      }
      Trit in = out_up.universe(got.value);
      if (in == Trit::No) {
        scan.fail(got.value, "gamma lands outside the upgraded image");
        break;
      }
      if (in == Trit::Unknown) {
        scan.undecided("membership of gamma(" + x.str() + ") uncertified");
      }
      auto it = seen.find(got.value);
      if (it != seen.end()) {
        scan.fail(got.value, "gamma collides on " + it->second.str() + " and " + x.str());
        break;
      }
      seen.emplace(got.value, x);
      ++checked;
    }
    if (checked == 0 && !scan.failed()) {
      scan.undecided(std::string("no source elements checked on side ") + side);
    }
  };

  run_side('a', pa, w.f, w.g, u.f_up.functor, u.g_up.functor, u.gamma_a, w.lambda_a);
  run_side('b', pb, w.g, w.f, u.g_up.functor, u.f_up.functor, u.gamma_b, w.lambda_b);
  return scan.result;
}

Outcome check_bitransform_square(const BiTransformWitness& w, const BiTransformUpgrade& u,
                                 const Presentation& pa, const Nat& prefix,
                                 const RunLimits& limits) {
  Scan scan;
  std::uint64_t bound = to_u64(prefix, "prefix");

  // Left leg: gamma_b read over B~ = F'(A~).
  ImageView vFa = functor_image(u.f_up.functor, pa, limits);
  ImageView vG = functor_image_over(w.g, vFa.as_oracle(), limits);
  ImageView vGp = functor_image_over(u.g_up.functor, vFa.as_oracle(), limits);
  EvalContext ctx;
  ctx.limits = limits;
  ctx.oracles.emplace("B~", vFa.as_oracle());
  ctx.oracles.emplace("G(B~)", vG.as_oracle());
  ctx.oracles.emplace("G'(B~)", vGp.as_oracle());
  ctx.functors.emplace(w.f.name, bind_functor(w.f));
  ctx.functors.emplace(w.g.name, bind_functor(w.g));
  ctx.functors.emplace(u.f_up.functor.name, bind_functor(u.f_up.functor));
  ctx.functors.emplace(u.g_up.functor.name, bind_functor(u.g_up.functor));
  MapFn lhs = bind_map(u.gamma_b, ctx);

  // Right leg: the upgraded f applied to gamma_a.
  EvalContext ctxa = bind_gamma_context(w, u, 'a', pa, limits);
  MapFn ga = bind_map(u.gamma_a, ctxa);
  MapFn rhs =
      functor_map_iso_over(u.f_up.functor, diagram_oracle(pa), ga, vGp.as_oracle(), limits);

  MapFn ulam = bind_program(u.f_up.lambda, diagram_oracle(pa), limits);
  std::uint64_t checked = 0;
  for (std::uint64_t xi = 0; xi < bound && !scan.failed(); ++xi) {
    Nat x(xi);
    if (!pa.diagram_member(encode_pos_eq(x, x))) continue;
    MapResult ux = ulam(x);
    if (ux.status == MapResult::Status::Unknown) {
      scan.undecided("staging undecided at " + x.str());
      continue;
    }
    if (ux.status == MapResult::Status::OutsideDomain) {
      scan.fail(x, "stage map rejects source element " + x.str());
      break;
    }
    MapResult l = lhs(ux.value);
    MapResult r = rhs(ux.value);
    if (l.status == MapResult::Status::Unknown || r.status == MapResult::Status::Unknown) {
      scan.undecided("square undecided at " + ux.value.str());
      continue;
    }
    if (l.status != r.status || (l.is_value() && l.value != r.value)) {
      scan.fail(ux.value, "square legs disagree at " + ux.value.str());
      break;
    }
    ++checked;
  }
  if (checked == 0 && !scan.failed()) scan.undecided("no staged elements reached");
  return scan.result;
}

namespace {

std::vector<Nat> flatten_comps(const std::vector<std::vector<Nat>>& comps) {
  std::vector<Nat> out;
  for (const auto& c : comps) out.insert(out.end(), c.begin(), c.end());
  return out;
}

// Instantiated literal set of one cell, or nothing when some literal can
// never hold anywhere or the instantiation is malformed.
std::optional<std::vector<Nat>> cell_alpha(const Disjunct& d, const std::vector<Nat>& free,
                                           const std::vector<Nat>& wit) {
  std::vector<Nat> alpha;
  try {
    for (const Literal& l : d.literals) {
      Fact f = instantiate_literal(l, free, wit);
      if (f.kind == FactKind::PosEq && f.args[0] != f.args[1]) return std::nullopt;
      if (f.kind == FactKind::NegEq && f.args[0] == f.args[1]) return std::nullopt;
      alpha.push_back(encode_fact(f));
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  std::sort(alpha.begin(), alpha.end());
  alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
  for (const Nat& c : alpha) {
    if (std::binary_search(alpha.begin(), alpha.end(), negate_fact(c))) return std::nullopt;
  }
  return alpha;
}

// The positive image diagram of an interpretation as an axiom stream.
// Domain certificates yield universe facts for class names, pairs of them
// yield distinctness facts, relation certificates yield relation facts.
//
// A blind band enumerates cells by the measure tuple+disjunct+witness, so
// the stream has honest finite stages. Synthesized interpretations bury
// disjunct indexes inside their domain tuples, pushing every real tuple far
// past any blind bound; queries for such facts are answered by a targeted
// band above the blind one, rebuilt per fact from the section hook. Both
// bands recompute each cell's certificate, so soundness never rests on the
// lookup route.
class InterpStream final : public OperatorStream {
 public:
  InterpStream(std::string name, std::shared_ptr<const EffectiveInterpretation> I,
               std::uint64_t cell_cap)
      : name_(std::move(name)), I_(std::move(I)), cap_(cell_cap) {}

  const std::string& name() const override { return name_; }

  std::optional<Axiom> axiom(const Nat& index) const override {
    if (index >= Nat(cap_)) return std::nullopt;
    std::size_t i = to_size(index, "axiom index");
    std::lock_guard<std::mutex> g(mu_);
    fill(i + 1);
    if (i < cells_.size()) return cells_[i];
    return std::nullopt;
  }

  bool visit_candidates(const Nat& target, const RunLimits& limits,
                        const std::function<bool(const Nat&, const Axiom&)>& visit)
      const override {
    std::vector<std::pair<Nat, Axiom>> hits;
    {
      std::lock_guard<std::mutex> g(mu_);
      std::size_t band = static_cast<std::size_t>(cap_);
      if (limits.axioms < band) band = static_cast<std::size_t>(limits.axioms);
      fill(band);
      for (std::size_t i = 0; i < cells_.size() && i < band; ++i) {
        if (cells_[i].output == target) hits.emplace_back(Nat(i), cells_[i]);
      }
    }
    bool closed = targeted(target, limits, hits);
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [i, ax] : hits) {
      if (!visit(i, ax)) return false;
    }
    return closed;
  }

 private:
  struct DomCell {
    Nat tuple;
    Nat klass;
    std::vector<Nat> alpha;
  };

  static constexpr std::uint64_t kRoundCap = 512;
  static constexpr std::uint64_t kWorkCap = 40000000;

  void fill(std::size_t want) const {
    if (want > cap_) want = static_cast<std::size_t>(cap_);
    while (!done_ && cells_.size() < want) {
      if (next_round_ > kRoundCap || work_ > kWorkCap) {
        done_ = true;
        break;
      }
      round(next_round_++);
    }
  }

  void emit(std::vector<Nat> alpha, Nat output) const {
    if (cells_.size() < cap_) {
      cells_.push_back(Axiom{std::move(alpha), std::move(output)});
    } else {
      done_ = true;
    }
  }

  void round(std::uint64_t t) const {
    std::vector<std::vector<Nat>> dec(t + 1);
    for (std::uint64_t c = 0; c <= t; ++c) dec[c] = dec_tuple(Nat(c));
    const Sigma1Family* dom = I_->dom_pos.get();
    if (dom) {
      std::vector<std::optional<Disjunct>> dd(t + 1);
      for (std::uint64_t j = 0; j <= t; ++j) dd[j] = dom->disjunct(Nat(j));
      for (std::uint64_t y = 0; y <= t; ++y) {
        const auto& ys = dec[y];
        for (std::uint64_t j = 0; y + j <= t; ++j) {
          ++work_;
          const auto& d = dd[j];
          if (!d || d->free_arity() != ys.size()) continue;
          std::uint64_t wc = t - y - j;
          if (dec[wc].size() != d->witness_arity) continue;
          auto alpha = cell_alpha(*d, ys, dec[wc]);
          if (!alpha) continue;
          Nat klass = class_code(I_->sim, Nat(y));
          dom_cells_.push_back(DomCell{Nat(y), klass, *alpha});
          emit(std::move(*alpha), encode_pos_eq(klass, klass));
        }
      }
    }
    // Distinctness between certified classes, by index-sum measure over the
    // cells found so far. A measure is spent only once all its cells exist,
    // so late discoveries are never skipped.
    while (neg_measure_ < dom_cells_.size()) {
      std::size_t m = static_cast<std::size_t>(neg_measure_);
      for (std::size_t i1 = 0; i1 <= m; ++i1) {
        std::size_t i2 = m - i1;
        if (i1 == i2) continue;
        ++work_;
        const DomCell& c1 = dom_cells_[i1];
        const DomCell& c2 = dom_cells_[i2];
        if (c1.klass == c2.klass) continue;
        if (I_->sim.same(c1.tuple, c2.tuple)) continue;
        std::vector<Nat> alpha;
        std::set_union(c1.alpha.begin(), c1.alpha.end(), c2.alpha.begin(), c2.alpha.end(),
                       std::back_inserter(alpha));
        bool clash = false;
        for (const Nat& c : alpha) {
          if (std::binary_search(alpha.begin(), alpha.end(), negate_fact(c))) {
            clash = true;
            break;
          }
        }
        if (clash) continue;
        emit(std::move(alpha), encode_neg_eq(c1.klass, c2.klass));
      }
      ++neg_measure_;
    }
    if (!I_->target.is_finite()) return;
    std::uint64_t rc = I_->target.relation_count();
    for (std::uint64_t r = 0; r < rc; ++r) {
      std::uint64_t ar = I_->target.arity(Nat(r));
      for (int sign = 0; sign < 2; ++sign) {
        const auto& fams = sign == 0 ? I_->rel_pos : I_->rel_neg;
        if (r >= fams.size() || !fams[r]) continue;
        const Sigma1Family& fam = *fams[r];
        std::vector<std::optional<Disjunct>> fd(t + 1);
        for (std::uint64_t j = 0; j <= t; ++j) fd[j] = fam.disjunct(Nat(j));
        for (std::uint64_t ys = 0; ys <= t; ++ys) {
          if (dec[ys].size() != ar) continue;
          std::vector<std::vector<Nat>> comps;
          comps.reserve(ar);
          for (const Nat& yc : dec[ys]) comps.push_back(dec_tuple(yc));
          for (std::uint64_t j = 0; ys + j <= t; ++j) {
            ++work_;
            const auto& d = fd[j];
            if (!d || !layout_matches(*d, comps)) continue;
            std::uint64_t wc = t - ys - j;
            if (dec[wc].size() != d->witness_arity) continue;
            auto alpha = cell_alpha(*d, flatten_comps(comps), dec[wc]);
            if (!alpha) continue;
            std::vector<Nat> named;
            named.reserve(ar);
            for (const Nat& yc : dec[ys]) named.push_back(class_code(I_->sim, yc));
            Nat out =
                sign == 0 ? encode_pos_rel(Nat(r), named) : encode_neg_rel(Nat(r), named);
            emit(std::move(*alpha), std::move(out));
          }
        }
      }
    }
  }

  // A handful of domain tuples carrying class h: h's own class enumeration
  // plus anything the section hook certifies into the class.
  std::vector<Nat> class_members(const Nat& h, const RunLimits& limits) const {
    std::set<Nat> ms;
    ms.insert(h);
    if (I_->sim.members_below) {
      for (const Nat& y : I_->sim.members_below(h, h)) ms.insert(y);
    }
    if (I_->section_candidates) {
      for (const Nat& coord : dec_tuple(h)) {
        for (const Nat& tc : I_->section_candidates(coord, limits)) {
          if (ms.size() >= 16) break;
          if (class_code(I_->sim, tc) == h) ms.insert(tc);
        }
        if (ms.size() >= 16) break;
      }
    }
    return std::vector<Nat>(ms.begin(), ms.end());
  }

  // Certified domain cells for one tuple code, via the family's own lookup.
  template <typename Sink>
  void dom_cells_for(const Nat& y, const RunLimits& limits, const Sink& sink) const {
    const Sigma1Family* dom = I_->dom_pos.get();
    if (!dom) return;
    std::vector<Nat> ys = dec_tuple(y);
    std::vector<std::vector<Nat>> comps{ys};
    std::vector<Nat> js;
    if (auto acc = dom->accepting_candidates(comps, limits)) {
      js = *acc;
    } else {
      Nat jb(256);
      if (auto len = dom->length(); len && *len < jb) jb = *len;
      for (Nat j = 0; j < jb; ++j) js.push_back(j);
    }
    std::uint64_t used = 0;
    for (const Nat& j : js) {
      if (used >= 8) break;
      auto d = dom->disjunct(j);
      if (!d || d->free_arity() != ys.size()) continue;
      if (d->witness_arity == 0) {
        if (auto alpha = cell_alpha(*d, ys, {})) {
          ++used;
          sink(j, Nat(0), std::move(*alpha));
        }
        continue;
      }
      std::uint64_t found = 0;
      for (std::uint64_t wv = 0; wv < 256 && found < 4; ++wv) {
        std::vector<Nat> ws = dec_tuple(Nat(wv));
        if (ws.size() != d->witness_arity) continue;
        if (auto alpha = cell_alpha(*d, ys, ws)) {
          ++found;
          ++used;
          sink(j, Nat(wv), std::move(*alpha));
        }
      }
    }
  }

  // Candidates for `target` whose domain tuples may sit past the blind
  // band, indexed deterministically above it from the cell coordinates.
  // Returns whether the combined visit provably covered every axiom with
  // that output.
  bool targeted(const Nat& target, const RunLimits& limits,
                std::vector<std::pair<Nat, Axiom>>& out) const {
    auto f = decode_fact(target);
    if (!f) return true;  // only well formed facts are ever emitted
    const Nat base = Nat(cap_);
    auto canonical = [&](const Nat& h) { return class_code(I_->sim, h) == h; };
    switch (f->kind) {
      case FactKind::PosEq: {
        if (f->args[0] != f->args[1]) return true;
        const Nat& h = f->args[0];
        if (!canonical(h)) return true;  // classes are named by least codes
        for (const Nat& y : class_members(h, limits)) {
          dom_cells_for(y, limits, [&](const Nat& j, const Nat& wv, std::vector<Nat> alpha) {
            out.emplace_back(base + enc_tuple({y, j, wv}),
                             Axiom{std::move(alpha), target});
          });
        }
        return false;
      }
      case FactKind::NegEq: {
        const Nat& h1 = f->args[0];
        const Nat& h2 = f->args[1];
        if (h1 == h2 || !canonical(h1) || !canonical(h2)) return true;
        if (I_->sim.same(h1, h2)) return true;
        struct Cell {
          Nat y, j, w;
          std::vector<Nat> alpha;
        };
        auto collect = [&](const Nat& h) {
          std::vector<Cell> cs;
          for (const Nat& y : class_members(h, limits)) {
            if (cs.size() >= 4) break;
            dom_cells_for(y, limits,
                          [&](const Nat& j, const Nat& wv, std::vector<Nat> alpha) {
                            if (cs.size() < 4) cs.push_back(Cell{y, j, wv, std::move(alpha)});
                          });
          }
          return cs;
        };
        auto cs1 = collect(h1);
        auto cs2 = collect(h2);
        for (const Cell& c1 : cs1) {
          for (const Cell& c2 : cs2) {
            std::vector<Nat> alpha;
            std::set_union(c1.alpha.begin(), c1.alpha.end(), c2.alpha.begin(),
                           c2.alpha.end(), std::back_inserter(alpha));
            bool clash = false;
            for (const Nat& c : alpha) {
              if (std::binary_search(alpha.begin(), alpha.end(), negate_fact(c))) {
                clash = true;
                break;
              }
            }
            if (clash) continue;
            out.emplace_back(base + enc_tuple({c1.y, c1.j, c1.w, c2.y, c2.j, c2.w}),
                             Axiom{std::move(alpha), target});
          }
        }
        return false;
      }
      case FactKind::PosRel:
      case FactKind::NegRel: {
        if (!I_->target.is_finite() || !I_->target.declares(f->rel)) return true;
        std::uint64_t ar = I_->target.arity(f->rel);
        if (f->args.size() != ar || ar == 0) return f->args.size() != ar;
        for (const Nat& h : f->args) {
          if (!canonical(h)) return true;
        }
        const auto& fams = f->kind == FactKind::PosRel ? I_->rel_pos : I_->rel_neg;
        std::uint64_t ri = to_u64(f->rel, "relation index");
        if (ri >= fams.size() || !fams[ri]) return true;
        const Sigma1Family& fam = *fams[ri];
        std::vector<std::vector<Nat>> choices;
        for (const Nat& h : f->args) {
          std::vector<Nat> ms = class_members(h, limits);
          if (ms.size() > 3) ms.resize(3);
          choices.push_back(std::move(ms));
        }
        std::vector<std::size_t> od(choices.size(), 0);
        std::uint64_t combos = 0;
        bool more = true;
        while (more && combos < 64) {
          ++combos;
          std::vector<Nat> picks;
          std::vector<std::vector<Nat>> comps;
          for (std::size_t p = 0; p < choices.size(); ++p) {
            picks.push_back(choices[p][od[p]]);
            comps.push_back(dec_tuple(choices[p][od[p]]));
          }
          std::vector<Nat> js;
          if (auto acc = fam.accepting_candidates(comps, limits)) {
            js = *acc;
          } else {
            Nat jb(256);
            if (auto len = fam.length(); len && *len < jb) jb = *len;
            for (Nat j = 0; j < jb; ++j) js.push_back(j);
          }
          std::uint64_t used = 0;
          for (const Nat& j : js) {
            if (used >= 16) break;
            auto d = fam.disjunct(j);
            if (!d || !layout_matches(*d, comps)) continue;
            if (d->witness_arity != 0) continue;  // witnessed cells stay blind
            auto alpha = cell_alpha(*d, flatten_comps(comps), {});
            if (!alpha) continue;
            ++used;
            std::vector<Nat> key = picks;
            key.push_back(j);
            out.emplace_back(base + enc_tuple(key), Axiom{std::move(*alpha), target});
          }
          std::size_t p = 0;
          for (; p < choices.size(); ++p) {
            if (++od[p] < choices[p].size()) break;
            od[p] = 0;
          }
          if (p == choices.size()) more = false;
        }
        return false;
      }
    }
    return false;
  }

  std::string name_;
  std::shared_ptr<const EffectiveInterpretation> I_;
  std::uint64_t cap_ = 0;

  mutable std::mutex mu_;
  mutable std::vector<Axiom> cells_;
  mutable std::vector<DomCell> dom_cells_;
  mutable std::uint64_t next_round_ = 0;
  mutable std::uint64_t neg_measure_ = 0;
  mutable std::uint64_t work_ = 0;
  mutable bool done_ = false;
};

}  // namespace

FunctorBundle interp_to_functor(std::shared_ptr<const EffectiveInterpretation> I,
                                Signature source, const RunLimits& limits) {
  if (!I) throw InvalidInputError("interpretation missing");
  if (!I->dom_pos) {
    throw InvalidInputError("interpretation '" + I->name + "' has no domain family");
  }
  if (!I->sim.same) {
    throw InvalidInputError("interpretation '" + I->name + "' has no equivalence relation");
  }
  FunctorBundle f;
  f.name = I->name + "-functor";
  f.source = std::move(source);
  f.target = I->target;
  f.psi = std::make_shared<InterpStream>(I->name + "-image", I, limits.axioms);
  f.arrow_recipe =
      map_compose({map_tuple_lift(I->name, map_ref("f")), map_class_code(I->name)});
  f.interp = std::move(I);
  return f;
}

Outcome check_class_map(const ComputableEquiv& sim, const Nat& bound) {
  if (!sim.same) return Outcome::fail(0, "equivalence has no decision function");
  std::uint64_t n = to_u64(bound, "bound");
  std::vector<Nat> names;
  names.reserve(n);
  for (std::uint64_t t = 0; t < n; ++t) {
    Nat nm = class_code(sim, Nat(t));
    if (nm > Nat(t)) {
      return Outcome::fail(Nat(t), "class name " + nm.str() + " exceeds its member");
    }
    if (!sim.same(nm, Nat(t))) {
      return Outcome::fail(Nat(t), "class name " + nm.str() + " is not equivalent to " +
                                       std::to_string(t));
    }
    names.push_back(std::move(nm));
  }
  for (std::uint64_t y = 0; y < n; ++y) {
    for (std::uint64_t z = 0; z < y; ++z) {
      bool agree = names[y] == names[z];
      bool same = sim.same(Nat(y), Nat(z));
      if (agree != same) {
        return Outcome::fail(enc_tuple({Nat(z), Nat(y)}),
                             same ? "equivalent codes get different names"
                                  : "inequivalent codes share a name");
      }
    }
  }
  return Outcome::pass();
}

Outcome check_class_idempotent(const ComputableEquiv& sim, const std::vector<Nat>& samples) {
  for (const Nat& t : samples) {
    Nat a = class_code(sim, t);
    Nat b = class_code(sim, a);
    if (a != b) {
      return Outcome::fail(t, "renaming " + t.str() + " moves twice: " + a.str() +
                                  " then " + b.str());
    }
  }
  return Outcome::pass();
}

namespace {

// One enumeration axiom, decoded: its literal set as constant facts, the
// distinct elements those facts mention, and the certified output.
struct AxiomCert {
  std::vector<Nat> alpha;
  std::vector<Nat> elems;
  Fact out;
};

// Snapshot of the axiom stream both synthesized families read. The first
// `scan` axioms are decoded eagerly so malformed ones get logged at
// transform time; later indexes extend on demand.
class CertSource {
 public:
  CertSource(StreamPtr psi, std::uint64_t scan) : psi_(std::move(psi)) {
    std::uint64_t bad = 0;
    for (std::uint64_t a = 0; a < scan; ++a) {
      auto ax = psi_->axiom(Nat(a));
      if (!ax) break;
      auto info = decode(*ax);
      if (!info) {
        ++bad;
        if (skipped_.size() < 20) {
          skipped_.push_back("axiom " + std::to_string(a) + " of " + psi_->name() +
                             " mentions a code that is no fact; skipped");
        }
      }
      memo_.emplace(Nat(a), std::move(info));
    }
    if (bad > skipped_.size()) {
      skipped_.push_back("and " + std::to_string(bad - skipped_.size()) +
                         " more axioms skipped the same way");
    }
  }

  std::optional<AxiomCert> info(const Nat& a) const {
    std::lock_guard<std::mutex> g(mu_);
    auto it = memo_.find(a);
    if (it != memo_.end()) return it->second;
    std::optional<AxiomCert> r;
    if (auto ax = psi_->axiom(a)) r = decode(*ax);
    memo_.emplace(a, r);
    return r;
  }

  const OperatorStream& stream() const { return *psi_; }
  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  static std::optional<AxiomCert> decode(const Axiom& ax) {
    AxiomCert c;
    std::set<Nat> es;
    for (const Nat& code : ax.inputs) {
      auto f = decode_fact(code);
      if (!f) return std::nullopt;
      for (const Nat& e : f->args) es.insert(e);
      c.alpha.push_back(code);
    }
    auto out = decode_fact(ax.output);
    if (!out) return std::nullopt;
    c.out = *out;
    c.elems.assign(es.begin(), es.end());
    return c;
  }

  StreamPtr psi_;
  mutable std::mutex mu_;
  mutable std::map<Nat, std::optional<AxiomCert>> memo_;
  std::vector<std::string> skipped_;
};

using CertPtr = std::shared_ptr<const CertSource>;

bool out_is_universe(const Fact& f) {
  return f.kind == FactKind::PosEq && f.args.size() == 2 && f.args[0] == f.args[1];
}

// The axiom's literal set restated with constant arguments.
std::vector<Literal> const_literals(const std::vector<Nat>& alpha) {
  std::vector<Literal> ls;
  for (const Nat& code : alpha) {
    Fact f = decode_fact_checked(code);
    std::vector<Term> ts;
    ts.reserve(f.args.size());
    for (const Nat& e : f.args) ts.push_back(Term::c(e));
    if (fact_is_eq(f.kind)) {
      ls.push_back(lit_eq(ts[0], ts[1], fact_is_positive(f.kind)));
    } else {
      ls.push_back(lit_rel(f.rel, std::move(ts), fact_is_positive(f.kind)));
    }
  }
  return ls;
}

// Domain of the synthesized interpretation. A tuple lists k slots holding
// (at m-addressed positions) the elements one certificate mentions, then
// the element it certifies, then (star form) the index of this very
// disjunct. Index enc([a, k, m]) reads: axiom a, slot count k, position
// word m in base k.
class SynthDomFamily final : public Sigma1Family {
 public:
  SynthDomFamily(std::string name, CertPtr src, bool star)
      : name_(std::move(name)), src_(std::move(src)), star_(star) {}

  const std::string& name() const override { return name_; }

  std::optional<Disjunct> disjunct(const Nat& j) const override {
    auto parts = dec_tuple(j);
    if (parts.size() != 3) return std::nullopt;
    const Nat& a = parts[0];
    const Nat& kn = parts[1];
    const Nat& mn = parts[2];
    if (kn < 1 || kn > Nat(64)) return std::nullopt;
    auto info = src_->info(a);
    if (!info || !out_is_universe(info->out)) return std::nullopt;
    std::uint64_t k = to_u64(kn, "slot count");
    std::size_t r = info->elems.size();
    Nat kpow = 1;
    for (std::size_t t = 0; t < r; ++t) kpow *= kn;
    if (mn >= kpow) return std::nullopt;
    Disjunct d;
    d.witness_arity = 0;
    d.literals = const_literals(info->alpha);
    Nat m = mn;
    for (std::size_t t = 0; t < r; ++t) {
      Nat digit = m % kn;
      m /= kn;
      d.literals.push_back(lit_eq(Term::v(to_size(digit, "slot")), Term::c(info->elems[t])));
    }
    d.literals.push_back(lit_eq(Term::v(k), Term::c(info->out.args[0])));
    if (star_) {
      d.literals.push_back(lit_eq(Term::v(k + 1), Term::c(j)));
      d.free_split = {k + 2};
    } else {
      d.free_split = {k + 1};
    }
    return d;
  }

  std::optional<std::vector<Nat>> accepting_candidates(
      const std::vector<std::vector<Nat>>& components, const RunLimits& limits)
      const override {
    std::vector<Nat> js;
    if (components.size() != 1) return js;
    const auto& y = components[0];
    std::size_t extra = star_ ? 2 : 1;
    if (y.size() < extra + 1) return js;
    if (star_) {
      // The last slot pins the disjunct index outright.
      js.push_back(y.back());
      return js;
    }
    std::uint64_t k = y.size() - 1;
    const Nat& i = y.back();
    src_->stream().visit_candidates(
        encode_pos_eq(i, i), limits, [&](const Nat& a, const Axiom&) {
          auto info = src_->info(a);
          if (!info || !out_is_universe(info->out) || info->out.args[0] != i) return true;
          // Place each mentioned element at the first slot holding it; if
          // any assignment works, this one does.
          Nat m = 0;
          Nat kp = 1;
          bool ok = true;
          for (const Nat& e : info->elems) {
            std::size_t pos = k;
            for (std::size_t p = 0; p < k; ++p) {
              if (y[p] == e) {
                pos = p;
                break;
              }
            }
            if (pos == k) {
              ok = false;
              break;
            }
            m += Nat(pos) * kp;
            kp *= Nat(k);
          }
          if (ok) js.push_back(enc_tuple({a, Nat(k), m}));
          return js.size() < 16;
        });
    std::sort(js.begin(), js.end());
    return js;
  }

 private:
  std::string name_;
  CertPtr src_;
  bool star_;
};

// Refutations for the star domain. Index enc([j, L, l]) covers length-L
// tuples whose last slot pins j: when j cuts no valid disjunct at that
// length, the pin alone refutes (l must be 0); when it does, literal l of
// that disjunct flips. Together these decide the domain over a total
// diagram.
class SynthDomNegFamily final : public Sigma1Family {
 public:
  SynthDomNegFamily(std::string name, std::shared_ptr<const SynthDomFamily> pos)
      : name_(std::move(name)), pos_(std::move(pos)) {}

  const std::string& name() const override { return name_; }

  std::optional<Disjunct> disjunct(const Nat& jn) const override {
    auto parts = dec_tuple(jn);
    if (parts.size() != 3) return std::nullopt;
    const Nat& j = parts[0];
    const Nat& ln = parts[1];
    const Nat& litn = parts[2];
    if (ln > Nat(80)) return std::nullopt;
    std::uint64_t len = to_u64(ln, "tuple length");
    auto pos = pos_->disjunct(j);
    bool fits = pos.has_value() && pos->free_arity() == len;
    if (!fits) {
      if (litn != 0) return std::nullopt;
      Disjunct d;
      d.free_split = {len};
      d.witness_arity = 0;
      if (len > 0) d.literals.push_back(lit_eq(Term::v(len - 1), Term::c(j)));
      return d;
    }
    if (litn >= Nat(pos->literals.size())) return std::nullopt;
    Disjunct d;
    d.free_split = {len};
    d.witness_arity = 0;
    Literal flipped = pos->literals[to_size(litn, "literal index")];
    flipped.positive = !flipped.positive;
    d.literals.push_back(std::move(flipped));
    d.literals.push_back(lit_eq(Term::v(len - 1), Term::c(j)));
    return d;
  }

  std::optional<std::vector<Nat>> accepting_candidates(
      const std::vector<std::vector<Nat>>& components, const RunLimits&) const override {
    std::vector<Nat> js;
    if (components.size() != 1) return js;
    const auto& y = components[0];
    if (y.empty()) {
      js.push_back(enc_tuple({Nat(0), Nat(0), Nat(0)}));
      return js;
    }
    Nat ln(y.size());
    const Nat& j = y.back();
    auto pos = pos_->disjunct(j);
    if (!pos || pos->free_arity() != y.size()) {
      js.push_back(enc_tuple({j, ln, Nat(0)}));
      return js;
    }
    for (std::size_t l = 0; l < pos->literals.size() && l < 64; ++l) {
      js.push_back(enc_tuple({j, ln, Nat(l)}));
    }
    return js;
  }

 private:
  std::string name_;
  std::shared_ptr<const SynthDomFamily> pos_;
};

// Relation families of the synthesized interpretation, one per relation
// and sign. Index enc([a, enc([k_1..k_p])]) reads: axiom a certifying the
// fact, component slot counts k_c. Each component pins its certified
// element at the reference position.
class SynthRelFamily final : public Sigma1Family {
 public:
  SynthRelFamily(std::string name, CertPtr src, Nat rel, std::uint64_t arity, bool positive,
                 bool star)
      : name_(std::move(name)),
        src_(std::move(src)),
        rel_(std::move(rel)),
        arity_(arity),
        positive_(positive),
        star_(star) {}

  const std::string& name() const override { return name_; }

  std::optional<Disjunct> disjunct(const Nat& j) const override {
    auto parts = dec_tuple(j);
    if (parts.size() != 2) return std::nullopt;
    const Nat& a = parts[0];
    auto ks = dec_tuple(parts[1]);
    if (ks.size() != arity_) return std::nullopt;
    auto info = src_->info(a);
    if (!info) return std::nullopt;
    FactKind want = positive_ ? FactKind::PosRel : FactKind::NegRel;
    if (info->out.kind != want || info->out.rel != rel_ ||
        info->out.args.size() != arity_) {
      return std::nullopt;
    }
    Disjunct d;
    d.witness_arity = 0;
    d.literals = const_literals(info->alpha);
    std::size_t extra = star_ ? 2 : 1;
    std::size_t off = 0;
    for (std::size_t c = 0; c < ks.size(); ++c) {
      if (ks[c] < 1 || ks[c] > Nat(64)) return std::nullopt;
      std::uint64_t kc = to_u64(ks[c], "slot count");
      d.literals.push_back(lit_eq(Term::v(off + kc), Term::c(info->out.args[c])));
      d.free_split.push_back(kc + extra);
      off += kc + extra;
    }
    return d;
  }

  std::optional<std::vector<Nat>> accepting_candidates(
      const std::vector<std::vector<Nat>>& components, const RunLimits& limits)
      const override {
    std::vector<Nat> js;
    if (components.size() != arity_) return js;
    std::size_t extra = star_ ? 2 : 1;
    std::vector<Nat> is;
    std::vector<Nat> ks;
    for (const auto& comp : components) {
      if (comp.size() < extra + 1) return js;
      ks.push_back(Nat(comp.size() - extra));
      is.push_back(comp[comp.size() - 1 - (star_ ? 1 : 0)]);
    }
    Nat target = positive_ ? encode_pos_rel(rel_, is) : encode_neg_rel(rel_, is);
    Nat kcode = enc_tuple(ks);
    src_->stream().visit_candidates(target, limits, [&](const Nat& a, const Axiom&) {
      auto info = src_->info(a);
      FactKind want = positive_ ? FactKind::PosRel : FactKind::NegRel;
      if (info && info->out.kind == want && info->out.rel == rel_ && info->out.args == is) {
        js.push_back(enc_tuple({a, kcode}));
      }
      return js.size() < 16;
    });
    std::sort(js.begin(), js.end());
    return js;
  }

 private:
  std::string name_;
  CertPtr src_;
  Nat rel_;
  std::uint64_t arity_;
  bool positive_;
  bool star_;
};

}  // namespace

InterpSynthesis functor_to_interp(const FunctorBundle& f, const RunLimits& limits) {
  if (!f.psi) {
    throw InvalidInputError("functor '" + f.name + "' has no enumeration side to rebuild");
  }
  if (!f.target.is_finite()) {
    throw InvalidInputError("rebuilding '" + f.name +
                            "' needs a finite target signature for relation families");
  }
  auto src = std::make_shared<const CertSource>(f.psi, limits.axioms);

  auto mk = [&](bool star) {
    auto I = std::make_shared<EffectiveInterpretation>();
    I->name = f.name + (star ? "-star" : "-plain");
    auto dom = std::make_shared<SynthDomFamily>(I->name + ".dom", src, star);
    I->dom_pos = dom;
    if (star) {
      I->dom_neg = std::make_shared<SynthDomNegFamily>(I->name + ".dom-neg", dom);
    } else {
      I->dom_neg = empty_family(I->name + ".dom-neg");
    }
    I->sim = star ? equiv_drop_last() : equiv_last_coord();
    std::uint64_t rc = f.target.relation_count();
    for (std::uint64_t r = 0; r < rc; ++r) {
      std::uint64_t ar = f.target.arity(Nat(r));
      I->rel_pos.push_back(std::make_shared<SynthRelFamily>(
          I->name + ".rel" + std::to_string(r), src, Nat(r), ar, true, star));
      I->rel_neg.push_back(std::make_shared<SynthRelFamily>(
          I->name + ".rel" + std::to_string(r) + "-neg", src, Nat(r), ar, false, star));
    }
    I->target = f.target;
    if (star) {
      I->lift_mask = [](const std::vector<Nat>& l) {
        std::vector<bool> m(l.size(), true);
        if (!l.empty()) m[l.size() - 1] = false;  // the disjunct index stays put
        return m;
      };
    }
    std::size_t ref_back = star ? 2 : 1;
    I->reference_map = [ref_back](const Nat& t) -> std::optional<Nat> {
      auto l = dec_tuple(t);
      if (l.size() < ref_back) return std::nullopt;
      return l[l.size() - ref_back];
    };
    I->section_candidates = [src, star](const Nat& b, const RunLimits& lim) {
      std::vector<Nat> out;
      src->stream().visit_candidates(
          encode_pos_eq(b, b), lim, [&](const Nat& a, const Axiom&) {
            auto info = src->info(a);
            if (!info || !out_is_universe(info->out) || info->out.args[0] != b) return true;
            std::size_t r = info->elems.size();
            std::uint64_t k = r == 0 ? 1 : r;
            Nat m = 0;
            Nat kp = 1;
            for (std::size_t t = 0; t < r; ++t) {
              m += Nat(t) * kp;
              kp *= Nat(k);
            }
            std::vector<Nat> tup = info->elems;
            if (r == 0) tup.push_back(0);
            tup.push_back(b);
            if (star) tup.push_back(enc_tuple({a, Nat(k), m}));
            out.push_back(enc_tuple(tup));
            return out.size() < 8;
          });
      return out;
    };
    return I;
  };

  InterpSynthesis out;
  out.sigma = mk(false);
  out.star = mk(true);
  out.skipped = src->skipped();
  return out;
}

Outcome crosscheck_star(const InterpSynthesis& s, const Presentation& p, const Nat& bound,
                        const RunLimits& limits) {
  if (!s.sigma || !s.star) return Outcome::fail(0, "synthesis incomplete");
  if (!s.star->section_candidates) return Outcome::fail(0, "star form lost its section hook");
  Scan scan;
  std::uint64_t n = to_u64(bound, "bound");
  std::uint64_t checked = 0;
  for (std::uint64_t b = 0; b < n && !scan.failed(); ++b) {
    std::vector<Nat> ts = s.star->section_candidates(Nat(b), limits);
    if (ts.empty()) continue;  // b never certified within the budget
    const Nat& t = ts.front();
    try {
      Trit st = dom_status(*s.star, p, t, limits.axioms);
      if (st == Trit::Unknown) {
        scan.undecided("star membership of " + t.str() + " undecided");
        continue;
      }
      if (st == Trit::No) {
        scan.fail(t, "star form refutes its own section tuple");
        continue;
      }
      std::vector<Nat> l = dec_tuple(t);
      if (l.size() < 2) {
        scan.fail(t, "section produced a malformed tuple");
        continue;
      }
      std::vector<Nat> head(l.begin(), l.end() - 1);
      Trit ss = dom_status(*s.sigma, p, enc_tuple(head), limits.axioms);
      if (ss == Trit::No) {
        scan.fail(t, "plain form refutes the certified tuple");
        continue;
      }
      if (ss == Trit::Unknown) {
        scan.undecided("plain membership behind " + t.str() + " undecided");
        continue;
      }
      std::vector<Nat> bent = l;
      bent.back() += 1;
      Trit pert = dom_status(*s.star, p, enc_tuple(bent), limits.axioms);
      if (pert == Trit::Unknown) {
        scan.undecided("perturbed index next to " + t.str() + " undecided");
      }
      ++checked;
    } catch (const IllFormedError& e) {
      scan.fail(t, e.what());
    }
  }
  if (checked == 0 && !scan.failed()) {
    scan.undecided("no section tuples certified below the bound");
  }
  return scan.result;
}

vm::Program prepend_computable(const vm::Program& x, const vm::Program& seq) {
  Builder b("prepend(" + x.name + "," + seq.name + ")");
  Reg row = claim(b);
  b.fst(row, 0);
  Reg xv = claim(b);
  b.snd(xv, 0);
  auto head = b.make_label();
  b.jz(row, head);
  Reg one = claim(b);
  b.set(one, 1);
  Reg rm = claim(b);
  b.sub(rm, row, one);
  Reg code = claim(b);
  b.pair_op(code, rm, xv);
  Reg o1 = claim(b);
  b.inline_program(seq, code, o1);
  b.halt(o1);
  b.bind(head);
  Reg o2 = claim(b);
  b.inline_program(x, xv, o2);
  b.halt(o2);
  return b.build();
}

RoundTripReport round_trip_report(const FunctorBundle& f, const Presentation& p,
                                  const Nat& prefix, const RunLimits& limits) {
  RoundTripReport rep;
  InterpSynthesis syn = functor_to_interp(f, limits);
  FunctorBundle rebuilt = interp_to_functor(syn.star, f.source, limits);

  ImageView vF = functor_image(f, p, limits);
  ImageView vI = functor_image(rebuilt, p, limits);

  EvalContext ctx;
  ctx.limits = limits;
  ctx.interps.emplace(syn.star->name, syn.star);
  ctx.presentations.emplace(p.name(), std::make_shared<Presentation>(p));
  MapRecipePtr zeta_xi = map_compose(
      {map_star_section(syn.star->name, p.name()), map_class_code(syn.star->name)});
  MapFn m = bind_map(zeta_xi, ctx);

  std::vector<Nat> elems = certified_universe(vF, prefix);
  Embedding em = check_embedding(elems, fact_fn(vF), f.target, m, fact_fn(vI));
  rep.map_defined = em.defined;
  rep.map_injective = em.injective;
  rep.literal_preserving = em.literal;

  // The identity isomorphism of p must commute with both arrow
  // realizations through the section-then-rename map.
  MapFn ident = [](const Nat& v) { return MapResult::of(v); };
  MapFn fm = functor_map_iso(f, p, ident, p, limits);
  MapFn im = functor_map_iso(rebuilt, p, ident, p, limits);
  Scan sq;
  std::uint64_t checked = 0;
  for (const Nat& u : elems) {
    MapResult fu = fm(u);
    if (!fu.is_value()) {
      if (fu.status == MapResult::Status::Unknown) {
        sq.undecided("arrow undecided at " + u.str());
        continue;
      }
      sq.fail(u, "arrow rejects image element " + u.str());
      break;
    }
    MapResult lhs = m(fu.value);
    MapResult mu = m(u);
    if (!lhs.is_value() || !mu.is_value()) {
      sq.undecided("section map undecided around " + u.str());
      continue;
    }
    MapResult rhs = im(mu.value);
    if (!rhs.is_value()) {
      if (rhs.status == MapResult::Status::Unknown) {
        sq.undecided("rebuilt arrow undecided at " + mu.value.str());
        continue;
      }
      sq.fail(mu.value, "rebuilt arrow rejects " + mu.value.str());
      break;
    }
    if (lhs.value != rhs.value) {
      sq.fail(u, "round trip square breaks at " + u.str());
      break;
    }
    ++checked;
  }
  if (checked == 0 && !sq.failed()) sq.undecided("no image elements below the prefix");
  rep.square_commutes = sq.result;
  return rep;
}

}  // namespace stagecraft
