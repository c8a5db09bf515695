#include "stagecraft/functors.hpp"

#include <map>

#include "stagecraft/coding.hpp"

namespace stagecraft {

struct ImageView::State {
  FunctorBundle bundle;
  RunLimits limits;
  Oracle base_oracle;
  std::string label;
  std::map<Nat, Trit> memo;

  Trit compute(const Nat& code) {
    if (bundle.phi) {
      vm::RunResult r = vm::run_program(*bundle.phi, base_oracle, code, limits.steps);
      switch (r.status) {
        case vm::RunResult::Status::Halted:
          return trit_of(r.output != 0);
        case vm::RunResult::Status::OutOfBudget:
        case vm::RunResult::Status::OracleUnknown:
          return Trit::Unknown;
        case vm::RunResult::Status::Error:
          throw Error("image decider of '" + bundle.name + "' failed on fact " +
                      code.str() + ": " + r.error);
      }
      return Trit::Unknown;
    }
    if (bundle.psi) return member_trit(*bundle.psi, base_oracle, code, limits);
    throw InvalidInputError("functor '" + bundle.name + "' has no image realization");
  }

  Trit fact(const Nat& code) {
    auto it = memo.find(code);
    if (it != memo.end()) return it->second;
    Trit t = compute(code);
    memo.emplace(code, t);
    if (t == Trit::Yes) {
      Nat n = negate_fact(code);
      auto other = memo.find(n);
      if (n != code && other != memo.end() && other->second == Trit::Yes) {
        throw IllFormedError("functor '" + bundle.name + "' asserts both signs of atom " +
                                 code.str() + " in " + label,
                             code);
      }
    }
    return t;
  }
};

ImageView::ImageView(FunctorBundle f, Oracle base, RunLimits limits)
    : s_(std::make_shared<State>()) {
  s_->bundle = std::move(f);
  s_->limits = limits;
  s_->label = s_->bundle.name + "(" + base.label() + ")";
  s_->base_oracle = std::move(base);
}

ImageView::ImageView(FunctorBundle f, const Presentation& p, RunLimits limits)
    : ImageView(std::move(f), diagram_oracle(p), limits) {}

Trit ImageView::fact(const Nat& code) const { return s_->fact(code); }

Trit ImageView::universe(const Nat& x) const { return fact(encode_pos_eq(x, x)); }

Oracle ImageView::as_oracle() const {
  auto s = s_;
  return Oracle(s_->label, [s](const Nat& c) { return s->fact(c); });
}

const std::string& ImageView::label() const { return s_->label; }

ImageView functor_image(const FunctorBundle& f, const Presentation& p,
                        const RunLimits& limits) {
  return ImageView(f, p, limits);
}

ImageView functor_image_over(const FunctorBundle& f, Oracle base, const RunLimits& limits) {
  return ImageView(f, std::move(base), limits);
}

std::vector<Nat> certified_universe(const ImageView& view, const Nat& bound) {
  std::vector<Nat> out;
  for (Nat x = 0; x < bound; ++x) {
    if (view.universe(x) == Trit::Yes) out.push_back(x);
  }
  return out;
}

MapFn functor_map_iso(const FunctorBundle& f, const Presentation& pa, MapFn iso,
                      const Presentation& pb, const RunLimits& limits) {
  return functor_map_iso_over(f, diagram_oracle(pa), std::move(iso), diagram_oracle(pb),
                              limits);
}

MapFn functor_map_iso_over(const FunctorBundle& f, Oracle left, MapFn iso, Oracle right,
                           const RunLimits& limits) {
  Oracle join = join_oracle(left, iso, right, "join(" + left.label() + "," +
                                                  right.label() + ")");
  if (f.arrow_recipe) {
    EvalContext ctx;
    ctx.limits = limits;
    ctx.maps["f"] = std::move(iso);
    ctx.oracles["join"] = join;
    ctx.oracles["left"] = std::move(left);
    ctx.oracles["right"] = std::move(right);
    if (f.interp) ctx.interps[f.interp->name] = f.interp;
    for (const auto& c : f.carried) {
      if (c) ctx.functors.emplace(c->name, bind_functor(*c));
    }
    ctx.functors.emplace(f.name, bind_functor(f));
    return bind_map(f.arrow_recipe, ctx);
  }
  if (f.phi_star) return bind_program(*f.phi_star, join, limits);
  throw InvalidInputError("functor '" + f.name + "' has no arrow realization");
}

namespace {

// Accumulates one law's verdict across samples. A hard counterexample is
// final; undecided points only downgrade a pass.
struct LawScan {
  Outcome result = Outcome::pass();

  bool failed() const { return result.ok == Trit::No; }
  void undecided(const Nat& w, std::string note) {
    if (result.ok != Trit::Yes) return;
    result.ok = Trit::Unknown;
    result.has_witness = true;
    result.witness = w;
    result.note = std::move(note);
  }
  void fail(const Nat& w, std::string note) { result = Outcome::fail(w, std::move(note)); }
};

MapFn compose_fns(MapFn first, MapFn second) {
  return [first, second](const Nat& x) {
    MapResult r = first(x);
    if (!r.is_value()) return r;
    return second(r.value);
  };
}

}  // namespace

LawReport check_functor_laws(const FunctorBundle& f,
                             const std::vector<Presentation>& presentations,
                             const std::vector<SampleIso>& isos, const Nat& prefix,
                             const RunLimits& limits,
                             const std::function<std::vector<Nat>(const Presentation&)>&
                                 sample_elements) {
  // Image elements of staged functors are pair codes far above any usable
  // prefix, so a caller can hand in the elements to exercise instead of the
  // blind scan. Either way a presentation contributing no checked element
  // leaves the law undecided rather than vacuously passed.
  auto elements_of = [&](const Presentation& p) {
    std::vector<Nat> out;
    if (sample_elements) return sample_elements(p);
    for (Nat x = 0; x < prefix; ++x) out.push_back(x);
    return out;
  };

  std::map<std::string, const Presentation*> by_name;
  for (const Presentation& p : presentations) by_name[p.name()] = &p;
  auto named = [&](const std::string& n) -> const Presentation& {
    auto it = by_name.find(n);
    if (it == by_name.end()) {
      throw InvalidInputError("law check references unknown presentation '" + n + "'");
    }
    return *it->second;
  };

  MapFn ident = [](const Nat& x) { return MapResult::of(x); };

  LawScan id_scan;
  for (const Presentation& p : presentations) {
    if (id_scan.failed()) break;
    ImageView view = functor_image(f, p, limits);
    MapFn arrow = functor_map_iso(f, p, ident, p, limits);
    std::uint64_t checked = 0;
    for (const Nat& x : elements_of(p)) {
      // The law quantifies over certified image elements; a code the budget
      // cannot certify is simply not one of them.
      if (view.universe(x) != Trit::Yes) continue;
      MapResult r = arrow(x);
      if (r.status == MapResult::Status::Unknown) {
        id_scan.undecided(x, "image of identity undecided at " + x.str() + " on " +
                                 view.label());
        continue;
      }
      if (!r.is_value() || r.value != x) {
        id_scan.fail(x, "image of the identity moves " + x.str() + " on " + view.label());
        break;
      }
      ++checked;
    }
    if (checked == 0 && !id_scan.failed()) {
      id_scan.undecided(0, "no certified image element of " + view.label() + " checked");
    }
  }

  LawScan comp_scan;
  for (const SampleIso& g : isos) {
    if (comp_scan.failed()) break;
    for (const SampleIso& h : isos) {
      // checking F(h.g) = F(h).F(g) for g: A -> B, h: B -> C
      if (g.dst != h.src) continue;
      if (comp_scan.failed()) break;
      const Presentation& pa = named(g.src);
      const Presentation& pb = named(g.dst);
      const Presentation& pc = named(h.dst);
      MapFn fg = functor_map_iso(f, pa, g.fn, pb, limits);
      MapFn fh = functor_map_iso(f, pb, h.fn, pc, limits);
      MapFn fhg = functor_map_iso(f, pa, compose_fns(g.fn, h.fn), pc, limits);
      MapFn rhs = compose_fns(fg, fh);
      ImageView view = functor_image(f, pa, limits);
      std::string tag = h.name + "." + g.name;
      std::uint64_t checked = 0;
      for (const Nat& x : elements_of(pa)) {
        if (view.universe(x) != Trit::Yes) continue;
        MapResult l = fhg(x);
        MapResult r = rhs(x);
        if (l.status == MapResult::Status::Unknown ||
            r.status == MapResult::Status::Unknown) {
          comp_scan.undecided(x, "composition image undecided at " + x.str() + " for " + tag);
          continue;
        }
        bool same = (l.status == r.status) && (!l.is_value() || l.value == r.value);
        if (!same) {
          comp_scan.fail(x, "composition law breaks at " + x.str() + " for " + tag);
          break;
        }
        ++checked;
      }
      if (checked == 0 && !comp_scan.failed()) {
        comp_scan.undecided(0, "no certified image element checked for " + tag);
      }
    }
  }

  return LawReport{id_scan.result, comp_scan.result};
}

Outcome check_substructure_preservation(const FunctorBundle& f, const FiniteDiagram& d1,
                                        const FiniteDiagram& d2, const Nat& stage) {
  if (!f.psi) {
    throw InvalidInputError("functor '" + f.name +
                            "' has no enumeration side to check monotonicity on");
  }
  for (const Nat& c : d1.facts) {
    if (!d2.contains(c)) {
      throw InvalidInputError("first diagram is not contained in the second, fact " +
                              c.str());
    }
  }
  std::set<Nat> small = enum_apply_stage(*f.psi, d1.facts, stage);
  std::set<Nat> big = enum_apply_stage(*f.psi, d2.facts, stage);
  for (const Nat& c : small) {
    if (!big.count(c)) {
      return Outcome::fail(c, "fires from the substructure but not the superstructure");
    }
  }
  return Outcome::pass();
}

BoundFunctor bind_functor(const FunctorBundle& f) {
  BoundFunctor b{f.name, f.psi, f.phi, f.phi_star, f.arrow_recipe, f.interp, {}};
  for (const auto& c : f.carried) {
    if (c) b.carried.push_back(bind_functor(*c));
  }
  return b;
}

}  // namespace stagecraft
