#include "stagecraft/maps.hpp"

#include <algorithm>
#include <sstream>

#include "stagecraft/coding.hpp"

namespace stagecraft {

namespace {

std::shared_ptr<MapNode> node(MapNode::Kind k) {
  auto n = std::make_shared<MapNode>();
  n->kind = k;
  return n;
}

}  // namespace

MapRecipePtr map_identity() { return node(MapNode::Kind::Identity); }

MapRecipePtr map_vm(std::string name, vm::Program prog, std::string oracle) {
  auto n = node(MapNode::Kind::Vm);
  n->name = std::move(name);
  n->prog = std::move(prog);
  n->oracle = std::move(oracle);
  return n;
}

MapRecipePtr map_ref(std::string name) {
  auto n = node(MapNode::Kind::Ref);
  n->name = std::move(name);
  return n;
}

MapRecipePtr map_compose(std::vector<MapRecipePtr> children) {
  auto n = node(MapNode::Kind::Compose);
  n->children = std::move(children);
  return n;
}

MapRecipePtr map_stage(std::string functor, std::string side) {
  auto n = node(MapNode::Kind::Stage);
  n->functor = std::move(functor);
  n->side = std::move(side);
  return n;
}

MapRecipePtr map_stage_inv(std::string functor, std::string side) {
  auto n = node(MapNode::Kind::StageInv);
  n->functor = std::move(functor);
  n->side = std::move(side);
  return n;
}

MapRecipePtr map_functor_arrow(std::string functor, MapRecipePtr inner, std::string left,
                               std::string right) {
  auto n = node(MapNode::Kind::FunctorArrow);
  n->functor = std::move(functor);
  n->inner = std::move(inner);
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

MapRecipePtr map_tuple_lift(std::string interp, MapRecipePtr inner) {
  auto n = node(MapNode::Kind::TupleLift);
  n->interp = std::move(interp);
  n->inner = std::move(inner);
  return n;
}

MapRecipePtr map_class_code(std::string interp) {
  auto n = node(MapNode::Kind::ClassCode);
  n->interp = std::move(interp);
  return n;
}

MapRecipePtr map_star_section(std::string interp, std::string side) {
  auto n = node(MapNode::Kind::StarSection);
  n->interp = std::move(interp);
  n->side = std::move(side);
  return n;
}

namespace {

template <typename M>
const typename M::mapped_type& lookup(const M& m, const std::string& key, const char* what) {
  auto it = m.find(key);
  if (it == m.end()) {
    throw InvalidInputError(std::string("recipe references unbound ") + what + " '" + key +
                            "'");
  }
  return it->second;
}

MapResult run_as_map(const vm::Program& prog, const Oracle& oracle, const Nat& input,
                     const RunLimits& limits) {
  vm::RunResult r = vm::run_program(prog, oracle, input, limits.steps);
  switch (r.status) {
    case vm::RunResult::Status::Halted:
      return MapResult::of(r.output);
    case vm::RunResult::Status::OracleUnknown:
      return MapResult::unknown(r.unknown_code);
    case vm::RunResult::Status::OutOfBudget:
      return MapResult::unknown(input);
    case vm::RunResult::Status::Error:
      throw Error("program '" + prog.name + "' failed on input " + input.str() + ": " +
                  r.error);
  }
  return MapResult::unknown(input);
}

MapResult stage_of(const BoundFunctor& f, const Oracle& side, const Nat& x,
                   const RunLimits& limits) {
  if (!f.psi) {
    throw InvalidInputError("functor '" + f.name +
                            "' has no enumeration side for a stage map");
  }
  StageResult s = mu_stage(*f.psi, side, encode_pos_eq(x, x), limits);
  switch (s.kind) {
    case StageResult::Kind::At:
      return MapResult::of(s.stage);
    case StageResult::Kind::Never:
      return MapResult::outside(x);
    case StageResult::Kind::Unknown:
      return MapResult::unknown(x);
  }
  return MapResult::unknown(x);
}

}  // namespace

MapResult eval_map(const MapNode& m, const EvalContext& ctx, const Nat& input) {
  switch (m.kind) {
    case MapNode::Kind::Identity:
      return MapResult::of(input);
    case MapNode::Kind::Vm:
      return run_as_map(m.prog, lookup(ctx.oracles, m.oracle, "oracle"), input, ctx.limits);
    case MapNode::Kind::Ref:
      return lookup(ctx.maps, m.name, "map")(input);
    case MapNode::Kind::Compose: {
      MapResult cur = MapResult::of(input);
      for (const MapRecipePtr& c : m.children) {
        if (!cur.is_value()) return cur;
        cur = eval_map(*c, ctx, cur.value);
      }
      return cur;
    }
    case MapNode::Kind::Stage: {
      const BoundFunctor& f = lookup(ctx.functors, m.functor, "functor");
      MapResult s = stage_of(f, lookup(ctx.oracles, m.side, "oracle"), input, ctx.limits);
      if (!s.is_value()) return s;
      return MapResult::of(pair(input, s.value));
    }
    case MapNode::Kind::StageInv: {
      const BoundFunctor& f = lookup(ctx.functors, m.functor, "functor");
      auto [b, s] = unpair(input);
      MapResult expect = stage_of(f, lookup(ctx.oracles, m.side, "oracle"), b, ctx.limits);
      if (expect.status == MapResult::Status::Unknown) return expect;
      if (expect.status == MapResult::Status::OutsideDomain || expect.value != s) {
        return MapResult::outside(input);
      }
      return MapResult::of(b);
    }
    case MapNode::Kind::FunctorArrow: {
      const BoundFunctor& f = lookup(ctx.functors, m.functor, "functor");
      MapFn innerFn = bind_map(m.inner, ctx);
      Oracle join = join_oracle(lookup(ctx.oracles, m.left, "oracle"), innerFn,
                                lookup(ctx.oracles, m.right, "oracle"),
                                "join(" + m.left + "," + m.right + ")");
      if (f.arrow_recipe) {
        EvalContext child = ctx;
        child.maps["f"] = innerFn;
        child.oracles["join"] = join;
        child.oracles["left"] = join_part_oracle(join, JoinPart::Left);
        child.oracles["right"] = join_part_oracle(join, JoinPart::Right);
        if (f.interp) child.interps[f.interp->name] = f.interp;
        for (const BoundFunctor& c : f.carried) child.functors.emplace(c.name, c);
        child.functors.emplace(f.name, f);
        return eval_map(*f.arrow_recipe, child, input);
      }
      if (f.phi_star) return run_as_map(*f.phi_star, join, input, ctx.limits);
      throw InvalidInputError("functor '" + f.name + "' carries no arrow realization");
    }
    case MapNode::Kind::TupleLift: {
      const auto& I = lookup(ctx.interps, m.interp, "interpretation");
      MapFn innerFn = bind_map(m.inner, ctx);
      std::vector<Nat> l = dec_tuple(input);
      std::vector<bool> mask(l.size(), true);
      if (I->lift_mask) mask = I->lift_mask(l);
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (i < mask.size() && !mask[i]) continue;
        MapResult r = innerFn(l[i]);
        if (!r.is_value()) return r;
        l[i] = r.value;
      }
      return MapResult::of(enc_tuple(l));
    }
    case MapNode::Kind::ClassCode: {
      const auto& I = lookup(ctx.interps, m.interp, "interpretation");
      return MapResult::of(class_code(I->sim, input));
    }
    case MapNode::Kind::StarSection: {
      const auto& I = lookup(ctx.interps, m.interp, "interpretation");
      const auto& p = lookup(ctx.presentations, m.side, "presentation");
      if (!I->section_candidates) {
        throw InvalidInputError("interpretation '" + I->name +
                                "' provides no section into its domain");
      }
      std::vector<Nat> cands = I->section_candidates(input, ctx.limits);
      for (const Nat& t : cands) {
        Trit st = dom_status(*I, *p, t, ctx.limits.axioms);
        if (st == Trit::Yes) return MapResult::of(t);
        if (st == Trit::Unknown) return MapResult::unknown(t);
      }
      return MapResult::outside(input);
    }
  }
  return MapResult::unknown(input);
}

MapFn bind_map(MapRecipePtr m, EvalContext ctx) {
  return [m, ctx](const Nat& x) { return eval_map(*m, ctx, x); };
}

MapFn bind_program(vm::Program prog, Oracle oracle, RunLimits limits) {
  return [prog, oracle, limits](const Nat& x) { return run_as_map(prog, oracle, x, limits); };
}

namespace {

void render(const MapNode& m, std::ostream& out) {
  switch (m.kind) {
    case MapNode::Kind::Identity:
      out << "identity";
      return;
    case MapNode::Kind::Vm:
      out << "vm(" << m.name << "," << m.oracle << ")";
      return;
    case MapNode::Kind::Ref:
      out << "ref(" << m.name << ")";
      return;
    case MapNode::Kind::Compose: {
      out << "compose(";
      for (std::size_t i = 0; i < m.children.size(); ++i) {
        if (i) out << ",";
        render(*m.children[i], out);
      }
      out << ")";
      return;
    }
    case MapNode::Kind::Stage:
      out << "stage(" << m.functor << "," << m.side << ")";
      return;
    case MapNode::Kind::StageInv:
      out << "stageinv(" << m.functor << "," << m.side << ")";
      return;
    case MapNode::Kind::FunctorArrow:
      out << "arrow(" << m.functor << ",";
      render(*m.inner, out);
      out << "," << m.left << "," << m.right << ")";
      return;
    case MapNode::Kind::TupleLift:
      out << "lift(" << m.interp << ",";
      render(*m.inner, out);
      out << ")";
      return;
    case MapNode::Kind::ClassCode:
      out << "classcode(" << m.interp << ")";
      return;
    case MapNode::Kind::StarSection:
      out << "section(" << m.interp << "," << m.side << ")";
      return;
  }
}

struct Parser {
  const std::string& s;
  std::size_t pos = 0;
  const std::map<std::string, vm::Program>& programs;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) {
      throw ParseError("expected '" + std::string(1, c) + "' at offset " +
                       std::to_string(pos) + " in recipe '" + s + "'");
    }
  }
  std::string word() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '-' ||
            s[pos] == '_' || s[pos] == '.' || s[pos] == '~' || s[pos] == '\'')) {
      ++pos;
    }
    if (start == pos) {
      throw ParseError("expected a name at offset " + std::to_string(pos) + " in recipe '" +
                       s + "'");
    }
    return s.substr(start, pos - start);
  }

  MapRecipePtr expr() {
    std::string head = word();
    if (head == "identity") return map_identity();
    expect('(');
    MapRecipePtr result;
    if (head == "vm") {
      std::string prog = word();
      expect(',');
      std::string oracle = word();
      auto it = programs.find(prog);
      if (it == programs.end()) {
        throw ParseError("recipe names unknown program '" + prog + "'");
      }
      result = map_vm(prog, it->second, oracle);
    } else if (head == "ref") {
      result = map_ref(word());
    } else if (head == "compose") {
      std::vector<MapRecipePtr> kids;
      kids.push_back(expr());
      while (eat(',')) kids.push_back(expr());
      result = map_compose(std::move(kids));
    } else if (head == "stage" || head == "stageinv") {
      std::string f = word();
      expect(',');
      std::string side = word();
      result = head == "stage" ? map_stage(f, side) : map_stage_inv(f, side);
    } else if (head == "arrow") {
      std::string f = word();
      expect(',');
      MapRecipePtr inner = expr();
      expect(',');
      std::string left = word();
      expect(',');
      std::string right = word();
      result = map_functor_arrow(f, inner, left, right);
    } else if (head == "lift") {
      std::string ip = word();
      expect(',');
      MapRecipePtr inner = expr();
      result = map_tuple_lift(ip, inner);
    } else if (head == "classcode") {
      result = map_class_code(word());
    } else if (head == "section") {
      std::string ip = word();
      expect(',');
      std::string side = word();
      result = map_star_section(ip, side);
    } else {
      throw ParseError("unknown recipe head '" + head + "'");
    }
    expect(')');
    return result;
  }
};

}  // namespace

std::string serialize_recipe(const MapNode& m) {
  std::ostringstream out;
  render(m, out);
  return out.str();
}

MapRecipePtr parse_recipe(const std::string& text,
                          const std::map<std::string, vm::Program>& programs) {
  Parser p{text, 0, programs};
  MapRecipePtr r = p.expr();
  p.skip_ws();
  if (p.pos != text.size()) {
    throw ParseError("trailing characters after recipe '" + text + "'");
  }
  return r;
}

}  // namespace stagecraft
