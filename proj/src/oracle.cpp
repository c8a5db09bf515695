#include "stagecraft/oracle.hpp"

namespace stagecraft {

Oracle diagram_oracle(const Presentation& p) {
  Presentation copy = p;
  return Oracle("diagram:" + p.name(),
                [copy](const Nat& c) { return trit_of(copy.diagram_member(c)); });
}

Oracle finite_set_oracle(const std::set<Nat>& facts) {
  return Oracle("finite-set", [facts](const Nat& c) { return trit_of(facts.count(c) > 0); });
}

Oracle memoize_oracle(Oracle inner) {
  auto cache = std::make_shared<std::map<Nat, Trit>>();
  std::string label = inner.label();
  return Oracle(std::move(label), [inner, cache](const Nat& c) {
    auto it = cache->find(c);
    if (it != cache->end()) return it->second;
    Trit t = inner.query(c);
    cache->emplace(c, t);
    return t;
  });
}

Oracle join_part_oracle(Oracle join, JoinPart part) {
  std::string suffix = part == JoinPart::Left ? ":left" : part == JoinPart::Fun ? ":fun" : ":right";
  return Oracle(join.label() + suffix, [join, part](const Nat& c) {
    switch (part) {
      case JoinPart::Left:
        return join.query(join_left(c));
      case JoinPart::Fun:
        return join.query(join_fun(c));
      case JoinPart::Right:
        return join.query(join_right(c));
    }
    return Trit::No;
  });
}

Oracle join_oracle(Oracle left, std::function<MapResult(const Nat&)> apply, Oracle right,
                   std::string label) {
  return Oracle(std::move(label), [left, apply, right](const Nat& c) {
    JoinSlot slot = join_classify(c);
    switch (slot.part) {
      case JoinPart::Left:
        return left.query(slot.inner);
      case JoinPart::Right:
        return right.query(slot.inner);
      case JoinPart::Fun: {
        auto [x, y] = unpair(slot.inner);
        MapResult r = apply(x);
        if (r.status == MapResult::Status::Unknown) return Trit::Unknown;
        if (r.status == MapResult::Status::OutsideDomain) return Trit::No;
        return trit_of(r.value == y);
      }
    }
    return Trit::No;
  });
}

}  // namespace stagecraft
