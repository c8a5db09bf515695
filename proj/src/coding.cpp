#include "stagecraft/coding.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace stagecraft {

Nat pair(const Nat& a, const Nat& b) {
  Nat s = a + b;
  return s * (s + 1) / 2 + b;
}

std::pair<Nat, Nat> unpair(const Nat& n) {
  // w is the diagonal index: largest w with w(w+1)/2 <= n.
  Nat w = (boost::multiprecision::sqrt(Nat(8) * n + 1) - 1) / 2;
  Nat t = w * (w + 1) / 2;
  // sqrt is exact floor but guard the boundary anyway.
  while (t > n) {
    --w;
    t = w * (w + 1) / 2;
  }
  while (n - t > w) {
    ++w;
    t = w * (w + 1) / 2;
  }
  Nat b = n - t;
  Nat a = w - b;
  return {a, b};
}

Nat enc_tuple(const std::vector<Nat>& xs) {
  Nat acc = 0;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) {
    acc = pair(*it, acc) + 1;
  }
  return acc;
}

std::vector<Nat> dec_tuple(const Nat& n) {
  std::vector<Nat> out;
  Nat cur = n;
  while (cur != 0) {
    auto [x, rest] = unpair(cur - 1);
    out.push_back(x);
    cur = rest;
  }
  return out;
}

bool fact_is_eq(FactKind k) { return k == FactKind::PosEq || k == FactKind::NegEq; }

bool fact_is_positive(FactKind k) { return k == FactKind::PosEq || k == FactKind::PosRel; }

static Nat tag_of(FactKind k) {
  switch (k) {
    case FactKind::PosEq: return 0;
    case FactKind::NegEq: return 1;
    case FactKind::PosRel: return 2;
    case FactKind::NegRel: return 3;
  }
  throw InvalidInputError("bad fact kind");
}

Nat encode_fact(const Fact& f) {
  if (fact_is_eq(f.kind)) {
    if (f.args.size() != 2) {
      throw MalformedFactError("equality fact needs exactly two arguments");
    }
    return pair(tag_of(f.kind), pair(f.args[0], f.args[1]));
  }
  return pair(tag_of(f.kind), pair(f.rel, enc_tuple(f.args)));
}

std::optional<Fact> decode_fact(const Nat& code) {
  auto [tag, payload] = unpair(code);
  if (tag > 3) return std::nullopt;
  Fact f;
  auto [p1, p2] = unpair(payload);
  if (tag == 0 || tag == 1) {
    f.kind = tag == 0 ? FactKind::PosEq : FactKind::NegEq;
    f.args = {p1, p2};
  } else {
    f.kind = tag == 2 ? FactKind::PosRel : FactKind::NegRel;
    f.rel = p1;
    f.args = dec_tuple(p2);
  }
  return f;
}

Fact decode_fact_checked(const Nat& code) {
  auto f = decode_fact(code);
  if (!f) throw MalformedFactError("fact code does not decode: " + code.str());
  return *f;
}

Nat encode_pos_eq(const Nat& x, const Nat& y) { return encode_fact({FactKind::PosEq, 0, {x, y}}); }
Nat encode_neg_eq(const Nat& x, const Nat& y) { return encode_fact({FactKind::NegEq, 0, {x, y}}); }
Nat encode_pos_rel(const Nat& rel, const std::vector<Nat>& args) {
  return encode_fact({FactKind::PosRel, rel, args});
}
Nat encode_neg_rel(const Nat& rel, const std::vector<Nat>& args) {
  return encode_fact({FactKind::NegRel, rel, args});
}

Nat negate_fact(const Nat& code) {
  auto [tag, payload] = unpair(code);
  if (tag > 3) return code;
  Nat flipped = (tag % 2 == 0) ? Nat(tag + 1) : Nat(tag - 1);
  return pair(flipped, payload);
}

Nat flip_rel_sign(const Nat& code) {
  auto [tag, payload] = unpair(code);
  if (tag == 2) return pair(Nat(3), payload);
  if (tag == 3) return pair(Nat(2), payload);
  return code;
}

Nat join_left(const Nat& inner) { return inner * 3; }
Nat join_fun(const Nat& inner) { return inner * 3 + 1; }
Nat join_right(const Nat& inner) { return inner * 3 + 2; }

JoinSlot join_classify(const Nat& code) {
  Nat r = code % 3;
  Nat inner = code / 3;
  if (r == 0) return {JoinPart::Left, inner};
  if (r == 1) return {JoinPart::Fun, inner};
  return {JoinPart::Right, inner};
}

}  // namespace stagecraft
