#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "stagecraft/common.hpp"

namespace stagecraft {

// Cantor pairing and the derived tuple and fact codings. Everything here is
// a bijection (or a section of one) so codes can be taken apart again without
// side information.

// pair(a,b) = (a+b)(a+b+1)/2 + b
Nat pair(const Nat& a, const Nat& b);
std::pair<Nat, Nat> unpair(const Nat& n);

// enc_tuple([]) = 0, enc_tuple(x:rest) = pair(x, enc_tuple(rest)) + 1.
// Decoding terminates because pair(x, m) >= m.
Nat enc_tuple(const std::vector<Nat>& xs);
std::vector<Nat> dec_tuple(const Nat& n);

enum class FactKind { PosEq, NegEq, PosRel, NegRel };

// Atomic fact over naturals. Equality facts use exactly two args and ignore
// `rel`; relation facts carry the relation index and an argument tuple.
struct Fact {
  FactKind kind = FactKind::PosEq;
  Nat rel = 0;
  std::vector<Nat> args;

  bool operator==(const Fact&) const = default;
};

bool fact_is_eq(FactKind k);
bool fact_is_positive(FactKind k);

// Tag layout: code = pair(tag, payload) with tags 0..3 for PosEq, NegEq,
// PosRel, NegRel. Equality payload is pair(x, y); relation payload is
// pair(relIndex, enc_tuple(args)). Tags above 3 do not decode.
Nat encode_fact(const Fact& f);
std::optional<Fact> decode_fact(const Nat& code);
Fact decode_fact_checked(const Nat& code);

Nat encode_pos_eq(const Nat& x, const Nat& y);
Nat encode_neg_eq(const Nat& x, const Nat& y);
Nat encode_pos_rel(const Nat& rel, const std::vector<Nat>& args);
Nat encode_neg_rel(const Nat& rel, const std::vector<Nat>& args);

// Same atom, opposite sign. Total: codes that do not decode come back as is.
Nat negate_fact(const Nat& code);

// Relation sign swap used by the graph complement operator: PosRel <-> NegRel,
// everything else (equality facts, junk) unchanged.
Nat flip_rel_sign(const Nat& code);

// Join layout for oracles of the form A (+) f (+) B: residue 0 mod 3 queries
// the first diagram, 1 mod 3 the function graph (as pair codes), 2 mod 3 the
// second diagram.
enum class JoinPart { Left, Fun, Right };

Nat join_left(const Nat& inner);
Nat join_fun(const Nat& inner);
Nat join_right(const Nat& inner);

struct JoinSlot {
  JoinPart part;
  Nat inner;
};
JoinSlot join_classify(const Nat& code);

}  // namespace stagecraft
