#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "stagecraft/coding.hpp"

using namespace stagecraft;

TEST_CASE("pairing round trips and matches hand computed values") {
  // (a+b)(a+b+1)/2 + b, worked out on paper
  CHECK(pair(0, 0) == 0);
  CHECK(pair(1, 0) == 1);
  CHECK(pair(0, 1) == 2);
  CHECK(pair(1, 2) == 8);
  CHECK(pair(2, 1) == 7);
  CHECK(pair(5, 5) == 60);
  CHECK(pair(0, 60) == 1890);

  for (std::uint64_t a = 0; a <= 200; ++a) {
    for (std::uint64_t b = 0; b <= 200; ++b) {
      auto [x, y] = unpair(pair(Nat(a), Nat(b)));
      REQUIRE(x == a);
      REQUIRE(y == b);
    }
  }
}

TEST_CASE("pairing is injective on a grid") {
  std::vector<Nat> seen;
  for (std::uint64_t a = 0; a <= 40; ++a) {
    for (std::uint64_t b = 0; b <= 40; ++b) seen.push_back(pair(Nat(a), Nat(b)));
  }
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("unpair of huge codes stays exact") {
  Nat big = Nat("123456789012345678901234567890");
  auto [a, b] = unpair(pair(big, big + 7));
  CHECK(a == big);
  CHECK(b == big + 7);
}

TEST_CASE("tuple codes match hand computed values") {
  CHECK(enc_tuple({}) == 0);
  CHECK(enc_tuple({Nat(0)}) == 1);
  CHECK(enc_tuple({Nat(1)}) == 2);
  CHECK(enc_tuple({Nat(0), Nat(0)}) == 3);
  CHECK(enc_tuple({Nat(1), Nat(0)}) == 5);
  CHECK(enc_tuple({Nat(0), Nat(1)}) == 6);
  CHECK(enc_tuple({Nat(2), Nat(0)}) == 8);
  CHECK(enc_tuple({Nat(3), Nat(0)}) == 12);
  CHECK(enc_tuple({Nat(2), Nat(1)}) == 13);
  CHECK(enc_tuple({Nat(4), Nat(0)}) == 17);
  CHECK(enc_tuple({Nat(3), Nat(2)}) == 33);
  CHECK(enc_tuple({Nat(0), Nat(4)}) == 136);
}

TEST_CASE("tuple decoding inverts encoding") {
  SUBCASE("over all short tuples from a small alphabet") {
    for (std::uint64_t x = 0; x < 6; ++x) {
      std::vector<Nat> one{Nat(x)};
      CHECK(dec_tuple(enc_tuple(one)) == one);
      for (std::uint64_t y = 0; y < 6; ++y) {
        std::vector<Nat> two{Nat(x), Nat(y)};
        CHECK(dec_tuple(enc_tuple(two)) == two);
        for (std::uint64_t z = 0; z < 6; ++z) {
          std::vector<Nat> three{Nat(x), Nat(y), Nat(z)};
          CHECK(dec_tuple(enc_tuple(three)) == three);
        }
      }
    }
  }
  SUBCASE("every code below 5000 is some tuple's code") {
    for (std::uint64_t n = 0; n < 5000; ++n) {
      CHECK(enc_tuple(dec_tuple(Nat(n))) == n);
    }
  }
}

TEST_CASE("fact codes match hand computed values") {
  CHECK(encode_pos_eq(0, 0) == 0);
  CHECK(encode_pos_eq(5, 5) == 1890);
  CHECK(encode_pos_rel(0, {Nat(0), Nat(2)}) == 9588);
}

TEST_CASE("fact decoding inverts encoding") {
  for (std::uint64_t x = 0; x < 8; ++x) {
    for (std::uint64_t y = 0; y < 8; ++y) {
      Fact pe{FactKind::PosEq, 0, {Nat(x), Nat(y)}};
      Fact ne{FactKind::NegEq, 0, {Nat(x), Nat(y)}};
      CHECK(decode_fact(encode_fact(pe)) == pe);
      CHECK(decode_fact(encode_fact(ne)) == ne);
      Fact pr{FactKind::PosRel, Nat(x), {Nat(y), Nat(x)}};
      Fact nr{FactKind::NegRel, Nat(x), {Nat(y)}};
      CHECK(decode_fact(encode_fact(pr)) == pr);
      CHECK(decode_fact(encode_fact(nr)) == nr);
    }
  }
  for (std::uint64_t c = 0; c < 5000; ++c) {
    auto f = decode_fact(Nat(c));
    if (!f) continue;
    CHECK(encode_fact(*f) == c);
  }
}

TEST_CASE("codes with tags past 3 do not decode") {
  CHECK_FALSE(decode_fact(pair(4, 0)).has_value());
  CHECK_FALSE(decode_fact(pair(17, 123)).has_value());
  CHECK_THROWS_AS(decode_fact_checked(pair(4, 0)), MalformedFactError);
}

TEST_CASE("negation flips the sign and nothing else") {
  Nat pe = encode_pos_eq(3, 4);
  Nat pr = encode_pos_rel(1, {Nat(2)});
  CHECK(negate_fact(pe) == encode_neg_eq(3, 4));
  CHECK(negate_fact(negate_fact(pe)) == pe);
  CHECK(negate_fact(pr) == encode_neg_rel(1, {Nat(2)}));
  Nat junk = pair(9, 9);
  CHECK(negate_fact(junk) == junk);
}

TEST_CASE("relation sign swap fixes equalities") {
  Nat pr = encode_pos_rel(0, {Nat(1), Nat(2)});
  CHECK(flip_rel_sign(pr) == encode_neg_rel(0, {Nat(1), Nat(2)}));
  CHECK(flip_rel_sign(flip_rel_sign(pr)) == pr);
  Nat pe = encode_pos_eq(1, 2);
  CHECK(flip_rel_sign(pe) == pe);
  CHECK(flip_rel_sign(encode_neg_eq(1, 2)) == encode_neg_eq(1, 2));
}

TEST_CASE("join layout splits into residue classes") {
  for (std::uint64_t n = 0; n < 50; ++n) {
    CHECK(join_left(Nat(n)) % 3 == 0);
    CHECK(join_fun(Nat(n)) % 3 == 1);
    CHECK(join_right(Nat(n)) % 3 == 2);
    JoinSlot l = join_classify(join_left(Nat(n)));
    CHECK(l.part == JoinPart::Left);
    CHECK(l.inner == n);
    JoinSlot f = join_classify(join_fun(Nat(n)));
    CHECK(f.part == JoinPart::Fun);
    CHECK(f.inner == n);
    JoinSlot r = join_classify(join_right(Nat(n)));
    CHECK(r.part == JoinPart::Right);
    CHECK(r.inner == n);
  }
}
