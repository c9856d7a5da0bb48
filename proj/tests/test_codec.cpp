#include <doctest.h>

#include <cmath>

#include "adl/codec.hpp"
#include "adl/rng.hpp"

using namespace adl;

namespace {

Bracketed random_tree(RngStream& rng, int depth) {
  double r = rng.uniform();
  if (depth == 0 || r < 0.4) return Bracketed::leaf(rng.bernoulli(0.5));
  int kids = 2 + static_cast<int>(rng.uniform() * 3.0);
  std::vector<Bracketed> parts;
  for (int i = 0; i < kids; ++i) parts.push_back(random_tree(rng, depth - 1));
  return Bracketed::concat(parts);
}

}  // namespace

TEST_CASE("leaf and node basics") {
  Bracketed empty;
  CHECK(empty.empty());
  CHECK(empty.len() == 0);
  Bracketed l = Bracketed::leaf(true);
  CHECK(l.len() == 1);
  CHECK(l.serialize() == "1");
  Bracketed n = Bracketed::concat({Bracketed::leaf(false), Bracketed::leaf(true)});
  CHECK(n.len() == 2);
  CHECK(n.serialize() == "[01]");
}

TEST_CASE("concat skips empties and keeps a single part unchanged") {
  Bracketed l = Bracketed::leaf(false);
  CHECK(Bracketed::concat({Bracketed(), l, Bracketed()}) == l);
  CHECK(Bracketed::concat({}).empty());
}

TEST_CASE("bit runs") {
  CHECK(Bracketed::bit_run({true}).is_leaf());
  Bracketed r = Bracketed::bit_run({true, false, true});
  CHECK(r.len() == 3);
  CHECK(r.serialize() == "[101]");
  auto bits = r.leaf_bits();
  CHECK(bits == std::vector<bool>{true, false, true});
}

TEST_CASE("serialize/deserialize round-trips on random trees") {
  RngStream rng(7);
  for (int i = 0; i < 10000; ++i) {
    RngStream s = rng.child(static_cast<std::uint64_t>(i));
    Bracketed t = random_tree(s, 4);
    CHECK(Bracketed::deserialize(t.serialize()) == t);
  }
}

TEST_CASE("deserialize rejects malformed input") {
  CHECK_THROWS_AS(Bracketed::deserialize("["), ParseError);
  CHECK_THROWS_AS(Bracketed::deserialize("[]"), ParseError);    // empty node
  CHECK_THROWS_AS(Bracketed::deserialize("[0]"), ParseError);   // unary node
  CHECK_THROWS_AS(Bracketed::deserialize("2"), ParseError);
  CHECK_THROWS_AS(Bracketed::deserialize("01"), ParseError);    // trailing data
  try {
    Bracketed::deserialize("[0x]");
  } catch (const ParseError& e) {
    CHECK(e.offset == 2);
  }
}

TEST_CASE("counting stays under 32^n") {
  double p = 1.0;
  std::int64_t prev = 0;
  for (int n = 1; n <= 6; ++n) {
    p *= 32.0;
    std::int64_t c = count_bracketed(n);
    CHECK(c > prev);
    CHECK(static_cast<double>(c) <= p);
    prev = c;
  }
  CHECK(count_bracketed(1) == 2);  // "0" and "1"
}

TEST_CASE("bounded integer encoding") {
  CHECK(bounded_int_width(0, 1) == 1);
  CHECK(bounded_int_width(-4, 3) == 3);
  for (std::int64_t v = -4; v <= 3; ++v) {
    Bracketed e = encode_bounded_int(v, -4, 3);
    CHECK(e.len() == 3);
    CHECK(decode_bounded_int(e, -4, 3) == v);
  }
  CHECK_THROWS_AS(encode_bounded_int(9, 0, 7), InvalidInput);
}
