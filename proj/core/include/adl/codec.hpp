#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "adl/errors.hpp"

namespace adl {

// Nested binary string. Leaves carry a bit; internal nodes have >= 2 children
// (no unary nodes). The length -- the unit of bit accounting -- is the number
// of leaves; bracket structure is free.
class Bracketed {
public:
  Bracketed() = default;  // distinguished empty value, len 0

  static Bracketed leaf(bool bit);
  // Flat run of bits: a single leaf for one bit, otherwise a node of leaves.
  static Bracketed bit_run(const std::vector<bool>& bits);
  static Bracketed concat(const std::vector<Bracketed>& parts);

  bool empty() const { return kind_ == Kind::Empty; }
  bool is_leaf() const { return kind_ == Kind::Leaf; }
  bool bit() const;
  std::int64_t len() const;
  const std::vector<Bracketed>& children() const;

  // In-order leaf bit sequence.
  std::vector<bool> leaf_bits() const;

  // Canonical ASCII form over '[', ']', '0', '1'.
  std::string serialize() const;
  static Bracketed deserialize(std::string_view text);

  bool operator==(const Bracketed& o) const;

private:
  enum class Kind { Empty, Leaf, Node };
  Kind kind_ = Kind::Empty;
  bool bit_ = false;
  std::vector<Bracketed> kids_;
};

// Exact number of distinct bracketed strings of length <= n, by recursive
// enumeration; valid for 1 <= n <= 8.
std::int64_t count_bracketed(int n);

// Fixed-width big-endian binary encoding of v - lo over [lo, hi];
// width = max(1, ceil(log2(hi - lo + 1))).
Bracketed encode_bounded_int(std::int64_t v, std::int64_t lo, std::int64_t hi);
std::int64_t decode_bounded_int(const Bracketed& s, std::int64_t lo, std::int64_t hi);
int bounded_int_width(std::int64_t lo, std::int64_t hi);

}  // namespace adl
