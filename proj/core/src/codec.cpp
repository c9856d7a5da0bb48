#include "adl/codec.hpp"

#include <algorithm>

namespace adl {

Bracketed Bracketed::leaf(bool bit) {
  Bracketed b;
  b.kind_ = Kind::Leaf;
  b.bit_ = bit;
  return b;
}

Bracketed Bracketed::bit_run(const std::vector<bool>& bits) {
  if (bits.empty()) return Bracketed();
  if (bits.size() == 1) return leaf(bits[0]);
  Bracketed b;
  b.kind_ = Kind::Node;
  b.kids_.reserve(bits.size());
  for (bool v : bits) b.kids_.push_back(leaf(v));
  return b;
}

Bracketed Bracketed::concat(const std::vector<Bracketed>& parts) {
  std::vector<Bracketed> kept;
  for (const auto& p : parts)
    if (!p.empty()) kept.push_back(p);
  if (kept.empty()) return Bracketed();
  if (kept.size() == 1) return kept[0];  // no unary node
  Bracketed b;
  b.kind_ = Kind::Node;
  b.kids_ = std::move(kept);
  return b;
}

bool Bracketed::bit() const {
  if (kind_ != Kind::Leaf) throw InvalidInput("bit(): not a leaf");
  return bit_;
}

std::int64_t Bracketed::len() const {
  switch (kind_) {
    case Kind::Empty: return 0;
    case Kind::Leaf: return 1;
    case Kind::Node: {
      std::int64_t n = 0;
      for (const auto& k : kids_) n += k.len();
      return n;
    }
  }
  return 0;
}

const std::vector<Bracketed>& Bracketed::children() const {
  if (kind_ != Kind::Node) throw InvalidInput("children(): not an internal node");
  return kids_;
}

static void collect_bits(const Bracketed& b, std::vector<bool>& out) {
  if (b.empty()) return;
  if (b.is_leaf()) {
    out.push_back(b.bit());
    return;
  }
  for (const auto& k : b.children()) collect_bits(k, out);
}

std::vector<bool> Bracketed::leaf_bits() const {
  std::vector<bool> out;
  collect_bits(*this, out);
  return out;
}

static void serialize_rec(const Bracketed& b, std::string& out) {
  if (b.empty()) return;
  if (b.is_leaf()) {
    out.push_back(b.bit() ? '1' : '0');
    return;
  }
  out.push_back('[');
  for (const auto& k : b.children()) serialize_rec(k, out);
  out.push_back(']');
}

std::string Bracketed::serialize() const {
  std::string out;
  serialize_rec(*this, out);
  return out;
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  Bracketed parse_one() {
    if (pos >= text.size()) throw ParseError("unexpected end of input", pos);
    char c = text[pos];
    if (c == '0' || c == '1') {
      ++pos;
      return Bracketed::leaf(c == '1');
    }
    if (c == '[') {
      std::size_t open = pos;
      ++pos;
      std::vector<Bracketed> kids;
      while (pos < text.size() && text[pos] != ']') kids.push_back(parse_one());
      if (pos >= text.size()) throw ParseError("unbalanced '['", open);
      ++pos;  // ']'
      if (kids.empty()) throw ParseError("empty node", open);
      if (kids.size() == 1) throw ParseError("unary node", open);
      return Bracketed::concat(kids);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }
};

}  // namespace

Bracketed Bracketed::deserialize(std::string_view text) {
  if (text.empty()) return Bracketed();
  Parser p{text};
  Bracketed b = p.parse_one();
  if (p.pos != text.size()) throw ParseError("trailing characters", p.pos);
  return b;
}

bool Bracketed::operator==(const Bracketed& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Empty: return true;
    case Kind::Leaf: return bit_ == o.bit_;
    case Kind::Node: return kids_ == o.kids_;
  }
  return false;
}

std::int64_t count_bracketed(int n) {
  if (n < 1 || n > 8) throw InvalidInput("count_bracketed: n must be in [1, 8]");
  // t[j] = number of bracketed strings with exactly j leaves.
  // t[1] = 2; for j >= 2, sum over ordered tuples of >= 2 subtrees.
  std::vector<std::int64_t> t(static_cast<std::size_t>(n) + 1, 0);
  t[1] = 2;
  for (int j = 2; j <= n; ++j) {
    // comp[c][s] = sum over ordered c-tuples with leaf counts summing to s.
    // Build incrementally: one[s] = t[s]; conv repeatedly.
    std::vector<std::int64_t> cur(t.begin(), t.begin() + j + 1);  // c = 1
    std::int64_t total = 0;
    for (int c = 2; c <= j; ++c) {
      std::vector<std::int64_t> nxt(static_cast<std::size_t>(j) + 1, 0);
      for (int s = c - 1; s < j; ++s)
        for (int add = 1; s + add <= j; ++add) nxt[static_cast<std::size_t>(s + add)] += cur[static_cast<std::size_t>(s)] * t[static_cast<std::size_t>(add)];
      total += nxt[static_cast<std::size_t>(j)];
      cur = std::move(nxt);
    }
    t[static_cast<std::size_t>(j)] = total;
  }
  std::int64_t all = 0;
  for (int j = 1; j <= n; ++j) all += t[static_cast<std::size_t>(j)];
  return all;
}

int bounded_int_width(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidInput("bounded_int_width: empty range");
  std::uint64_t count = static_cast<std::uint64_t>(hi - lo) + 1;
  int w = 1;
  while ((std::uint64_t(1) << w) < count) ++w;
  return w;
}

Bracketed encode_bounded_int(std::int64_t v, std::int64_t lo, std::int64_t hi) {
  if (v < lo || v > hi) throw InvalidInput("encode_bounded_int: value out of range");
  int w = bounded_int_width(lo, hi);
  std::uint64_t u = static_cast<std::uint64_t>(v - lo);
  std::vector<bool> bits(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) bits[static_cast<std::size_t>(i)] = (u >> (w - 1 - i)) & 1;  // big-endian
  return Bracketed::bit_run(bits);
}

std::int64_t decode_bounded_int(const Bracketed& s, std::int64_t lo, std::int64_t hi) {
  int w = bounded_int_width(lo, hi);
  std::vector<bool> bits = s.leaf_bits();
  if (static_cast<int>(bits.size()) != w)
    throw ParseError("decode_bounded_int: width mismatch", 0);
  std::uint64_t u = 0;
  for (bool b : bits) u = (u << 1) | (b ? 1u : 0u);
  std::int64_t v = lo + static_cast<std::int64_t>(u);
  if (v > hi) throw ParseError("decode_bounded_int: value out of range", 0);
  return v;
}

}  // namespace adl
