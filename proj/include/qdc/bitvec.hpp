#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qdc/rng.hpp"

namespace qdc {

/// Fixed-length vector over GF(2). Bit j is the j-th binary digit, j = 0 least
/// significant; text rendering is MSB-first, so from_amount(12, 4).str() is
/// "1100". Length is part of the value: leading zeros are significant and
/// "0001" != "1". Immutable sharing is safe once constructed.
class BitVector {
 public:
  /// All-zero vector of the given length. Length must be >= 1.
  explicit BitVector(std::size_t length);

  /// Parses an MSB-first string of '0'/'1'; the string length fixes m.
  static BitVector from_string(std::string_view msb_first);

  /// Standard binary encoding of `value` into `length` bits. Throws
  /// std::overflow_error naming the minimal sufficient length if the value
  /// does not fit.
  static BitVector from_amount(std::uint64_t value, std::size_t length);

  /// Uniformly random vector drawn from `rng`.
  static BitVector random(std::size_t length, Rng& rng);

  std::size_t length() const { return len_; }
  bool bit(std::size_t j) const;
  void set_bit(std::size_t j, bool value);
  bool is_zero() const;

  /// The encoded non-negative integer. Throws std::overflow_error if a bit at
  /// index >= 64 is set; inverse of from_amount otherwise.
  std::uint64_t to_amount() const;

  /// MSB-first rendering of exact length m.
  std::string str() const;

  /// Bitwise XOR; both operands must have equal length.
  BitVector& operator^=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) {
    a ^= b;
    return a;
  }

  bool operator==(const BitVector&) const = default;

  /// Orders by length first, then by numeric value; gives map keys and JSON
  /// output a stable order.
  std::strong_ordering operator<=>(const BitVector& other) const;

  /// Low 64 bits as a word; callers must know length() <= 64.
  std::uint64_t low_word() const { return words_[0]; }

  /// Read-only view of the packed 64-bit words, low word first.
  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t len_;
  std::vector<std::uint64_t> words_;  // bit j lives at words_[j/64] >> (j%64)

  void mask_top();
};

/// Inner product modulo 2 of equal-length vectors:
/// x_{m-1}y_{m-1} xor ... xor x_0y_0.
int inner_product_mod2(const BitVector& x, const BitVector& y);

/// Exhaustive census of c . x over all x in B^m, returned as
/// (#{x : c.x = 0}, #{x : c.x = 1}). Capped at m <= 20; larger m raises
/// CapacityError instead of silently sampling.
std::pair<std::uint64_t, std::uint64_t> cip_census(const BitVector& c);

}  // namespace qdc
