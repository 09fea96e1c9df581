#include "qdc/bitvec.hpp"

#include <bit>
#include <stdexcept>

#include "qdc/errors.hpp"

namespace qdc {

namespace {

constexpr std::size_t kCensusMaxBits = 20;

std::size_t words_for(std::size_t len) { return (len + 63) / 64; }

void require_same_length(const BitVector& a, const BitVector& b, const char* op) {
  if (a.length() != b.length()) {
    throw std::invalid_argument(std::string(op) + ": length mismatch, " +
                                std::to_string(a.length()) + " vs " +
                                std::to_string(b.length()));
  }
}

}  // namespace

BitVector::BitVector(std::size_t length) : len_(length), words_(words_for(length), 0) {
  if (length == 0) {
    throw std::invalid_argument("BitVector length must be >= 1");
  }
}

BitVector BitVector::from_string(std::string_view msb_first) {
  BitVector v(msb_first.size());
  for (std::size_t i = 0; i < msb_first.size(); ++i) {
    char c = msb_first[i];
    if (c != '0' && c != '1') {
      throw std::invalid_argument("BitVector::from_string: invalid character '" +
                                  std::string(1, c) + "'");
    }
    v.set_bit(msb_first.size() - 1 - i, c == '1');
  }
  return v;
}

BitVector BitVector::from_amount(std::uint64_t value, std::size_t length) {
  BitVector v(length);
  if (length < 64 && (value >> length) != 0) {
    throw std::overflow_error("amount " + std::to_string(value) + " does not fit in " +
                              std::to_string(length) + " bits; needs at least " +
                              std::to_string(std::bit_width(value)));
  }
  v.words_[0] = value;
  return v;
}

BitVector BitVector::random(std::size_t length, Rng& rng) {
  BitVector v(length);
  for (auto& w : v.words_) {
    w = rng.next_u64();
  }
  v.mask_top();
  return v;
}

bool BitVector::bit(std::size_t j) const {
  if (j >= len_) {
    throw std::out_of_range("BitVector::bit: index " + std::to_string(j) +
                            " out of range for length " + std::to_string(len_));
  }
  return (words_[j / 64] >> (j % 64)) & 1u;
}

void BitVector::set_bit(std::size_t j, bool value) {
  if (j >= len_) {
    throw std::out_of_range("BitVector::set_bit: index " + std::to_string(j) +
                            " out of range for length " + std::to_string(len_));
  }
  std::uint64_t mask = std::uint64_t{1} << (j % 64);
  if (value) {
    words_[j / 64] |= mask;
  } else {
    words_[j / 64] &= ~mask;
  }
}

bool BitVector::is_zero() const {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

std::uint64_t BitVector::to_amount() const {
  for (std::size_t i = 1; i < words_.size(); ++i) {
    if (words_[i] != 0) {
      throw std::overflow_error("BitVector::to_amount: value exceeds 64 bits");
    }
  }
  return words_[0];
}

std::string BitVector::str() const {
  std::string out;
  out.reserve(len_);
  for (std::size_t j = len_; j-- > 0;) {
    out.push_back(bit(j) ? '1' : '0');
  }
  return out;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  require_same_length(*this, other, "xor");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    words_[i] ^= other.words_[i];
  }
  return *this;
}

std::strong_ordering BitVector::operator<=>(const BitVector& other) const {
  if (auto c = len_ <=> other.len_; c != 0) return c;
  for (std::size_t i = words_.size(); i-- > 0;) {
    if (auto c = words_[i] <=> other.words_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

void BitVector::mask_top() {
  std::size_t rem = len_ % 64;
  if (rem != 0) {
    words_.back() &= (std::uint64_t{1} << rem) - 1;
  }
}

int inner_product_mod2(const BitVector& x, const BitVector& y) {
  require_same_length(x, y, "inner_product_mod2");
  int parity = 0;
  for (std::size_t i = 0; i < x.words().size(); ++i) {
    parity ^= std::popcount(x.words()[i] & y.words()[i]) & 1;
  }
  return parity;
}

std::pair<std::uint64_t, std::uint64_t> cip_census(const BitVector& c) {
  std::size_t m = c.length();
  if (m > kCensusMaxBits) {
    throw CapacityError("cip_census: exhaustive enumeration capped at m <= " +
                        std::to_string(kCensusMaxBits) + ", got m = " + std::to_string(m));
  }
  std::uint64_t cw = c.low_word();
  std::uint64_t zeros = 0, ones = 0;
  std::uint64_t limit = std::uint64_t{1} << m;
  for (std::uint64_t x = 0; x < limit; ++x) {
    if (std::popcount(cw & x) & 1) {
      ++ones;
    } else {
      ++zeros;
    }
  }
  return {zeros, ones};
}

}  // namespace qdc
