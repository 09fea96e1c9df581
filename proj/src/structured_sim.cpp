#include "qdc/structured_sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "qdc/errors.hpp"

namespace qdc::structured {

StructuredState::StructuredState(std::size_t player_count,
                                 std::size_t register_width)
    : player_count_(player_count), payload_(std::max<std::size_t>(register_width, 1)) {
  if (player_count < 2) {
    throw std::invalid_argument("StructuredState: at least 2 players required, got " +
                                std::to_string(player_count));
  }
  if (register_width < 1) {
    throw std::invalid_argument("StructuredState: register width must be >= 1");
  }
}

void StructuredState::embed(const BitVector& payload) {
  payload_ ^= payload;
}

Outcome StructuredState::sample(Rng& rng) const {
  Outcome out;
  out.registers.reserve(player_count_);
  // Position 0 starts as the payload and absorbs every free register,
  // ending as payload XOR fold(free): the unique closing value.
  out.registers.push_back(payload_);
  for (std::size_t k = 1; k < player_count_; ++k) {
    out.registers.push_back(BitVector::random(payload_.length(), rng));
    out.registers[0] ^= out.registers.back();
  }
  return out;
}

std::map<Outcome, double> StructuredState::exact_distribution() const {
  const std::size_t m = payload_.length();
  const std::size_t bits = m * (player_count_ - 1);
  if (bits > kMaxEnumerationBits) {
    throw CapacityError("exact_distribution: 2^" + std::to_string(bits) +
                        " outcomes exceed the enumeration cap of 2^" +
                        std::to_string(kMaxEnumerationBits));
  }
  const double prob = std::ldexp(1.0, -static_cast<int>(bits));
  std::map<Outcome, double> dist;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v) {
    Outcome out;
    out.registers.reserve(player_count_);
    out.registers.push_back(payload_);
    for (std::size_t k = 1; k < player_count_; ++k) {
      BitVector reg(m);
      for (std::size_t j = 0; j < m; ++j) {
        reg.set_bit(j, (v >> ((k - 1) * m + j)) & 1);
      }
      out.registers[0] ^= reg;
      out.registers.push_back(std::move(reg));
    }
    dist.emplace(std::move(out), prob);
  }
  return dist;
}

boost::multiprecision::cpp_int support_size(std::size_t player_count,
                                            std::size_t register_width) {
  if (player_count < 2 || register_width < 1) {
    throw std::invalid_argument("support_size: need >= 2 players and width >= 1");
  }
  return boost::multiprecision::cpp_int(1) << (register_width * (player_count - 1));
}

}  // namespace qdc::structured
