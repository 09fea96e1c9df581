#include "qdc/outcome.hpp"

#include <stdexcept>

namespace qdc {

const BitVector& Outcome::by_player(std::size_t player) const {
  if (player >= registers.size()) {
    throw std::out_of_range("Outcome::by_player: player " +
                            std::to_string(player) + " out of " +
                            std::to_string(registers.size()));
  }
  return registers[registers.size() - 1 - player];
}

BitVector Outcome::xor_fold() const {
  if (registers.empty()) {
    throw std::invalid_argument("Outcome::xor_fold: no registers");
  }
  BitVector acc = registers.front();
  for (std::size_t k = 1; k < registers.size(); ++k) {
    acc ^= registers[k];
  }
  return acc;
}

std::string Outcome::key() const {
  std::string out;
  for (std::size_t k = 0; k < registers.size(); ++k) {
    if (k > 0) out.push_back(' ');
    out += registers[k].str();
  }
  return out;
}

Outcome Outcome::from_key(std::string_view text) {
  Outcome out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(' ', pos);
    if (next == std::string_view::npos) next = text.size();
    if (next > pos) {
      out.registers.push_back(BitVector::from_string(text.substr(pos, next - pos)));
    }
    pos = next + 1;
  }
  if (out.registers.empty()) {
    throw std::invalid_argument("Outcome::from_key: empty key");
  }
  return out;
}

}  // namespace qdc
