#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qdc/bitvec.hpp"

namespace qdc {

/// Joint result of one round: every player's announced register, in
/// announcement order. Position 0 belongs to the highest-numbered player
/// (the one who traditionally opens the announcement phase) and positions
/// count downward from there, so with n players position k holds the
/// register of player n-1-k.
struct Outcome {
  std::vector<BitVector> registers;

  std::size_t player_count() const { return registers.size(); }

  /// Register announced by a specific player id (0-based).
  const BitVector& by_player(std::size_t player) const;

  /// XOR of all registers. On every reachable outcome this equals the XOR
  /// of all embedded payloads, which is what makes decoding possible.
  BitVector xor_fold() const;

  /// Space-joined MSB-first rendering, e.g. "0001 1000 0111 0010". Used as
  /// the stable text key in reports and histograms.
  std::string key() const;

  /// Parses the key() format back into an Outcome.
  static Outcome from_key(std::string_view text);

  bool operator==(const Outcome&) const = default;
  auto operator<=>(const Outcome&) const = default;
};

}  // namespace qdc
