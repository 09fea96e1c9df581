#pragma once

#include <cstddef>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>

#include "qdc/bitvec.hpp"
#include "qdc/outcome.hpp"
#include "qdc/rng.hpp"

namespace qdc::structured {

/// exact_distribution() materializes 2^(width * (players-1)) outcomes;
/// beyond this many bits it refuses rather than thrash.
inline constexpr std::size_t kMaxEnumerationBits = 20;

/// Closed-form backend. The exact pipeline always ends in the uniform
/// distribution over every outcome whose registers XOR to the group
/// payload, and nothing about individual payloads survives except their
/// XOR. So this backend keeps exactly one register of state: the XOR of
/// everything embedded so far. Sampling draws the free registers uniformly
/// and closes the last one against the payload, which is O(players * width)
/// per shot at any scale.
class StructuredState {
 public:
  StructuredState(std::size_t player_count, std::size_t register_width);

  std::size_t player_count() const { return player_count_; }
  std::size_t register_width() const { return payload_.length(); }

  /// XOR of all payloads embedded so far.
  const BitVector& group_payload() const { return payload_; }

  /// Folds one player's payload in. Which player embeds is deliberately
  /// not recorded; the observable state cannot depend on it.
  void embed(const BitVector& payload);

  /// One outcome drawn uniformly from the support: positions 1..n-1 are
  /// independent uniform registers, position 0 closes the XOR to the group
  /// payload.
  Outcome sample(Rng& rng) const;

  /// The full support with its single shared probability
  /// 2^-(width * (players-1)) per outcome. Raises CapacityError past
  /// kMaxEnumerationBits.
  std::map<Outcome, double> exact_distribution() const;

 private:
  std::size_t player_count_;
  BitVector payload_;
};

/// Number of distinct reachable outcomes, 2^(width * (players-1)), as an
/// exact big integer since realistic parameters overflow anything fixed.
boost::multiprecision::cpp_int support_size(std::size_t player_count,
                                            std::size_t register_width);

}  // namespace qdc::structured
