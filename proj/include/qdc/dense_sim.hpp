#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qdc/bitvec.hpp"
#include "qdc/outcome.hpp"
#include "qdc/rng.hpp"

namespace qdc::dense {

/// Hard cap on statevector width: 2^24 amplitudes of complex<double> is
/// 256 MiB, the most this exact backend should ever ask of one machine.
inline constexpr std::size_t kMaxQubits = 24;

/// Norm drift allowed after any single gate before the state is declared
/// corrupt.
inline constexpr double kNormTolerance = 1e-10;

/// Probabilities at or below this are treated as numerically zero when
/// building a distribution.
inline constexpr double kProbFloor = 1e-15;

/// Test hook: when set, gate-level embedding wires its controlled-NOTs at
/// the next player's input block instead of the owner's output qubit. That
/// deliberately breaks the announced-XOR correlation and gives integrity
/// checks a negative control to detect.
inline bool g_embedding_fault = false;

/// Full 2^Q statevector. Basis index bit k is the state of qubit k, so
/// qubit 0 is the least significant index bit.
class DenseState {
 public:
  /// |0...0> over the given number of qubits (1 to kMaxQubits; more raises
  /// CapacityError).
  explicit DenseState(std::size_t num_qubits);

  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

  void h(std::size_t qubit);
  void x(std::size_t qubit);
  void cnot(std::size_t control, std::size_t target);

  /// Diagonal gate: multiplies by -1 the amplitude of every basis state
  /// with an odd number of 1s inside `qubit_mask`. Equivalent to a parity
  /// phase oracle over the masked qubits.
  void phase_flip_parity(std::uint64_t qubit_mask);

 private:
  std::size_t num_qubits_;
  std::vector<std::complex<double>> amps_;

  void require_qubit(std::size_t qubit) const;
  /// Every gate ends here; drift beyond kNormTolerance is a logic error,
  /// not a recoverable condition.
  void check_norm() const;
};

/// How a player's payload reaches the shared state.
enum class EmbeddingMode {
  /// Physical circuit: each player holds one extra output qubit prepared
  /// in |->, and embeds by controlled-NOTs from its set payload bits onto
  /// that target. The |-> target kicks each flip back as a phase.
  gate_level,
  /// Same unitary action compressed to its net effect: a diagonal
  /// (-1)^(payload . input) phase applied directly, no output qubits.
  phase_oracle,
};

/// Shape of the entangling schedule used to grow each shared tuple.
enum class GhzTopology {
  /// count-1 sequential controlled-NOTs, each copying onto the next qubit.
  chain,
  /// ceil(lg count) layers; layer l copies qubit i onto qubit i + 2^l for
  /// every i < 2^l with an in-range target, doubling the entangled prefix
  /// per layer. Depth-optimal when gates in a layer run concurrently.
  fanout,
};

/// Qubit numbering for the n-player register file. Player i owns a block
/// of consecutive qubits: register_width input qubits, plus one output
/// qubit in gate_level mode.
struct RegisterLayout {
  std::size_t player_count;
  std::size_t register_width;
  EmbeddingMode mode;

  std::size_t block_width() const {
    return register_width + (mode == EmbeddingMode::gate_level ? 1 : 0);
  }
  std::size_t total_qubits() const { return player_count * block_width(); }
  std::size_t input(std::size_t player, std::size_t j) const {
    return player * block_width() + j;
  }
  /// Output qubit of a player; meaningful in gate_level mode only.
  std::size_t output(std::size_t player) const {
    return player * block_width() + register_width;
  }
};

/// Controlled-NOT schedule that entangles `count` qubits into
/// |0...0> + |1...1> starting from one superposed qubit, grouped into
/// layers of disjoint gates. Pairs are (control, target) in the local
/// numbering 0..count-1.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> ghz_cnot_layers(
    std::size_t count, GhzTopology topology);

/// (|0...0> + |1...1>)/sqrt(2) over a fresh `count`-qubit register, built
/// as H on qubit 0 followed by the topology's schedule.
DenseState prepare_ghz(std::size_t count, GhzTopology topology);

/// The shared resource state before any payload acts: for each bit
/// position j, one entangled tuple across every player's j-th input qubit;
/// in gate_level mode every output qubit is then put into |->.
DenseState prepare_initial(const RegisterLayout& layout,
                           GhzTopology topology = GhzTopology::fanout);

/// Writes one player's payload onto the state, by controlled-NOTs onto the
/// player's |-> output (gate_level) or by the equivalent diagonal phase
/// (phase_oracle). Embedding an all-zero payload is the identity either
/// way. payload.length() must equal the layout's register_width.
void apply_embedding(DenseState& state, const RegisterLayout& layout,
                     std::size_t player, const BitVector& payload);

/// H on every input qubit of every player: the decode transform that turns
/// the accumulated phases into readable bit correlations.
void apply_deciphering(DenseState& state, const RegisterLayout& layout);

/// Exact joint distribution of all input registers, output qubits
/// marginalized out. Keys are announcement-ordered outcomes; probabilities
/// at or below kProbFloor are dropped, and the retained mass must be
/// within kNormTolerance of one.
std::map<Outcome, double> input_distribution(const DenseState& state,
                                             const RegisterLayout& layout);

/// Inverse-CDF draw over the map's (deterministic) iteration order using
/// one uniform deviate.
Outcome sample(const std::map<Outcome, double>& dist, Rng& rng);

/// <-|rho|-> for one qubit's reduced state. Exactly 1 when the qubit sits
/// in |-> untouched by entanglement; used to confirm output qubits come
/// back clean.
double minus_fidelity(const DenseState& state, std::size_t qubit);

}  // namespace qdc::dense
