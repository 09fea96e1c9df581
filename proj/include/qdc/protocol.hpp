#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdc/bitvec.hpp"
#include "qdc/dense_sim.hpp"
#include "qdc/outcome.hpp"
#include "qdc/structured_sim.hpp"

namespace qdc {

/// Which simulation backend realizes the round.
enum class Backend {
  /// Exact statevector pipeline; capacity-limited but assumes nothing.
  dense,
  /// Closed-form sampler over the known outcome law; scales to thousands
  /// of players.
  structured,
};

/// Whether rounds run in-process or across the message-passing harness.
enum class RunMode { local, distributed };

std::string_view to_string(Backend backend);
std::string_view to_string(RunMode mode);
std::string_view to_string(dense::EmbeddingMode mode);
Backend backend_from_string(std::string_view text);
RunMode run_mode_from_string(std::string_view text);
dense::EmbeddingMode embedding_from_string(std::string_view text);

/// Everything that defines an experiment. A config with no payer means
/// nobody embeds anything and rounds must decode to zero.
struct ProtocolConfig {
  std::size_t player_count = 2;
  std::size_t register_width = 1;
  std::optional<std::size_t> payer;
  std::uint64_t amount = 0;
  Backend backend = Backend::dense;
  RunMode mode = RunMode::local;
  dense::EmbeddingMode embedding = dense::EmbeddingMode::gate_level;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;

  /// Rejects contradictory settings (std::invalid_argument) and sizes the
  /// chosen backend cannot hold (CapacityError).
  void validate() const;

  /// The amount encoded at register width; the all-zero vector when no
  /// payer is set.
  BitVector payer_payload() const;
};

/// What a round's decoded value means to the group.
struct Verdict {
  enum class Kind { employer_paid, cryptographer_paid };
  Kind kind = Kind::employer_paid;
  std::uint64_t amount = 0;
  bool operator==(const Verdict&) const = default;
};

std::string_view to_string(Verdict::Kind kind);

/// One labelled step of a round, in protocol order. Phases are the state
/// labels psi0 (resource prepared), psi1 (payload embedded), psi2
/// (deciphered), psif (measured).
struct TranscriptEntry {
  std::string phase;
  std::string note;
  bool operator==(const TranscriptEntry&) const = default;
};

struct RoundResult {
  Outcome outcome;
  BitVector decoded;
  Verdict verdict;
  std::vector<TranscriptEntry> transcript;
};

/// XOR of all announced registers: the group-visible total payload.
BitVector decode(const Outcome& outcome);

/// Zero decodes as "the employer paid"; anything else is a cryptographer
/// announcing that amount.
Verdict interpret(const BitVector& decoded);

/// Runs rounds for one fixed config. The dense pipeline executes once at
/// construction and every shot samples the resulting exact distribution;
/// shot k always draws from Rng::split(seed, k), so a batch of shots and
/// the same shots run one-by-one give identical results.
class ProtocolEngine {
 public:
  explicit ProtocolEngine(ProtocolConfig config);

  const ProtocolConfig& config() const { return config_; }

  RoundResult run_shot(std::uint64_t shot_index) const;

 private:
  ProtocolConfig config_;
  std::map<Outcome, double> dense_dist_;  // populated for Backend::dense
  std::optional<structured::StructuredState> structured_;
  std::vector<TranscriptEntry> transcript_;
};

/// One-off convenience: equals ProtocolEngine(config).run_shot(shot_index).
RoundResult run_round(const ProtocolConfig& config, std::uint64_t shot_index = 0);

}  // namespace qdc
