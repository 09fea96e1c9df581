#include "qdc/protocol.hpp"

#include <bit>
#include <stdexcept>
#include <utility>

#include "qdc/errors.hpp"

namespace qdc {

std::string_view to_string(Backend backend) {
  return backend == Backend::dense ? "dense" : "structured";
}

std::string_view to_string(RunMode mode) {
  return mode == RunMode::local ? "local" : "distributed";
}

std::string_view to_string(dense::EmbeddingMode mode) {
  return mode == dense::EmbeddingMode::gate_level ? "gate" : "phase";
}

std::string_view to_string(Verdict::Kind kind) {
  return kind == Verdict::Kind::employer_paid ? "employer_paid"
                                              : "cryptographer_paid";
}

Backend backend_from_string(std::string_view text) {
  if (text == "dense") return Backend::dense;
  if (text == "structured") return Backend::structured;
  throw std::invalid_argument("unknown backend '" + std::string(text) +
                              "'; expected dense or structured");
}

RunMode run_mode_from_string(std::string_view text) {
  if (text == "local") return RunMode::local;
  if (text == "distributed") return RunMode::distributed;
  throw std::invalid_argument("unknown mode '" + std::string(text) +
                              "'; expected local or distributed");
}

dense::EmbeddingMode embedding_from_string(std::string_view text) {
  if (text == "gate") return dense::EmbeddingMode::gate_level;
  if (text == "phase") return dense::EmbeddingMode::phase_oracle;
  throw std::invalid_argument("unknown embedding '" + std::string(text) +
                              "'; expected gate or phase");
}

void ProtocolConfig::validate() const {
  if (player_count < 2) {
    throw std::invalid_argument("config: at least 2 players required, got " +
                                std::to_string(player_count));
  }
  if (register_width < 1) {
    throw std::invalid_argument("config: register width must be >= 1");
  }
  if (payer && *payer >= player_count) {
    throw std::invalid_argument("config: payer " + std::to_string(*payer) +
                                " out of range 0.." +
                                std::to_string(player_count - 1));
  }
  if (!payer && amount != 0) {
    throw std::invalid_argument("config: amount " + std::to_string(amount) +
                                " given without a payer; set --payer or drop "
                                "the amount");
  }
  if (static_cast<std::size_t>(std::bit_width(amount)) > register_width) {
    throw std::invalid_argument("config: amount " + std::to_string(amount) +
                                " needs " +
                                std::to_string(std::bit_width(amount)) +
                                " bits, register width is " +
                                std::to_string(register_width));
  }
  if (shots < 1) {
    throw std::invalid_argument("config: shots must be >= 1");
  }
  if (backend == Backend::dense) {
    const dense::RegisterLayout layout{player_count, register_width, embedding};
    if (layout.total_qubits() > dense::kMaxQubits) {
      throw CapacityError(
          "config: dense backend needs " + std::to_string(layout.total_qubits()) +
          " qubits for " + std::to_string(player_count) + " players x width " +
          std::to_string(register_width) + ", cap is " +
          std::to_string(dense::kMaxQubits) + "; use the structured backend");
    }
  }
}

BitVector ProtocolConfig::payer_payload() const {
  if (!payer) return BitVector(register_width);
  return BitVector::from_amount(amount, register_width);
}

BitVector decode(const Outcome& outcome) { return outcome.xor_fold(); }

Verdict interpret(const BitVector& decoded) {
  if (decoded.is_zero()) return {Verdict::Kind::employer_paid, 0};
  return {Verdict::Kind::cryptographer_paid, decoded.to_amount()};
}

ProtocolEngine::ProtocolEngine(ProtocolConfig config) : config_(std::move(config)) {
  config_.validate();
  const BitVector payload = config_.payer_payload();

  transcript_.push_back(
      {"psi0", std::to_string(config_.player_count) +
                   " players share one entangled tuple per bit of a " +
                   std::to_string(config_.register_width) +
                   "-bit register (" + std::string(to_string(config_.backend)) +
                   " backend)"});
  if (config_.payer) {
    std::string note = "player " + std::to_string(*config_.payer) +
                       " embedded amount " + std::to_string(config_.amount);
    if (config_.amount == 0) {
      note += "; a zero amount embeds the identity, so the round is "
              "indistinguishable from a payerless one";
    }
    transcript_.push_back({"psi1", std::move(note)});
  } else {
    transcript_.push_back({"psi1", "no payer; the embedding phase is the identity"});
  }
  transcript_.push_back(
      {"psi2", "deciphering transform applied to every input register"});
  transcript_.push_back({"psif", "all registers measured and announced"});

  // Every player embeds: the payer its payload, everyone else the zero
  // vector (an exact identity, but performing it keeps the pipeline honest
  // about what each participant does).
  if (config_.backend == Backend::dense) {
    const dense::RegisterLayout layout{config_.player_count,
                                       config_.register_width,
                                       config_.embedding};
    auto state = dense::prepare_initial(layout);
    const BitVector zero(config_.register_width);
    for (std::size_t i = 0; i < config_.player_count; ++i) {
      dense::apply_embedding(state, layout, i,
                             config_.payer && *config_.payer == i ? payload : zero);
    }
    dense::apply_deciphering(state, layout);
    dense_dist_ = dense::input_distribution(state, layout);
  } else {
    structured_.emplace(config_.player_count, config_.register_width);
    const BitVector zero(config_.register_width);
    for (std::size_t i = 0; i < config_.player_count; ++i) {
      structured_->embed(config_.payer && *config_.payer == i ? payload : zero);
    }
  }
}

RoundResult ProtocolEngine::run_shot(std::uint64_t shot_index) const {
  Rng rng = Rng::split(config_.seed, shot_index);
  Outcome outcome = config_.backend == Backend::dense
                        ? dense::sample(dense_dist_, rng)
                        : structured_->sample(rng);
  BitVector decoded = decode(outcome);
  Verdict verdict = interpret(decoded);
  return RoundResult{std::move(outcome), std::move(decoded), verdict, transcript_};
}

RoundResult run_round(const ProtocolConfig& config, std::uint64_t shot_index) {
  return ProtocolEngine(config).run_shot(shot_index);
}

}  // namespace qdc
