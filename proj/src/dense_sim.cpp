#include "qdc/dense_sim.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qdc/errors.hpp"

namespace qdc::dense {

DenseState::DenseState(std::size_t num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw CapacityError("DenseState: " + std::to_string(num_qubits) +
                        " qubits requested, supported range is 1.." +
                        std::to_string(kMaxQubits));
  }
  amps_.assign(std::size_t{1} << num_qubits, {0.0, 0.0});
  amps_[0] = {1.0, 0.0};
}

void DenseState::require_qubit(std::size_t qubit) const {
  if (qubit >= num_qubits_) {
    throw std::out_of_range("DenseState: qubit " + std::to_string(qubit) +
                            " out of " + std::to_string(num_qubits_));
  }
}

void DenseState::check_norm() const {
  // Compensated sum: at 2^24 terms a naive accumulation can drift past the
  // tolerance on its own.
  double sum = 0.0;
  double comp = 0.0;
  for (const auto& a : amps_) {
    const double term = std::norm(a) - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw std::logic_error("DenseState: norm drifted to " +
                           std::to_string(sum) + " after a gate");
  }
}

void DenseState::h(std::size_t qubit) {
  require_qubit(qubit);
  const std::uint64_t stride = std::uint64_t{1} << qubit;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::uint64_t base = 0; base < amps_.size(); base += 2 * stride) {
    for (std::uint64_t off = 0; off < stride; ++off) {
      auto& a0 = amps_[base + off];
      auto& a1 = amps_[base + off + stride];
      const auto s0 = (a0 + a1) * inv_sqrt2;
      const auto s1 = (a0 - a1) * inv_sqrt2;
      a0 = s0;
      a1 = s1;
    }
  }
  check_norm();
}

void DenseState::x(std::size_t qubit) {
  require_qubit(qubit);
  const std::uint64_t stride = std::uint64_t{1} << qubit;
  for (std::uint64_t base = 0; base < amps_.size(); base += 2 * stride) {
    for (std::uint64_t off = 0; off < stride; ++off) {
      std::swap(amps_[base + off], amps_[base + off + stride]);
    }
  }
  check_norm();
}

void DenseState::cnot(std::size_t control, std::size_t target) {
  require_qubit(control);
  require_qubit(target);
  if (control == target) {
    throw std::invalid_argument("DenseState: cnot control equals target (" +
                                std::to_string(control) + ")");
  }
  const std::uint64_t cbit = std::uint64_t{1} << control;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  for (std::uint64_t i = 0; i < amps_.size(); ++i) {
    if ((i & cbit) != 0 && (i & tbit) == 0) {
      std::swap(amps_[i], amps_[i | tbit]);
    }
  }
  check_norm();
}

void DenseState::phase_flip_parity(std::uint64_t qubit_mask) {
  if (qubit_mask >> num_qubits_ != 0) {
    throw std::out_of_range("DenseState: phase mask addresses qubits beyond " +
                            std::to_string(num_qubits_));
  }
  for (std::uint64_t i = 0; i < amps_.size(); ++i) {
    if (std::popcount(i & qubit_mask) & 1) {
      amps_[i] = -amps_[i];
    }
  }
  check_norm();
}

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> ghz_cnot_layers(
    std::size_t count, GhzTopology topology) {
  if (count == 0) {
    throw std::invalid_argument("ghz_cnot_layers: zero qubits");
  }
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> layers;
  if (topology == GhzTopology::chain) {
    for (std::size_t i = 1; i < count; ++i) {
      layers.push_back({{i - 1, i}});
    }
    return layers;
  }
  // fanout: after layer l the first min(2^(l+1), count) qubits agree, so
  // layer l may copy from any of the first 2^l positions in parallel.
  for (std::size_t span = 1; span < count; span *= 2) {
    std::vector<std::pair<std::size_t, std::size_t>> layer;
    for (std::size_t i = 0; i < span && i + span < count; ++i) {
      layer.push_back({i, i + span});
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

DenseState prepare_ghz(std::size_t count, GhzTopology topology) {
  DenseState state(count);
  state.h(0);
  for (const auto& layer : ghz_cnot_layers(count, topology)) {
    for (const auto& [control, target] : layer) {
      state.cnot(control, target);
    }
  }
  return state;
}

namespace {

void validate_layout(const RegisterLayout& layout) {
  if (layout.player_count < 2) {
    throw std::invalid_argument("RegisterLayout: at least 2 players required, got " +
                                std::to_string(layout.player_count));
  }
  if (layout.register_width < 1) {
    throw std::invalid_argument("RegisterLayout: register width must be >= 1");
  }
  if (layout.total_qubits() > kMaxQubits) {
    throw CapacityError("RegisterLayout: " + std::to_string(layout.player_count) +
                        " players x " + std::to_string(layout.block_width()) +
                        " qubits = " + std::to_string(layout.total_qubits()) +
                        " qubits exceeds the dense cap of " +
                        std::to_string(kMaxQubits));
  }
}

}  // namespace

DenseState prepare_initial(const RegisterLayout& layout, GhzTopology topology) {
  validate_layout(layout);
  DenseState state(layout.total_qubits());
  const auto layers = ghz_cnot_layers(layout.player_count, topology);
  for (std::size_t j = 0; j < layout.register_width; ++j) {
    state.h(layout.input(0, j));
    for (const auto& layer : layers) {
      for (const auto& [control, target] : layer) {
        state.cnot(layout.input(control, j), layout.input(target, j));
      }
    }
  }
  if (layout.mode == EmbeddingMode::gate_level) {
    for (std::size_t i = 0; i < layout.player_count; ++i) {
      state.x(layout.output(i));
      state.h(layout.output(i));
    }
  }
  return state;
}

void apply_embedding(DenseState& state, const RegisterLayout& layout,
                     std::size_t player, const BitVector& payload) {
  validate_layout(layout);
  if (player >= layout.player_count) {
    throw std::out_of_range("apply_embedding: player " + std::to_string(player) +
                            " out of " + std::to_string(layout.player_count));
  }
  if (payload.length() != layout.register_width) {
    throw std::invalid_argument("apply_embedding: payload length " +
                                std::to_string(payload.length()) +
                                " does not match register width " +
                                std::to_string(layout.register_width));
  }
  if (layout.mode == EmbeddingMode::gate_level) {
    for (std::size_t j = 0; j < layout.register_width; ++j) {
      if (!payload.bit(j)) continue;
      std::size_t target = layout.output(player);
      if (g_embedding_fault) {
        target = layout.input((player + 1) % layout.player_count, j);
      }
      state.cnot(layout.input(player, j), target);
    }
  } else {
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < layout.register_width; ++j) {
      if (payload.bit(j)) {
        mask |= std::uint64_t{1} << layout.input(player, j);
      }
    }
    state.phase_flip_parity(mask);
  }
}

void apply_deciphering(DenseState& state, const RegisterLayout& layout) {
  validate_layout(layout);
  for (std::size_t i = 0; i < layout.player_count; ++i) {
    for (std::size_t j = 0; j < layout.register_width; ++j) {
      state.h(layout.input(i, j));
    }
  }
}

std::map<Outcome, double> input_distribution(const DenseState& state,
                                             const RegisterLayout& layout) {
  validate_layout(layout);
  if (state.num_qubits() != layout.total_qubits()) {
    throw std::invalid_argument("input_distribution: state has " +
                                std::to_string(state.num_qubits()) +
                                " qubits, layout expects " +
                                std::to_string(layout.total_qubits()));
  }
  const std::size_t n = layout.player_count;
  const std::size_t m = layout.register_width;
  const auto& amps = state.amplitudes();

  // Accumulate over the packed input pattern: player i's bits at positions
  // [i*m, (i+1)*m). Dense indexing, since n*m <= num_qubits <= 24.
  std::vector<double> probs(std::size_t{1} << (n * m), 0.0);
  for (std::uint64_t idx = 0; idx < amps.size(); ++idx) {
    const double p = std::norm(amps[idx]);
    if (p == 0.0) continue;
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if ((idx >> layout.input(i, j)) & 1) {
          key |= std::uint64_t{1} << (i * m + j);
        }
      }
    }
    probs[key] += p;
  }

  std::map<Outcome, double> dist;
  double total = 0.0;
  for (std::uint64_t key = 0; key < probs.size(); ++key) {
    if (probs[key] <= kProbFloor) continue;
    Outcome outcome;
    outcome.registers.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t player = n - 1 - k;
      BitVector reg(m);
      for (std::size_t j = 0; j < m; ++j) {
        reg.set_bit(j, (key >> (player * m + j)) & 1);
      }
      outcome.registers.push_back(std::move(reg));
    }
    dist.emplace(std::move(outcome), probs[key]);
    total += probs[key];
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw std::logic_error("input_distribution: retained mass " +
                           std::to_string(total) + " is not 1");
  }
  return dist;
}

Outcome sample(const std::map<Outcome, double>& dist, Rng& rng) {
  if (dist.empty()) {
    throw std::invalid_argument("sample: empty distribution");
  }
  const double u = rng.next_double();
  double acc = 0.0;
  for (const auto& [outcome, p] : dist) {
    acc += p;
    if (u < acc) return outcome;
  }
  return dist.rbegin()->first;
}

double minus_fidelity(const DenseState& state, std::size_t qubit) {
  if (qubit >= state.num_qubits()) {
    throw std::out_of_range("minus_fidelity: qubit " + std::to_string(qubit) +
                            " out of " + std::to_string(state.num_qubits()));
  }
  const auto& amps = state.amplitudes();
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  double p0 = 0.0;
  double p1 = 0.0;
  std::complex<double> coherence{0.0, 0.0};
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (i & bit) continue;
    p0 += std::norm(amps[i]);
    p1 += std::norm(amps[i | bit]);
    coherence += amps[i] * std::conj(amps[i | bit]);
  }
  // <-|rho|-> = (rho00 + rho11)/2 - Re(rho01)
  return 0.5 * (p0 + p1) - coherence.real();
}

}  // namespace qdc::dense
