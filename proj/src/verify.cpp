#include "qdc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include <boost/math/distributions/chi_squared.hpp>

#include "qdc/bitvec.hpp"
#include "qdc/dense_sim.hpp"
#include "qdc/errors.hpp"
#include "qdc/netharness.hpp"
#include "qdc/outcome.hpp"
#include "qdc/protocol.hpp"
#include "qdc/rng.hpp"
#include "qdc/structured_sim.hpp"

namespace qdc::verify {

namespace {

constexpr double kDistTolerance = 1e-10;
constexpr double kMarginalTolerance = 1e-12;
constexpr double kSignificance = 0.001;

/// Restores the embedding-fault hook on scope exit.
class FaultScope {
 public:
  explicit FaultScope(bool enable) : saved_(dense::g_embedding_fault) {
    dense::g_embedding_fault = enable;
  }
  ~FaultScope() { dense::g_embedding_fault = saved_; }
  FaultScope(const FaultScope&) = delete;
  FaultScope& operator=(const FaultScope&) = delete;

 private:
  bool saved_;
};

std::map<Outcome, double> dense_distribution(std::size_t n, std::size_t m,
                                             std::size_t payer,
                                             const BitVector& payload,
                                             dense::EmbeddingMode mode) {
  const dense::RegisterLayout layout{n, m, mode};
  auto state = dense::prepare_initial(layout);
  dense::apply_embedding(state, layout, payer, payload);
  dense::apply_deciphering(state, layout);
  return dense::input_distribution(state, layout);
}

std::optional<std::string> compare_distributions(
    const std::map<Outcome, double>& a, const std::map<Outcome, double>& b,
    double tolerance) {
  if (a.size() != b.size()) {
    return "support sizes differ: " + std::to_string(a.size()) + " vs " +
           std::to_string(b.size());
  }
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (!(ia->first == ib->first)) {
      return "supports diverge at '" + ia->first.key() + "' vs '" +
             ib->first.key() + "'";
    }
    if (std::abs(ia->second - ib->second) > tolerance) {
      return "probability gap " + std::to_string(std::abs(ia->second - ib->second)) +
             " at '" + ia->first.key() + "'";
    }
  }
  return std::nullopt;
}

double chi_squared_threshold(std::size_t degrees_of_freedom) {
  const boost::math::chi_squared_distribution<double> dist(
      static_cast<double>(degrees_of_freedom));
  return boost::math::quantile(dist, 1.0 - kSignificance);
}

BitVector nonzero_payload(std::size_t width, Rng& rng) {
  BitVector p = BitVector::random(width, rng);
  if (p.is_zero()) p.set_bit(0, true);
  return p;
}

}  // namespace

void Options::validate() const {
  if (max_players < 2) {
    throw std::invalid_argument("verify: need at least 2 players, got " +
                                std::to_string(max_players));
  }
  if (max_width < 1) {
    throw std::invalid_argument("verify: register width bound must be >= 1");
  }
  if (max_players * (max_width + 1) > dense::kMaxQubits) {
    throw std::invalid_argument(
        "verify: " + std::to_string(max_players) + " players x (" +
        std::to_string(max_width) + "+1) qubits exceeds the dense cap of " +
        std::to_string(dense::kMaxQubits));
  }
  if (shots < 1) {
    throw std::invalid_argument("verify: shots must be >= 1");
  }
}

CheckResult check_cip(const Options&) {
  constexpr std::size_t kMaxWidth = 10;
  for (std::size_t m = 1; m <= kMaxWidth; ++m) {
    const std::uint64_t half = std::uint64_t{1} << (m - 1);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << m); ++c) {
      const auto [zeros, ones] = cip_census(BitVector::from_amount(c, m));
      const std::uint64_t want_zeros = c == 0 ? 2 * half : half;
      const std::uint64_t want_ones = c == 0 ? 0 : half;
      if (zeros != want_zeros || ones != want_ones) {
        return {"cip-census", false,
                "m=" + std::to_string(m) + " c=" + std::to_string(c) + " gave (" +
                    std::to_string(zeros) + "," + std::to_string(ones) + ")"};
      }
    }
  }
  return {"cip-census", true,
          "exact equal halves for every nonzero c, exhaustive to m=" +
              std::to_string(kMaxWidth)};
}

CheckResult check_backend_equivalence(const Options& options) {
  Rng rng = Rng::split(options.seed, 11);
  for (std::size_t n = 2; n <= options.max_players; ++n) {
    for (std::size_t m = 1; m <= options.max_width; ++m) {
      for (int trial = 0; trial < 5; ++trial) {
        const BitVector payload = BitVector::random(m, rng);
        const std::size_t payer = rng.next_u64() % n;
        const auto dense_dist = dense_distribution(
            n, m, payer, payload, dense::EmbeddingMode::gate_level);
        structured::StructuredState state(n, m);
        state.embed(payload);
        const auto structured_dist = state.exact_distribution();
        if (const auto err = compare_distributions(dense_dist, structured_dist,
                                                   kDistTolerance)) {
          return {"backend-equivalence", false,
                  "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                      " payload=" + payload.str() + ": " + *err};
        }
      }
    }
  }
  return {"backend-equivalence", true,
          "dense pipeline matches closed form pointwise across the grid"};
}

CheckResult check_anonymity(const Options& options) {
  const std::size_t m = std::min<std::size_t>(2, options.max_width);
  const BitVector payload = BitVector::from_amount(m >= 2 ? 2 : 1, m);
  for (const std::size_t n : {std::size_t{3}, std::size_t{4}}) {
    if (n > options.max_players && n > 3) continue;
    const auto baseline =
        dense_distribution(n, m, 0, payload, dense::EmbeddingMode::gate_level);
    for (std::size_t payer = 1; payer < n; ++payer) {
      const auto other = dense_distribution(n, m, payer, payload,
                                            dense::EmbeddingMode::gate_level);
      if (const auto err =
              compare_distributions(baseline, other, kDistTolerance)) {
        return {"anonymity-invariance", false,
                "n=" + std::to_string(n) + " payer=" + std::to_string(payer) +
                    ": " + *err};
      }
    }
  }
  return {"anonymity-invariance", true,
          "outcome distribution is payer-independent at fixed payload"};
}

CheckResult check_correlation(const Options& options) {
  const FaultScope fault(options.inject_embedding_fault);
  Rng rng = Rng::split(options.seed, 13);
  std::set<std::pair<std::size_t, std::size_t>> grid{
      {2, 1},
      {2, options.max_width},
      {options.max_players, 1},
      {options.max_players, options.max_width}};
  for (const auto& [n, m] : grid) {
    const BitVector payload = nonzero_payload(m, rng);
    const std::size_t payer = rng.next_u64() % n;
    const auto dist = dense_distribution(n, m, payer, payload,
                                         dense::EmbeddingMode::gate_level);
    for (const auto& [outcome, prob] : dist) {
      if (outcome.xor_fold() != payload) {
        return {"correlation-property", false,
                "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                    ": outcome '" + outcome.key() + "' folds to " +
                    outcome.xor_fold().str() + ", payload is " + payload.str()};
      }
    }
    structured::StructuredState state(n, m);
    state.embed(payload);
    for (std::uint64_t shot = 0; shot < 1000; ++shot) {
      Rng shot_rng = Rng::split(derive_seed(options.seed, 14), shot);
      const Outcome outcome = state.sample(shot_rng);
      if (outcome.xor_fold() != payload) {
        return {"correlation-property", false,
                "structured n=" + std::to_string(n) + " m=" + std::to_string(m) +
                    " shot " + std::to_string(shot) + " broke the fold"};
      }
    }
  }
  return {"correlation-property", true,
          "every dense support element and structured sample folds to the "
          "embedded payload"};
}

CheckResult check_ghz_topologies(const Options&) {
  for (std::size_t n = 2; n <= 8; ++n) {
    const auto chain = dense::prepare_ghz(n, dense::GhzTopology::chain);
    const auto fanout = dense::prepare_ghz(n, dense::GhzTopology::fanout);
    for (std::size_t i = 0; i < chain.amplitudes().size(); ++i) {
      if (std::abs(chain.amplitudes()[i] - fanout.amplitudes()[i]) >
          kMarginalTolerance) {
        return {"ghz-topologies", false,
                "n=" + std::to_string(n) + ": states differ at index " +
                    std::to_string(i)};
      }
    }
    const auto layers = dense::ghz_cnot_layers(n, dense::GhzTopology::fanout);
    const auto expected =
        static_cast<std::size_t>(std::bit_width(n - 1));
    if (layers.size() != expected) {
      return {"ghz-topologies", false,
              "n=" + std::to_string(n) + ": fanout has " +
                  std::to_string(layers.size()) + " layers, expected " +
                  std::to_string(expected)};
    }
    for (const auto& layer : layers) {
      std::set<std::size_t> touched;
      for (const auto& [control, target] : layer) {
        if (!touched.insert(control).second || !touched.insert(target).second) {
          return {"ghz-topologies", false,
                  "n=" + std::to_string(n) + ": a fanout layer reuses a qubit"};
        }
      }
    }
  }
  return {"ghz-topologies", true,
          "chain and fanout agree exactly for n=2..8; fanout depth is "
          "ceil(lg n) with disjoint layers"};
}

CheckResult check_kickback(const Options& options) {
  Rng rng = Rng::split(options.seed, 17);
  for (std::size_t n = 2; n <= options.max_players; ++n) {
    for (std::size_t m = 1; m <= options.max_width; ++m) {
      for (int trial = 0; trial < 2; ++trial) {
        const BitVector payload = BitVector::random(m, rng);
        const std::size_t payer = rng.next_u64() % n;

        const dense::RegisterLayout gate_layout{n, m,
                                                dense::EmbeddingMode::gate_level};
        auto gate_state = dense::prepare_initial(gate_layout);
        dense::apply_embedding(gate_state, gate_layout, payer, payload);
        dense::apply_deciphering(gate_state, gate_layout);
        for (std::size_t i = 0; i < n; ++i) {
          const double fidelity =
              dense::minus_fidelity(gate_state, gate_layout.output(i));
          if (std::abs(fidelity - 1.0) > 1e-10) {
            return {"phase-kickback", false,
                    "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                        ": output qubit of player " + std::to_string(i) +
                        " has fidelity " + std::to_string(fidelity)};
          }
        }
        const auto gate_dist = dense::input_distribution(gate_state, gate_layout);

        const auto phase_dist = dense_distribution(
            n, m, payer, payload, dense::EmbeddingMode::phase_oracle);
        if (const auto err = compare_distributions(gate_dist, phase_dist,
                                                   kMarginalTolerance)) {
          return {"phase-kickback", false,
                  "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                      " payload=" + payload.str() + ": " + *err};
        }
      }
    }
  }
  return {"phase-kickback", true,
          "gate-level and phase-oracle embeddings agree; output qubits stay "
          "exactly in the minus state"};
}

CheckResult check_sampler_uniformity(const Options& options) {
  const structured::StructuredState state(3, 2);
  const auto support = state.exact_distribution();
  std::map<Outcome, std::uint64_t> counts;
  for (const auto& [outcome, prob] : support) counts[outcome] = 0;
  const std::uint64_t stream = derive_seed(options.seed, 19);
  for (std::uint64_t shot = 0; shot < options.shots; ++shot) {
    Rng rng = Rng::split(stream, shot);
    const Outcome outcome = state.sample(rng);
    const auto it = counts.find(outcome);
    if (it == counts.end()) {
      return {"sampler-uniformity", false,
              "sample '" + outcome.key() + "' is outside the support"};
    }
    ++it->second;
  }
  const double expected =
      static_cast<double>(options.shots) / static_cast<double>(counts.size());
  double chi2 = 0.0;
  for (const auto& [outcome, observed] : counts) {
    const double diff = static_cast<double>(observed) - expected;
    chi2 += diff * diff / expected;
  }
  const double threshold = chi_squared_threshold(counts.size() - 1);
  const std::string detail =
      "chi2=" + std::to_string(chi2) + " threshold=" + std::to_string(threshold) +
      " cells=" + std::to_string(counts.size()) +
      " shots=" + std::to_string(options.shots);
  return {"sampler-uniformity", chi2 <= threshold, detail};
}

CheckResult check_sampling_agreement(const Options& options) {
  ProtocolConfig config;
  config.player_count = 3;
  config.register_width = 2;
  config.payer = 1;
  config.amount = 2;
  config.shots = options.shots;

  config.backend = Backend::dense;
  config.seed = derive_seed(options.seed, 23);
  const ProtocolEngine dense_engine(config);
  config.backend = Backend::structured;
  config.seed = derive_seed(options.seed, 29);
  const ProtocolEngine structured_engine(config);

  std::map<std::string, std::uint64_t> dense_counts;
  std::map<std::string, std::uint64_t> structured_counts;
  for (std::uint64_t shot = 0; shot < options.shots; ++shot) {
    ++dense_counts[dense_engine.run_shot(shot).outcome.key()];
    ++structured_counts[structured_engine.run_shot(shot).outcome.key()];
  }

  std::set<std::string> cells;
  for (const auto& [key, count] : dense_counts) cells.insert(key);
  for (const auto& [key, count] : structured_counts) cells.insert(key);
  double chi2 = 0.0;
  for (const auto& key : cells) {
    const double o1 = dense_counts.contains(key)
                          ? static_cast<double>(dense_counts.at(key))
                          : 0.0;
    const double o2 = structured_counts.contains(key)
                          ? static_cast<double>(structured_counts.at(key))
                          : 0.0;
    const double diff = o1 - o2;
    chi2 += diff * diff / (o1 + o2);  // equal sample sizes on both sides
  }
  const double threshold = chi_squared_threshold(cells.size() - 1);
  const std::string detail =
      "chi2=" + std::to_string(chi2) + " threshold=" + std::to_string(threshold) +
      " cells=" + std::to_string(cells.size()) +
      " shots=" + std::to_string(options.shots) + " per backend";
  return {"sampling-agreement", chi2 <= threshold, detail};
}

CheckResult check_distributed_equivalence(const Options& options) {
  constexpr std::uint64_t kRounds = 50;
  for (const std::size_t n : {std::size_t{2}, std::size_t{4}}) {
    if (n > options.max_players && n != 2) continue;
    ProtocolConfig config;
    config.player_count = n;
    config.register_width = 2;
    config.payer = 0;
    config.amount = 1;
    config.backend = Backend::structured;
    config.mode = RunMode::distributed;
    config.shots = kRounds;
    config.seed = derive_seed(options.seed, 31);

    net::Network network(config);
    ProtocolConfig local = config;
    local.mode = RunMode::local;
    const ProtocolEngine engine(local);

    for (std::uint64_t round = 0; round < kRounds; ++round) {
      const auto results = network.run_round(round);
      const RoundResult reference = engine.run_shot(round);
      if (!net::verify_consensus(results)) {
        return {"distributed-equivalence", false,
                "n=" + std::to_string(n) + " round " + std::to_string(round) +
                    ": consensus failed"};
      }
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].outcome != reference.outcome ||
            results[i].decoded != reference.decoded ||
            !(results[i].verdict == reference.verdict)) {
          return {"distributed-equivalence", false,
                  "n=" + std::to_string(n) + " round " + std::to_string(round) +
                      " node " + std::to_string(i) +
                      " diverged from the localized run"};
        }
      }
    }
    const std::size_t expected_messages = kRounds * n * (n - 1);
    if (network.message_log().size() != expected_messages) {
      return {"distributed-equivalence", false,
              "n=" + std::to_string(n) + ": logged " +
                  std::to_string(network.message_log().size()) +
                  " messages, expected " + std::to_string(expected_messages)};
    }
  }
  return {"distributed-equivalence", true,
          "every node reproduces the localized decode, with exactly n(n-1) "
          "authenticated messages per round"};
}

std::vector<CheckResult> run_all(const Options& options) {
  options.validate();
  using CheckFn = CheckResult (*)(const Options&);
  constexpr std::pair<const char*, CheckFn> kChecks[] = {
      {"cip-census", check_cip},
      {"backend-equivalence", check_backend_equivalence},
      {"anonymity-invariance", check_anonymity},
      {"correlation-property", check_correlation},
      {"ghz-topologies", check_ghz_topologies},
      {"phase-kickback", check_kickback},
      {"sampler-uniformity", check_sampler_uniformity},
      {"sampling-agreement", check_sampling_agreement},
      {"distributed-equivalence", check_distributed_equivalence},
  };
  std::vector<CheckResult> results;
  results.reserve(std::size(kChecks));
  for (const auto& [name, fn] : kChecks) {
    try {
      results.push_back(fn(options));
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("exception: ") + e.what()});
    }
  }
  return results;
}

}  // namespace qdc::verify
