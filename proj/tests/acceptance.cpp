// Acceptance gate: every release-blocking criterion in one binary, one
// pass/fail line per criterion, nonzero exit if anything fails. Expects the
// CLI binary's path as argv[1] for the report-determinism criterion.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qdc/bitvec.hpp"
#include "qdc/dense_sim.hpp"
#include "qdc/netharness.hpp"
#include "qdc/outcome.hpp"
#include "qdc/protocol.hpp"
#include "qdc/rng.hpp"
#include "qdc/structured_sim.hpp"

using namespace qdc;
using Dist = std::map<Outcome, double>;

namespace {

std::string g_cli_path;

Dist dense_distribution(std::size_t n, std::size_t m, std::size_t payer,
                        const BitVector& payload, dense::EmbeddingMode mode) {
  const dense::RegisterLayout layout{n, m, mode};
  dense::DenseState state = dense::prepare_initial(layout);
  dense::apply_embedding(state, layout, payer, payload);
  dense::apply_deciphering(state, layout);
  return dense::input_distribution(state, layout);
}

// Empty string on agreement, else the first pointwise discrepancy.
std::string compare(const Dist& a, const Dist& b, double tol) {
  if (a.size() != b.size()) {
    return "support sizes differ: " + std::to_string(a.size()) + " vs " +
           std::to_string(b.size());
  }
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (!(ia->first == ib->first)) {
      return "supports differ at '" + ia->first.key() + "' vs '" +
             ib->first.key() + "'";
    }
    if (std::abs(ia->second - ib->second) > tol) {
      return "probability of '" + ia->first.key() + "' differs by " +
             std::to_string(std::abs(ia->second - ib->second));
    }
  }
  return {};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---- criteria ----------------------------------------------------------

std::string payer_worked_example() {
  const BitVector payload = BitVector::from_string("1100");
  const Dist dist =
      dense_distribution(4, 4, 0, payload, dense::EmbeddingMode::gate_level);
  if (dist.size() != 4096) {
    return "support size " + std::to_string(dist.size()) + ", expected 4096";
  }
  const double uniform = 1.0 / 4096.0;
  for (const auto& [outcome, prob] : dist) {
    if (std::abs(prob - uniform) > 1e-10) {
      return "'" + outcome.key() + "' has probability " + std::to_string(prob);
    }
    if (outcome.xor_fold() != payload) {
      return "'" + outcome.key() + "' does not decode to 1100";
    }
  }
  if (!dist.contains(Outcome::from_key("0001 1000 0111 0010"))) {
    return "expected support element (0001, 1000, 0111, 0010) missing";
  }
  return {};
}

std::string employer_worked_example() {
  const Dist dist =
      dense_distribution(4, 4, 0, BitVector(4), dense::EmbeddingMode::gate_level);
  if (dist.size() != 4096) {
    return "support size " + std::to_string(dist.size()) + ", expected 4096";
  }
  for (const auto& [outcome, prob] : dist) {
    if (!outcome.xor_fold().is_zero()) {
      return "'" + outcome.key() + "' does not decode to 0000";
    }
  }
  if (!dist.contains(Outcome::from_key("0001 1100 1001 0100"))) {
    return "expected support element (0001, 1100, 1001, 0100) missing";
  }

  ProtocolConfig config;
  config.player_count = 4;
  config.register_width = 4;
  config.backend = Backend::dense;
  config.shots = 4096;
  config.seed = 12;
  const ProtocolEngine engine(config);
  for (std::uint64_t shot = 0; shot < config.shots; ++shot) {
    if (engine.run_shot(shot).verdict.kind != Verdict::Kind::employer_paid) {
      return "shot " + std::to_string(shot) + " did not read as employer-paid";
    }
  }
  return {};
}

std::string inner_product_census() {
  for (std::size_t m = 1; m <= 12; ++m) {
    const std::uint64_t half = std::uint64_t{1} << (m - 1);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << m); ++c) {
      const auto [zeros, ones] = cip_census(BitVector::from_amount(c, m));
      const std::uint64_t want_zeros = c == 0 ? 2 * half : half;
      const std::uint64_t want_ones = c == 0 ? 0 : half;
      if (zeros != want_zeros || ones != want_ones) {
        return "m=" + std::to_string(m) + " c=" + std::to_string(c) + " gave (" +
               std::to_string(zeros) + ", " + std::to_string(ones) + ")";
      }
    }
  }
  return {};
}

std::string backend_equivalence() {
  Rng rng(2024);
  for (std::size_t n = 2; n <= 4; ++n) {
    for (std::size_t m = 1; m <= 3; ++m) {
      for (int trial = 0; trial < 20; ++trial) {
        const BitVector payload = BitVector::random(m, rng);
        const std::size_t payer = rng.next_u64() % n;
        const Dist dense_dist = dense_distribution(
            n, m, payer, payload, dense::EmbeddingMode::gate_level);
        structured::StructuredState state(n, m);
        state.embed(payload);
        const std::string err =
            compare(dense_dist, state.exact_distribution(), 1e-10);
        if (!err.empty()) {
          return "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                 " payload=" + payload.str() + ": " + err;
        }
      }
    }
  }
  return {};
}

std::string payer_anonymity() {
  const BitVector payload = BitVector::from_string("10");
  for (const std::size_t n : {std::size_t{3}, std::size_t{4}}) {
    const Dist baseline =
        dense_distribution(n, 2, 0, payload, dense::EmbeddingMode::gate_level);
    for (std::size_t payer = 1; payer < n; ++payer) {
      const std::string err = compare(
          baseline,
          dense_distribution(n, 2, payer, payload,
                             dense::EmbeddingMode::gate_level),
          1e-10);
      if (!err.empty()) {
        return "n=" + std::to_string(n) + " payer=" + std::to_string(payer) +
               ": " + err;
      }
    }
  }
  return {};
}

std::string phase_kickback() {
  Rng rng(4096);
  for (std::size_t n = 2; n <= 4; ++n) {
    for (std::size_t m = 1; m <= 3; ++m) {
      for (int trial = 0; trial < 20; ++trial) {
        const BitVector payload = BitVector::random(m, rng);
        const std::size_t payer = rng.next_u64() % n;

        const dense::RegisterLayout layout{n, m, dense::EmbeddingMode::gate_level};
        dense::DenseState gate_state = dense::prepare_initial(layout);
        dense::apply_embedding(gate_state, layout, payer, payload);
        dense::apply_deciphering(gate_state, layout);
        for (std::size_t i = 0; i < n; ++i) {
          const double fidelity =
              dense::minus_fidelity(gate_state, layout.output(i));
          if (std::abs(fidelity - 1.0) > 1e-10) {
            return "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                   ": output of player " + std::to_string(i) +
                   " has minus-state fidelity " + std::to_string(fidelity);
          }
        }

        const std::string err =
            compare(dense::input_distribution(gate_state, layout),
                    dense_distribution(n, m, payer, payload,
                                       dense::EmbeddingMode::phase_oracle),
                    1e-12);
        if (!err.empty()) {
          return "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                 " payload=" + payload.str() + ": " + err;
        }
      }
    }
  }
  return {};
}

std::string entanglement_preparation() {
  for (std::size_t n = 2; n <= 8; ++n) {
    const dense::DenseState chain = dense::prepare_ghz(n, dense::GhzTopology::chain);
    const dense::DenseState fanout =
        dense::prepare_ghz(n, dense::GhzTopology::fanout);
    for (std::size_t i = 0; i < chain.amplitudes().size(); ++i) {
      if (std::abs(chain.amplitudes()[i] - fanout.amplitudes()[i]) > 1e-12) {
        return "n=" + std::to_string(n) + ": circuits differ at index " +
               std::to_string(i);
      }
    }
    const std::size_t layers =
        dense::ghz_cnot_layers(n, dense::GhzTopology::fanout).size();
    const std::size_t expected = static_cast<std::size_t>(std::bit_width(n - 1));
    if (layers != expected) {
      return "n=" + std::to_string(n) + ": fanout uses " +
             std::to_string(layers) + " layers, expected " +
             std::to_string(expected);
    }
  }
  return {};
}

std::string distributed_equals_localized() {
  constexpr std::uint64_t kRounds = 1000;
  for (const std::size_t n : {std::size_t{2}, std::size_t{4}}) {
    ProtocolConfig config;
    config.player_count = n;
    config.register_width = 2;
    config.payer = 0;
    config.amount = 2;
    config.backend = Backend::structured;
    config.mode = RunMode::distributed;
    config.shots = kRounds;
    config.seed = 77;

    net::Network network(config);
    ProtocolConfig local = config;
    local.mode = RunMode::local;
    const ProtocolEngine engine(local);

    for (std::uint64_t round = 0; round < kRounds; ++round) {
      const auto results = network.run_round(round);
      if (!net::verify_consensus(results)) {
        return "n=" + std::to_string(n) + " round " + std::to_string(round) +
               ": no consensus";
      }
      const RoundResult reference = engine.run_shot(round);
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].decoded != reference.decoded ||
            !(results[i].verdict == reference.verdict)) {
          return "n=" + std::to_string(n) + " round " + std::to_string(round) +
                 " node " + std::to_string(i) + " diverged from localized mode";
        }
      }
    }

    std::map<std::uint64_t, std::size_t> per_round;
    for (const auto& entry : network.message_log()) {
      if (!entry.accepted) {
        return "n=" + std::to_string(n) + ": unexpected rejected message";
      }
      ++per_round[entry.round_id];
    }
    if (per_round.size() != kRounds) {
      return "n=" + std::to_string(n) + ": messages logged for " +
             std::to_string(per_round.size()) + " rounds";
    }
    for (const auto& [round, count] : per_round) {
      if (count != n * (n - 1)) {
        return "n=" + std::to_string(n) + " round " + std::to_string(round) +
               ": " + std::to_string(count) + " messages, expected " +
               std::to_string(n * (n - 1));
      }
    }

    // A single flipped register bit on one link must be rejected.
    net::Network tampered(config);
    tampered.set_tamper(0, 1, [](const std::string& wire) {
      std::size_t pos = wire.find(' ');
      pos = wire.find(' ', pos + 1);
      std::string out = wire;
      out[pos + 1] = out[pos + 1] == '0' ? '1' : '0';
      return out;
    });
    bool rejected = false;
    try {
      tampered.run_round(0);
    } catch (const net::SecurityError&) {
      rejected = true;
    }
    if (!rejected) {
      return "n=" + std::to_string(n) + ": tampered round was not rejected";
    }
    bool logged = false;
    for (const auto& entry : tampered.message_log()) {
      logged = logged || !entry.accepted;
    }
    if (!logged) {
      return "n=" + std::to_string(n) + ": tampering left no rejection log";
    }
  }
  return {};
}

std::string thousand_player_scaling() {
  Rng setup(31337);
  const BitVector payload = BitVector::random(256, setup);
  structured::StructuredState state(1000, 256);
  state.embed(payload);
  Rng rng = Rng::split(31337, 1);

  const auto start = std::chrono::steady_clock::now();
  for (int shot = 0; shot < 1000; ++shot) {
    const Outcome outcome = state.sample(rng);
    if (outcome.xor_fold() != payload) {
      return "shot " + std::to_string(shot) + " broke the group relation";
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed >= 1.0) {
    return "1000 shots took " + std::to_string(elapsed) + " s, bound is 1 s";
  }
  return {};
}

std::string report_determinism() {
  if (g_cli_path.empty()) {
    return "no CLI path given on the command line";
  }
  const std::string args =
      " run --n 3 --m 2 --payer 1 --amount 2 --backend dense"
      " --shots 200 --seed 7 --format json --out ";
  const std::string first = "acceptance_rep_a.json";
  const std::string second = "acceptance_rep_b.json";
  for (const std::string& out : {first, second}) {
    const int rc = std::system((g_cli_path + args + out).c_str());
    if (rc != 0) {
      return "CLI exited with status " + std::to_string(rc);
    }
  }
  const std::string a = read_file(first);
  const std::string b = read_file(second);
  std::remove(first.c_str());
  std::remove(second.c_str());
  if (a.empty()) {
    return "CLI produced an empty report";
  }
  if (a != b) {
    return "two identical runs produced different report bytes";
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];

  struct Criterion {
    const char* name;
    std::function<std::string()> run;
    double time_limit_s;  // 0 means no stated bound
  };
  const std::vector<Criterion> criteria{
      {"payer-worked-example", payer_worked_example, 10.0},
      {"employer-worked-example", employer_worked_example, 10.0},
      {"inner-product-census", inner_product_census, 30.0},
      {"backend-equivalence", backend_equivalence, 60.0},
      {"payer-anonymity", payer_anonymity, 30.0},
      {"phase-kickback", phase_kickback, 0.0},
      {"entanglement-preparation", entanglement_preparation, 0.0},
      {"distributed-equals-localized", distributed_equals_localized, 30.0},
      {"thousand-player-scaling", thousand_player_scaling, 0.0},
      {"report-determinism", report_determinism, 0.0},
  };

  bool all_passed = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = criteria[i].run();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (detail.empty() && criteria[i].time_limit_s > 0.0 &&
        elapsed > criteria[i].time_limit_s) {
      detail = "took " + std::to_string(elapsed) + " s, bound is " +
               std::to_string(criteria[i].time_limit_s) + " s";
    }
    char line[128];
    std::snprintf(line, sizeof(line), "%s %zu. %s (%.2fs)",
                  detail.empty() ? "[PASS]" : "[FAIL]", i + 1, criteria[i].name,
                  elapsed);
    std::cout << line;
    if (!detail.empty()) {
      std::cout << ": " << detail;
      all_passed = false;
    }
    std::cout << '\n';
  }
  return all_passed ? 0 : 1;
}
