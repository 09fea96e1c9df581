#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qdc::verify {

/// Outcome of one named invariant check; `detail` carries either the
/// parameters covered or the first counterexample found.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Suite bounds. Dense oracle comparisons run every (n, m) up to
/// (max_players, max_width), so max_players * (max_width + 1) must stay
/// within the dense qubit cap; validate() enforces that up front.
struct Options {
  std::size_t max_players = 4;
  std::size_t max_width = 3;
  std::uint64_t shots = 100000;
  std::uint64_t seed = 1;
  /// Deliberately miswires one embedding, which the correlation check must
  /// then catch; demonstrates the check has teeth.
  bool inject_embedding_fault = false;

  void validate() const;
};

CheckResult check_cip(const Options& options);
CheckResult check_backend_equivalence(const Options& options);
CheckResult check_anonymity(const Options& options);
CheckResult check_correlation(const Options& options);
CheckResult check_ghz_topologies(const Options& options);
CheckResult check_kickback(const Options& options);
CheckResult check_sampler_uniformity(const Options& options);
CheckResult check_sampling_agreement(const Options& options);
CheckResult check_distributed_equivalence(const Options& options);

/// Runs every check in a fixed order. A check that throws is reported as
/// failed with the exception text; the suite always completes.
std::vector<CheckResult> run_all(const Options& options);

}  // namespace qdc::verify
