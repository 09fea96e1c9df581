#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdc/bitvec.hpp"
#include "qdc/netharness.hpp"
#include "qdc/protocol.hpp"

namespace qdc::report {

enum class Format { json, csv };

std::string_view to_string(Format format);
Format format_from_string(std::string_view text);

/// A full experiment request: protocol config plus where and how to write
/// the result. An empty out_path means standard output.
struct ExperimentSpec {
  ProtocolConfig config;
  std::string out_path;
  Format format = Format::json;
  bool histogram = true;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Aggregated result of a many-shot run. `support_size` is the exact
/// decimal count of reachable outcomes (it overflows fixed-width integers
/// at realistic scale, hence a string); `full_coverage` is set only when
/// the run was large enough relative to the support for the
/// every-element-appears check to be meaningful.
struct HistogramReport {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total_shots = 0;
  BitVector decoded{1};  // placeholder width until run_experiment fills it
  Verdict verdict;
  std::string support_size;
  std::uint64_t distinct_outcomes = 0;
  bool within_support = false;
  std::optional<bool> full_coverage;
};

/// Runs the configured number of shots and aggregates. Enforces that
/// exactly one decoded value appears across all shots; anything else is a
/// protocol failure, reported as std::logic_error.
HistogramReport run_experiment(const ExperimentSpec& spec);

/// Canonical JSON rendering; deterministic bytes for identical specs.
std::string report_json(const ExperimentSpec& spec, const HistogramReport& report);

/// Flat projection for spreadsheets: an "outcome,count" header plus one
/// quoted row per histogram key, in key order.
std::string report_csv(const HistogramReport& report);

/// One round as JSON: config echo, per-register outcome strings, decoded
/// string, verdict, transcript.
std::string round_json(const ProtocolConfig& config, const RoundResult& result);

/// Distributed run as JSON: config echo, per-round per-node decoded values
/// and verdicts, per-round and overall consensus, total message count.
std::string distributed_json(const ProtocolConfig& config,
                             const std::vector<std::vector<RoundResult>>& rounds,
                             std::size_t message_count);

/// Message transcript as JSON lines, one message per line in log order.
std::string transcript_jsonl(const std::vector<net::LoggedMessage>& log);

/// Accepts a player index in decimal, a role name (alice is the highest
/// player index, then bob, charlie, dave/david below), or "none".
/// Case-insensitive for names. Throws std::invalid_argument when a name
/// needs more players than the group has.
std::optional<std::size_t> parse_payer(std::string_view text,
                                       std::size_t player_count);

}  // namespace qdc::report
