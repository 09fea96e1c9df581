#include "qdc/report.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

namespace qdc::report {

using boost::multiprecision::cpp_int;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Format format) {
  return format == Format::json ? "json" : "csv";
}

Format format_from_string(std::string_view text) {
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  throw std::invalid_argument("unknown format '" + std::string(text) +
                              "'; expected json or csv");
}

namespace {

ordered_json config_json(const ProtocolConfig& config) {
  ordered_json j;
  j["n"] = config.player_count;
  j["m"] = config.register_width;
  if (config.payer) {
    j["payer"] = *config.payer;
  } else {
    j["payer"] = nullptr;
  }
  j["amount"] = config.amount;
  j["backend"] = std::string(qdc::to_string(config.backend));
  j["mode"] = std::string(qdc::to_string(config.mode));
  j["embedding"] = std::string(qdc::to_string(config.embedding));
  j["shots"] = config.shots;
  j["seed"] = config.seed;
  return j;
}

ordered_json verdict_json(const Verdict& verdict) {
  ordered_json j;
  j["kind"] = std::string(qdc::to_string(verdict.kind));
  j["amount"] = verdict.amount;
  return j;
}

}  // namespace

HistogramReport run_experiment(const ExperimentSpec& spec) {
  spec.config.validate();
  const ProtocolEngine engine(spec.config);

  HistogramReport report;
  report.total_shots = spec.config.shots;
  bool first = true;
  for (std::uint64_t shot = 0; shot < spec.config.shots; ++shot) {
    RoundResult result = engine.run_shot(shot);
    if (first) {
      report.decoded = result.decoded;
      report.verdict = result.verdict;
      first = false;
    } else if (result.decoded != report.decoded) {
      throw std::logic_error("run_experiment: decoded value changed between "
                             "shots, " + report.decoded.str() + " then " +
                             result.decoded.str());
    }
    ++report.counts[result.outcome.key()];
  }

  const cpp_int support = structured::support_size(spec.config.player_count,
                                                   spec.config.register_width);
  report.support_size = support.str();
  report.distinct_outcomes = report.counts.size();

  // In-support means: no more distinct outcomes than the support holds,
  // and every observed outcome folds to the common decoded value.
  report.within_support = cpp_int(report.distinct_outcomes) <= support;
  for (const auto& [key, count] : report.counts) {
    if (Outcome::from_key(key).xor_fold() != report.decoded) {
      report.within_support = false;
      break;
    }
  }

  // Coverage is only a sound expectation once shots dwarf the support; at
  // 100x the support size a missing element is astronomically unlikely.
  if (cpp_int(report.total_shots) >= 100 * support) {
    report.full_coverage = cpp_int(report.distinct_outcomes) == support;
  }
  return report;
}

std::string report_json(const ExperimentSpec& spec, const HistogramReport& report) {
  ordered_json j;
  j["command"] = "run";
  j["config"] = config_json(spec.config);
  j["decoded"] = report.decoded.str();
  j["verdict"] = verdict_json(report.verdict);
  ordered_json support;
  support["size"] = report.support_size;
  support["distinct_outcomes"] = report.distinct_outcomes;
  support["within_support"] = report.within_support;
  if (report.full_coverage) {
    support["full_coverage"] = *report.full_coverage;
  } else {
    support["full_coverage"] = nullptr;
  }
  j["support"] = support;
  if (spec.histogram) {
    ordered_json counts = ordered_json::object();
    for (const auto& [key, count] : report.counts) {
      counts[key] = count;
    }
    j["histogram"] = counts;
  }
  return j.dump(2) + "\n";
}

std::string report_csv(const HistogramReport& report) {
  std::string out = "outcome,count\n";
  for (const auto& [key, count] : report.counts) {
    out += '"' + key + "\"," + std::to_string(count) + '\n';
  }
  return out;
}

std::string round_json(const ProtocolConfig& config, const RoundResult& result) {
  ordered_json j;
  j["config"] = config_json(config);
  ordered_json outcome = ordered_json::array();
  for (const auto& reg : result.outcome.registers) {
    outcome.push_back(reg.str());
  }
  j["outcome"] = outcome;
  j["decoded"] = result.decoded.str();
  j["verdict"] = verdict_json(result.verdict);
  ordered_json transcript = ordered_json::array();
  for (const auto& entry : result.transcript) {
    ordered_json e;
    e["phase"] = entry.phase;
    e["note"] = entry.note;
    transcript.push_back(e);
  }
  j["transcript"] = transcript;
  return j.dump(2) + "\n";
}

std::string distributed_json(const ProtocolConfig& config,
                             const std::vector<std::vector<RoundResult>>& rounds,
                             std::size_t message_count) {
  ordered_json j;
  j["command"] = "distributed";
  j["config"] = config_json(config);
  bool all_consensus = true;
  ordered_json round_array = ordered_json::array();
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const auto& results = rounds[r];
    const bool consensus = net::verify_consensus(results);
    all_consensus = all_consensus && consensus;
    ordered_json rj;
    rj["round_id"] = r;
    rj["consensus"] = consensus;
    ordered_json outcome = ordered_json::array();
    if (!results.empty()) {
      for (const auto& reg : results.front().outcome.registers) {
        outcome.push_back(reg.str());
      }
    }
    rj["outcome"] = outcome;
    ordered_json nodes = ordered_json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      ordered_json nj;
      nj["node"] = i;
      nj["decoded"] = results[i].decoded.str();
      nj["verdict"] = verdict_json(results[i].verdict);
      nodes.push_back(nj);
    }
    rj["nodes"] = nodes;
    round_array.push_back(rj);
  }
  j["rounds"] = round_array;
  j["consensus"] = all_consensus;
  j["messages"] = message_count;
  return j.dump(2) + "\n";
}

std::string transcript_jsonl(const std::vector<net::LoggedMessage>& log) {
  std::string out;
  for (const auto& entry : log) {
    ordered_json j;
    j["round_id"] = entry.round_id;
    j["sender"] = entry.sender;
    j["receiver"] = entry.receiver;
    try {
      const net::Message msg = net::Message::parse_wire(entry.wire);
      j["register"] = msg.register_bits.str();
      j["auth_tag"] = entry.wire.substr(entry.wire.rfind(' ') + 1);
    } catch (const std::exception&) {
      j["register"] = nullptr;
      j["auth_tag"] = nullptr;
    }
    j["wire"] = entry.wire;
    j["accepted"] = entry.accepted;
    j["reject_reason"] = entry.reject_reason;
    out += j.dump() + "\n";
  }
  return out;
}

std::optional<std::size_t> parse_payer(std::string_view text,
                                       std::size_t player_count) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  if (lower == "none") return std::nullopt;

  if (!lower.empty() &&
      lower.find_first_not_of("0123456789") == std::string::npos) {
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(lower.data(), lower.data() + lower.size(), index);
    if (ec != std::errc{} || ptr != lower.data() + lower.size()) {
      throw std::invalid_argument("payer index '" + std::string(text) +
                                  "' out of range");
    }
    return index;
  }

  // Role names count down from the top: the highest-numbered player opens
  // the announcements, and named colleagues follow beneath.
  std::size_t depth = 0;
  if (lower == "alice") depth = 1;
  else if (lower == "bob") depth = 2;
  else if (lower == "charlie") depth = 3;
  else if (lower == "dave" || lower == "david") depth = 4;
  else {
    throw std::invalid_argument("unknown payer '" + std::string(text) +
                                "'; expected an index, a role name, or none");
  }
  if (player_count < depth) {
    throw std::invalid_argument("payer '" + std::string(text) + "' needs at least " +
                                std::to_string(depth) + " players, have " +
                                std::to_string(player_count));
  }
  return player_count - depth;
}

}  // namespace qdc::report
