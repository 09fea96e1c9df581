// Command-line front end: batch experiments, invariant verification, and
// distributed runs. Exit codes: 0 success, 1 runtime or verification
// failure, 2 usage error.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qdc/errors.hpp"
#include "qdc/netharness.hpp"
#include "qdc/protocol.hpp"
#include "qdc/report.hpp"
#include "qdc/verify.hpp"

namespace {

struct CliOptions {
  std::size_t n = 2;
  std::size_t m = 1;
  std::string payer = "none";
  std::uint64_t amount = 0;
  std::string backend = "dense";
  std::string mode = "local";
  std::string embedding = "gate";
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  bool histogram = true;
  std::string config_path;
};

std::string trimmed(const std::string& text) {
  const std::size_t first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const std::size_t last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used);
    if (used == value.size()) return parsed;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: key '" + key + "' needs a decimal value, got '" +
                              value + "'");
}

// Applies a flat key=value file underneath the command line: a key is used
// only when the matching flag was not given. Returns the keys it applied.
std::set<std::string> apply_config_file(const CLI::App& cmd, CliOptions& opt) {
  std::set<std::string> applied;
  if (opt.config_path.empty()) return applied;
  std::ifstream file(opt.config_path);
  if (!file) {
    throw std::invalid_argument("config: cannot open '" + opt.config_path + "'");
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const std::string entry = trimmed(line);
    if (entry.empty() || entry[0] == '#') continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value: '" + entry + "'");
    }
    const std::string key = trimmed(entry.substr(0, eq));
    const std::string value = trimmed(entry.substr(eq + 1));
    static const std::set<std::string> kKeys{
        "n",    "m",    "payer", "amount", "backend",  "mode",
        "shots", "seed", "out",   "format", "embedding", "histogram"};
    if (!kKeys.contains(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (cmd.count("--" + key) > 0) continue;  // flags override the file

    if (key == "n") opt.n = parse_uint(key, value);
    else if (key == "m") opt.m = parse_uint(key, value);
    else if (key == "payer") opt.payer = value;
    else if (key == "amount") opt.amount = parse_uint(key, value);
    else if (key == "backend") opt.backend = value;
    else if (key == "mode") opt.mode = value;
    else if (key == "embedding") opt.embedding = value;
    else if (key == "shots") opt.shots = parse_uint(key, value);
    else if (key == "seed") opt.seed = parse_uint(key, value);
    else if (key == "out") opt.out = value;
    else if (key == "format") opt.format = value;
    else if (key == "histogram") {
      if (value == "true" || value == "1") opt.histogram = true;
      else if (value == "false" || value == "0") opt.histogram = false;
      else {
        throw std::invalid_argument("config: key 'histogram' needs true or false, got '" +
                                    value + "'");
      }
    }
    applied.insert(key);
  }
  return applied;
}

void add_experiment_options(CLI::App& cmd, CliOptions& opt) {
  cmd.add_option("--n", opt.n, "number of players")->capture_default_str();
  cmd.add_option("--m", opt.m, "register width in bits")->capture_default_str();
  cmd.add_option("--payer", opt.payer,
                 "who paid: player index, role name (alice, bob, charlie, "
                 "dave), or none")
      ->capture_default_str();
  cmd.add_option("--amount", opt.amount, "amount the payer embeds, decimal")
      ->capture_default_str();
  cmd.add_option("--backend", opt.backend, "dense | structured")
      ->capture_default_str();
  cmd.add_option("--mode", opt.mode, "local | distributed")
      ->capture_default_str();
  cmd.add_option("--embedding", opt.embedding,
                 "dense embedding realization: gate | phase")
      ->capture_default_str();
  cmd.add_option("--shots", opt.shots, "rounds to run")->capture_default_str();
  cmd.add_option("--seed", opt.seed, "experiment seed")->capture_default_str();
  cmd.add_option("--out", opt.out, "output path (default: stdout)");
  cmd.add_option("--format", opt.format, "json | csv")->capture_default_str();
  cmd.add_flag("--histogram,!--no-histogram", opt.histogram,
               "include the per-outcome histogram in the report");
  cmd.add_option("--config", opt.config_path,
                 "flat key=value config file; flags override");
}

qdc::ProtocolConfig to_config(const CliOptions& opt) {
  qdc::ProtocolConfig config;
  config.player_count = opt.n;
  config.register_width = opt.m;
  config.payer = qdc::report::parse_payer(opt.payer, opt.n);
  config.amount = opt.amount;
  config.backend = qdc::backend_from_string(opt.backend);
  config.mode = qdc::run_mode_from_string(opt.mode);
  config.embedding = qdc::embedding_from_string(opt.embedding);
  config.shots = opt.shots;
  config.seed = opt.seed;
  return config;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file '" + path + "'");
  }
  file << text;
  if (!file.good()) {
    throw std::runtime_error("failed writing output file '" + path + "'");
  }
}

int do_run(CliOptions& opt, const CLI::App& cmd) {
  apply_config_file(cmd, opt);
  if (opt.mode != "local") {
    throw std::invalid_argument(
        "run executes locally; use the distributed subcommand for "
        "distributed mode");
  }
  qdc::report::ExperimentSpec spec;
  spec.config = to_config(opt);
  spec.out_path = opt.out;
  spec.format = qdc::report::format_from_string(opt.format);
  spec.histogram = opt.histogram;
  const auto report = qdc::report::run_experiment(spec);
  const std::string text = spec.format == qdc::report::Format::json
                               ? qdc::report::report_json(spec, report)
                               : qdc::report::report_csv(report);
  write_output(spec.out_path, text);
  return 0;
}

int do_distributed(CliOptions& opt, const CLI::App& cmd) {
  const std::set<std::string> from_file = apply_config_file(cmd, opt);
  const auto given = [&](const std::string& key) {
    return cmd.count("--" + key) > 0 || from_file.contains(key);
  };
  if (given("mode") && opt.mode != "distributed") {
    throw std::invalid_argument(
        "the distributed subcommand always runs distributed; drop --mode");
  }
  opt.mode = "distributed";
  if (given("backend") && opt.backend != "structured") {
    throw std::invalid_argument(
        "the distributed harness draws outcomes from the structured closed "
        "form; --backend dense is not available here");
  }
  opt.backend = "structured";

  const qdc::ProtocolConfig config = to_config(opt);
  qdc::net::Network network(config);
  std::vector<std::vector<qdc::RoundResult>> rounds;
  rounds.reserve(config.shots);
  bool all_consensus = true;
  for (std::uint64_t round = 0; round < config.shots; ++round) {
    rounds.push_back(network.run_round(round));
    all_consensus = all_consensus && qdc::net::verify_consensus(rounds.back());
  }
  const std::string text = qdc::report::distributed_json(
      config, rounds, network.message_log().size());
  write_output(opt.out, text);
  if (!opt.out.empty()) {
    write_output(opt.out + ".transcript.jsonl",
                 qdc::report::transcript_jsonl(network.message_log()));
  }
  if (!all_consensus) {
    std::cerr << "consensus failure: nodes disagree on at least one round\n";
    return 1;
  }
  return 0;
}

struct VerifyCliOptions {
  std::size_t max_players = 4;
  std::size_t max_width = 3;
  std::uint64_t shots = 100000;
  std::uint64_t seed = 1;
  std::string out;
  bool inject_fault = false;
};

int do_verify(const VerifyCliOptions& vopt) {
  qdc::verify::Options options;
  options.max_players = vopt.max_players;
  options.max_width = vopt.max_width;
  options.shots = vopt.shots;
  options.seed = vopt.seed;
  options.inject_embedding_fault = vopt.inject_fault;

  const auto results = qdc::verify::run_all(options);
  std::string text;
  bool all_passed = true;
  for (const auto& result : results) {
    text += (result.passed ? "[PASS] " : "[FAIL] ") + result.name + ": " +
            result.detail + "\n";
    all_passed = all_passed && result.passed;
  }
  std::cout << text;
  if (!vopt.out.empty()) {
    write_output(vopt.out, text);
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anonymous-announcement protocol simulator: entangled-register "
               "rounds over exact or closed-form backends"};
  app.require_subcommand(1);

  CliOptions run_opt;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "run an experiment and write a histogram report");
  add_experiment_options(*run_cmd, run_opt);

  VerifyCliOptions verify_opt;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "execute the full invariant suite");
  verify_cmd->add_option("--n", verify_opt.max_players, "largest player count")
      ->capture_default_str();
  verify_cmd->add_option("--m", verify_opt.max_width, "largest register width")
      ->capture_default_str();
  verify_cmd->add_option("--shots", verify_opt.shots,
                         "samples for the statistical checks")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_opt.seed, "suite seed")
      ->capture_default_str();
  verify_cmd->add_option("--out", verify_opt.out,
                         "also write the pass/fail lines to this path");
  verify_cmd
      ->add_flag("--inject-fault", verify_opt.inject_fault,
                 "miswire one embedding so the correlation check must fail")
      ->group("");  // hidden: a negative control, not a user feature

  CliOptions dist_opt;
  CLI::App* dist_cmd = app.add_subcommand(
      "distributed", "run rounds across concurrent nodes with authenticated "
                     "message passing");
  add_experiment_options(*dist_cmd, dist_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_opt, *run_cmd);
    if (verify_cmd->parsed()) return do_verify(verify_opt);
    if (dist_cmd->parsed()) return do_distributed(dist_opt, *dist_cmd);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
