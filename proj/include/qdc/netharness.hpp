#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdc/bitvec.hpp"
#include "qdc/outcome.hpp"
#include "qdc/protocol.hpp"
#include "qdc/structured_sim.hpp"

namespace qdc::net {

/// Raised when a node is asked to decode a round it does not hold every
/// authenticated register for; the message names the missing senders.
struct NotReadyError : std::runtime_error {
  explicit NotReadyError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised instead of NotReadyError when the gap exists because a message
/// failed authentication: the round is not merely incomplete, it was
/// attacked.
struct SecurityError : std::runtime_error {
  explicit SecurityError(const std::string& what) : std::runtime_error(what) {}
};

/// One announcement in transit. The wire rendering is the canonical
/// transmission format: decimal round id, decimal sender id, MSB-first
/// register bits, and a 16-digit lowercase-hex auth tag, single-space
/// separated.
struct Message {
  std::uint64_t round_id;
  std::size_t sender;
  BitVector register_bits;
  std::uint64_t auth_tag;

  std::string wire() const;
  /// Inverse of wire(); throws std::invalid_argument on anything
  /// malformed, including wrong field count or non-canonical digits.
  static Message parse_wire(const std::string& text);
};

/// Keyed 64-bit digest binding a register announcement to its round,
/// sender, and the pair key. Built from a chain of bijective 64-bit mixing
/// steps, so any change to any field (at equal register length) provably
/// changes the tag. This is simulation-grade tamper evidence for the
/// harness, not a cryptographic MAC.
std::uint64_t message_digest(std::uint64_t key, std::uint64_t round_id,
                             std::size_t sender, const BitVector& register_bits);

/// Arbitrary in-flight corruption applied to the wire text of one directed
/// link. Transforms but never drops, so per-round delivery counts stay
/// exact.
using TamperFn = std::function<std::string(const std::string&)>;

/// Unbounded FIFO of wire strings with blocking and non-blocking reads.
class Pipe {
 public:
  void push(std::string wire);
  /// Blocks until a message is available.
  std::string pop();
  std::optional<std::string> try_pop();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
};

/// Full-duplex link between two nodes: one pipe per direction, optional
/// symmetric latency, optional per-direction tamper. Configure tamper and
/// latency only between rounds; sends may run concurrently.
class Channel {
 public:
  Channel(std::size_t node_a, std::size_t node_b);

  void send(std::size_t from, const std::string& wire);
  Pipe& inbox_of(std::size_t node);
  void set_tamper(std::size_t from, TamperFn fn);
  void set_latency(std::chrono::microseconds latency) { latency_ = latency; }

 private:
  std::size_t a_;
  std::size_t b_;
  Pipe to_a_;
  Pipe to_b_;
  TamperFn tamper_from_a_;
  TamperFn tamper_from_b_;
  std::chrono::microseconds latency_{0};
};

/// The shared measurement resource. Stands in for the entangled state that
/// no single node owns: a round's joint outcome exists only once every
/// node has asked for it, and is then fixed forever. Holds the group
/// payload because embedding physically happens on the shared state, never
/// inside a node.
class Substrate {
 public:
  Substrate(std::size_t player_count, std::size_t register_width,
            const BitVector& group_payload, std::uint64_t seed);

  /// Blocks until all players have requested this round, then returns the
  /// caller's register of the jointly drawn outcome. Repeat calls replay
  /// the same value; the draw for round r comes from Rng::split(seed, r).
  BitVector measure(std::uint64_t round_id, std::size_t node_id);

  /// The joint outcome of an already-drawn round; throws if nobody has
  /// completed it yet.
  Outcome joint(std::uint64_t round_id);

 private:
  struct RoundSlot {
    std::set<std::size_t> requested;
    std::optional<Outcome> drawn;
  };

  std::size_t player_count_;
  structured::StructuredState state_;
  std::uint64_t seed_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, RoundSlot> rounds_;
};

/// One received-message record; `accepted` is false for anything that
/// failed parsing or authentication, with the reason kept for the log.
struct LoggedMessage {
  std::uint64_t round_id;
  std::size_t sender;
  std::size_t receiver;
  std::string wire;
  bool accepted;
  std::string reject_reason;
};

/// One player process. All methods except inject_received are meant to run
/// on the node's own thread; nothing here is shared between nodes except
/// the substrate and the channels.
class Node {
 public:
  Node(std::size_t id, std::size_t player_count, std::size_t register_width);

  std::size_t id() const { return id_; }

  void attach_peer(std::size_t peer, Channel* channel, std::uint64_t pair_key);
  void set_substrate(Substrate* substrate) { substrate_ = substrate; }

  /// Asks the substrate for this round's own register (blocking barrier).
  const BitVector& measure(std::uint64_t round_id);

  /// Signs and sends this round's register to every peer, one message per
  /// directed link.
  void broadcast(std::uint64_t round_id);

  /// Pops exactly one message from every peer (blocking) and authenticates
  /// it. Rejected messages are logged and discarded, never stored.
  void receive_all(std::uint64_t round_id);

  /// Non-blocking variant: processes whatever has already arrived, from
  /// every peer, and returns how many messages it consumed.
  std::size_t drain(std::uint64_t round_id);

  /// Assembles the full outcome from own plus received registers and
  /// decodes it. Throws SecurityError if any message was rejected this
  /// round, otherwise NotReadyError naming any senders still missing.
  RoundResult decode_round(std::uint64_t round_id) const;

  /// Test hook: overwrite what this node believes `sender` announced,
  /// bypassing authentication. Models a node whose post-verification state
  /// was corrupted; consensus checking exists to catch exactly this.
  void inject_received(std::uint64_t round_id, std::size_t sender,
                       BitVector register_bits);

  /// Moves out everything this node logged since the last call.
  std::vector<LoggedMessage> take_log();

 private:
  std::size_t id_;
  std::size_t player_count_;
  std::size_t register_width_;
  Substrate* substrate_ = nullptr;
  std::map<std::size_t, Channel*> channels_;   // peer id -> link
  std::map<std::size_t, std::uint64_t> keys_;  // peer id -> pair key
  std::map<std::uint64_t, std::map<std::size_t, BitVector>> registers_;
  std::map<std::uint64_t, std::set<std::size_t>> rejected_;  // round -> senders
  std::vector<LoggedMessage> log_;

  void process_wire(std::uint64_t round_id, std::size_t peer,
                    const std::string& wire);
};

/// Whole-system harness: builds the substrate, one node per player, and a
/// channel per unordered pair, all keyed off the config seed. Rounds run
/// one thread per node; round r of the distributed system reproduces shot
/// r of the local structured engine exactly.
class Network {
 public:
  explicit Network(const ProtocolConfig& config);

  const ProtocolConfig& config() const { return config_; }

  /// Runs a full round on every node concurrently and returns each node's
  /// decoded result, indexed by node id. Any node's failure is rethrown
  /// after all threads have joined.
  std::vector<RoundResult> run_round(std::uint64_t round_id);

  void set_tamper(std::size_t from, std::size_t to, TamperFn fn);
  void set_latency(std::chrono::microseconds latency);

  /// Every message received so far, sorted by (round, sender, receiver).
  const std::vector<LoggedMessage>& message_log() const { return message_log_; }

  Node& node(std::size_t id) { return *nodes_.at(id); }
  Substrate& substrate() { return *substrate_; }

 private:
  ProtocolConfig config_;
  std::unique_ptr<Substrate> substrate_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::unique_ptr<Channel>> channels_;  // triangular, pair (i<j)
  std::vector<LoggedMessage> message_log_;

  Channel& channel_between(std::size_t i, std::size_t j);
  void collect_logs();
};

/// True iff every node decoded the identical outcome and verdict, and that
/// verdict re-derives from the outcome itself.
bool verify_consensus(const std::vector<RoundResult>& results);

}  // namespace qdc::net
