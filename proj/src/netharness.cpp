#include "qdc/netharness.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <thread>
#include <utility>

#include "qdc/rng.hpp"

namespace qdc::net {

namespace {

constexpr std::uint64_t kDigestDomain = 0x9fb21c651e98df25ull;
constexpr std::uint64_t kKeyDomain = 0x5851f42d4c957f2dull;

std::string to_hex16(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::uint64_t parse_decimal(std::string_view field, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw std::invalid_argument(std::string("wire: bad ") + what + " field '" +
                                std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string Message::wire() const {
  return std::to_string(round_id) + ' ' + std::to_string(sender) + ' ' +
         register_bits.str() + ' ' + to_hex16(auth_tag);
}

Message Message::parse_wire(const std::string& text) {
  std::vector<std::string_view> fields;
  std::string_view rest = text;
  for (;;) {
    const std::size_t cut = rest.find(' ');
    if (cut == std::string_view::npos) {
      fields.push_back(rest);
      break;
    }
    fields.push_back(rest.substr(0, cut));
    rest = rest.substr(cut + 1);
  }
  if (fields.size() != 4) {
    throw std::invalid_argument("wire: expected 4 space-separated fields, got " +
                                std::to_string(fields.size()));
  }
  const std::uint64_t round = parse_decimal(fields[0], "round id");
  const std::uint64_t sender = parse_decimal(fields[1], "sender");
  BitVector bits = BitVector::from_string(fields[2]);
  if (fields[3].size() != 16 ||
      fields[3].find_first_not_of("0123456789abcdef") != std::string_view::npos) {
    throw std::invalid_argument("wire: auth tag must be 16 lowercase hex digits");
  }
  std::uint64_t tag = 0;
  for (const char c : fields[3]) {
    tag = (tag << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return Message{round, static_cast<std::size_t>(sender), std::move(bits), tag};
}

std::uint64_t message_digest(std::uint64_t key, std::uint64_t round_id,
                             std::size_t sender, const BitVector& register_bits) {
  // A chain of bijective steps: a difference introduced at any stage
  // survives every following stage, so the tag separates all inputs of
  // equal register length deterministically.
  std::uint64_t h = mix64(key ^ kDigestDomain);
  h = mix64(h ^ round_id);
  h = mix64(h ^ static_cast<std::uint64_t>(sender));
  h = mix64(h ^ static_cast<std::uint64_t>(register_bits.length()));
  for (const std::uint64_t word : register_bits.words()) {
    h = mix64(h ^ word);
  }
  return h;
}

void Pipe::push(std::string wire) {
  {
    const std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back(std::move(wire));
  }
  cv_.notify_one();
}

std::string Pipe::pop() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return !queue_.empty(); });
  std::string wire = std::move(queue_.front());
  queue_.pop_front();
  return wire;
}

std::optional<std::string> Pipe::try_pop() {
  const std::lock_guard<std::mutex> lock(mu_);
  if (queue_.empty()) return std::nullopt;
  std::string wire = std::move(queue_.front());
  queue_.pop_front();
  return wire;
}

Channel::Channel(std::size_t node_a, std::size_t node_b) : a_(node_a), b_(node_b) {
  if (node_a == node_b) {
    throw std::invalid_argument("Channel: endpoints must differ");
  }
}

void Channel::send(std::size_t from, const std::string& wire) {
  if (from != a_ && from != b_) {
    throw std::invalid_argument("Channel: node " + std::to_string(from) +
                                " is not an endpoint");
  }
  const TamperFn& tamper = from == a_ ? tamper_from_a_ : tamper_from_b_;
  std::string out = tamper ? tamper(wire) : wire;
  if (latency_.count() > 0) {
    std::this_thread::sleep_for(latency_);
  }
  (from == a_ ? to_b_ : to_a_).push(std::move(out));
}

Pipe& Channel::inbox_of(std::size_t node) {
  if (node == a_) return to_a_;
  if (node == b_) return to_b_;
  throw std::invalid_argument("Channel: node " + std::to_string(node) +
                              " is not an endpoint");
}

void Channel::set_tamper(std::size_t from, TamperFn fn) {
  if (from != a_ && from != b_) {
    throw std::invalid_argument("Channel: node " + std::to_string(from) +
                                " is not an endpoint");
  }
  (from == a_ ? tamper_from_a_ : tamper_from_b_) = std::move(fn);
}

Substrate::Substrate(std::size_t player_count, std::size_t register_width,
                     const BitVector& group_payload, std::uint64_t seed)
    : player_count_(player_count),
      state_(player_count, register_width),
      seed_(seed) {
  state_.embed(group_payload);
}

BitVector Substrate::measure(std::uint64_t round_id, std::size_t node_id) {
  if (node_id >= player_count_) {
    throw std::out_of_range("Substrate: node " + std::to_string(node_id) +
                            " out of " + std::to_string(player_count_));
  }
  std::unique_lock<std::mutex> lock(mu_);
  RoundSlot& slot = rounds_[round_id];
  if (!slot.drawn) {
    slot.requested.insert(node_id);
    if (slot.requested.size() == player_count_) {
      // Last arrival performs the joint draw and releases everyone. The
      // stream index is the round id, so round r reproduces local shot r.
      Rng rng = Rng::split(seed_, round_id);
      slot.drawn = state_.sample(rng);
      cv_.notify_all();
    } else {
      cv_.wait(lock, [&] { return slot.drawn.has_value(); });
    }
  }
  return slot.drawn->by_player(node_id);
}

Outcome Substrate::joint(std::uint64_t round_id) {
  const std::lock_guard<std::mutex> lock(mu_);
  const auto it = rounds_.find(round_id);
  if (it == rounds_.end() || !it->second.drawn) {
    throw std::logic_error("Substrate: round " + std::to_string(round_id) +
                           " has not been measured");
  }
  return *it->second.drawn;
}

Node::Node(std::size_t id, std::size_t player_count, std::size_t register_width)
    : id_(id), player_count_(player_count), register_width_(register_width) {
  if (id >= player_count) {
    throw std::invalid_argument("Node: id " + std::to_string(id) + " out of " +
                                std::to_string(player_count));
  }
}

void Node::attach_peer(std::size_t peer, Channel* channel, std::uint64_t pair_key) {
  if (peer == id_ || peer >= player_count_) {
    throw std::invalid_argument("Node " + std::to_string(id_) +
                                ": bad peer id " + std::to_string(peer));
  }
  channels_[peer] = channel;
  keys_[peer] = pair_key;
}

const BitVector& Node::measure(std::uint64_t round_id) {
  if (substrate_ == nullptr) {
    throw std::logic_error("Node " + std::to_string(id_) + ": no substrate attached");
  }
  BitVector own = substrate_->measure(round_id, id_);
  const auto [it, inserted] =
      registers_[round_id].insert_or_assign(id_, std::move(own));
  (void)inserted;
  return it->second;
}

void Node::broadcast(std::uint64_t round_id) {
  const auto rit = registers_.find(round_id);
  if (rit == registers_.end() || !rit->second.contains(id_)) {
    throw std::logic_error("Node " + std::to_string(id_) +
                           ": broadcast before measure in round " +
                           std::to_string(round_id));
  }
  const BitVector& own = rit->second.at(id_);
  for (const auto& [peer, channel] : channels_) {
    const Message msg{round_id, id_, own,
                      message_digest(keys_.at(peer), round_id, id_, own)};
    channel->send(id_, msg.wire());
  }
}

void Node::process_wire(std::uint64_t round_id, std::size_t peer,
                        const std::string& wire) {
  LoggedMessage entry{round_id, peer, id_, wire, false, ""};
  try {
    Message msg = Message::parse_wire(wire);
    if (msg.round_id != round_id) {
      throw std::invalid_argument("round id " + std::to_string(msg.round_id) +
                                  " does not match current round " +
                                  std::to_string(round_id));
    }
    if (msg.sender != peer) {
      throw std::invalid_argument("sender " + std::to_string(msg.sender) +
                                  " does not match link peer " +
                                  std::to_string(peer));
    }
    if (msg.register_bits.length() != register_width_) {
      throw std::invalid_argument("register length " +
                                  std::to_string(msg.register_bits.length()) +
                                  " does not match width " +
                                  std::to_string(register_width_));
    }
    const std::uint64_t expected =
        message_digest(keys_.at(peer), msg.round_id, msg.sender, msg.register_bits);
    if (expected != msg.auth_tag) {
      throw std::invalid_argument("auth tag mismatch");
    }
    registers_[round_id].insert_or_assign(msg.sender, std::move(msg.register_bits));
    entry.accepted = true;
  } catch (const std::exception& e) {
    entry.reject_reason = e.what();
    rejected_[round_id].insert(peer);
  }
  log_.push_back(std::move(entry));
}

void Node::receive_all(std::uint64_t round_id) {
  for (const auto& [peer, channel] : channels_) {
    process_wire(round_id, peer, channel->inbox_of(id_).pop());
  }
}

std::size_t Node::drain(std::uint64_t round_id) {
  std::size_t consumed = 0;
  for (const auto& [peer, channel] : channels_) {
    while (auto wire = channel->inbox_of(id_).try_pop()) {
      process_wire(round_id, peer, *wire);
      ++consumed;
    }
  }
  return consumed;
}

RoundResult Node::decode_round(std::uint64_t round_id) const {
  if (const auto bad = rejected_.find(round_id);
      bad != rejected_.end() && !bad->second.empty()) {
    std::string what = "node " + std::to_string(id_) + ": round " +
                       std::to_string(round_id) +
                       " had rejected messages from:";
    for (const std::size_t p : bad->second) what += " " + std::to_string(p);
    throw SecurityError(what);
  }
  const auto rit = registers_.find(round_id);
  std::vector<std::size_t> missing;
  for (std::size_t p = 0; p < player_count_; ++p) {
    if (rit == registers_.end() || !rit->second.contains(p)) {
      missing.push_back(p);
    }
  }
  if (!missing.empty()) {
    std::string what = "node " + std::to_string(id_) + ": round " +
                       std::to_string(round_id) + " missing registers from:";
    for (const std::size_t p : missing) what += " " + std::to_string(p);
    throw NotReadyError(what);
  }
  Outcome outcome;
  outcome.registers.reserve(player_count_);
  for (std::size_t k = 0; k < player_count_; ++k) {
    outcome.registers.push_back(rit->second.at(player_count_ - 1 - k));
  }
  BitVector decoded = decode(outcome);
  const Verdict verdict = interpret(decoded);
  std::vector<TranscriptEntry> transcript{
      {"psi0", "substrate prepared the shared resource for round " +
                   std::to_string(round_id)},
      {"psi1", "payload embedding applied at the substrate"},
      {"psi2", "deciphering applied at the substrate"},
      {"psif", "node " + std::to_string(id_) + " assembled " +
                   std::to_string(player_count_) + " authenticated registers"},
  };
  return RoundResult{std::move(outcome), std::move(decoded), verdict,
                     std::move(transcript)};
}

void Node::inject_received(std::uint64_t round_id, std::size_t sender,
                           BitVector register_bits) {
  registers_[round_id].insert_or_assign(sender, std::move(register_bits));
}

std::vector<LoggedMessage> Node::take_log() {
  std::vector<LoggedMessage> out;
  out.swap(log_);
  return out;
}

Network::Network(const ProtocolConfig& config) : config_(config) {
  config_.validate();
  if (config_.mode != RunMode::distributed) {
    throw std::invalid_argument("Network: config mode must be distributed");
  }
  const std::size_t n = config_.player_count;
  substrate_ = std::make_unique<Substrate>(n, config_.register_width,
                                           config_.payer_payload(), config_.seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto node = std::make_unique<Node>(i, n, config_.register_width);
    node->set_substrate(substrate_.get());
    nodes_.push_back(std::move(node));
  }
  // One channel per unordered pair, triangular indexing; keys hang off a
  // separate stream of the experiment seed so they never collide with
  // round draws.
  const std::uint64_t key_root = derive_seed(config_.seed, kKeyDomain);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      channels_.push_back(std::make_unique<Channel>(i, j));
      const std::uint64_t key =
          derive_seed(key_root, static_cast<std::uint64_t>(i) * n + j);
      nodes_[i]->attach_peer(j, channels_.back().get(), key);
      nodes_[j]->attach_peer(i, channels_.back().get(), key);
    }
  }
}

Channel& Network::channel_between(std::size_t i, std::size_t j) {
  if (i == j || i >= nodes_.size() || j >= nodes_.size()) {
    throw std::invalid_argument("Network: bad channel pair " + std::to_string(i) +
                                "," + std::to_string(j));
  }
  const auto [lo, hi] = std::minmax(i, j);
  return *channels_[hi * (hi - 1) / 2 + lo];
}

void Network::set_tamper(std::size_t from, std::size_t to, TamperFn fn) {
  channel_between(from, to).set_tamper(from, std::move(fn));
}

void Network::set_latency(std::chrono::microseconds latency) {
  for (const auto& channel : channels_) {
    channel->set_latency(latency);
  }
}

void Network::collect_logs() {
  std::vector<LoggedMessage> fresh;
  for (const auto& node : nodes_) {
    for (auto& entry : node->take_log()) {
      fresh.push_back(std::move(entry));
    }
  }
  for (auto& entry : fresh) {
    message_log_.push_back(std::move(entry));
  }
  std::stable_sort(message_log_.begin(), message_log_.end(),
                   [](const LoggedMessage& a, const LoggedMessage& b) {
                     return std::tie(a.round_id, a.sender, a.receiver) <
                            std::tie(b.round_id, b.sender, b.receiver);
                   });
}

std::vector<RoundResult> Network::run_round(std::uint64_t round_id) {
  const std::size_t n = nodes_.size();
  std::vector<std::optional<RoundResult>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        Node& node = *nodes_[i];
        node.measure(round_id);
        node.broadcast(round_id);
        node.receive_all(round_id);
        slots[i] = node.decode_round(round_id);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  collect_logs();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  std::vector<RoundResult> results;
  results.reserve(n);
  for (auto& slot : slots) {
    results.push_back(std::move(*slot));
  }
  return results;
}

bool verify_consensus(const std::vector<RoundResult>& results) {
  if (results.empty()) return false;
  const RoundResult& first = results.front();
  for (const RoundResult& r : results) {
    if (r.outcome != first.outcome || r.decoded != first.decoded ||
        !(r.verdict == first.verdict)) {
      return false;
    }
  }
  // The agreed verdict must also re-derive from the joint outcome itself.
  const BitVector decoded = decode(first.outcome);
  return decoded == first.decoded && interpret(decoded) == first.verdict;
}

}  // namespace qdc::net
