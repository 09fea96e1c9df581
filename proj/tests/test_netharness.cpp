#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <chrono>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qdc/bitvec.hpp"
#include "qdc/netharness.hpp"
#include "qdc/protocol.hpp"
#include "qdc/rng.hpp"
#include "qdc/structured_sim.hpp"

using namespace qdc;
using namespace qdc::net;

namespace {

ProtocolConfig net_config(std::size_t n, std::size_t m, std::uint64_t seed) {
  ProtocolConfig config;
  config.player_count = n;
  config.register_width = m;
  config.payer = 0;
  config.amount = 1;
  config.backend = Backend::structured;
  config.mode = RunMode::distributed;
  config.seed = seed;
  return config;
}

// Flips the first bit of the register field, leaving everything else alone.
std::string flip_register_bit(const std::string& wire) {
  std::size_t pos = wire.find(' ');
  pos = wire.find(' ', pos + 1);
  std::string out = wire;
  out[pos + 1] = out[pos + 1] == '0' ? '1' : '0';
  return out;
}

}  // namespace

TEST_CASE("wire rendering and parsing are inverse") {
  const Message msg{12, 3, BitVector::from_string("0110"), 0x0123456789abcdefull};
  const std::string wire = msg.wire();
  CHECK(wire == "12 3 0110 0123456789abcdef");
  const Message back = Message::parse_wire(wire);
  CHECK(back.round_id == 12);
  CHECK(back.sender == 3);
  CHECK(back.register_bits == msg.register_bits);
  CHECK(back.auth_tag == msg.auth_tag);
}

TEST_CASE("non-canonical wires are rejected") {
  const std::string good = "1 2 0101 0123456789abcdef";
  CHECK_NOTHROW(Message::parse_wire(good));
  for (const std::string bad : {
           std::string{},
           std::string{"1 2 0101"},                        // field missing
           good + " extra",                                // field added
           std::string{"x 2 0101 0123456789abcdef"},       // round not decimal
           std::string{"1 -2 0101 0123456789abcdef"},      // negative sender
           std::string{"1 2 0102 0123456789abcdef"},       // register not binary
           std::string{"1 2 0101 0123456789ABCDEF"},       // uppercase tag
           std::string{"1 2 0101 0123456789abcde"},        // fifteen hex digits
           std::string{"1 2 0101 0123456789abcdef0"},      // seventeen hex digits
           std::string{"1 2  0101 0123456789abcdef"},      // doubled separator
           good + " ",                                     // trailing separator
       }) {
    CHECK_THROWS_AS(Message::parse_wire(bad), std::invalid_argument);
  }
}

TEST_CASE("digest reacts to every single-bit register change") {
  const BitVector base = BitVector::from_string("10110010");
  const std::uint64_t tag = message_digest(77, 5, 2, base);
  for (std::size_t i = 0; i < 8; ++i) {
    BitVector flipped = base;
    flipped.set_bit(i, !flipped.bit(i));
    CHECK(message_digest(77, 5, 2, flipped) != tag);
  }
}

TEST_CASE("digest reacts to key, round, sender, and length changes") {
  const BitVector base = BitVector::from_string("10110010");
  const std::uint64_t tag = message_digest(77, 5, 2, base);
  CHECK(message_digest(78, 5, 2, base) != tag);
  CHECK(message_digest(77, 6, 2, base) != tag);
  CHECK(message_digest(77, 5, 3, base) != tag);
  CHECK(message_digest(77, 5, 2, BitVector::from_string("101100100")) != tag);
}

TEST_CASE("pipes deliver in order and block until data arrives") {
  Pipe pipe;
  CHECK_FALSE(pipe.try_pop().has_value());
  pipe.push("first");
  pipe.push("second");
  CHECK(pipe.pop() == "first");
  CHECK(*pipe.try_pop() == "second");

  std::string received;
  std::thread consumer([&] { received = pipe.pop(); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  pipe.push("late");
  consumer.join();
  CHECK(received == "late");
}

TEST_CASE("channels keep directions separate and check endpoints") {
  Channel channel(2, 5);
  channel.send(2, "from two");
  channel.send(5, "from five");
  CHECK(channel.inbox_of(5).pop() == "from two");
  CHECK(channel.inbox_of(2).pop() == "from five");
  CHECK_THROWS_AS(channel.send(3, "nope"), std::invalid_argument);
  CHECK_THROWS_AS(channel.inbox_of(3), std::invalid_argument);
  CHECK_THROWS_AS(Channel(4, 4), std::invalid_argument);
}

TEST_CASE("tamper hooks hit only their configured direction") {
  Channel channel(0, 1);
  channel.set_tamper(0, [](const std::string& wire) { return wire + "!"; });
  channel.send(0, "abc");
  channel.send(1, "abc");
  CHECK(channel.inbox_of(1).pop() == "abc!");
  CHECK(channel.inbox_of(0).pop() == "abc");
}

TEST_CASE("substrate releases nobody before everyone has asked") {
  const BitVector payload = BitVector::from_string("10");
  Substrate substrate(3, 2, payload, 7);
  std::atomic<int> arrived{0};
  std::atomic<bool> early_release{false};
  std::vector<std::thread> threads;
  for (std::size_t id = 0; id < 3; ++id) {
    threads.emplace_back([&, id] {
      arrived.fetch_add(1);
      const BitVector reg = substrate.measure(0, id);
      (void)reg;
      if (arrived.load() != 3) early_release = true;
    });
    // Stagger the arrivals so the barrier is actually exercised.
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  for (auto& t : threads) t.join();
  CHECK_FALSE(early_release.load());

  const Outcome joint = substrate.joint(0);
  CHECK(joint.xor_fold() == payload);
  for (std::size_t id = 0; id < 3; ++id) {
    CHECK(substrate.measure(0, id) == joint.by_player(id));  // replayed
  }
}

TEST_CASE("substrate draws match the local engine stream") {
  const BitVector payload = BitVector::from_string("01");
  Substrate substrate(2, 2, payload, 99);
  structured::StructuredState local(2, 2);
  local.embed(payload);
  for (std::uint64_t round = 0; round < 5; ++round) {
    std::thread other([&] { substrate.measure(round, 1); });
    substrate.measure(round, 0);
    other.join();
    Rng rng = Rng::split(99, round);
    CHECK(substrate.joint(round) == local.sample(rng));
  }
}

TEST_CASE("an unmeasured round has no joint outcome") {
  Substrate substrate(2, 1, BitVector::from_string("1"), 0);
  CHECK_THROWS_AS(substrate.joint(3), std::logic_error);
  CHECK_THROWS_AS(substrate.measure(0, 2), std::out_of_range);
}

TEST_CASE("a two-node round reaches consensus on the payload") {
  Network network(net_config(2, 1, 5));
  const auto results = network.run_round(0);
  REQUIRE(results.size() == 2);
  CHECK(verify_consensus(results));
  CHECK(results[0].decoded == BitVector::from_string("1"));
  CHECK(results[0].verdict.kind == Verdict::Kind::cryptographer_paid);
  CHECK(network.message_log().size() == 2);
  for (const auto& entry : network.message_log()) {
    CHECK(entry.accepted);
  }
}

TEST_CASE("four nodes exchange exactly all ordered pairs") {
  Network network(net_config(4, 2, 11));
  const auto results = network.run_round(0);
  REQUIRE(results.size() == 4);
  CHECK(verify_consensus(results));
  REQUIRE(network.message_log().size() == 12);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& entry : network.message_log()) {
    CHECK(entry.accepted);
    CHECK(entry.round_id == 0);
    pairs.insert({entry.sender, entry.receiver});
  }
  CHECK(pairs.size() == 12);
}

TEST_CASE("distributed rounds replay the local structured shots") {
  const ProtocolConfig config = net_config(3, 2, 21);
  Network network(config);
  const ProtocolEngine engine(config);
  for (std::uint64_t round = 0; round < 4; ++round) {
    const auto results = network.run_round(round);
    const RoundResult local = engine.run_shot(round);
    for (const auto& result : results) {
      CHECK(result.outcome == local.outcome);
      CHECK(result.decoded == local.decoded);
      CHECK((result.verdict == local.verdict));
    }
  }
}

TEST_CASE("a tampered link is detected and named") {
  Network network(net_config(3, 2, 31));
  network.set_tamper(0, 1, flip_register_bit);
  CHECK_THROWS_AS(network.run_round(0), SecurityError);
  bool saw_rejection = false;
  for (const auto& entry : network.message_log()) {
    if (!entry.accepted) {
      CHECK(entry.sender == 0);
      CHECK(entry.receiver == 1);
      CHECK(entry.reject_reason.find("auth tag mismatch") != std::string::npos);
      saw_rejection = true;
    }
  }
  CHECK(saw_rejection);
}

TEST_CASE("a withheld announcement leaves peers not ready") {
  Network network(net_config(2, 1, 41));
  std::thread other([&] { network.node(1).measure(0); });
  network.node(0).measure(0);
  other.join();
  network.node(0).broadcast(0);
  // Node 1 stays silent: node 0 has nothing to read and cannot decode.
  CHECK(network.node(0).drain(0) == 0);
  try {
    network.node(0).decode_round(0);
    FAIL("expected a not-ready error");
  } catch (const NotReadyError& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  // Node 1 did get node 0's message and can finish once it reads it.
  CHECK(network.node(1).drain(0) == 1);
  const RoundResult late = network.node(1).decode_round(0);
  CHECK(late.decoded == BitVector::from_string("1"));
}

TEST_CASE("broadcast before measure is a programming error") {
  Network network(net_config(2, 1, 43));
  CHECK_THROWS_AS(network.node(0).broadcast(0), std::logic_error);
}

TEST_CASE("post-verification corruption is caught by consensus") {
  Network network(net_config(2, 1, 51));
  REQUIRE(verify_consensus(network.run_round(0)));

  BitVector forged = network.substrate().joint(0).by_player(1);
  forged.set_bit(0, !forged.bit(0));
  network.node(0).inject_received(0, 1, forged);
  const std::vector<RoundResult> views{network.node(0).decode_round(0),
                                       network.node(1).decode_round(0)};
  CHECK_FALSE(verify_consensus(views));
}

TEST_CASE("consensus checking also validates the verdict itself") {
  Network network(net_config(2, 1, 61));
  auto results = network.run_round(0);
  REQUIRE(verify_consensus(results));

  auto broken_verdict = results;
  for (auto& r : broken_verdict) {
    r.verdict.amount += 1;  // unanimous but wrong
  }
  CHECK_FALSE(verify_consensus(broken_verdict));

  auto broken_decode = results;
  for (auto& r : broken_decode) {
    r.decoded ^= BitVector::from_string("1");
    r.verdict = interpret(r.decoded);  // consistent pair, wrong outcome fold
  }
  CHECK_FALSE(verify_consensus(broken_decode));

  CHECK_FALSE(verify_consensus({}));
}

TEST_CASE("latency only slows a round down") {
  Network network(net_config(2, 1, 71));
  network.set_latency(std::chrono::microseconds(200));
  const auto results = network.run_round(0);
  CHECK(verify_consensus(results));
}

TEST_CASE("the network insists on distributed mode") {
  ProtocolConfig config = net_config(2, 1, 3);
  config.mode = RunMode::local;
  CHECK_THROWS_AS(Network{config}, std::invalid_argument);
}
