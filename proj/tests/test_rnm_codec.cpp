#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rnm/rnm_codec.hpp"
#include "support/stats.hpp"

using namespace rnm;

namespace {

// slot-word stub: fixed sequence, then zeros
auto stub_words(std::vector<std::uint32_t> seq) {
  return [seq = std::move(seq)](SlotIndex slot) -> std::uint32_t {
    return slot < seq.size() ? seq[slot] : 0u;
  };
}

}  // namespace

TEST_CASE("match_slot follows the XOR-offset rule") {
  const RnmConfig cfg{2, 2};
  CHECK(match_slot(2, 3, cfg) == 1u);
  CHECK_FALSE(match_slot(2, 1, cfg).has_value());
  for (Message m = 0; m < 4; ++m) CHECK(match_slot(m, m, cfg) == 0u);
}

TEST_CASE("decode_event inverts match_slot") {
  const RnmConfig cfg{2, 2};
  CHECK(decode_event(3, 1, cfg) == 2);
  CHECK(decode_event(0, 0, cfg) == 0);
  CHECK_THROWS_AS(decode_event(0, 5, cfg), ConfigError);
}

TEST_CASE("round trip is exhaustive over the message space") {
  for (const RnmConfig cfg : {RnmConfig{4, 3}, RnmConfig{8, 4}, RnmConfig{12, 5}}) {
    cfg.validate();
    const auto space = static_cast<std::uint32_t>(cfg.message_space());
    for (std::uint32_t m = 0; m < space; ++m) {
      for (std::uint32_t r = 0; r < space; ++r) {
        const auto symbol = match_slot(m, r, cfg);
        if (symbol) CHECK(decode_event(r, *symbol, cfg) == m);
      }
      if (cfg.message_bits > 8) break;  // full square only at small B
    }
  }
}

TEST_CASE("encode_stream hand traces") {
  const RnmConfig cfg{2, 2};
  SUBCASE("match on the second slot") {
    const std::vector<Message> messages{2};
    const TxSchedule s = encode_stream(messages, stub_words({1, 3}), cfg, 100);
    REQUIRE(s.events.size() == 1);
    CHECK(s.events[0].slot == 1);
    CHECK(s.events[0].symbol_index == 1);
    CHECK(s.total_slots == 2);
    CHECK(s.waits == std::vector<std::uint64_t>{2});
  }
  SUBCASE("identity match at the first slot") {
    const std::vector<Message> messages{3};
    const TxSchedule s = encode_stream(messages, stub_words({3}), cfg, 100);
    REQUIRE(s.events.size() == 1);
    CHECK(s.events[0].slot == 0);
    CHECK(s.events[0].symbol_index == 0);
  }
  SUBCASE("budget error") {
    const std::vector<Message> messages{2};
    CHECK_THROWS_AS(encode_stream(messages, stub_words({1, 1, 1, 1}), cfg, 4),
                    SlotBudgetExceeded);
  }
  SUBCASE("empty message list") {
    const std::vector<Message> messages;
    const TxSchedule s = encode_stream(messages, stub_words({}), cfg, 10);
    CHECK(s.events.empty());
    CHECK(s.total_slots == 0);
  }
}

TEST_CASE("event slots strictly increase, one event per message") {
  const RnmConfig cfg{6, 3};
  const RngSeed seed = 7;
  std::vector<Message> messages;
  for (int i = 0; i < 500; ++i)
    messages.push_back(static_cast<Message>(rng_bits(seed, 1000 + i, cfg.message_bits) %
                                            cfg.message_space()));
  const TxSchedule s =
      encode_stream(messages, synchronized_words(seed, cfg), cfg, 1u << 20);
  REQUIRE(s.events.size() == messages.size());
  for (std::size_t k = 1; k < s.events.size(); ++k)
    CHECK(s.events[k].slot > s.events[k - 1].slot);
  CHECK(s.total_slots == s.events.back().slot + 1);
}

TEST_CASE("expected_wait_slots arithmetic") {
  CHECK(expected_wait_slots({8, 4}) == doctest::Approx(64.0));
  CHECK(expected_wait_slots({2, 2}) == doctest::Approx(2.0));
}

TEST_CASE("mean wait matches the geometric law within 3 standard errors") {
  const RnmConfig cfg{8, 4};
  const RngSeed seed = 11;
  const std::size_t count = 10000;
  BitCursor cursor{derive_substream(seed, 1)};
  std::vector<Message> messages(count);
  for (auto& m : messages)
    m = static_cast<Message>(uniform_below(cursor, cfg.message_space()));
  const TxSchedule s = encode_stream(messages, synchronized_words(seed, cfg), cfg,
                                     static_cast<std::uint64_t>(1) << 24);
  double total = 0.0;
  for (const auto w : s.waits) total += static_cast<double>(w);
  const double mean = total / static_cast<double>(count);
  const double p = cfg.match_probability();
  const double expected = 1.0 / p;
  const double se = std::sqrt((1.0 - p) / (p * p)) / std::sqrt(static_cast<double>(count));
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("waits follow a geometric law (chi-square at 0.01)") {
  const RnmConfig cfg{6, 4};  // p = 1/16
  const RngSeed seed = 5;
  const std::size_t count = 100000;
  BitCursor cursor{derive_substream(seed, 1)};
  std::vector<Message> messages(count);
  for (auto& m : messages)
    m = static_cast<Message>(uniform_below(cursor, cfg.message_space()));
  const TxSchedule s = encode_stream(messages, synchronized_words(seed, cfg), cfg,
                                     static_cast<std::uint64_t>(1) << 24);

  const double p = cfg.match_probability();
  const std::size_t cells = 200;  // waits 1..199 plus the tail
  std::vector<double> observed(cells, 0.0);
  for (const auto w : s.waits)
    ++observed[w < cells ? static_cast<std::size_t>(w) - 1 : cells - 1];
  std::vector<double> expected(cells, 0.0);
  double tail = static_cast<double>(count);
  for (std::size_t j = 0; j + 1 < cells; ++j) {
    expected[j] = static_cast<double>(count) * p * std::pow(1.0 - p, static_cast<double>(j));
    tail -= expected[j];
  }
  expected[cells - 1] = tail;
  const auto chi2 = teststat::chi2_statistic(observed, expected, 10.0);
  const double critical =
      teststat::chi2_critical(0.99, static_cast<double>(chi2.cells - 1));
  CHECK(chi2.statistic < critical);
}

TEST_CASE("ppm bit packing") {
  const PpmConfig cfg{4, 2};
  const PpmSymbol s = ppm_encode(0b101, cfg);
  CHECK(s.position == 2);
  CHECK(s.symbol_index == 1);
  const PpmSymbol zero = ppm_encode(0, cfg);
  CHECK(zero.position == 0);
  CHECK(zero.symbol_index == 0);
  CHECK_THROWS_AS(ppm_encode(8, cfg), ConfigError);
  CHECK_THROWS_AS((PpmConfig{3, 2}.validate()), ConfigError);

  const PpmConfig four{4, 4};
  for (std::uint32_t bits = 0; bits < 16; ++bits)
    CHECK(ppm_decode(ppm_encode(bits, four), four) == bits);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((RnmConfig{0, 2}.validate()), ConfigError);
  CHECK_THROWS_AS((RnmConfig{2, 4}.validate()), ConfigError);  // M must stay below 2^B
  CHECK_THROWS_AS((RnmConfig{8, 1}.validate()), ConfigError);
  CHECK_NOTHROW((RnmConfig{8, 3}.validate()));  // M need not be a power of two
}
