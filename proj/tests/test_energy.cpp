#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rnm/energy.hpp"
#include "rnm/sync_rng.hpp"

using namespace rnm;

TEST_CASE("rnm_energy closed forms") {
  SUBCASE("RF only") {
    const EnergyBreakdown e = rnm_energy({0.0, 1.0, 1.0}, {8, 4});
    CHECK(e.total_per_bit == doctest::Approx(0.125));
    CHECK(e.latency_per_bit == doctest::Approx(8.0));
    CHECK(e.overhead_per_bit == 0.0);
  }
  SUBCASE("with overhead") {
    const EnergyBreakdown e = rnm_energy({1.0, 1.0, 1.0}, {8, 4});
    CHECK(e.overhead_per_bit == doctest::Approx(8.0));
    CHECK(e.total_per_bit == doctest::Approx(8.125));
  }
}

TEST_CASE("continuous_energy closed forms") {
  CHECK(continuous_energy({1.0, 1.0, 1.0}, 4).total_per_bit == doctest::Approx(1.0));
  CHECK(continuous_energy({0.0, 1.0, 1.0}, 2).total_per_bit == doctest::Approx(1.0));
  CHECK_THROWS_AS(continuous_energy({0.0, 1.0, 1.0}, 1), ConfigError);
}

TEST_CASE("break-even overhead equalizes the closed forms to 1e-12") {
  const EnergyParams base{0.0, 1.0, 1.0};
  const RnmConfig cfg{8, 4};
  const double p_star = break_even_overhead(base, cfg, 4);
  CHECK(p_star == doctest::Approx(0.05).epsilon(1e-12));
  EnergyParams at_star = base;
  at_star.overhead_power = p_star;
  const double rnm_total = rnm_energy(at_star, cfg).total_per_bit;
  const double cont_total = continuous_energy(at_star, 4).total_per_bit;
  CHECK(std::abs(rnm_total - cont_total) < 1e-12);
}

namespace {

SweepResult default_sweep(double overhead_power) {
  std::vector<RnmConfig> grid;
  for (const int b : {2, 4, 6, 8, 10, 12})
    for (const std::uint32_t m : {2u, 4u})
      if (m < (std::uint64_t{1} << b)) grid.push_back({b, m});
  const std::vector<std::uint32_t> continuous{2, 4, 8, 16};
  return tradeoff_sweep({overhead_power, 1.0, 1.0}, grid, continuous);
}

}  // namespace

TEST_CASE("RF-only total energy decreases in B at fixed M") {
  const SweepResult sweep = default_sweep(0.0);
  for (const std::uint32_t m : {2u, 4u}) {
    double previous = 1e300;
    for (const SweepEntry& entry : sweep.table) {
      if (entry.scheme != "rnm" || entry.m != m) continue;
      CHECK(entry.energy.total_per_bit < previous);
      previous = entry.energy.total_per_bit;
    }
  }
  // and RNM beats continuous whenever B > log2 M' in the RF-only regime
  for (const SweepEntry& r : sweep.table) {
    if (r.scheme != "rnm") continue;
    for (const SweepEntry& c : sweep.table) {
      if (c.scheme != "continuous") continue;
      if (r.bits > c.bits)
        CHECK(r.energy.total_per_bit < c.energy.total_per_bit);
    }
  }
}

TEST_CASE("large overhead makes the minimum-latency entry optimal") {
  const SweepResult sweep = default_sweep(10.0);  // 10 Es / Ts
  const std::size_t fastest = latency_argmin(sweep);
  CHECK(sweep.table[sweep.argmin_index].energy.latency_per_bit ==
        doctest::Approx(sweep.table[fastest].energy.latency_per_bit));
  CHECK(sweep.table[fastest].scheme == "continuous");
  CHECK(sweep.table[fastest].m == 16);
}

TEST_CASE("total energy is monotone in overhead power for every entry") {
  const SweepResult low = default_sweep(0.1);
  const SweepResult high = default_sweep(0.3);
  REQUIRE(low.table.size() == high.table.size());
  for (std::size_t i = 0; i < low.table.size(); ++i)
    CHECK(high.table[i].energy.total_per_bit >= low.table[i].energy.total_per_bit);
}

TEST_CASE("latency dominance threshold is computed, not assumed") {
  const SweepResult base = default_sweep(0.0);
  const double p_star = latency_dominance_threshold(base);
  CHECK(p_star > 0.0);
  const SweepResult above = default_sweep(p_star * 1.001);
  const std::size_t fastest = latency_argmin(above);
  CHECK(above.table[above.argmin_index].energy.latency_per_bit ==
        doctest::Approx(above.table[fastest].energy.latency_per_bit));
  // strictly below the threshold some slower entry still wins
  const SweepResult below = default_sweep(p_star * 0.5);
  CHECK(below.table[below.argmin_index].energy.latency_per_bit >
        below.table[latency_argmin(below)].energy.latency_per_bit);
}

TEST_CASE("singleton grid argmin") {
  const std::vector<RnmConfig> grid{{8, 4}};
  const SweepResult sweep = tradeoff_sweep({0.0, 1.0, 1.0}, grid, {});
  CHECK(sweep.table.size() == 1);
  CHECK(sweep.argmin_index == 0);
  CHECK_THROWS_AS(tradeoff_sweep({0.0, 1.0, 1.0}, {}, {}), ConfigError);
}

TEST_CASE("Monte Carlo energy accounting matches the analytic breakdown") {
  const RnmConfig cfg{8, 4};
  const EnergyParams params{0.7, 1.0, 1.0};
  const RngSeed seed = 15;
  const std::size_t count = 10000;
  BitCursor cursor{derive_substream(seed, 1)};
  std::vector<Message> messages(count);
  for (auto& m : messages)
    m = static_cast<Message>(uniform_below(cursor, cfg.message_space()));
  const TxSchedule schedule = encode_stream(messages, synchronized_words(seed, cfg),
                                            cfg, static_cast<std::uint64_t>(1) << 24);
  std::uint64_t slots = 0;
  for (const auto w : schedule.waits) slots += w;
  const double bits = static_cast<double>(count) * cfg.message_bits;
  const double rf_mc = params.symbol_energy * static_cast<double>(count) / bits;
  const double latency_mc = params.slot_duration * static_cast<double>(slots) / bits;
  const double overhead_mc = params.overhead_power * latency_mc;

  const EnergyBreakdown analytic = rnm_energy(params, cfg);
  CHECK(rf_mc == doctest::Approx(analytic.rf_per_bit));  // exact by construction
  const double p = cfg.match_probability();
  const double sigma_latency = params.slot_duration *
                               std::sqrt(static_cast<double>(count) * (1.0 - p)) /
                               (p * bits);
  CHECK(std::abs(latency_mc - analytic.latency_per_bit) <= 3.0 * sigma_latency);
  CHECK(std::abs(overhead_mc - analytic.overhead_per_bit) <=
        3.0 * params.overhead_power * sigma_latency);
  CHECK(std::abs((rf_mc + overhead_mc) - analytic.total_per_bit) <=
        3.0 * params.overhead_power * sigma_latency + 1e-12);
}

TEST_CASE("ppm accounting analog") {
  const EnergyBreakdown e = ppm_energy({1.0, 1.0, 1.0}, {8, 4});
  CHECK(e.rf_per_bit == doctest::Approx(0.2));       // 5 bits per frame
  CHECK(e.latency_per_bit == doctest::Approx(1.6));  // 8 slots per 5 bits
  CHECK(e.total_per_bit == doctest::Approx(1.8));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((EnergyParams{-1.0, 1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((EnergyParams{0.0, 0.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((EnergyParams{0.0, 1.0, 0.0}.validate()), ConfigError);
}
