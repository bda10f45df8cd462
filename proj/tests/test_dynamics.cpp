#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "viewrace/dynamics.hpp"
#include "viewrace/errors.hpp"

using namespace viewrace;

namespace {

GameConfig reference_game(std::size_t n = 10) {
  return GameConfig::symmetric_game(n, PlayerParams{100.0, 70.0, 100.0, 0.0}, 1.0, 10.0);
}

}  // namespace

TEST(Advance, Examples) {
  EXPECT_EQ(advance(0.3, 50.0, 0.0), 0.3);
  EXPECT_NEAR(advance(0.0, 1000.0, 0.001), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_EQ(advance(0.5, 10.0, std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_THROW(advance(1.0, 1.0, 1.0), DomainError);

  // Single player, constant level: against the generic integrator.
  auto c = GameConfig::symmetric_game(1, PlayerParams{1000.0, 1.0, 1.0, 0.0}, 1.0, 2.0);
  const auto ref = oracle::integrate_fluid(c, constant_profile(1, ControlLevel::Min), {0.001});
  EXPECT_NEAR(advance(0.0, 1000.0, 0.001), ref[0][0], 1e-8);
}

TEST(TimeToReach, Examples) {
  EXPECT_EQ(time_to_reach(0.4, 0.4, 3.0), 0.0);
  EXPECT_NEAR(time_to_reach(0.0, 1.0 - std::exp(-1.0), 1000.0), 0.001, 1e-15);
  EXPECT_THROW(time_to_reach(0.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(time_to_reach(0.5, 0.4, 1.0), DomainError);
}

TEST(TimeToReach, RoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * 0.999;
    const double x2 = x + (0.9999 - x) * u(rng);
    const double a = std::exp(10.0 * u(rng) - 2.0);
    EXPECT_NEAR(advance(x, a, time_to_reach(x, x2, a)), x2, 1e-12);
  }
}

TEST(Simulate, AllMinSingleSegment) {
  const auto c = reference_game();
  const auto traj = simulate(c, constant_profile(10, ControlLevel::Min));
  ASSERT_EQ(traj.segments.size(), 1u);
  EXPECT_DOUBLE_EQ(traj.segments[0].a, 1000.0);
  EXPECT_TRUE(std::isinf(traj.t_final()));
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.0005 * k);
  const auto ref = oracle::integrate_fluid(c, constant_profile(10, ControlLevel::Min), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_NEAR(traj.aggregate_at(times[k]), 1.0 - std::exp(-1000.0 * times[k]), 1e-14);
    double agg = 0.0;
    for (std::size_t i = 0; i < 10; ++i) agg += ref[k][i];
    EXPECT_NEAR(traj.aggregate_at(times[k]), agg, 1e-8);
  }
}

TEST(Simulate, ZeroThresholdsEqualAllMin) {
  const auto c = reference_game(4);
  const auto a = simulate(c, StrategyProfile(4, PlayerStrategy::threshold(0.0)));
  const auto b = simulate(c, constant_profile(4, ControlLevel::Min));
  ASSERT_EQ(a.segments.size(), b.segments.size());
  for (double t : {0.0, 0.001, 0.003, 0.01}) EXPECT_DOUBLE_EQ(a.aggregate_at(t), b.aggregate_at(t));
}

TEST(Simulate, SymmetricEquilibriumTwoSegments) {
  const auto c = reference_game();
  const auto traj = simulate(c, StrategyProfile(10, PlayerStrategy::threshold(0.23)));
  ASSERT_EQ(traj.segments.size(), 2u);
  EXPECT_DOUBLE_EQ(traj.segments[0].a, 10000.0);
  EXPECT_DOUBLE_EQ(traj.segments[1].a, 1000.0);
  EXPECT_NEAR(traj.segments[1].x_agg_start(), 0.23, 1e-15);
  EXPECT_NEAR(traj.segments[1].t_start, -std::log(0.77) / 10000.0, 1e-18);
}

TEST(Simulate, SimultaneousCrossingIsOneEvent) {
  auto c = reference_game(3);
  const auto traj = simulate(c, StrategyProfile{PlayerStrategy::threshold(0.5), PlayerStrategy::threshold(0.5),
                                                PlayerStrategy::threshold(0.7)});
  ASSERT_EQ(traj.segments.size(), 3u);
  EXPECT_DOUBLE_EQ(traj.segments[1].a, 100.0 + 100.0 + 1000.0);
}

TEST(Simulate, StopsAtEndTime) {
  const auto c = reference_game(2);
  StopCondition stop;
  stop.t_end = 0.0001;
  const auto traj = simulate(c, StrategyProfile(2, PlayerStrategy::threshold(0.9)), stop);
  EXPECT_DOUBLE_EQ(traj.t_final(), 0.0001);
  EXPECT_EQ(traj.segments.size(), 1u);
}

TEST(Simulate, OracleEquivalenceAndInvariants) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    GameConfig c;
    c.u_min = 1.0;
    c.u_max = 2.0 + 8.0 * u(rng);
    const std::size_t n = 1 + trial % 5;
    StrategyProfile profile;
    std::size_t breakpoints = 0;
    for (std::size_t i = 0; i < n; ++i) {
      c.players.push_back(PlayerParams{10.0 + 90.0 * u(rng), 5.0, 1.0, 0.04 * u(rng)});
      if (trial % 3 == 2) {
        double b1 = u(rng), b2 = u(rng);
        if (b1 > b2) std::swap(b1, b2);
        profile.push_back(PlayerStrategy{{b1, b2}, {ControlLevel::Min, ControlLevel::Max, ControlLevel::Min}});
        breakpoints += 2;
      } else {
        profile.push_back(PlayerStrategy::threshold(u(rng)));
        breakpoints += 1;
      }
    }
    StopCondition stop;
    stop.t_end = 3.0 / (c.players[0].lambda);
    const auto traj = simulate(c, profile, stop);
    EXPECT_LE(traj.segments.size(), breakpoints + 1);

    std::vector<double> times;
    for (int k = 1; k <= 50; ++k) times.push_back(*stop.t_end * k / 50.0);
    const auto ref = oracle::integrate_fluid(c, profile, times);
    double prev = -1.0;
    Eigen::VectorXd prev_x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::vector<int> prev_level(n, 2);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto x = traj.state_at(times[k]);
      const double agg = traj.aggregate_at(times[k]);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[static_cast<Eigen::Index>(i)], ref[k][i], 1e-8);
      EXPECT_NEAR(x.sum(), agg, 1e-12);
      EXPECT_GT(agg, prev);
      EXPECT_LT(agg, 1.0);
      EXPECT_TRUE(((x - prev_x).array() >= -1e-15).all());
      prev = agg;
      prev_x = x;
    }
    // Threshold profiles realize nonincreasing controls.
    if (trial % 3 != 2) {
      for (const auto& seg : traj.segments)
        for (std::size_t i = 0; i < n; ++i) {
          const int lv = seg.levels[i] == ControlLevel::Max ? 1 : 0;
          EXPECT_LE(lv, prev_level[i]);
          prev_level[i] = lv;
        }
    }
    // Segments abut and the state is continuous.
    for (std::size_t s = 1; s < traj.segments.size(); ++s) {
      const auto& a = traj.segments[s - 1];
      const auto& b = traj.segments[s];
      EXPECT_DOUBLE_EQ(a.t_end, b.t_start);
      EXPECT_LT(a.t_start, a.t_end);
      EXPECT_NEAR((a.state_at(a.t_end) - b.x_start).norm(), 0.0, 1e-13);
    }
  }
}

TEST(Simulate, SaturationAndTailBound) {
  const auto c = reference_game();
  const auto traj = simulate(c, StrategyProfile(10, PlayerStrategy::threshold(0.23)));
  const double ts = traj.saturation_time();
  EXPECT_NEAR(traj.aggregate_at(ts), 1.0 - 1e-9, 1e-15);
  EXPECT_NEAR(tail_bound(c, 0, ts), std::exp(-100.0 * ts) * (1000.0 + 630.0) / 100.0, 1e-12);
  auto c0 = c;
  c0.players[0].p = 0.0;
  EXPECT_TRUE(std::isinf(tail_bound(c0, 0, ts)));
}

TEST(TrajectoryCsv, HeaderRowsAndSampling) {
  const auto c = reference_game(2);
  const auto traj = simulate(c, StrategyProfile(2, PlayerStrategy::threshold(0.23)));
  std::ostringstream plain, sampled;
  write_trajectory_csv(plain, traj, c);
  write_trajectory_csv(sampled, traj, c, 0.0001);
  std::istringstream in(plain.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x_1,x_2,x_agg,u_1,u_2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);  // start, switch, saturation
  int sampled_rows = -1;
  std::istringstream in2(sampled.str());
  while (std::getline(in2, line)) ++sampled_rows;
  EXPECT_GT(sampled_rows, rows + 10);
}
