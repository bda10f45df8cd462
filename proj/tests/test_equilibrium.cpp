#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "viewrace/equilibrium.hpp"
#include "viewrace/errors.hpp"
#include "viewrace/hjb.hpp"

using namespace viewrace;

namespace {

SymmetricGame reference_game() { return SymmetricGame{100.0, 70.0, 100.0, 10, 1.0, 10.0}; }

GameConfig two_costs(double p = 1.0) {
  GameConfig c;
  c.players = {PlayerParams{100.0, 70.0, p, 0.0}, PlayerParams{100.0, 60.0, p, 0.0}};
  return c;
}

// Sign-corrected solution of the continuity equation at x*.
double k_star_closed_form(const SymmetricGame& g, double x) {
  const double n = static_cast<double>(g.n), y = 1.0 - x;
  const double du = g.u_max - g.u_min;
  return du * std::pow(y, g.p / (g.lambda * n * g.u_max)) *
         (y * g.lambda * g.p / ((g.p + g.lambda * n * g.u_max) * (g.p + g.lambda * n * g.u_min)) - g.gamma / g.p);
}

}  // namespace

TEST(SymmetricExistence, Margins) {
  auto g = reference_game();
  EXPECT_NEAR(symmetric_existence_margin(g), 100.0 * 10.0 / 11.0 - 70.0, 1e-12);
  EXPECT_TRUE(symmetric_existence(g));
  g.gamma = 95.0;
  EXPECT_NEAR(symmetric_existence_margin(g), 100.0 * 10.0 / 11.0 - 95.0, 1e-12);
  EXPECT_FALSE(symmetric_existence(g));
  g.gamma = 100.0;
  EXPECT_FALSE(symmetric_existence(g));
}

TEST(SymmetricEquilibrium, Fig2Threshold) {
  const auto g = reference_game();
  const auto r = symmetric_equilibrium(g);
  EXPECT_EQ(r.kind, EquilibriumKind::SymmetricExact);
  ASSERT_TRUE(r.x_star);
  EXPECT_NEAR(*r.x_star, 0.23, 1e-15);
  EXPECT_TRUE(r.single_switch_certified);
  EXPECT_EQ(r.epsilon, 0.0);
  for (double t : r.thresholds()) EXPECT_DOUBLE_EQ(t, *r.x_star);

  // Independent root of the switching coefficient in the K = 0 all-Min interval.
  const auto config = g.config();
  const auto piece = make_piece(config, 0, ControlLevel::Min, 900.0, 0.0, 1.0);
  auto phi = [&](double x) { return switching_coefficient(x, piece, g.lambda, g.gamma); };
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      phi, 0.0, 0.99, boost::math::tools::eps_tolerance<double>(50), iters);
  EXPECT_NEAR(0.5 * (root.first + root.second), *r.x_star, 1e-9);
  ASSERT_TRUE(r.switch_times);
  EXPECT_NEAR((*r.switch_times)[0], -std::log(0.77) / 10000.0, 1e-15);
}

TEST(SymmetricEquilibrium, Limits) {
  auto g = reference_game();
  g.gamma = 1e-9;
  EXPECT_NEAR(*symmetric_equilibrium(g).x_star, 1.0, 1e-9);
  g.gamma = 70.0;
  g.lambda = 50.0;
  const auto r = symmetric_equilibrium(g);
  EXPECT_EQ(r.kind, EquilibriumKind::DegenerateAllMin);
  EXPECT_FALSE(r.x_star);
  for (double t : r.thresholds()) EXPECT_EQ(t, 0.0);
  g.p = 0.0;
  EXPECT_THROW(symmetric_equilibrium(g), PreconditionError);
}

TEST(KStar, SolvesContinuity) {
  const auto g = reference_game();
  const double k = k_star_from_continuity(g, 0.23);
  EXPECT_NEAR(k, k_star_closed_form(g, 0.23), 1e-12 * std::abs(k));

  // The two-piece value function is continuous at x*.
  const auto c = g.config();
  auto lower = make_piece(c, 0, ControlLevel::Max, 9000.0, 0.0, 0.23, k);
  const auto upper = make_piece(c, 0, ControlLevel::Min, 900.0, 0.23, 1.0);
  EXPECT_LE(std::abs(value_eval(lower, 0.23) - value_eval(upper, 0.23)), 1e-12);

  // The same expression with +gamma/p, as displayed alongside the continuity
  // equation, does not restore continuity.
  const double n = 10.0, y = 0.77, du = 9.0;
  const double plus = du * std::pow(y, g.p / (g.lambda * n * g.u_max)) *
                      (y * g.lambda * g.p / ((g.p + g.lambda * n * g.u_max) * (g.p + g.lambda * n * g.u_min)) +
                       g.gamma / g.p);
  lower.K = plus;
  EXPECT_GT(std::abs(value_eval(lower, 0.23) - value_eval(upper, 0.23)), 1.0);
}

TEST(KStar, DegenerateCollapse) {
  auto g = reference_game();
  g.u_max = g.u_min;
  EXPECT_NEAR(k_star_from_continuity(g, 0.23), 0.0, 1e-15);
}

TEST(KStar, RandomDrawsContinuityAndSign) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int draws = 0, negative = 0;
  while (draws < 100) {
    SymmetricGame g{10.0 + 190.0 * u(rng), 200.0 * u(rng), 0.1 + 200.0 * u(rng),
                    static_cast<std::size_t>(2 + rng() % 20), 1.0, 2.0 + 18.0 * u(rng)};
    if (!symmetric_existence(g)) continue;
    ++draws;
    const double x = symmetric_threshold(g);
    const double k = k_star_from_continuity(g, x);
    EXPECT_NEAR(k, k_star_closed_form(g, x), 1e-10 * std::max(1.0, std::abs(k)));
    const auto r = symmetric_equilibrium(g);
    const auto c = g.config();
    const double a_max = static_cast<double>(g.n) * g.lambda * g.u_max;
    const double a_min = static_cast<double>(g.n) * g.lambda * g.u_min;
    const auto lower = make_piece(c, 0, ControlLevel::Max, a_max - g.lambda * g.u_max, 0.0, x, *r.k_star);
    const auto upper = make_piece(c, 0, ControlLevel::Min, a_min - g.lambda * g.u_min, x, 1.0);
    EXPECT_LE(std::abs(value_eval(lower, x) - value_eval(upper, x)), 1e-9);
    negative += k < 0.0;
  }
  // The continuity constant is negative throughout the existence region.
  EXPECT_EQ(negative, 100);
}

TEST(SymmetricEquilibrium, DeviationsDoNotPay) {
  const auto g = reference_game();
  const auto c = g.config();
  const auto r = symmetric_equilibrium(g);
  const double j_eq = cost_quadrature(c, r.profile, 0).cost;
  for (double d : {-0.05, -0.01, 0.01, 0.05}) {
    auto dev = r.profile;
    dev[0] = PlayerStrategy::threshold(*r.x_star + d);
    EXPECT_GE(cost_quadrature(c, dev, 0).cost, j_eq - 1e-6) << d;
  }
}

TEST(VanishingThreshold, SpotValuesAndLimits) {
  const PlayerParams q{100.0, 70.0, 100.0, 0.0};
  EXPECT_NEAR(vanishing_threshold(q, 9000.0, 1.0, 10.0), 1.0 - 0.7 / ((1.0 + 1.0 / 90.0) * (1.0 + 1.0 / 9.0)), 1e-15);
  EXPECT_NEAR(vanishing_threshold(q, 9000.0, 1.0, 10.0), 0.37693, 1e-5);
  EXPECT_NEAR(vanishing_threshold(q, 900.0, 1.0, 10.0), 0.70158, 1e-5);
  EXPECT_NEAR(vanishing_threshold(q, 1e12, 1.0, 10.0), 0.3, 1e-8);
  EXPECT_EQ(vanishing_threshold(q, 0.0, 1.0, 10.0), 1.0);
  EXPECT_EQ(vanishing_threshold(PlayerParams{1.0, 5.0, 1.0, 0.0}, 1000.0, 1.0, 10.0), 0.0);
  EXPECT_THROW(vanishing_threshold(q, -1.0, 1.0, 10.0), DomainError);
}

TEST(VanishingThreshold, Monotonicity) {
  for (double r : {0.01, 0.1, 0.5, 0.7, 0.95}) {
    const PlayerParams q{100.0, r * 100.0, 100.0, 0.0};
    double prev = 2.0;
    for (double a = 900.0; a <= 9000.0; a += 45.0) {
      const double x = vanishing_threshold(q, a, 1.0, 10.0);
      EXPECT_LT(x, prev);
      prev = x;
    }
  }
  for (double a : {900.0, 3000.0, 9000.0}) {
    double prev = 2.0;
    for (double r : {0.01, 0.1, 0.5, 0.7, 0.95}) {
      const double x = vanishing_threshold(PlayerParams{100.0, r * 100.0, 1.0, 0.0}, a, 1.0, 10.0);
      EXPECT_LT(x, prev);
      prev = x;
    }
    // Larger rate at fixed cost: larger threshold.
    EXPECT_GT(vanishing_threshold(PlayerParams{200.0, 70.0, 1.0, 0.0}, a, 1.0, 10.0),
              vanishing_threshold(PlayerParams{100.0, 70.0, 1.0, 0.0}, a, 1.0, 10.0));
  }
}

TEST(EpsilonEquilibrium, TwoProviders) {
  const auto r = epsilon_equilibrium(two_costs(), 1.0);
  EXPECT_EQ(r.kind, EquilibriumKind::EpsilonApprox);
  ASSERT_EQ(r.switch_order.size(), 2u);
  EXPECT_EQ(r.switch_order[0], 0u);
  EXPECT_EQ(r.switch_order[1], 1u);
  EXPECT_NEAR(r.switch_states[0], 1.0 - 0.7 / ((1.0 + 0.1) * (1.0 + 1.0)), 1e-12);
  EXPECT_NEAR(r.switch_states[0], 0.68182, 1e-5);
  EXPECT_NEAR(r.switch_states[1], 0.97273, 1e-5);
  ASSERT_TRUE(r.switch_times);
  EXPECT_LT((*r.switch_times)[0], (*r.switch_times)[1]);
  EXPECT_GE(r.epsilon, 0.0);
  EXPECT_EQ(r.epsilon_contributions.size(), 2u);

  // No level ever increases along the realized trajectory.
  const auto traj = simulate(two_costs(), r.profile);
  for (std::size_t s = 1; s < traj.segments.size(); ++s)
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_FALSE(traj.segments[s - 1].levels[i] == ControlLevel::Min &&
                   traj.segments[s].levels[i] == ControlLevel::Max);
}

TEST(EpsilonEquilibrium, PositiveAtSmallDiscounts) {
  for (double p : {1.0, 0.1, 0.01}) EXPECT_GT(epsilon_equilibrium(two_costs(), p).epsilon, 0.0);
}

TEST(EpsilonEquilibrium, Preconditions) {
  auto c = two_costs();
  c.players[1].gamma = 70.0;
  EXPECT_THROW(epsilon_equilibrium(c), PreconditionError);
  c = two_costs();
  c.players[1].lambda = 90.0;
  EXPECT_THROW(epsilon_equilibrium(c), PreconditionError);
  c = two_costs();
  c.players[0].gamma = 120.0;
  c.players[1].gamma = 110.0;
  EXPECT_THROW(epsilon_equilibrium(c), PreconditionError);
}

TEST(BestResponseIteration, SymmetricFromAllMin) {
  const auto g = reference_game();
  const auto c = g.config();
  const auto r = best_response_iteration(c, constant_profile(10, ControlLevel::Min));
  EXPECT_EQ(r.kind, EquilibriumKind::IterationFixedPoint);
  EXPECT_LE(r.rounds, 20);
  for (double t : r.thresholds()) EXPECT_NEAR(t, 0.23, 1e-6);
}

TEST(BestResponseIteration, DegenerateOneRound) {
  auto c = reference_game().config();
  for (auto& q : c.players) q.lambda = 50.0;
  const auto r = best_response_iteration(c, constant_profile(10, ControlLevel::Max));
  for (double t : r.thresholds()) EXPECT_EQ(t, 0.0);
  // Round one moves everyone to Min; round two confirms.
  EXPECT_LE(r.rounds, 2);
  const auto again = best_response_iteration(c, constant_profile(10, ControlLevel::Min));
  EXPECT_EQ(again.rounds, 1);
}

TEST(BestResponseIteration, HeterogeneousRates) {
  GameConfig c;
  for (int i = 0; i < 10; ++i) {
    const double lambda = i < 5 ? 100.0 : 200.0;
    c.players.push_back(PlayerParams{lambda, 70.0, lambda, 0.0});
  }
  const auto r = best_response_iteration(c, constant_profile(10, ControlLevel::Min));
  const auto th = r.thresholds();
  for (int i = 0; i < 5; ++i)
    for (int j = 5; j < 10; ++j) EXPECT_GT(th[static_cast<std::size_t>(j)], th[static_cast<std::size_t>(i)]);
}

TEST(BestResponseIteration, NonConvergenceCarriesTrace) {
  const auto c = reference_game().config();
  IterationOptions opt;
  opt.max_rounds = 1;
  try {
    best_response_iteration(c, constant_profile(10, ControlLevel::Min), opt);
    FAIL();
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.last.improvement_trace.size(), 1u);
    EXPECT_GT(e.last.epsilon, 0.0);
  }
}

TEST(EquilibriumReport, Text) {
  std::ostringstream out;
  write_equilibrium_report(out, symmetric_equilibrium(reference_game()));
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "SymmetricExact, x*=0.230000");
  std::ostringstream deg;
  auto g = reference_game();
  g.lambda = 50.0;
  write_equilibrium_report(deg, symmetric_equilibrium(g));
  EXPECT_EQ(deg.str().substr(0, deg.str().find('\n')), "DegenerateAllMin");
  std::ostringstream csv;
  write_equilibrium_csv(csv, two_costs(), epsilon_equilibrium(two_costs()));
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "player,threshold,switch_time,epsilon_contribution");
}
