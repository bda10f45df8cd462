#include "viewrace/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "viewrace/dynamics.hpp"
#include "viewrace/errors.hpp"
#include "viewrace/hjb.hpp"

namespace viewrace {

const char* to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::DegenerateAllMin: return "DegenerateAllMin";
    case EquilibriumKind::SymmetricExact: return "SymmetricExact";
    case EquilibriumKind::EpsilonApprox: return "EpsilonApprox";
    case EquilibriumKind::IterationFixedPoint: return "IterationFixedPoint";
  }
  return "?";
}

std::vector<double> EquilibriumResult::thresholds() const {
  std::vector<double> out;
  for (const auto& s : profile) out.push_back(s.threshold_value());
  return out;
}

GameConfig SymmetricGame::config() const {
  return GameConfig::symmetric_game(n, PlayerParams{lambda, gamma, p, 0.0}, u_min, u_max);
}

double symmetric_existence_margin(const SymmetricGame& g) {
  const double nn = static_cast<double>(g.n);
  return g.lambda * (1.0 - g.u_min * g.lambda / (g.p + nn * g.lambda * g.u_min)) - g.gamma;
}

bool symmetric_existence(const SymmetricGame& g) { return symmetric_existence_margin(g) > 0.0; }

double symmetric_threshold(const SymmetricGame& g) {
  const double nn = static_cast<double>(g.n);
  return 1.0 - g.gamma * (g.p + nn * g.lambda * g.u_min) /
                   (g.lambda * (g.p + (nn - 1.0) * g.u_min * g.lambda));
}

namespace {

ValuePiece<double> symmetric_piece(const SymmetricGame& g, ControlLevel level, double lo, double hi) {
  const double u = level_value(level, g.u_min, g.u_max);
  ValuePiece<double> piece;
  piece.x_lo = lo;
  piece.x_hi = hi;
  piece.b = g.lambda * u;
  piece.a = static_cast<double>(g.n) * piece.b;
  piece.c = g.gamma * (g.u_min - u);
  piece.p = g.p;
  piece.level = level;
  return piece;
}

}  // namespace

double k_star_from_continuity(const SymmetricGame& g, double x_star) {
  if (!(x_star > 0.0 && x_star < 1.0)) throw DomainError("k_star_from_continuity: x* must lie in (0,1)");
  const auto upper = symmetric_piece(g, ControlLevel::Min, x_star, 1.0);
  const auto lower = symmetric_piece(g, ControlLevel::Max, 0.0, x_star);
  const double k = continuity_constant(lower, x_star, value_eval(upper, x_star));
  if (!std::isfinite(k)) throw ContinuityInfeasible("continuity equation has no finite solution");
  return k;
}

EquilibriumResult symmetric_equilibrium(const SymmetricGame& g, int grid_points) {
  if (!(g.p > 0.0)) throw PreconditionError("symmetric_equilibrium: p > 0 required");
  if (g.n < 1) throw PreconditionError("symmetric_equilibrium: at least one player required");

  EquilibriumResult result;
  if (!symmetric_existence(g)) {
    result.kind = EquilibriumKind::DegenerateAllMin;
    result.profile = constant_profile(g.n, ControlLevel::Min);
    result.single_switch_certified = true;
    return result;
  }

  const double x_star = symmetric_threshold(g);
  const double k_star = k_star_from_continuity(g, x_star);
  result.kind = EquilibriumKind::SymmetricExact;
  result.x_star = x_star;
  result.k_star = k_star;
  result.profile = StrategyProfile(g.n, PlayerStrategy::threshold(x_star));

  const auto config = g.config();
  const auto& q = config.players.front();
  const double a_others = static_cast<double>(g.n - 1) * g.lambda * g.u_max;
  bool certified = true;
  for (int k = 0; k < grid_points; ++k) {
    const double x = x_star * static_cast<double>(k) / static_cast<double>(grid_points);
    const double slope = switching_function_T_slope(ControlLevel::Max, a_others, k_star, x, q, config);
    const double t = switching_function_T(ControlLevel::Max, a_others, k_star, x, q, config);
    if (!(slope < 0.0) || !(t > 0.0)) {
      certified = false;
      break;
    }
  }
  result.single_switch_certified = certified;

  const auto traj = simulate(config, result.profile);
  const double t_switch = traj.segments.size() > 1 ? traj.segments[1].t_start
                                                   : std::numeric_limits<double>::infinity();
  result.switch_times = std::vector<double>(g.n, t_switch);
  result.switch_states.assign(g.n, x_star);
  return result;
}

double vanishing_threshold(const PlayerParams& params, double a_minus_i, double u_min, double u_max) {
  if (a_minus_i < 0.0) throw DomainError("vanishing_threshold: a_-i must be non-negative");
  if (a_minus_i == 0.0) return 1.0;
  const double lo = 1.0 + params.lambda * u_min / a_minus_i;
  const double hi = 1.0 + params.lambda * u_max / a_minus_i;
  const double x0 = 1.0 - (params.gamma / params.lambda) / (lo * hi);
  return std::clamp(x0, 0.0, 1.0);
}

EquilibriumResult epsilon_equilibrium(const GameConfig& config, std::optional<double> p_estimate) {
  const std::size_t n = config.size();
  if (n == 0) throw PreconditionError("epsilon_equilibrium: no players");
  const double lambda = config.players.front().lambda;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = config.players[i];
    if (q.lambda != lambda) throw PreconditionError("epsilon_equilibrium: lambda must be common");
    if (i > 0 && !(config.players[i - 1].gamma > q.gamma))
      throw PreconditionError("epsilon_equilibrium: gamma must be strictly decreasing");
  }
  if (!(lambda > config.players.front().gamma))
    throw PreconditionError("epsilon_equilibrium: lambda > gamma_1 required");

  const double tol_x = kSaturationTol;
  std::vector<ControlLevel> levels(n, ControlLevel::Max);
  std::vector<bool> dropped(n, false);
  std::vector<double> times(n, std::numeric_limits<double>::infinity());
  std::vector<double> states(n, 1.0);
  EquilibriumResult result;
  result.kind = EquilibriumKind::EpsilonApprox;

  double x = config.initial_aggregate();
  double t = 0.0;
  auto current_thresholds = [&] {
    const auto rate = aggregate_rate(config, levels);
    std::vector<double> th(n);
    for (std::size_t i = 0; i < n; ++i)
      th[i] = vanishing_threshold(config.players[i], rate.minus(i), config.u_min, config.u_max);
    return std::pair{th, rate.a};
  };

  for (;;) {
    const auto [th, a] = current_thresholds();
    for (std::size_t j = 0; j < n; ++j) {
      if (dropped[j] && th[j] > x) {
        std::ostringstream msg;
        msg << "player " << j + 1 << " would switch back to u_max at x=" << x << " (threshold "
            << th[j] << ")";
        throw OrderViolation(msg.str());
      }
    }
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!dropped[j] && (next == n || th[j] < th[next])) next = j;
    if (next == n) break;
    const double x_drop = std::max(th[next], x);
    if (!(x_drop < 1.0 - tol_x)) break;
    t += time_to_reach(x, x_drop, a);
    x = x_drop;
    levels[next] = ControlLevel::Min;
    dropped[next] = true;
    times[next] = t;
    states[next] = x_drop;
    result.switch_order.push_back(next);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (dropped[i]) {
      result.profile.push_back(PlayerStrategy::threshold(states[i]));
    } else {
      result.profile.push_back(PlayerStrategy::constant(ControlLevel::Max));
    }
  }
  result.switch_states = states;
  result.switch_times = times;

  GameConfig eps_config = config;
  eps_config.horizon = InfiniteHorizon{};
  if (p_estimate)
    for (auto& q : eps_config.players) q.p = *p_estimate;
  for (const auto& q : eps_config.players)
    if (!(q.p > 0.0)) throw PreconditionError("epsilon_equilibrium: positive discount required for epsilon");

  result.epsilon_contributions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double j_profile = cost_quadrature(eps_config, result.profile, i).cost;
    const auto br = best_response(eps_config, i, result.profile);
    auto deviated = result.profile;
    deviated[i] = br.strategy;
    const double j_best = cost_quadrature(eps_config, deviated, i).cost;
    result.epsilon_contributions[i] = j_profile - j_best;
  }
  result.epsilon = std::max(0.0, *std::max_element(result.epsilon_contributions.begin(),
                                                   result.epsilon_contributions.end()));
  return result;
}

EquilibriumResult best_response_iteration(const GameConfig& config, StrategyProfile initial,
                                          const IterationOptions& options) {
  const std::size_t n = config.size();
  if (initial.size() != n) throw PreconditionError("best_response_iteration: profile size mismatch");
  for (const auto& q : config.players)
    if (!(q.p > 0.0)) throw PreconditionError("best_response_iteration: p > 0 required");

  EquilibriumResult result;
  result.kind = EquilibriumKind::IterationFixedPoint;
  StrategyProfile profile = std::move(initial);
  std::vector<double> gains(n, 0.0);

  for (int round = 1; round <= options.max_rounds; ++round) {
    const StrategyProfile previous = profile;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const StrategyProfile& against = options.jacobi ? previous : profile;
      const auto br = best_response(config, i, against, options.best_response);
      auto candidate = against;
      candidate[i] = br.strategy;
      const double gain =
          cost_quadrature(config, against, i).cost - cost_quadrature(config, candidate, i).cost;
      gains[i] = gain;
      worst = std::max(worst, gain);
      if (gain > options.tol) profile[i] = br.strategy;
    }
    result.improvement_trace.push_back(worst);
    result.rounds = round;
    if (worst <= options.tol) {
      result.profile = profile;
      result.epsilon = std::max(0.0, worst);
      result.epsilon_contributions = gains;
      return result;
    }
  }
  result.profile = profile;
  result.epsilon_contributions = gains;
  result.epsilon = result.improvement_trace.back();
  std::ostringstream msg;
  msg << "best-response iteration did not converge in " << options.max_rounds
      << " rounds (last improvement " << result.epsilon << ")";
  throw NonConvergence(msg.str(), std::move(result));
}

void write_equilibrium_report(std::ostream& out, const EquilibriumResult& result) {
  out << std::fixed << std::setprecision(6);
  out << to_string(result.kind);
  if (result.x_star) out << ", x*=" << *result.x_star;
  out << "\n";
  if (result.k_star) out << "K*=" << std::defaultfloat << std::setprecision(9) << *result.k_star << "\n";
  out << std::defaultfloat << std::setprecision(9);
  out << "epsilon=" << result.epsilon << "\n";
  if (result.kind == EquilibriumKind::SymmetricExact)
    out << "single_switch_certified=" << (result.single_switch_certified ? "yes" : "no") << "\n";
  if (!result.switch_order.empty()) {
    out << "switch_order:";
    for (auto k : result.switch_order) out << " " << k + 1;
    out << "\n";
  }
  if (result.rounds > 0) out << "rounds=" << result.rounds << "\n";
  const auto th = result.thresholds();
  out << "thresholds:";
  for (double v : th) out << " " << v;
  out << "\n";
}

void write_equilibrium_csv(std::ostream& out, const GameConfig& config, const EquilibriumResult& result) {
  out << "player,threshold,switch_time,epsilon_contribution\n" << std::setprecision(12);
  const auto th = result.thresholds();
  std::vector<double> times;
  if (result.switch_times) {
    times = *result.switch_times;
  } else {
    const auto traj = simulate(config, result.profile);
    for (std::size_t i = 0; i < result.profile.size(); ++i) {
      double ti = std::numeric_limits<double>::infinity();
      for (const auto& seg : traj.segments)
        if (seg.levels[i] == ControlLevel::Min && seg.t_start > 0.0) {
          ti = seg.t_start;
          break;
        }
      times.push_back(ti);
    }
  }
  for (std::size_t i = 0; i < result.profile.size(); ++i) {
    const double eps = i < result.epsilon_contributions.size() ? result.epsilon_contributions[i] : 0.0;
    out << i + 1 << "," << th[i] << "," << times[i] << "," << eps << "\n";
  }
}

}  // namespace viewrace
