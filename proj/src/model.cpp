#include "viewrace/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace viewrace {

Eigen::VectorXd GameConfig::lambdas() const {
  Eigen::VectorXd out(players.size());
  for (std::size_t i = 0; i < players.size(); ++i) out[i] = players[i].lambda;
  return out;
}

Eigen::VectorXd GameConfig::initial_state() const {
  Eigen::VectorXd out(players.size());
  for (std::size_t i = 0; i < players.size(); ++i) out[i] = players[i].z;
  return out;
}

double GameConfig::initial_aggregate() const { return initial_state().sum(); }

bool GameConfig::symmetric() const {
  if (players.empty()) return false;
  const auto& q = players.front();
  return std::all_of(players.begin(), players.end(), [&](const PlayerParams& r) {
    return r.lambda == q.lambda && r.gamma == q.gamma && r.p == q.p && r.z == q.z;
  });
}

GameConfig GameConfig::symmetric_game(std::size_t n, const PlayerParams& params, double u_min,
                                      double u_max) {
  GameConfig config;
  config.players.assign(n, params);
  config.u_min = u_min;
  config.u_max = u_max;
  return config;
}

const char* to_string(ControlLevel level) { return level == ControlLevel::Max ? "Max" : "Min"; }

std::vector<Violation> validate(const GameConfig& config) {
  std::vector<Violation> out;
  auto add = [&out](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };

  if (config.players.empty()) add("n_players", "at least one player is required");
  if (!std::isfinite(config.u_min) || config.u_min < 1.0) add("u_min", "u_min must be >= 1");
  if (!std::isfinite(config.u_max) || !(config.u_max > config.u_min))
    add("u_max", "u_max must be finite and > u_min");
  if (const auto* fh = std::get_if<FiniteHorizon>(&config.horizon)) {
    if (!(fh->tau >= 0.0) || !std::isfinite(fh->tau)) add("tau", "tau must be finite and >= 0");
  }

  double zsum = 0.0;
  for (std::size_t i = 0; i < config.players.size(); ++i) {
    const auto& q = config.players[i];
    const std::string tag = "player" + std::to_string(i + 1) + ".";
    if (!(q.lambda > 0.0) || !std::isfinite(q.lambda)) add(tag + "lambda", "lambda must be > 0");
    if (!(q.gamma > 0.0) || !std::isfinite(q.gamma)) add(tag + "gamma", "gamma must be > 0");
    if (!(q.p >= 0.0) || !std::isfinite(q.p)) add(tag + "p", "p must be >= 0");
    if (config.infinite() && !(q.p > 0.0))
      add(tag + "p", "p>0 required for infinite horizon");
    if (!(q.z >= 0.0 && q.z < 1.0)) add(tag + "z", "z must lie in [0,1)");
    zsum += q.z;
  }
  if (!(zsum < 1.0)) add("z", "sum of initial fractions must be < 1");
  return out;
}

PlayerStrategy PlayerStrategy::constant(ControlLevel level) { return {{}, {level}}; }

PlayerStrategy PlayerStrategy::threshold(double xhat) {
  return {{xhat}, {ControlLevel::Max, ControlLevel::Min}};
}

ControlLevel PlayerStrategy::level_at(double x) const {
  const auto k = std::lower_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin();
  return levels[static_cast<std::size_t>(k)];
}

ControlLevel PlayerStrategy::level_after(double x) const {
  const auto k = std::upper_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin();
  return levels[static_cast<std::size_t>(k)];
}

double PlayerStrategy::next_breakpoint(double x) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  return it == breakpoints.end() ? std::numeric_limits<double>::infinity() : *it;
}

bool PlayerStrategy::valid() const {
  if (levels.size() != breakpoints.size() + 1) return false;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] >= 0.0 && breakpoints[k] <= 1.0)) return false;
    if (k > 0 && !(breakpoints[k] > breakpoints[k - 1])) return false;
  }
  return true;
}

bool PlayerStrategy::is_threshold() const {
  const auto s = simplified();
  if (s.breakpoints.empty()) return true;
  return s.breakpoints.size() == 1 && s.levels[0] == ControlLevel::Max;
}

double PlayerStrategy::threshold_value() const {
  const auto s = simplified();
  if (s.breakpoints.empty()) return s.levels[0] == ControlLevel::Max ? 1.0 : 0.0;
  if (s.breakpoints.size() == 1 && s.levels[0] == ControlLevel::Max) return s.breakpoints[0];
  return std::numeric_limits<double>::quiet_NaN();
}

PlayerStrategy PlayerStrategy::simplified(double lo, double hi) const {
  PlayerStrategy out;
  out.levels = {level_after(lo)};
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    const double b = breakpoints[k];
    if (!(b > lo && b < hi)) continue;
    if (levels[k + 1] == out.levels.back()) continue;
    out.breakpoints.push_back(b);
    out.levels.push_back(levels[k + 1]);
  }
  return out;
}

StrategyProfile threshold_profile(std::span<const double> thresholds) {
  StrategyProfile out;
  out.reserve(thresholds.size());
  for (double t : thresholds) out.push_back(PlayerStrategy::threshold(t));
  return out;
}

StrategyProfile constant_profile(std::size_t n, ControlLevel level) {
  return StrategyProfile(n, PlayerStrategy::constant(level));
}

double AggregateRate::minus(std::size_t i) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < contributions.size(); ++j)
    if (static_cast<std::size_t>(j) != i) s += contributions[j];
  return s;
}

AggregateRate aggregate_rate(const GameConfig& config, std::span<const ControlLevel> levels) {
  AggregateRate out;
  out.contributions.resize(static_cast<Eigen::Index>(config.size()));
  for (std::size_t i = 0; i < config.size(); ++i)
    out.contributions[static_cast<Eigen::Index>(i)] =
        config.players[i].lambda * level_value(levels[i], config);
  out.a = out.contributions.sum();
  return out;
}

}  // namespace viewrace
