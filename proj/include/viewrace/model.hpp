#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace viewrace {

// Rates are per day; a player's lambda is the per-viewer adoption intensity
// of its content at unit acceleration.
struct PlayerParams {
  double lambda = 0.0;
  double gamma = 0.0;
  double p = 0.0;
  double z = 0.0;
};

struct InfiniteHorizon {};
struct FiniteHorizon {
  double tau = 0.0;
};
using Horizon = std::variant<InfiniteHorizon, FiniteHorizon>;

struct GameConfig {
  std::vector<PlayerParams> players;
  double u_min = 1.0;
  double u_max = 10.0;
  Horizon horizon = InfiniteHorizon{};

  std::size_t size() const { return players.size(); }
  bool infinite() const { return std::holds_alternative<InfiniteHorizon>(horizon); }

  Eigen::VectorXd lambdas() const;
  Eigen::VectorXd initial_state() const;
  /// Sum of the initial watched fractions.
  double initial_aggregate() const;
  bool symmetric() const;

  /// N identical players.
  static GameConfig symmetric_game(std::size_t n, const PlayerParams& params,
                                   double u_min, double u_max);
};

enum class ControlLevel { Min, Max };

inline double level_value(ControlLevel level, double u_min, double u_max) {
  return level == ControlLevel::Max ? u_max : u_min;
}
inline double level_value(ControlLevel level, const GameConfig& config) {
  return level_value(level, config.u_min, config.u_max);
}
inline ControlLevel flipped(ControlLevel level) {
  return level == ControlLevel::Max ? ControlLevel::Min : ControlLevel::Max;
}
const char* to_string(ControlLevel level);

struct Violation {
  std::string field;
  std::string message;
};

/// Every violated invariant of the configuration; empty when valid.
std::vector<Violation> validate(const GameConfig& config);

/// Stationary state-feedback strategy: `levels[k]` is played on the k-th
/// sub-interval of [0,1) cut by `breakpoints`. A state sitting exactly on a
/// breakpoint belongs to the interval below it, so a threshold strategy plays
/// Max at x == xhat.
struct PlayerStrategy {
  std::vector<double> breakpoints;
  std::vector<ControlLevel> levels{ControlLevel::Min};

  static PlayerStrategy constant(ControlLevel level);
  static PlayerStrategy threshold(double xhat);

  /// Level played at state x.
  ControlLevel level_at(double x) const;
  /// Level played on (x, x + dx) for small dx; what a trajectory leaving x uses.
  ControlLevel level_after(double x) const;
  /// Smallest breakpoint strictly above x, or +inf.
  double next_breakpoint(double x) const;

  bool valid() const;
  /// Max up to a single breakpoint and Min above it (or a constant level).
  bool is_threshold() const;
  /// Equivalent threshold: 0 for all-Min, 1 for all-Max, NaN if not a threshold.
  double threshold_value() const;
  /// Merge adjacent equal levels and drop breakpoints outside (lo, hi).
  PlayerStrategy simplified(double lo = 0.0, double hi = 1.0) const;
};

/// Threshold rule: Max while x <= xhat, Min above.
struct ThresholdStrategy {
  double xhat = 0.0;
  ControlLevel control(double x) const { return x <= xhat ? ControlLevel::Max : ControlLevel::Min; }
  PlayerStrategy as_strategy() const { return PlayerStrategy::threshold(xhat); }
};

using StrategyProfile = std::vector<PlayerStrategy>;

StrategyProfile threshold_profile(std::span<const double> thresholds);
StrategyProfile constant_profile(std::size_t n, ControlLevel level);

/// a = sum_i lambda_i u_i together with the per-player contributions.
struct AggregateRate {
  double a = 0.0;
  Eigen::VectorXd contributions;

  /// a_{-i}: summed directly over j != i.
  double minus(std::size_t i) const;
};

AggregateRate aggregate_rate(const GameConfig& config, std::span<const ControlLevel> levels);

}  // namespace viewrace
