#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "viewrace/best_response.hpp"
#include "viewrace/model.hpp"

namespace viewrace {

enum class EquilibriumKind { DegenerateAllMin, SymmetricExact, EpsilonApprox, IterationFixedPoint };
const char* to_string(EquilibriumKind kind);

struct EquilibriumResult {
  StrategyProfile profile;
  EquilibriumKind kind = EquilibriumKind::DegenerateAllMin;
  double epsilon = 0.0;
  std::optional<double> x_star;
  std::optional<double> k_star;
  std::optional<std::vector<double>> switch_times;

  // Diagnostics; which ones are filled depends on the solver.
  std::vector<std::size_t> switch_order;
  std::vector<double> switch_states;
  std::vector<double> epsilon_contributions;
  std::vector<double> improvement_trace;
  int rounds = 0;
  /// Slope of the switching function is negative below x*, and u_max stays
  /// optimal there, on the verification grid.
  bool single_switch_certified = false;

  std::vector<double> thresholds() const;
};

/// Symmetric game primitives.
struct SymmetricGame {
  double lambda = 0.0;
  double gamma = 0.0;
  double p = 0.0;
  std::size_t n = 1;
  double u_min = 1.0;
  double u_max = 10.0;

  GameConfig config() const;
};

/// lambda (1 - u_min lambda / (p + N lambda u_min)) - gamma.
double symmetric_existence_margin(const SymmetricGame& g);
bool symmetric_existence(const SymmetricGame& g);

/// 1 - gamma (p + N lambda u_min) / (lambda (p + (N-1) u_min lambda)).
double symmetric_threshold(const SymmetricGame& g);

/// Constant of the all-Max piece below x* that makes the value function
/// continuous at x* with the all-Min terminal piece above it.
double k_star_from_continuity(const SymmetricGame& g, double x_star);

EquilibriumResult symmetric_equilibrium(const SymmetricGame& g, int grid_points = 1000);

/// Threshold of the small-discount best reply:
/// 1 - (gamma/lambda) / ((1 + lambda u_min / a_-i)(1 + lambda u_max / a_-i)), clamped to [0,1].
/// a_-i = 0 (a monopolist) gives 1.
double vanishing_threshold(const PlayerParams& params, double a_minus_i, double u_min, double u_max);

/// Constructive threshold profile for a common lambda and strictly decreasing
/// gammas: everyone starts at u_max and players drop out in order of their
/// current small-discount threshold. Epsilon is measured as the largest
/// unilateral gain of a best response, with every discount set to
/// `p_estimate` (the configured discounts when absent).
EquilibriumResult epsilon_equilibrium(const GameConfig& config,
                                      std::optional<double> p_estimate = std::nullopt);

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, EquilibriumResult last)
      : std::runtime_error(what), last(std::move(last)) {}
  EquilibriumResult last;
};

struct IterationOptions {
  int max_rounds = 50;
  double tol = 1e-9;
  /// Simultaneous updates against the previous round's profile.
  bool jacobi = false;
  BestResponseOptions best_response;
};

/// Round-robin best replies until no player can improve its cost by more than tol.
EquilibriumResult best_response_iteration(const GameConfig& config, StrategyProfile initial,
                                          const IterationOptions& options = {});

/// Text summary then CSV block (player, threshold, switch_time, epsilon_contribution).
void write_equilibrium_report(std::ostream& out, const EquilibriumResult& result);
void write_equilibrium_csv(std::ostream& out, const GameConfig& config, const EquilibriumResult& result);

}  // namespace viewrace
