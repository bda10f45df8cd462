#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "viewrace/dynamics.hpp"
#include "viewrace/hjb.hpp"
#include "viewrace/model.hpp"

namespace viewrace {

/// lambda_i < gamma_i: accelerating never pays, whatever the opponents do.
bool degenerate_check(const PlayerParams& params);

struct BestResponseOptions {
  int grid_points = 10000;  // sign scan per interval
  double root_tol = 1e-12;
  double tol_x = kSaturationTol;
  int max_switches_per_interval = 64;
};

enum class BestResponseStatus { Accelerates, NoSwitch };

struct IntervalDiagnostic {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double a_minus_i = 0.0;
  std::vector<std::pair<double, double>> root_brackets;
};

struct BestResponseResult {
  PlayerStrategy strategy;
  ValueFunction value_function;
  /// Largest state at which the player drops to Min for good; 0 if it never accelerates.
  double last_switch = 0.0;
  BestResponseStatus status = BestResponseStatus::NoSwitch;
  bool degenerate = false;
  /// More than one Max->Min switch was produced.
  bool multi_switch = false;
  std::vector<IntervalDiagnostic> intervals;
  std::vector<double> continuity_defects;
};

/// Best response of player i against the strategies of the others in `profile`
/// (entry i is ignored). The value function is built backwards from saturation:
/// the terminal piece has K = 0, later constants follow from continuity and
/// switches are sign changes of the switching coefficient.
/// Throws BracketFailure when the sign analysis becomes inconsistent.
BestResponseResult best_response(const GameConfig& config, std::size_t i,
                                 const StrategyProfile& profile,
                                 const BestResponseOptions& options = {});

/// Value function of player i when everybody follows `profile`.
ValueFunction evaluate_policy(const GameConfig& config, std::size_t i,
                              const StrategyProfile& profile, double tol_x = kSaturationTol);

struct CostReport {
  double cost = 0.0;
  /// Cost not accounted for because breakpoints above 1 - tol_x are ignored.
  double tail_bound = 0.0;
};

/// Discounted cost J_i of `profile`, integrated exactly segment by segment.
CostReport cost_quadrature(const GameConfig& config, const StrategyProfile& profile, std::size_t i,
                           double tol_x = kSaturationTol);

struct VerificationReport {
  double value_at_start = 0.0;
  double cost = 0.0;
  double value_gap = 0.0;
  std::size_t alternatives = 0;
  /// min over alternatives of J(alternative) - J(result); >= -tol on success.
  double worst_margin = 0.0;
};

class VerificationFailed : public std::runtime_error {
 public:
  VerificationFailed(const std::string& what, PlayerStrategy alternative, double alternative_cost,
                     double reference_cost)
      : std::runtime_error(what),
        alternative(std::move(alternative)),
        alternative_cost(alternative_cost),
        reference_cost(reference_cost) {}
  PlayerStrategy alternative;
  double alternative_cost;
  double reference_cost;
};

/// Random threshold and multi-breakpoint strategies on [lo, 1); the first two
/// are always the constant strategies.
std::vector<PlayerStrategy> random_alternatives(std::size_t count, std::uint64_t seed,
                                                double lo = 0.0);

/// Checks that the cost of result.strategy equals its value at the initial
/// state and that no random alternative does better (1e-6 absolute).
/// Throws VerificationFailed.
VerificationReport verify_best_response(const GameConfig& config, std::size_t i,
                                        const StrategyProfile& profile,
                                        const BestResponseResult& result, std::size_t n_alternatives,
                                        std::uint64_t seed, double tol = 1e-6);

/// Text summary followed by a CSV block of (interval, K, breakpoints).
void write_best_response_report(std::ostream& out, const GameConfig& config, std::size_t i,
                                const BestResponseResult& result);
void write_best_response_csv(std::ostream& out, const BestResponseResult& result);

}  // namespace viewrace
