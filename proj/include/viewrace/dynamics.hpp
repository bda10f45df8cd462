#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "viewrace/model.hpp"

namespace viewrace {

inline constexpr double kSaturationTol = 1e-9;

/// Aggregate watched fraction after dt days at constant rate a:
/// 1 - (1 - x) exp(-a dt).
double advance(double x_agg, double a, double dt);

/// Days needed to move the aggregate from x_from to x_to at rate a.
double time_to_reach(double x_from, double x_to, double a);

/// Constant-control stretch of a fluid trajectory. The unwatched fraction
/// y = 1 - x is carried explicitly so states near saturation keep their
/// relative precision.
struct TrajectorySegment {
  double t_start = 0.0;
  double t_end = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x_start;
  double y_start = 1.0;
  double a = 0.0;
  Eigen::VectorXd rates;  // lambda_i u_i
  std::vector<ControlLevel> levels;

  double x_agg_start() const { return 1.0 - y_start; }
  double unwatched_at(double t) const;
  Eigen::VectorXd state_at(double t) const;
};

struct Trajectory {
  Eigen::VectorXd z;
  std::vector<TrajectorySegment> segments;

  double t_final() const { return segments.back().t_end; }
  const TrajectorySegment& segment_at(double t) const;
  Eigen::VectorXd state_at(double t) const;
  double aggregate_at(double t) const;
  /// First time the aggregate reaches 1 - tol (may be +inf if the run stops earlier).
  double saturation_time(double tol = kSaturationTol) const;
};

struct StopCondition {
  /// Finite stop time; absent means run to saturation, the terminal segment
  /// then extends to t = +inf.
  std::optional<double> t_end;
  /// Breakpoints at or above 1 - tol_x are never acted on.
  double tol_x = kSaturationTol;
};

StopCondition default_stop(const GameConfig& config);

/// Exact event-driven solution of the fluid dynamics under a stationary profile.
/// Breakpoint crossings are located in closed form; simultaneous crossings by
/// several players form a single event.
Trajectory simulate(const GameConfig& config, const StrategyProfile& profile,
                    const StopCondition& stop = {});

/// Bound on the discounted cost discarded by ignoring breakpoints above the
/// saturation tolerance.
double tail_bound(const GameConfig& config, std::size_t i, double t_sat);

/// Trajectory CSV: one row per segment boundary (plus the saturation point of
/// an unbounded final segment), optionally merged with rows on a uniform grid.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const GameConfig& config,
                          std::optional<double> sample_dt = std::nullopt,
                          double tol_x = kSaturationTol);

}  // namespace viewrace
