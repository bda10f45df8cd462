#include "viewrace/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "viewrace/errors.hpp"

namespace viewrace {

double advance(double x_agg, double a, double dt) {
  if (!(x_agg < 1.0) || x_agg < 0.0) throw DomainError("advance: aggregate must lie in [0,1)");
  if (!(a > 0.0)) throw DomainError("advance: rate must be positive");
  if (!(dt >= 0.0)) throw DomainError("advance: dt must be non-negative");
  if (dt == 0.0) return x_agg;
  if (std::isinf(dt)) return 1.0;
  return 1.0 - (1.0 - x_agg) * std::exp(-a * dt);
}

double time_to_reach(double x_from, double x_to, double a) {
  if (!(x_to < 1.0)) throw DomainError("time_to_reach: target must be < 1");
  if (x_to < x_from) throw DomainError("time_to_reach: target below start");
  if (!(a > 0.0)) throw DomainError("time_to_reach: rate must be positive");
  if (x_to == x_from) return 0.0;
  return (std::log1p(-x_from) - std::log1p(-x_to)) / a;
}

double TrajectorySegment::unwatched_at(double t) const {
  const double dt = t - t_start;
  if (dt <= 0.0) return y_start;
  return y_start * std::exp(-a * dt);
}

Eigen::VectorXd TrajectorySegment::state_at(double t) const {
  const double dy = y_start - unwatched_at(t);
  return x_start + rates * (dy / a);
}

const TrajectorySegment& Trajectory::segment_at(double t) const {
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const TrajectorySegment& s) { return v < s.t_start; });
  if (it == segments.begin()) return segments.front();
  return *std::prev(it);
}

Eigen::VectorXd Trajectory::state_at(double t) const {
  const auto& s = segment_at(t);
  return s.state_at(std::min(t, s.t_end));
}

double Trajectory::aggregate_at(double t) const {
  const auto& s = segment_at(t);
  return 1.0 - s.unwatched_at(std::min(t, s.t_end));
}

double Trajectory::saturation_time(double tol) const {
  for (const auto& s : segments) {
    if (s.y_start <= tol) return s.t_start;
    const double t = s.t_start + std::log(s.y_start / tol) / s.a;
    if (t <= s.t_end) return t;
  }
  return std::numeric_limits<double>::infinity();
}

StopCondition default_stop(const GameConfig& config) {
  StopCondition stop;
  if (const auto* fh = std::get_if<FiniteHorizon>(&config.horizon)) stop.t_end = fh->tau;
  return stop;
}

Trajectory simulate(const GameConfig& config, const StrategyProfile& profile,
                    const StopCondition& stop) {
  const std::size_t n = config.size();
  if (profile.size() != n) throw PreconditionError("simulate: profile size differs from player count");
  for (const auto& s : profile)
    if (!s.valid()) throw PreconditionError("simulate: malformed strategy");

  Trajectory traj;
  traj.z = config.initial_state();
  const Eigen::VectorXd lambda = config.lambdas();

  Eigen::VectorXd x = traj.z;
  double x_agg = x.sum();
  double y = 1.0 - x_agg;
  double t = 0.0;
  const double x_cap = 1.0 - stop.tol_x;
  const double t_stop = stop.t_end.value_or(std::numeric_limits<double>::infinity());

  std::vector<ControlLevel> levels(n);
  for (std::size_t i = 0; i < n; ++i) levels[i] = profile[i].level_after(x_agg);

  for (;;) {
    TrajectorySegment seg;
    seg.t_start = t;
    seg.x_start = x;
    seg.y_start = y;
    seg.levels = levels;
    seg.rates.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      seg.rates[static_cast<Eigen::Index>(i)] = lambda[static_cast<Eigen::Index>(i)] * level_value(levels[i], config);
    seg.a = seg.rates.sum();

    double next_x = std::numeric_limits<double>::infinity();
    for (const auto& s : profile) next_x = std::min(next_x, s.next_breakpoint(x_agg));

    if (!(next_x < x_cap)) {
      seg.t_end = t_stop;
      traj.segments.push_back(std::move(seg));
      break;
    }
    const double y_next = 1.0 - next_x;
    const double dt = std::log(y / y_next) / seg.a;
    if (t + dt >= t_stop) {
      seg.t_end = t_stop;
      traj.segments.push_back(std::move(seg));
      break;
    }
    seg.t_end = t + dt;
    x += seg.rates * ((y - y_next) / seg.a);
    traj.segments.push_back(std::move(seg));

    t += dt;
    x_agg = next_x;
    y = y_next;
    for (std::size_t i = 0; i < n; ++i) levels[i] = profile[i].level_after(x_agg);
  }
  return traj;
}

double tail_bound(const GameConfig& config, std::size_t i, double t_sat) {
  const auto& q = config.players[i];
  if (!(q.p > 0.0)) return std::numeric_limits<double>::infinity();
  return std::exp(-q.p * t_sat) *
         (q.lambda * config.u_max + q.gamma * (config.u_max - config.u_min)) / q.p;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const GameConfig& config,
                          std::optional<double> sample_dt, double tol_x) {
  const std::size_t n = config.size();
  std::vector<double> times;
  for (const auto& s : trajectory.segments) times.push_back(s.t_start);
  double t_last = trajectory.t_final();
  if (std::isinf(t_last)) t_last = trajectory.saturation_time(tol_x);
  if (std::isfinite(t_last) && t_last > times.back()) times.push_back(t_last);

  if (sample_dt && *sample_dt > 0.0) {
    for (long k = 1;; ++k) {
      const double tk = static_cast<double>(k) * *sample_dt;
      if (tk >= t_last) break;
      times.push_back(tk);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
  }

  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i + 1;
  out << ",x_agg";
  for (std::size_t i = 0; i < n; ++i) out << ",u_" << i + 1;
  out << "\n" << std::setprecision(12);
  for (double t : times) {
    const auto& seg = trajectory.segment_at(t);
    const Eigen::VectorXd x = seg.state_at(t);
    out << t;
    for (Eigen::Index i = 0; i < x.size(); ++i) out << "," << x[i];
    out << "," << 1.0 - seg.unwatched_at(t);
    for (const auto level : seg.levels) out << "," << level_value(level, config);
    out << "\n";
  }
}

}  // namespace viewrace
