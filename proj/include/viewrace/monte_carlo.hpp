#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viewrace/dynamics.hpp"
#include "viewrace/model.hpp"

namespace viewrace {

/// SplitMix64 used as a counter-based generator: output n of stream `key` is
/// mix(key + n * golden). Streams for different replications never share state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Exponential with the given rate.
  double exponential(double rate);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct McConfig {
  std::size_t M = 10000;
  std::size_t replications = 100;
  std::uint64_t seed = 0;
  /// Sampling step of the per-replication CSV; 0 writes one row per adoption.
  double sample_dt = 0.0;
  /// Stop adopting after this time; absent runs until every viewer has watched.
  std::optional<double> t_end;
};

std::vector<std::string> validate(const McConfig& mc);

/// One replication: adoption times and the content each adoption went to.
struct McPath {
  std::size_t M = 0;
  std::vector<long> initial;
  std::vector<double> times;
  std::vector<std::uint32_t> who;

  std::size_t players() const { return initial.size(); }
  /// Watched counts per content right after time t.
  std::vector<long> counts_at(double t) const;
  Eigen::VectorXd fractions_at(double t) const;
};

/// Exact event-driven simulation of the viewer base, replications in parallel.
/// Levels follow the profile evaluated at the empirical fraction W/M.
std::vector<McPath> mc_run(const GameConfig& config, const StrategyProfile& profile, const McConfig& mc);

/// sup over t of max(|xhat_i - x_i|, |xhat - x|) against the fluid trajectory,
/// checked just before and just after every adoption.
double sup_error(const McPath& path, const Trajectory& fluid);

struct McErrorStats {
  std::size_t M = 0;
  double mean_sup_error = 0.0;
  double std_sup_error = 0.0;
  std::vector<double> sup_errors;
};

McErrorStats mc_error_stats(const GameConfig& config, const StrategyProfile& profile, const McConfig& mc);

struct McScalingReport {
  std::vector<McErrorStats> rows;
  /// error(M_{k+1}) / error(M_k)
  std::vector<double> ratios;
  /// Every ratio of a 4x step lies in [0.25, 1].
  bool scaling_ok = true;
  std::vector<std::string> warnings;
};

McScalingReport mc_convergence_report(const GameConfig& config, const StrategyProfile& profile,
                                      std::span<const std::size_t> m_list, std::size_t replications,
                                      std::uint64_t seed);

/// Columns t, xhat_1..xhat_N.
void write_mc_path_csv(std::ostream& out, const McPath& path, double sample_dt = 0.0);
/// Columns M, mean_sup_error, std.
void write_mc_summary_csv(std::ostream& out, std::span<const McErrorStats> rows);

}  // namespace viewrace
