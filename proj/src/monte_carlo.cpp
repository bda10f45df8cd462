#include "viewrace/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "viewrace/errors.hpp"
#include "viewrace/parallel.hpp"

namespace viewrace {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed ^ mix(stream + kGolden))) {}

std::uint64_t CounterRng::next() { return mix(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterRng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

std::vector<std::string> validate(const McConfig& mc) {
  std::vector<std::string> out;
  if (mc.M < 1) out.push_back("M must be >= 1");
  if (mc.replications < 1) out.push_back("replications must be >= 1");
  if (mc.sample_dt < 0.0) out.push_back("sample_dt must be non-negative");
  if (mc.t_end && !(*mc.t_end >= 0.0)) out.push_back("t_end must be non-negative");
  return out;
}

std::vector<long> McPath::counts_at(double t) const {
  std::vector<long> counts = initial;
  const auto end = std::upper_bound(times.begin(), times.end(), t);
  for (auto it = times.begin(); it != end; ++it) ++counts[who[it - times.begin()]];
  return counts;
}

Eigen::VectorXd McPath::fractions_at(double t) const {
  const auto counts = counts_at(t);
  Eigen::VectorXd x(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) x[i] = static_cast<double>(counts[i]) / static_cast<double>(M);
  return x;
}

namespace {

McPath run_one(const GameConfig& config, const StrategyProfile& profile, const McConfig& mc,
               std::size_t replication) {
  const std::size_t n = config.size();
  const double m = static_cast<double>(mc.M);
  CounterRng rng(mc.seed, replication);
  McPath path;
  path.M = mc.M;
  path.initial.resize(n);
  long watched = 0;
  for (std::size_t i = 0; i < n; ++i) {
    path.initial[i] = std::lround(config.players[i].z * m);
    watched += path.initial[i];
  }
  if (watched > static_cast<long>(mc.M)) throw PreconditionError("mc_run: initial state exceeds the viewer base");
  path.times.reserve(mc.M - static_cast<std::size_t>(watched));
  path.who.reserve(mc.M - static_cast<std::size_t>(watched));

  std::vector<double> rates(n);
  double t = 0.0;
  while (watched < static_cast<long>(mc.M)) {
    const double xhat = static_cast<double>(watched) / m;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rates[j] = config.players[j].lambda * level_value(profile[j].level_at(xhat), config);
      total += rates[j];
    }
    if (!(total > 0.0)) break;
    t += rng.exponential(static_cast<double>(mc.M - static_cast<std::size_t>(watched)) * total);
    if (mc.t_end && t > *mc.t_end) break;
    const double pick = rng.uniform() * total;
    std::size_t j = 0;
    double acc = rates[0];
    while (j + 1 < n && pick >= acc) acc += rates[++j];
    path.times.push_back(t);
    path.who.push_back(static_cast<std::uint32_t>(j));
    ++watched;
  }
  return path;
}

}  // namespace

std::vector<McPath> mc_run(const GameConfig& config, const StrategyProfile& profile, const McConfig& mc) {
  if (const auto errs = validate(mc); !errs.empty()) throw PreconditionError("mc_run: " + errs.front());
  if (profile.size() != config.size()) throw PreconditionError("mc_run: profile size differs from player count");
  std::vector<McPath> out(mc.replications);
  parallel_for(mc.replications, [&](std::size_t r) { out[r] = run_one(config, profile, mc, r); });
  return out;
}

double sup_error(const McPath& path, const Trajectory& fluid) {
  const std::size_t n = path.players();
  const double m = static_cast<double>(path.M);
  std::vector<long> counts = path.initial;
  long watched = std::accumulate(counts.begin(), counts.end(), 0L);
  double worst = 0.0;

  auto compare = [&](double t) {
    const Eigen::VectorXd x = fluid.state_at(t);
    const double agg = fluid.aggregate_at(t);
    worst = std::max(worst, std::abs(static_cast<double>(watched) / m - agg));
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(static_cast<double>(counts[i]) / m - x[i]));
  };

  compare(0.0);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    compare(path.times[k]);
    ++counts[path.who[k]];
    ++watched;
    compare(path.times[k]);
  }
  return worst;
}

McErrorStats mc_error_stats(const GameConfig& config, const StrategyProfile& profile, const McConfig& mc) {
  StopCondition stop;
  stop.t_end = mc.t_end;
  const auto fluid = simulate(config, profile, stop);
  const auto paths = mc_run(config, profile, mc);
  McErrorStats stats;
  stats.M = mc.M;
  stats.sup_errors.resize(paths.size());
  parallel_for(paths.size(), [&](std::size_t r) { stats.sup_errors[r] = sup_error(paths[r], fluid); });
  const double count = static_cast<double>(paths.size());
  stats.mean_sup_error = std::accumulate(stats.sup_errors.begin(), stats.sup_errors.end(), 0.0) / count;
  double ss = 0.0;
  for (double e : stats.sup_errors) ss += (e - stats.mean_sup_error) * (e - stats.mean_sup_error);
  stats.std_sup_error = paths.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  return stats;
}

McScalingReport mc_convergence_report(const GameConfig& config, const StrategyProfile& profile,
                                      std::span<const std::size_t> m_list, std::size_t replications,
                                      std::uint64_t seed) {
  for (std::size_t k = 1; k < m_list.size(); ++k)
    if (!(m_list[k] > m_list[k - 1])) throw PreconditionError("mc_convergence_report: M list must increase");
  McScalingReport report;
  if (replications == 1)
    report.warnings.push_back("a single replication gives no variance estimate; errors are very noisy");
  for (std::size_t M : m_list) {
    McConfig mc;
    mc.M = M;
    mc.replications = replications;
    mc.seed = seed;
    report.rows.push_back(mc_error_stats(config, profile, mc));
  }
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    const double ratio = report.rows[k].mean_sup_error / report.rows[k - 1].mean_sup_error;
    report.ratios.push_back(ratio);
    if (report.rows[k].M == 4 * report.rows[k - 1].M && !(ratio >= 0.25 && ratio <= 1.0)) {
      report.scaling_ok = false;
      std::ostringstream msg;
      msg << "error ratio " << ratio << " between M=" << report.rows[k - 1].M << " and M="
          << report.rows[k].M << " is outside [0.25, 1]";
      report.warnings.push_back(msg.str());
    }
  }
  return report;
}

void write_mc_path_csv(std::ostream& out, const McPath& path, double sample_dt) {
  const std::size_t n = path.players();
  const double m = static_cast<double>(path.M);
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",xhat_" << i + 1;
  out << "\n" << std::setprecision(12);
  std::vector<long> counts = path.initial;
  auto row = [&](double t) {
    out << t;
    for (long c : counts) out << "," << static_cast<double>(c) / m;
    out << "\n";
  };
  if (sample_dt > 0.0) {
    const double t_last = path.times.empty() ? 0.0 : path.times.back();
    std::size_t k = 0;
    for (std::size_t step = 0;; ++step) {
      const double t = sample_dt * static_cast<double>(step);
      while (k < path.times.size() && path.times[k] <= t) ++counts[path.who[k++]];
      row(t);
      if (t >= t_last) break;
    }
    return;
  }
  row(0.0);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    ++counts[path.who[k]];
    row(path.times[k]);
  }
}

void write_mc_summary_csv(std::ostream& out, std::span<const McErrorStats> rows) {
  out << "M,mean_sup_error,std\n" << std::setprecision(12);
  for (const auto& r : rows) out << r.M << "," << r.mean_sup_error << "," << r.std_sup_error << "\n";
}

}  // namespace viewrace
