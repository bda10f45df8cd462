#include "viewrace/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "viewrace/errors.hpp"

namespace viewrace {

bool degenerate_check(const PlayerParams& params) { return params.lambda < params.gamma; }

namespace {

struct StateInterval {
  double lo = 0.0;
  double hi = 1.0;
  double a_minus_i = 0.0;
  std::vector<ControlLevel> levels;  // every player's level on (lo, hi)
};

/// Partition of [z, 1) by the breakpoints of the players in `cutters`.
std::vector<StateInterval> partition(const GameConfig& config, const StrategyProfile& profile,
                                     std::size_t i, bool include_self, double tol_x) {
  const double z = config.initial_aggregate();
  const double cap = 1.0 - tol_x;
  std::vector<double> cuts;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (j == i && !include_self) continue;
    for (double b : profile[j].breakpoints)
      if (b > z && b < cap) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> edges{z};
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(1.0);

  std::vector<StateInterval> out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    StateInterval s;
    s.lo = edges[k];
    s.hi = edges[k + 1];
    s.levels.resize(profile.size());
    for (std::size_t j = 0; j < profile.size(); ++j) s.levels[j] = profile[j].level_after(s.lo);
    s.a_minus_i = aggregate_rate(config, s.levels).minus(i);
    out.push_back(std::move(s));
  }
  return out;
}

bool consistent(ControlLevel level, double phi) {
  return level == ControlLevel::Max ? phi >= 0.0 : phi <= 0.0;
}

double phi_of(const ValuePiece<double>& piece, double x, const PlayerParams& q) {
  return switching_coefficient(x, piece, q.lambda, q.gamma);
}

/// Level that keeps the HJB consistent just below x_top, given V(x_top).
ControlLevel choose_level(const GameConfig& config, std::size_t i, double a_minus_i, double x_top,
                          double v_top, double lo) {
  const auto& q = config.players[i];
  const double y = 1.0 - x_top;
  auto slope = [&](ControlLevel level) {
    const auto piece = make_piece(config, i, level, a_minus_i, lo, x_top);
    return (piece.p * v_top + piece.b * y + piece.c) / (piece.a * y);
  };
  const double d_max = slope(ControlLevel::Max);
  const double d_min = slope(ControlLevel::Min);
  const double scale = std::max({std::abs(d_max), std::abs(d_min), 1.0});
  if (d_max - d_min > 1e-10 * scale) return ControlLevel::Max;
  if (d_min - d_max > 1e-10 * scale) return ControlLevel::Min;

  // Indifferent at x_top: look slightly below.
  const double probe = x_top - std::min(1e-9, 0.5 * (x_top - lo));
  auto piece = make_piece(config, i, ControlLevel::Max, a_minus_i, lo, x_top);
  piece.K = continuity_constant(piece, x_top, v_top);
  return phi_of(piece, probe, q) > 0.0 ? ControlLevel::Max : ControlLevel::Min;
}

/// Largest x in (lo, hi) below which the piece's level stops being optimal.
std::optional<double> find_switch(const ValuePiece<double>& piece, const PlayerParams& q, double lo,
                                  double hi, const BestResponseOptions& options,
                                  IntervalDiagnostic& diag) {
  const int n = std::max(options.grid_points, 2);
  const double h = (hi - lo) / n;
  double upper = hi;
  for (int k = 1; k <= n; ++k) {
    const double x = k == n ? lo : hi - k * h;
    if (consistent(piece.level, phi_of(piece, x, q))) {
      upper = x;
      continue;
    }
    double bad = x;
    double good = upper;
    diag.root_brackets.emplace_back(bad, good);
    while (good - bad > options.root_tol) {
      const double mid = 0.5 * (good + bad);
      if (consistent(piece.level, phi_of(piece, mid, q)))
        good = mid;
      else
        bad = mid;
    }
    const double root = 0.5 * (good + bad);
    if (root - lo <= 1e-10) return std::nullopt;
    return root;
  }
  return std::nullopt;
}

ValueFunction assemble(std::size_t i, std::vector<ValuePiece<double>> reversed) {
  ValueFunction vf;
  vf.player = i;
  vf.pieces.assign(reversed.rbegin(), reversed.rend());
  return vf;
}

PlayerStrategy strategy_from_pieces(const ValueFunction& vf) {
  PlayerStrategy s;
  s.levels = {vf.pieces.front().level};
  for (std::size_t k = 1; k < vf.pieces.size(); ++k) {
    if (vf.pieces[k].level == s.levels.back()) continue;
    s.breakpoints.push_back(vf.pieces[k].x_lo);
    s.levels.push_back(vf.pieces[k].level);
  }
  return s;
}

}  // namespace

ValueFunction evaluate_policy(const GameConfig& config, std::size_t i,
                              const StrategyProfile& profile, double tol_x) {
  if (!(config.players[i].p > 0.0))
    throw PreconditionError("evaluate_policy: p > 0 required");
  const auto intervals = partition(config, profile, i, true, tol_x);
  std::vector<ValuePiece<double>> rev;
  double v_top = 0.0;
  for (auto it = intervals.rbegin(); it != intervals.rend(); ++it) {
    auto piece = make_piece(config, i, it->levels[i], it->a_minus_i, it->lo, it->hi);
    piece.K = rev.empty() ? 0.0 : continuity_constant(piece, it->hi, v_top);
    v_top = value_eval(piece, it->lo);
    rev.push_back(piece);
  }
  return assemble(i, std::move(rev));
}

BestResponseResult best_response(const GameConfig& config, std::size_t i,
                                 const StrategyProfile& profile,
                                 const BestResponseOptions& options) {
  if (i >= config.size()) throw PreconditionError("best_response: player index out of range");
  if (profile.size() != config.size())
    throw PreconditionError("best_response: profile size differs from player count");
  const auto& q = config.players[i];
  if (!(q.p > 0.0)) throw PreconditionError("best_response: p > 0 required");

  BestResponseResult result;
  if (degenerate_check(q)) {
    StrategyProfile own = profile;
    own[i] = PlayerStrategy::constant(ControlLevel::Min);
    result.strategy = own[i];
    result.value_function = evaluate_policy(config, i, own, options.tol_x);
    result.degenerate = true;
    result.status = BestResponseStatus::NoSwitch;
    result.continuity_defects = result.value_function.continuity_defects();
    return result;
  }

  const auto intervals = partition(config, profile, i, false, options.tol_x);
  const double x_cap = 1.0 - options.tol_x;

  std::vector<ValuePiece<double>> rev;
  double x_top = 1.0;
  double v_top = 0.0;
  for (auto it = intervals.rbegin(); it != intervals.rend(); ++it) {
    IntervalDiagnostic diag{it->lo, it->hi, it->a_minus_i, {}};
    const bool terminal = rev.empty();
    ControlLevel level = terminal ? ControlLevel::Min
                                  : choose_level(config, i, it->a_minus_i, x_top, v_top, it->lo);
    int switches = 0;
    for (;;) {
      auto piece = make_piece(config, i, level, it->a_minus_i, it->lo, x_top);
      piece.K = rev.empty() ? 0.0 : continuity_constant(piece, x_top, v_top);
      const double scan_hi = rev.empty() ? std::min(x_top, x_cap) : x_top;
      const auto root = find_switch(piece, q, it->lo, scan_hi, options, diag);
      if (!root) {
        v_top = value_eval(piece, it->lo);
        x_top = it->lo;
        rev.push_back(piece);
        break;
      }
      if (++switches > options.max_switches_per_interval) {
        std::ostringstream msg;
        msg << "best_response: more than " << options.max_switches_per_interval
            << " switches on interval [" << it->lo << ", " << it->hi << "]";
        throw BracketFailure(msg.str());
      }
      piece.x_lo = *root;
      v_top = value_eval(piece, *root);
      x_top = *root;
      rev.push_back(piece);

      // Below a genuine crossing the other level must be consistent.
      level = flipped(level);
      auto next = make_piece(config, i, level, it->a_minus_i, it->lo, x_top);
      next.K = continuity_constant(next, x_top, v_top);
      const double probe = x_top - std::min(1e-9, 0.5 * (x_top - it->lo));
      if (!consistent(level, phi_of(next, probe, q))) {
        std::ostringstream msg;
        msg << "best_response: switching coefficient touches zero without crossing at x=" << x_top
            << " (a_-i=" << it->a_minus_i << ")";
        throw BracketFailure(msg.str());
      }
    }
    result.intervals.push_back(std::move(diag));
  }
  std::reverse(result.intervals.begin(), result.intervals.end());

  result.value_function = assemble(i, std::move(rev));
  result.value_function.pieces.front().x_lo = config.initial_aggregate();
  result.strategy = strategy_from_pieces(result.value_function);
  result.continuity_defects = result.value_function.continuity_defects();

  const auto& s = result.strategy;
  int drops = 0;
  for (std::size_t k = 0; k < s.breakpoints.size(); ++k)
    if (s.levels[k] == ControlLevel::Max && s.levels[k + 1] == ControlLevel::Min) {
      ++drops;
      result.last_switch = s.breakpoints[k];
    }
  const bool ever_max = std::find(s.levels.begin(), s.levels.end(), ControlLevel::Max) != s.levels.end();
  result.status = ever_max ? BestResponseStatus::Accelerates : BestResponseStatus::NoSwitch;
  if (ever_max && s.levels.back() == ControlLevel::Max) result.last_switch = 1.0;
  result.multi_switch = drops > 1;
  return result;
}

CostReport cost_quadrature(const GameConfig& config, const StrategyProfile& profile, std::size_t i,
                           double tol_x) {
  StopCondition stop = default_stop(config);
  stop.tol_x = tol_x;
  const auto traj = simulate(config, profile, stop);
  const auto& q = config.players[i];
  const auto idx = static_cast<Eigen::Index>(i);

  double j = 0.0;
  for (const auto& seg : traj.segments) {
    const double dt = seg.t_end - seg.t_start;
    const double discount = std::exp(-q.p * seg.t_start);
    const double b = seg.rates[idx];
    const double k = seg.a + q.p;
    // -integral of e^{-p s} xdot_i over the segment
    j -= discount * b * seg.y_start * (-std::expm1(-k * dt)) / k;
    const double spend = q.gamma * (level_value(seg.levels[i], config) - config.u_min);
    if (spend != 0.0)
      j += discount * spend * (q.p > 0.0 ? -std::expm1(-q.p * dt) / q.p : dt);
  }
  CostReport report;
  report.cost = j;
  report.tail_bound = tail_bound(config, i, traj.saturation_time(tol_x));
  return report;
}

std::vector<PlayerStrategy> random_alternatives(std::size_t count, std::uint64_t seed, double lo) {
  std::vector<PlayerStrategy> out;
  out.reserve(count);
  if (count > 0) out.push_back(PlayerStrategy::constant(ControlLevel::Min));
  if (count > 1) out.push_back(PlayerStrategy::constant(ControlLevel::Max));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(lo, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> count_bp(2, 4);
  while (out.size() < count) {
    if (coin(rng) == 0) {
      out.push_back(PlayerStrategy::threshold(unit(rng)));
      continue;
    }
    PlayerStrategy s;
    const int m = count_bp(rng);
    for (int k = 0; k < m; ++k) s.breakpoints.push_back(unit(rng));
    std::sort(s.breakpoints.begin(), s.breakpoints.end());
    s.breakpoints.erase(std::unique(s.breakpoints.begin(), s.breakpoints.end()), s.breakpoints.end());
    s.levels.clear();
    for (std::size_t k = 0; k <= s.breakpoints.size(); ++k)
      s.levels.push_back(coin(rng) ? ControlLevel::Max : ControlLevel::Min);
    out.push_back(s.simplified());
  }
  return out;
}

VerificationReport verify_best_response(const GameConfig& config, std::size_t i,
                                        const StrategyProfile& profile,
                                        const BestResponseResult& result, std::size_t n_alternatives,
                                        std::uint64_t seed, double tol) {
  VerificationReport report;
  StrategyProfile own = profile;
  own[i] = result.strategy;
  const double z = config.initial_aggregate();
  report.value_at_start = result.value_function(z);
  report.cost = cost_quadrature(config, own, i).cost;
  report.value_gap = std::abs(report.cost - report.value_at_start);
  if (report.value_gap > tol) {
    std::ostringstream msg;
    msg << "cost of the strategy (" << report.cost << ") differs from its value at z ("
        << report.value_at_start << ") by " << report.value_gap;
    throw VerificationFailed(msg.str(), result.strategy, report.cost, report.value_at_start);
  }

  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& alt : random_alternatives(n_alternatives, seed, z)) {
    own[i] = alt;
    const double c = cost_quadrature(config, own, i).cost;
    report.worst_margin = std::min(report.worst_margin, c - report.cost);
    ++report.alternatives;
    if (c < report.cost - tol) {
      std::ostringstream msg;
      msg << "alternative strategy with cost " << c << " beats " << report.cost;
      throw VerificationFailed(msg.str(), alt, c, report.cost);
    }
  }
  return report;
}

void write_best_response_report(std::ostream& out, const GameConfig& config, std::size_t i,
                                const BestResponseResult& result) {
  out << std::setprecision(9);
  out << "player: " << i + 1 << "\n";
  out << "status: " << (result.status == BestResponseStatus::Accelerates ? "Accelerates" : "NoSwitch")
      << (result.degenerate ? " (lambda < gamma: never accelerates)" : "") << "\n";
  out << "last_switch: " << result.last_switch << "\n";
  out << "breakpoints:";
  for (double b : result.strategy.breakpoints) out << " " << b;
  out << "\nlevels:";
  for (auto l : result.strategy.levels) out << " " << to_string(l);
  out << "\nvalue_at_start: " << result.value_function(config.initial_aggregate()) << "\n";
  out << "max_continuity_defect: " << result.value_function.max_continuity_defect() << "\n";
  if (result.multi_switch) out << "note: multi-switch best response\n";
}

void write_best_response_csv(std::ostream& out, const BestResponseResult& result) {
  out << "interval,x_lo,x_hi,level,K,a,b,c\n" << std::setprecision(12);
  const auto& pieces = result.value_function.pieces;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& s = pieces[k];
    out << k << "," << s.x_lo << "," << s.x_hi << "," << to_string(s.level) << "," << s.K << ","
        << s.a << "," << s.b << "," << s.c << "\n";
  }
}

}  // namespace viewrace
