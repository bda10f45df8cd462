#include "viewrace/finite_horizon.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

// The Boost 1.74 pchip header calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "viewrace/dynamics.hpp"
#include "viewrace/errors.hpp"
#include "viewrace/parallel.hpp"

namespace viewrace {

namespace {

// Non-homogeneous part of the particular solution written in log(1-x):
// -[p b y + (p+a) c] / (p (p+a)) for p > 0, (b/a) x - (c/a) ln y for p = 0.
double stationary_part(double log_y, const FhConstants& k) {
  const double y = std::exp(log_y);
  if (k.p > 0.0) return -(k.p * k.b * y + (k.p + k.a) * k.c) / (k.p * (k.p + k.a));
  return (k.b / k.a) * -std::expm1(log_y) - (k.c / k.a) * log_y;
}

// (1-x)^{-p/a}
double homogeneous_factor(double log_y, const FhConstants& k) { return std::exp(-(k.p / k.a) * log_y); }

// Amplitude of the homogeneous term relative to stationary_part; the public
// phi is relative to fh_particular, which carries one extra homogeneous unit when p > 0.
double first_interval_amplitude(double v, const FhConstants& k) {
  return std::exp(k.p * v) * (k.c / k.p + k.b * std::exp(k.a * v) / (k.p + k.a));
}

double first_interval_log(double log_y, double t, const FhConstants& k) {
  const double y = std::exp(log_y);
  return std::expm1(-k.p * t) * k.c / k.p + std::expm1(-(k.p + k.a) * t) * k.b * y / (k.p + k.a);
}

void check_constants(const FhConstants& k) {
  if (!(k.a > 0.0)) throw DomainError("finite horizon: aggregate rate a must be positive");
  if (!(k.p >= 0.0)) throw DomainError("finite horizon: discount must be non-negative");
}

}  // namespace

FhConstants fh_constants(const GameConfig& config, std::size_t i, std::span<const ControlLevel> levels) {
  const auto rate = aggregate_rate(config, levels);
  const auto& q = config.players[i];
  const double u = level_value(levels[i], config);
  return FhConstants{rate.a, q.lambda * u, q.gamma * (config.u_min - u), q.p};
}

double fh_particular(double x, double a, double b, double c, double p) {
  return fh_particular(x, FhConstants{a, b, c, p});
}

double fh_particular(double x, const FhConstants& k) {
  if (!(x < 1.0) || x < 0.0) throw DomainError("fh_particular: x must lie in [0,1)");
  check_constants(k);
  const double log_y = std::log1p(-x);
  const double s = stationary_part(log_y, k);
  return k.p > 0.0 ? homogeneous_factor(log_y, k) + s : s;
}

double fh_first_interval(double x, double t, double a, double b, double c, double p) {
  return fh_first_interval(x, t, FhConstants{a, b, c, p});
}

double fh_first_interval(double x, double t, const FhConstants& k) {
  if (!(x < 1.0) || x < 0.0) throw DomainError("fh_first_interval: x must lie in [0,1)");
  if (!(k.p > 0.0)) throw PreconditionError("fh_first_interval: p > 0 required");
  return first_interval_log(std::log1p(-x), t, k);
}

struct SampledPhi::Impl {
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

SampledPhi::SampledPhi(std::vector<double> v, std::vector<double> phi) {
  if (v.size() != phi.size() || v.size() < 4) throw PreconditionError("SampledPhi: need >= 4 samples");
  v_lo_ = v.front();
  v_hi_ = v.back();
  size_ = v.size();
  impl_ = std::make_shared<const Impl>(Impl{{std::move(v), std::move(phi)}});
}

double SampledPhi::operator()(double v) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(v_hi_ - v_lo_));
  if (v < v_lo_ - slack || v > v_hi_ + slack) {
    std::ostringstream msg;
    msg << "sampled phi queried at v=" << v << " outside [" << v_lo_ << ", " << v_hi_ << "]";
    throw GridInsufficient(msg.str());
  }
  return impl_->spline(std::clamp(v, v_lo_, v_hi_));
}

namespace {

double amplitude(const FhValuePiece& piece, double v) {
  if (std::holds_alternative<ClosedFormFirstInterval>(piece.phi))
    return first_interval_amplitude(v, piece.k);
  return std::get<SampledPhi>(piece.phi)(v);
}

double eval_log(const FhValuePiece& piece, double log_y, double t) {
  if (std::holds_alternative<ClosedFormFirstInterval>(piece.phi))
    return first_interval_log(log_y, t, piece.k);
  const double v = log_y / piece.k.a - t;
  return stationary_part(log_y, piece.k) + amplitude(piece, v) * homogeneous_factor(log_y, piece.k);
}

}  // namespace

double FhValuePiece::operator()(double x, double t) const {
  if (!(x < 1.0) || x < 0.0) throw DomainError("finite-horizon value: x must lie in [0,1)");
  return eval_log(*this, std::log1p(-x), t);
}

double FhValuePiece::phi_at(double v) const {
  const double amp = amplitude(*this, v);
  return k.p > 0.0 ? amp - 1.0 : amp;
}

FhValuePiece fh_first_piece(const FhConstants& k, double t_hi) {
  check_constants(k);
  if (!(k.p > 0.0)) throw PreconditionError("fh_first_piece: p > 0 required");
  FhValuePiece piece;
  piece.t_lo = 0.0;
  piece.t_hi = t_hi;
  piece.k = k;
  piece.phi = ClosedFormFirstInterval{};
  return piece;
}

FhValuePiece fh_propagate(const FhValuePiece& previous, double t1, const FhConstants& next,
                          double t_hi, const FhGridOptions& options) {
  check_constants(next);
  if (!(t_hi > t1)) throw PreconditionError("fh_propagate: empty interval");
  if (options.points < 4) throw PreconditionError("fh_propagate: at least 4 grid points");
  if (!(options.y_min > 0.0 && options.y_min < 1.0))
    throw PreconditionError("fh_propagate: y_min must lie in (0,1)");

  // v = ln(y)/a' - t; at t1 the node v_j sits at ln y_j = a' (v_j + t1).
  // The table runs a few cells past x = 0 so the one-sided end slopes of the
  // interpolant never touch the physical domain.
  const std::size_t n = options.points;
  const double v_edge = -t1;
  const double v_lo = std::log(options.y_min) / next.a - t_hi;
  double pad = 3.0 * (v_edge - v_lo) / static_cast<double>(n - 4);
  if (const auto* prev = std::get_if<SampledPhi>(&previous.phi))
    pad = std::min(pad, 0.5 * (prev->v_hi() + t1) * previous.k.a / next.a);
  const double v_hi = v_edge + pad;
  const double h = (v_hi - v_lo) / static_cast<double>(n - 1);

  auto target = [&](double v) {
    const double log_y = next.a * (v + t1);
    const double value = eval_log(previous, log_y, t1);
    return (value - stationary_part(log_y, next)) / homogeneous_factor(log_y, next);
  };

  std::vector<double> v(n), phi(n), mid_exact(n - 1);
  parallel_for(n, [&](std::size_t j) {
    v[j] = j + 1 == n ? v_hi : v_lo + h * static_cast<double>(j);
    phi[j] = target(v[j]);
    if (j + 1 < n) mid_exact[j] = target(v_lo + h * (static_cast<double>(j) + 0.5));
  });

  FhValuePiece piece;
  piece.t_lo = t1;
  piece.t_hi = t_hi;
  piece.k = next;
  const SampledPhi table(std::move(v), std::move(phi));
  piece.phi = table;

  double defect = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double vm = v_lo + h * (static_cast<double>(j) + 0.5);
    const double log_y = next.a * (vm + t1);
    if (log_y > 0.0) break;
    defect = std::max(defect, std::abs(table(vm) - mid_exact[j]) * homogeneous_factor(log_y, next));
  }
  piece.matching_defect = defect;
  if (!(defect <= options.max_defect)) {
    std::ostringstream msg;
    msg << "matching defect " << defect << " exceeds " << options.max_defect << " with "
        << options.points << " grid points";
    throw GridInsufficient(msg.str());
  }
  return piece;
}

std::vector<FhValuePiece> fh_solve(std::span<const FhInterval> intervals, const FhGridOptions& options) {
  if (intervals.empty()) return {};
  const std::size_t n = intervals.size();
  // Coverage each piece must provide at its own t_hi, worked backwards.
  std::vector<double> y_req(n, options.y_min);
  for (std::size_t k = n - 1; k > 0; --k) {
    const double span = intervals[k].t_hi - intervals[k - 1].t_hi;
    y_req[k - 1] = std::max(1e-300, y_req[k] * std::exp(-intervals[k].k.a * span));
  }
  std::vector<FhValuePiece> pieces;
  pieces.push_back(fh_first_piece(intervals[0].k, intervals[0].t_hi));
  for (std::size_t k = 1; k < n; ++k) {
    FhGridOptions step = options;
    step.y_min = y_req[k];
    pieces.push_back(
        fh_propagate(pieces.back(), intervals[k - 1].t_hi, intervals[k].k, intervals[k].t_hi, step));
  }
  return pieces;
}

std::vector<FhInterval> fh_intervals(const GameConfig& config, std::size_t i,
                                     const StrategyProfile& profile) {
  const auto* fh = std::get_if<FiniteHorizon>(&config.horizon);
  if (!fh) throw PreconditionError("fh_intervals: finite horizon required");
  const auto traj = simulate(config, profile, default_stop(config));
  std::vector<FhInterval> out;
  for (const auto& seg : traj.segments) {
    if (seg.t_start >= fh->tau) break;
    const double t_hi = std::min(seg.t_end, fh->tau);
    if (!(t_hi > seg.t_start)) continue;
    out.push_back(FhInterval{t_hi, fh_constants(config, i, seg.levels)});
  }
  return out;
}

std::size_t fh_piece_index(std::span<const FhValuePiece> pieces, double t) {
  for (std::size_t k = 0; k < pieces.size(); ++k)
    if (t <= pieces[k].t_hi) return k;
  return pieces.size() - 1;
}

void write_fh_surface_csv(std::ostream& out, std::span<const FhValuePiece> pieces, std::size_t nt,
                          std::size_t nx, double x_max) {
  out << "t,x,V,piece_index\n" << std::setprecision(12);
  if (pieces.empty()) return;
  const double t_max = pieces.back().t_hi;
  for (std::size_t a = 0; a < nt; ++a) {
    const double t = nt > 1 ? t_max * static_cast<double>(a) / static_cast<double>(nt - 1) : 0.0;
    const std::size_t idx = fh_piece_index(pieces, t);
    for (std::size_t b = 0; b < nx; ++b) {
      const double x = nx > 1 ? x_max * static_cast<double>(b) / static_cast<double>(nx - 1) : 0.0;
      out << t << "," << x << "," << pieces[idx](x, t) << "," << idx << "\n";
    }
  }
}

}  // namespace viewrace
