#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "viewrace/model.hpp"

namespace viewrace {

/// Coefficients of the value PDE on one switching interval:
/// V_t + p V - a (1-x) DV + b (1-x) + c = 0.
struct FhConstants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double p = 0.0;
};

/// Constants seen by player i when everyone plays `levels`.
FhConstants fh_constants(const GameConfig& config, std::size_t i, std::span<const ControlLevel> levels);

/// Stationary particular solution.
/// p > 0: (1-x)^{-p/a} - [p b (1-x) + (p+a) c] / (p (p+a)); p = 0: (b/a) x - (c/a) ln(1-x).
double fh_particular(double x, double a, double b, double c, double p);
double fh_particular(double x, const FhConstants& k);

/// Value on the first interval with V(x, 0) = 0 (p > 0):
/// -(1 - e^{-pt}) c/p - (1 - e^{-(p+a)t}) b (1-x)/(p+a).
double fh_first_interval(double x, double t, double a, double b, double c, double p);
double fh_first_interval(double x, double t, const FhConstants& k);

struct ClosedFormFirstInterval {};

/// Homogeneous amplitude sampled on a uniform grid in v, interpolated by a
/// monotone cubic. Samples are taken relative to the non-homogeneous part of
/// fh_particular, so for p > 0 they equal phi + 1.
class SampledPhi {
 public:
  SampledPhi(std::vector<double> v, std::vector<double> phi);
  double operator()(double v) const;
  double v_lo() const { return v_lo_; }
  double v_hi() const { return v_hi_; }
  std::size_t size() const { return size_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double v_lo_ = 0.0;
  double v_hi_ = 0.0;
  std::size_t size_ = 0;
};

/// V(x, t) = P(x) + phi(v) (1-x)^{-p/a} with v = ln(1-x)/a - t on [t_lo, t_hi].
struct FhValuePiece {
  double t_lo = 0.0;
  double t_hi = 0.0;
  FhConstants k;
  std::variant<ClosedFormFirstInterval, SampledPhi> phi;
  /// Largest |V(x, t_lo) - V_prev(x, t_lo)| found at the grid midpoints.
  double matching_defect = 0.0;

  double operator()(double x, double t) const;
  /// phi at its argument, relative to fh_particular.
  double phi_at(double v) const;
};

FhValuePiece fh_first_piece(const FhConstants& k, double t_hi);

struct FhGridOptions {
  std::size_t points = 1000;
  /// Smallest unwatched fraction the new piece must serve at t_hi.
  double y_min = 1e-9;
  double max_defect = 1e-5;
};

/// Next piece on [t1, t_hi] with constants `next`, continuous with `previous`
/// at t1. Throws GridInsufficient when the matching defect exceeds
/// options.max_defect or the previous piece is queried outside its table.
FhValuePiece fh_propagate(const FhValuePiece& previous, double t1, const FhConstants& next,
                          double t_hi, const FhGridOptions& options = {});

struct FhInterval {
  double t_hi = 0.0;
  FhConstants k;
};

/// Chains pieces over consecutive intervals starting at t = 0, sizing every
/// table so the last piece covers y >= y_min.
std::vector<FhValuePiece> fh_solve(std::span<const FhInterval> intervals,
                                   const FhGridOptions& options = {});

/// Intervals of player i along the fluid trajectory of `profile` over [0, tau].
std::vector<FhInterval> fh_intervals(const GameConfig& config, std::size_t i,
                                     const StrategyProfile& profile);

/// Piece containing t (the first whose t_hi >= t).
std::size_t fh_piece_index(std::span<const FhValuePiece> pieces, double t);

/// Surface CSV: columns t, x, V, piece_index on an nt x nx grid over [0, t_max] x [0, x_max].
void write_fh_surface_csv(std::ostream& out, std::span<const FhValuePiece> pieces, std::size_t nt,
                          std::size_t nx, double x_max);

}  // namespace viewrace
