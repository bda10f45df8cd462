#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "viewrace/model.hpp"

namespace viewrace {

enum class SweepKind { Fig2a, Fig2b, Fig2c, Fig2d, Custom };
std::optional<SweepKind> parse_sweep_kind(const std::string& name);

/// One threshold curve over a range of opponent rates.
struct SweepCurve {
  std::string name;
  PlayerParams params;
  double a_lo = 0.0;
  double a_hi = 0.0;
};

struct SweepSpec {
  std::string title;
  std::vector<SweepCurve> curves;
  std::size_t points = 200;
  double u_min = 1.0;
  double u_max = 10.0;
};

struct SweepRow {
  std::string curve;
  double a_minus_i = 0.0;
  double x_threshold = 0.0;
};

/// Built-in presets: lambda_0 = 100, u in [1, 10], p = lambda, gamma = 0.7 lambda_0
/// unless the preset varies it. Fig2d puts lambda_0 on the first half of ten
/// players and 2 lambda_0 on the rest.
SweepSpec fig2_preset(SweepKind kind);

/// One curve per distinct (lambda, gamma, p) class of the configuration, over
/// that player's feasible range of a_-i.
SweepSpec custom_sweep(const GameConfig& config, std::size_t points = 200);

/// Small-discount thresholds on a uniform grid of each curve's range,
/// rows grouped by curve in declaration order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Columns curve, a_minus_i, x_threshold.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// gnuplot script plotting every curve of the sweep CSV at `csv_name`.
void write_gnuplot_script(std::ostream& out, const SweepSpec& spec, const std::string& csv_name);

}  // namespace viewrace
