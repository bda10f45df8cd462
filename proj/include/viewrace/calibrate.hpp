#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace viewrace {

struct Observation {
  double t = 0.0;      // days
  double views = 0.0;  // cumulative count
};

struct LambdaFit {
  double lambda_hat = 0.0;
  double z_hat = 0.0;
  /// RMS residual of the linearized fit, in units of -ln(1 - views/M).
  double rms_residual = 0.0;
};

/// Least-squares fit of -ln(1 - views/M) = lambda u t + const for a single content.
/// Throws PreconditionError on malformed input and DegenerateSeries when a
/// point is saturated or the fitted slope is not positive.
LambdaFit estimate_lambda(std::span<const Observation> series, double M, double u_assumed);

/// Reads a CSV with header columns t and views (any order, extra columns ignored).
std::vector<Observation> read_series_csv(std::istream& in);

}  // namespace viewrace
