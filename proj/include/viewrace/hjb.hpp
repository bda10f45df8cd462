#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "viewrace/errors.hpp"
#include "viewrace/model.hpp"

namespace viewrace {

/// Closed-form solution of the stationary HJB equation
///   p V - a (1-x) V' + b (1-x) + c = 0
/// on one switching interval [x_lo, x_hi]:
///   V(x) = K (1-x)^(-p/a) - b (1-x)/(a+p) - c/p.
/// b = lambda_i u_i and c = gamma_i (u_min - u_i) belong to the owning player,
/// a is the aggregate rate on the interval.
template <typename Scalar = double>
struct ValuePiece {
  Scalar x_lo{0};
  Scalar x_hi{1};
  Scalar K{0};
  Scalar a{1};
  Scalar b{0};
  Scalar c{0};
  Scalar p{1};
  ControlLevel level = ControlLevel::Min;
};

namespace detail {

template <typename Scalar>
void check_domain(const ValuePiece<Scalar>& piece, Scalar x) {
  using std::abs;
  const Scalar slack = Scalar(1e-12);
  if (!(x >= piece.x_lo - slack && x <= piece.x_hi + slack))
    throw DomainError("value piece evaluated outside its interval");
  if (!(x <= Scalar(1) - Scalar(1e-15))) throw DomainError("value piece evaluated at x >= 1");
}

/// (1-x)^(-p/a) through exp/log1p.
template <typename Scalar>
Scalar homogeneous_term(Scalar x, Scalar p, Scalar a) {
  using std::exp;
  using std::log1p;
  return exp(-(p / a) * log1p(-x));
}

}  // namespace detail

template <typename Scalar>
Scalar value_eval(const ValuePiece<Scalar>& piece, Scalar x) {
  detail::check_domain(piece, x);
  const Scalar y = Scalar(1) - x;
  Scalar v = -piece.b * y / (piece.a + piece.p) - piece.c / piece.p;
  if (piece.K != Scalar(0)) v += piece.K * detail::homogeneous_term(x, piece.p, piece.a);
  return v;
}

/// Same value written as a single fraction; kept for cross-checking.
template <typename Scalar>
Scalar value_eval_combined(const ValuePiece<Scalar>& piece, Scalar x) {
  detail::check_domain(piece, x);
  const Scalar y = Scalar(1) - x;
  const Scalar p = piece.p, a = piece.a;
  return piece.K * detail::homogeneous_term(x, p, a) -
         (p * piece.b * y + (p + a) * piece.c) / (p * (p + a));
}

template <typename Scalar>
Scalar value_derivative(const ValuePiece<Scalar>& piece, Scalar x) {
  detail::check_domain(piece, x);
  const Scalar y = Scalar(1) - x;
  Scalar dv = piece.b / (piece.a + piece.p);
  if (piece.K != Scalar(0))
    dv += (piece.p / piece.a) * piece.K * detail::homogeneous_term(x, piece.p, piece.a) / y;
  return dv;
}

template <typename Scalar>
Scalar hjb_residual(const ValuePiece<Scalar>& piece, Scalar x) {
  const Scalar y = Scalar(1) - x;
  return piece.p * value_eval(piece, x) - piece.a * y * value_derivative(piece, x) +
         piece.b * y + piece.c;
}

/// lambda_i (1-x)(1 - V'(x)) - gamma_i: positive favours u_max, negative u_min.
template <typename Scalar>
Scalar switching_coefficient(Scalar x, const ValuePiece<Scalar>& piece, Scalar lambda_i,
                             Scalar gamma_i) {
  const Scalar y = Scalar(1) - x;
  return lambda_i * y * (Scalar(1) - value_derivative(piece, x)) - gamma_i;
}

/// Continuity constant: the K that makes `piece` take the value `target` at x.
template <typename Scalar>
Scalar continuity_constant(const ValuePiece<Scalar>& piece, Scalar x, Scalar target) {
  using std::exp;
  using std::log1p;
  const Scalar y = Scalar(1) - x;
  const Scalar particular = -piece.b * y / (piece.a + piece.p) - piece.c / piece.p;
  return (target - particular) * exp((piece.p / piece.a) * log1p(-x));
}

/// Piece for player i playing `level` while the others contribute a_minus_i.
ValuePiece<double> make_piece(const GameConfig& config, std::size_t i, ControlLevel level,
                              double a_minus_i, double x_lo, double x_hi, double K = 0.0);

/// u [ (1 - b/(p+a)) (1-x) - (K p / a) (1-x)^(-p/a) - gamma/lambda ]
/// with a = a_minus_i + lambda u, b = lambda u for the candidate level.
double switching_function_T(ControlLevel candidate, double a_minus_i, double K, double x,
                            const PlayerParams& params, const GameConfig& config);

/// x-derivative of switching_function_T.
double switching_function_T_slope(ControlLevel candidate, double a_minus_i, double K, double x,
                                  const PlayerParams& params, const GameConfig& config);

/// Piecewise value function of one player over [z, 1).
struct ValueFunction {
  std::size_t player = 0;
  std::vector<ValuePiece<double>> pieces;  // increasing in x, abutting

  std::size_t piece_index(double x) const;
  double operator()(double x) const;
  double derivative(double x) const;
  /// |V_k(x_hi) - V_{k+1}(x_lo)| at every internal boundary.
  std::vector<double> continuity_defects() const;
  double max_continuity_defect() const;
};

/// Value-function CSV: x, V, DV, piece_index, K, a, b, c over `samples` states in [x_lo, x_hi].
void write_value_function_csv(std::ostream& out, const ValueFunction& vf, std::size_t samples = 200,
                              double x_hi = 1.0 - 1e-6);

}  // namespace viewrace
