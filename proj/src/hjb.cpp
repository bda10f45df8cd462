#include "viewrace/hjb.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace viewrace {

ValuePiece<double> make_piece(const GameConfig& config, std::size_t i, ControlLevel level,
                              double a_minus_i, double x_lo, double x_hi, double K) {
  const auto& q = config.players[i];
  const double u = level_value(level, config);
  ValuePiece<double> piece;
  piece.x_lo = x_lo;
  piece.x_hi = x_hi;
  piece.K = K;
  piece.b = q.lambda * u;
  piece.a = a_minus_i + piece.b;
  piece.c = q.gamma * (config.u_min - u);
  piece.p = q.p;
  piece.level = level;
  return piece;
}

double switching_function_T(ControlLevel candidate, double a_minus_i, double K, double x,
                            const PlayerParams& params, const GameConfig& config) {
  const double u = level_value(candidate, config);
  const double b = params.lambda * u;
  const double a = a_minus_i + b;
  const double p = params.p;
  const double y = 1.0 - x;
  double bracket = (1.0 - b / (p + a)) * y - params.gamma / params.lambda;
  if (K != 0.0) bracket -= (K * p / a) * detail::homogeneous_term(x, p, a);
  return u * bracket;
}

double switching_function_T_slope(ControlLevel candidate, double a_minus_i, double K, double x,
                                  const PlayerParams& params, const GameConfig& config) {
  const double u = level_value(candidate, config);
  const double b = params.lambda * u;
  const double a = a_minus_i + b;
  const double p = params.p;
  const double y = 1.0 - x;
  double slope = -(1.0 - b / (p + a));
  if (K != 0.0) slope -= (K * p / a) * (p / a) * detail::homogeneous_term(x, p, a) / y;
  return u * slope;
}

std::size_t ValueFunction::piece_index(double x) const {
  auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                             [](double v, const ValuePiece<double>& s) { return v < s.x_hi; });
  if (it == pieces.end()) return pieces.size() - 1;
  return static_cast<std::size_t>(it - pieces.begin());
}

double ValueFunction::operator()(double x) const { return value_eval(pieces[piece_index(x)], x); }

double ValueFunction::derivative(double x) const {
  return value_derivative(pieces[piece_index(x)], x);
}

std::vector<double> ValueFunction::continuity_defects() const {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
    const double beta = pieces[k].x_hi;
    out.push_back(std::abs(value_eval(pieces[k], beta) - value_eval(pieces[k + 1], beta)));
  }
  return out;
}

double ValueFunction::max_continuity_defect() const {
  const auto d = continuity_defects();
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

void write_value_function_csv(std::ostream& out, const ValueFunction& vf, std::size_t samples,
                              double x_hi) {
  out << "x,V,DV,piece_index,K,a,b,c\n" << std::setprecision(12);
  const double x_lo = vf.pieces.front().x_lo;
  for (std::size_t k = 0; k < samples; ++k) {
    const double x =
        samples > 1 ? x_lo + (x_hi - x_lo) * static_cast<double>(k) / static_cast<double>(samples - 1)
                    : x_lo;
    const std::size_t idx = vf.piece_index(x);
    const auto& piece = vf.pieces[idx];
    out << x << "," << value_eval(piece, x) << "," << value_derivative(piece, x) << "," << idx
        << "," << piece.K << "," << piece.a << "," << piece.b << "," << piece.c << "\n";
  }
}

}  // namespace viewrace
