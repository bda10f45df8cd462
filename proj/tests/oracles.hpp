#pragma once

// Independent reference computations used only by the tests: generic adaptive
// integration of the fluid ODE and of the discounted cost, and Gauss-Kronrod
// quadrature. None of this touches the closed forms under test.

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "viewrace/model.hpp"

namespace oracle {

using State = std::vector<double>;

/// Integrates x_i' = lambda_i u_i(x) (1 - x) together with the discounted cost
/// of every player, e^{-p_i t} (gamma_i (u_i - u_min) - lambda_i u_i (1 - x)),
/// using the Dormand-Prince stepper at tight tolerances. Returns state
/// [x_1..x_N, J_1..J_N] at each requested time.
inline std::vector<State> integrate_fluid(const viewrace::GameConfig& config,
                                          const viewrace::StrategyProfile& profile,
                                          const std::vector<double>& times, double abs_tol = 1e-13,
                                          double rel_tol = 1e-13) {
  namespace odeint = boost::numeric::odeint;
  const std::size_t n = config.size();
  auto rhs = [&](const State& s, State& ds, double t) {
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) x += s[i];
    const double y = 1.0 - x;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& q = config.players[i];
      const double u = viewrace::level_value(profile[i].level_at(x), config);
      ds[i] = q.lambda * u * y;
      ds[n + i] = std::exp(-q.p * t) * (q.gamma * (u - config.u_min) - q.lambda * u * y);
    }
  };
  State s(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s[i] = config.players[i].z;
  std::vector<State> out;
  auto stepper = odeint::make_dense_output(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
  double t = 0.0;
  for (double target : times) {
    if (target > t) {
      odeint::integrate_adaptive(stepper, rhs, s, t, target, 1e-7);
      t = target;
    }
    out.push_back(s);
  }
  return out;
}

/// Solves p V - a (1-x) V' + b (1-x) + c = 0 forward in x from (x0, v0).
inline double integrate_value_ode(double a, double b, double c, double p, double x0, double v0,
                                  double x1) {
  namespace odeint = boost::numeric::odeint;
  using S = std::vector<double>;
  auto rhs = [&](const S& v, S& dv, double x) {
    const double y = 1.0 - x;
    dv[0] = (p * v[0] + b * y + c) / (a * y);
  };
  S v{v0};
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<S>());
  odeint::integrate_adaptive(stepper, rhs, v, x0, x1, 1e-6);
  return v[0];
}

template <class F>
double quad(F f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-14);
}

/// Central difference with step h.
template <class F>
double central_diff(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
