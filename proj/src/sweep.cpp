#include "viewrace/sweep.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "viewrace/equilibrium.hpp"
#include "viewrace/errors.hpp"
#include "viewrace/parallel.hpp"

namespace viewrace {

namespace {

constexpr double kLambda0 = 100.0;

SweepCurve homogeneous_curve(const std::string& name, std::size_t n, double gamma_ratio) {
  const double lambda = kLambda0;
  SweepCurve c;
  c.name = name;
  c.params = PlayerParams{lambda, gamma_ratio * lambda, lambda, 0.0};
  c.a_lo = static_cast<double>(n - 1) * lambda * 1.0;
  c.a_hi = static_cast<double>(n - 1) * lambda * 10.0;
  return c;
}

}  // namespace

std::optional<SweepKind> parse_sweep_kind(const std::string& name) {
  if (name == "fig2a") return SweepKind::Fig2a;
  if (name == "fig2b") return SweepKind::Fig2b;
  if (name == "fig2c") return SweepKind::Fig2c;
  if (name == "fig2d") return SweepKind::Fig2d;
  if (name == "custom") return SweepKind::Custom;
  return std::nullopt;
}

SweepSpec fig2_preset(SweepKind kind) {
  SweepSpec spec;
  switch (kind) {
    case SweepKind::Fig2a:
      spec.title = "best reply threshold, N=10";
      spec.curves.push_back(homogeneous_curve("N=10", 10, 0.7));
      break;
    case SweepKind::Fig2b:
      spec.title = "best reply threshold, N=30";
      spec.curves.push_back(homogeneous_curve("N=30", 30, 0.7));
      break;
    case SweepKind::Fig2c:
      spec.title = "best reply threshold by cost ratio, N=10";
      for (double r : {0.01, 0.1, 0.5, 0.7, 0.95}) {
        std::ostringstream name;
        name << "gamma/lambda=" << r;
        spec.curves.push_back(homogeneous_curve(name.str(), 10, r));
      }
      break;
    case SweepKind::Fig2d: {
      spec.title = "heterogeneous rates, N=10";
      const double gamma = 0.7 * kLambda0;
      // Others of a low-rate player: 4 low + 5 high; of a high-rate player: 5 low + 4 high.
      const double others_low = 4.0 * kLambda0 + 5.0 * 2.0 * kLambda0;
      const double others_high = 5.0 * kLambda0 + 4.0 * 2.0 * kLambda0;
      spec.curves.push_back(SweepCurve{"lambda=lambda0", PlayerParams{kLambda0, gamma, kLambda0, 0.0},
                                       others_low * 1.0, others_low * 10.0});
      spec.curves.push_back(SweepCurve{"lambda=2lambda0",
                                       PlayerParams{2.0 * kLambda0, gamma, 2.0 * kLambda0, 0.0},
                                       others_high * 1.0, others_high * 10.0});
      break;
    }
    case SweepKind::Custom:
      throw PreconditionError("fig2_preset: the custom sweep needs a scenario");
  }
  return spec;
}

SweepSpec custom_sweep(const GameConfig& config, std::size_t points) {
  SweepSpec spec;
  spec.title = "best reply threshold";
  spec.points = points;
  spec.u_min = config.u_min;
  spec.u_max = config.u_max;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& q = config.players[i];
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) {
      const auto& r = config.players[j];
      seen = seen || (r.lambda == q.lambda && r.gamma == q.gamma && r.p == q.p);
    }
    if (seen) continue;
    double others = 0.0;
    for (std::size_t j = 0; j < config.size(); ++j)
      if (j != i) others += config.players[j].lambda;
    std::ostringstream name;
    name << "player " << i + 1;
    spec.curves.push_back(SweepCurve{name.str(), q, others * config.u_min, others * config.u_max});
  }
  return spec;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.points < 2) throw PreconditionError("run_sweep: at least 2 points");
  const std::size_t m = spec.points;
  std::vector<SweepRow> rows(spec.curves.size() * m);
  parallel_for(rows.size(), [&](std::size_t k) {
    const auto& c = spec.curves[k / m];
    const std::size_t j = k % m;
    const double a = j + 1 == m ? c.a_hi
                                : c.a_lo + (c.a_hi - c.a_lo) * static_cast<double>(j) /
                                               static_cast<double>(m - 1);
    rows[k] = SweepRow{c.name, a, vanishing_threshold(c.params, a, spec.u_min, spec.u_max)};
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "curve,a_minus_i,x_threshold\n" << std::setprecision(12);
  for (const auto& r : rows) out << r.curve << "," << r.a_minus_i << "," << r.x_threshold << "\n";
}

void write_gnuplot_script(std::ostream& out, const SweepSpec& spec, const std::string& csv_name) {
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set title '" << spec.title << "'\n"
      << "set xlabel 'a_{-i}'\n"
      << "set ylabel 'x_{0,i}'\n"
      << "set yrange [0:1]\n"
      << "plot \\\n";
  for (std::size_t k = 0; k < spec.curves.size(); ++k) {
    const auto& name = spec.curves[k].name;
    out << "  '" << csv_name << "' using 2:(strcol(1) eq '" << name << "' ? $3 : 1/0) with lines title '"
        << name << "'" << (k + 1 < spec.curves.size() ? ", \\\n" : "\n");
  }
}

}  // namespace viewrace
