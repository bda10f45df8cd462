// viewrace: command-line front end for the content acceleration game.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "viewrace/best_response.hpp"
#include "viewrace/calibrate.hpp"
#include "viewrace/dynamics.hpp"
#include "viewrace/equilibrium.hpp"
#include "viewrace/errors.hpp"
#include "viewrace/finite_horizon.hpp"
#include "viewrace/model.hpp"
#include "viewrace/monte_carlo.hpp"
#include "viewrace/scenario.hpp"
#include "viewrace/sweep.hpp"

namespace fs = std::filesystem;
using namespace viewrace;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfigError = 2, kNonConvergence = 3, kVerification = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::string out = ".";
  std::uint64_t seed = 1;
  double sample_dt = 0.0;
  std::size_t M = 10000;
  std::size_t reps = 100;
  std::optional<double> p;
  double tol = 1e-9;
  std::vector<double> thresholds;
  std::size_t player = 1;
  std::size_t alternatives = 200;
  std::string method = "auto";
  std::size_t grid = 1000;
  std::optional<double> tau;
  bool write_paths = false;
  bool scaling = false;
  std::string series;
  double viewer_base = 0.0;
  double u_assumed = 1.0;
  std::string sweep_kind;
  std::size_t points = 200;
};

GameConfig load_checked(const Options& o) {
  if (o.scenario.empty()) throw ConfigError("--scenario is required");
  GameConfig config = load_scenario(o.scenario);
  if (o.tau) config.horizon = FiniteHorizon{*o.tau};
  const auto violations = validate(config);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid scenario " << o.scenario << ":";
    for (const auto& v : violations) msg << "\n  " << v.field << ": " << v.message;
    throw ConfigError(msg.str());
  }
  return config;
}

fs::path out_file(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  return fs::path(o.out) / name;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

bool common_lambda_decreasing_gamma(const GameConfig& config) {
  for (std::size_t i = 1; i < config.size(); ++i) {
    if (config.players[i].lambda != config.players[0].lambda) return false;
    if (!(config.players[i - 1].gamma > config.players[i].gamma)) return false;
  }
  return config.size() > 1;
}

SymmetricGame as_symmetric(const GameConfig& config) {
  const auto& q = config.players.front();
  return SymmetricGame{q.lambda, q.gamma, q.p, config.size(), config.u_min, config.u_max};
}

EquilibriumResult solve_equilibrium(const GameConfig& config, const Options& o) {
  std::string method = o.method;
  if (method == "auto") {
    bool all_degenerate = true;
    for (const auto& q : config.players) all_degenerate = all_degenerate && degenerate_check(q);
    if (config.symmetric() || all_degenerate)
      method = config.symmetric() ? "symmetric" : "degenerate";
    else if (common_lambda_decreasing_gamma(config) && config.players.front().lambda > config.players.front().gamma)
      method = "epsilon";
    else
      method = "iterate";
  }
  if (method == "degenerate") {
    EquilibriumResult r;
    r.kind = EquilibriumKind::DegenerateAllMin;
    r.profile = constant_profile(config.size(), ControlLevel::Min);
    return r;
  }
  if (method == "symmetric") {
    if (!config.symmetric()) throw ConfigError("--method symmetric needs identical players");
    return symmetric_equilibrium(as_symmetric(config));
  }
  if (method == "epsilon") return epsilon_equilibrium(config, o.p);
  if (method == "iterate") {
    IterationOptions it;
    it.tol = o.tol;
    return best_response_iteration(config, constant_profile(config.size(), ControlLevel::Min), it);
  }
  throw ConfigError("unknown --method " + method);
}

StrategyProfile chosen_profile(const GameConfig& config, const Options& o) {
  if (o.thresholds.empty()) return solve_equilibrium(config, o).profile;
  if (o.thresholds.size() == 1) return StrategyProfile(config.size(), PlayerStrategy::threshold(o.thresholds[0]));
  if (o.thresholds.size() != config.size())
    throw ConfigError("--thresholds needs one value or one per player");
  return threshold_profile(o.thresholds);
}

std::size_t player_index(const GameConfig& config, const Options& o) {
  if (o.player < 1 || o.player > config.size()) throw ConfigError("--player out of range");
  return o.player - 1;
}

int cmd_simulate(const Options& o) {
  const auto config = load_checked(o);
  const auto profile = chosen_profile(config, o);
  const auto traj = simulate(config, profile, default_stop(config));
  const auto path = out_file(o, "trajectory.csv");
  auto f = open_out(path);
  write_trajectory_csv(f, traj, config, o.sample_dt > 0.0 ? std::optional(o.sample_dt) : std::nullopt);
  const double t_sat = traj.saturation_time();
  std::cout << std::setprecision(9) << "segments: " << traj.segments.size() << "\n"
            << "saturation_time: " << t_sat << "\n";
  if (config.infinite()) {
    std::cout << "tail_bound:";
    for (std::size_t i = 0; i < config.size(); ++i) std::cout << " " << tail_bound(config, i, t_sat);
    std::cout << "\n";
  }
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_best_response(const Options& o) {
  const auto config = load_checked(o);
  const std::size_t i = player_index(config, o);
  const auto profile = chosen_profile(config, o);
  const auto result = best_response(config, i, profile);
  write_best_response_report(std::cout, config, i, result);
  if (result.status == BestResponseStatus::NoSwitch)
    std::cout << "no profitable acceleration: u_min everywhere\n";
  if (o.alternatives > 0) {
    const auto rep = verify_best_response(config, i, profile, result, o.alternatives, o.seed);
    std::cout << "verified against " << rep.alternatives << " alternatives, worst margin "
              << rep.worst_margin << ", value gap " << rep.value_gap << "\n";
  }
  const auto path = out_file(o, "best_response.csv");
  auto f = open_out(path);
  write_best_response_csv(f, result);
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_equilibrium(const Options& o) {
  const auto config = load_checked(o);
  const auto result = solve_equilibrium(config, o);
  write_equilibrium_report(std::cout, result);
  const auto path = out_file(o, "equilibrium.csv");
  auto f = open_out(path);
  write_equilibrium_csv(f, config, result);
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_montecarlo(const Options& o) {
  const auto config = load_checked(o);
  const auto profile = chosen_profile(config, o);
  std::vector<McErrorStats> rows;
  if (o.scaling) {
    const std::vector<std::size_t> ms{o.M, 4 * o.M, 16 * o.M};
    const auto report = mc_convergence_report(config, profile, ms, o.reps, o.seed);
    rows = report.rows;
    std::cout << "ratios:";
    for (double r : report.ratios) std::cout << " " << r;
    std::cout << "\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  } else {
    McConfig mc;
    mc.M = o.M;
    mc.replications = o.reps;
    mc.seed = o.seed;
    mc.sample_dt = o.sample_dt;
    if (o.reps == 1) std::cerr << "warning: a single replication gives no variance estimate\n";
    rows.push_back(mc_error_stats(config, profile, mc));
    if (o.write_paths) {
      const auto paths = mc_run(config, profile, mc);
      for (std::size_t r = 0; r < paths.size(); ++r) {
        std::ostringstream name;
        name << "mc_replication_" << std::setw(4) << std::setfill('0') << r << ".csv";
        auto f = open_out(out_file(o, name.str()));
        write_mc_path_csv(f, paths[r], o.sample_dt);
      }
    }
  }
  const auto path = out_file(o, "montecarlo_summary.csv");
  auto f = open_out(path);
  write_mc_summary_csv(f, rows);
  write_mc_summary_csv(std::cout, rows);
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_finite_horizon(const Options& o) {
  const auto config = load_checked(o);
  if (config.infinite()) throw ConfigError("finite-horizon needs horizon = finite or --tau");
  const std::size_t i = player_index(config, o);
  const auto profile = chosen_profile(config, o);
  const auto intervals = fh_intervals(config, i, profile);
  FhGridOptions grid;
  grid.points = o.grid;
  const auto pieces = fh_solve(intervals, grid);
  std::cout << std::setprecision(9) << "pieces: " << pieces.size() << "\n";
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& s = pieces[k];
    std::cout << "  [" << s.t_lo << ", " << s.t_hi << "] a=" << s.k.a << " b=" << s.k.b
              << " c=" << s.k.c << " matching_defect=" << s.matching_defect << "\n";
  }
  const auto path = out_file(o, "finite_horizon.csv");
  auto f = open_out(path);
  write_fh_surface_csv(f, pieces, 101, 101, 0.99);
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_calibrate(const Options& o) {
  if (o.series.empty()) throw ConfigError("--series is required");
  if (!(o.viewer_base > 0.0)) throw ConfigError("--viewer-base must be positive");
  std::ifstream in(o.series);
  if (!in) throw ConfigError("cannot open series file: " + o.series);
  const auto series = read_series_csv(in);
  const auto fit = estimate_lambda(series, o.viewer_base, o.u_assumed);
  std::cout << std::setprecision(9) << "lambda_hat: " << fit.lambda_hat << "\n"
            << "z_hat: " << fit.z_hat << "\n"
            << "rms_residual: " << fit.rms_residual << "\n";
  return kOk;
}

int cmd_sweep(const Options& o) {
  const auto kind = parse_sweep_kind(o.sweep_kind);
  if (!kind) throw ConfigError("unknown sweep " + o.sweep_kind);
  SweepSpec spec = *kind == SweepKind::Custom ? custom_sweep(load_checked(o), o.points) : fig2_preset(*kind);
  spec.points = o.points;
  const auto rows = run_sweep(spec);
  const std::string csv_name = "sweep_" + o.sweep_kind + ".csv";
  const auto csv = out_file(o, csv_name);
  {
    auto f = open_out(csv);
    write_sweep_csv(f, rows);
  }
  const auto gp = out_file(o, "sweep_" + o.sweep_kind + ".gp");
  auto g = open_out(gp);
  write_gnuplot_script(g, spec, csv_name);
  std::cout << "wrote " << csv.string() << " and " << gp.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential game of competing content providers"};
  app.require_subcommand(1);
  Options o;

  auto scenario = [&](CLI::App* c) { c->add_option("--scenario", o.scenario, "scenario INI file"); };
  auto out = [&](CLI::App* c) { c->add_option("--out", o.out, "output directory"); };
  auto profile = [&](CLI::App* c) {
    c->add_option("--thresholds", o.thresholds, "threshold profile (one value or one per player)")
        ->delimiter(',');
    c->add_option("--method", o.method, "equilibrium method: auto|symmetric|epsilon|iterate");
    c->add_option("--p", o.p, "discount used for the epsilon estimate");
    c->add_option("--tol", o.tol, "best-response iteration tolerance");
  };

  auto* sim = app.add_subcommand("simulate", "fluid trajectory of a profile");
  scenario(sim);
  out(sim);
  profile(sim);
  sim->add_option("--sample-dt", o.sample_dt, "add uniformly sampled rows");

  auto* br = app.add_subcommand("best-response", "best response of one player");
  scenario(br);
  out(br);
  profile(br);
  br->add_option("--player", o.player, "player index (1-based)");
  br->add_option("--alternatives", o.alternatives, "random alternatives for verification (0 skips)");
  br->add_option("--seed", o.seed, "seed for the verification alternatives");

  auto* eq = app.add_subcommand("equilibrium", "equilibrium profile");
  scenario(eq);
  out(eq);
  profile(eq);

  auto* mc = app.add_subcommand("montecarlo", "stochastic viewer-base simulation");
  scenario(mc);
  out(mc);
  profile(mc);
  mc->add_option("--M", o.M, "viewer base");
  mc->add_option("--reps", o.reps, "replications");
  mc->add_option("--seed", o.seed, "random seed");
  mc->add_option("--sample-dt", o.sample_dt, "sampling step of the per-replication CSVs");
  mc->add_flag("--write-paths", o.write_paths, "write one CSV per replication");
  mc->add_flag("--scaling", o.scaling, "run M, 4M and 16M and report error ratios");

  auto* fh = app.add_subcommand("finite-horizon", "finite-horizon value surface");
  scenario(fh);
  out(fh);
  profile(fh);
  fh->add_option("--player", o.player, "player index (1-based)");
  fh->add_option("--tau", o.tau, "override the horizon length");
  fh->add_option("--grid", o.grid, "matching grid points");

  auto* cal = app.add_subcommand("calibrate", "fit lambda from a viewcount series");
  cal->add_option("--series", o.series, "CSV with columns t, views")->required();
  cal->add_option("--viewer-base", o.viewer_base, "viewer base M")->required();
  cal->add_option("--u-assumed", o.u_assumed, "acceleration level during the series");

  auto* sw = app.add_subcommand("sweep", "small-discount threshold sweeps");
  sw->add_option("kind", o.sweep_kind, "fig2a|fig2b|fig2c|fig2d|custom")->required();
  scenario(sw);
  out(sw);
  sw->add_option("--points", o.points, "grid points per curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*br) return cmd_best_response(o);
    if (*eq) return cmd_equilibrium(o);
    if (*mc) return cmd_montecarlo(o);
    if (*fh) return cmd_finite_horizon(o);
    if (*cal) return cmd_calibrate(o);
    if (*sw) return cmd_sweep(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_equilibrium_report(std::cerr, e.last);
    return kNonConvergence;
  } catch (const VerificationFailed& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
