#include "viewrace/calibrate.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "viewrace/errors.hpp"

namespace viewrace {

LambdaFit estimate_lambda(std::span<const Observation> series, double M, double u_assumed) {
  if (series.size() < 3) throw PreconditionError("estimate_lambda: at least 3 points required");
  if (!(M > 0.0)) throw PreconditionError("estimate_lambda: viewer base must be positive");
  if (!(u_assumed > 0.0)) throw PreconditionError("estimate_lambda: assumed level must be positive");
  const auto n = static_cast<Eigen::Index>(series.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& o = series[static_cast<std::size_t>(k)];
    if (k > 0 && !(o.t > series[static_cast<std::size_t>(k) - 1].t))
      throw PreconditionError("estimate_lambda: times must be strictly increasing");
    if (o.views < 0.0 || o.views > M) throw PreconditionError("estimate_lambda: views must lie in [0, M]");
    const double fraction = o.views / M;
    if (!(fraction < 1.0)) throw DegenerateSeries("estimate_lambda: series reaches the whole viewer base");
    design(k, 0) = o.t;
    design(k, 1) = 1.0;
    rhs[k] = -std::log1p(-fraction);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  if (!(coef[0] > 0.0)) throw DegenerateSeries("estimate_lambda: fitted growth rate is not positive");
  LambdaFit fit;
  fit.lambda_hat = coef[0] / u_assumed;
  fit.z_hat = -std::expm1(-coef[1]);
  fit.rms_residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
  return fit;
}

std::vector<Observation> read_series_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError("series CSV is empty");
  const auto header = split(line);
  std::size_t col_t = header.size(), col_v = header.size();
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "t") col_t = k;
    if (header[k] == "views") col_v = k;
  }
  if (col_t == header.size() || col_v == header.size())
    throw ScenarioError("series CSV needs columns t and views");
  std::vector<Observation> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    try {
      out.push_back(Observation{std::stod(cells.at(col_t)), std::stod(cells.at(col_v))});
    } catch (const std::exception&) {
      throw ScenarioError("series CSV: bad row at line " + std::to_string(line_no));
    }
  }
  return out;
}

}  // namespace viewrace
