#include "viewrace/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "viewrace/errors.hpp"

namespace viewrace {
namespace {

namespace pt = boost::property_tree;

double get_number(const pt::ptree& section, const std::string& section_name,
                  const std::string& key, std::optional<double> fallback) {
  const auto node = section.get_optional<std::string>(key);
  if (!node) {
    if (fallback) return *fallback;
    throw ScenarioError("missing key '" + key + "' in section [" + section_name + "]");
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(*node, &used);
    if (used != node->size()) throw std::invalid_argument(*node);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError("key '" + key + "' in section [" + section_name +
                        "] is not a number: '" + *node + "'");
  }
}

PlayerParams read_player(const pt::ptree& section, const std::string& name) {
  PlayerParams q;
  q.lambda = get_number(section, name, "lambda", std::nullopt);
  q.gamma = get_number(section, name, "gamma", std::nullopt);
  q.p = get_number(section, name, "p", std::nullopt);
  q.z = get_number(section, name, "z", 0.0);
  return q;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

GameConfig parse_scenario(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(std::string("scenario syntax error: ") + e.message() + " (line " +
                        std::to_string(e.line()) + ")");
  }

  GameConfig config;
  const auto game = tree.get_child_optional("game");
  if (!game) throw ScenarioError("missing [game] section");
  config.u_min = get_number(*game, "game", "u_min", 1.0);
  config.u_max = get_number(*game, "game", "u_max", std::nullopt);

  const std::string horizon = lower(game->get<std::string>("horizon", "infinite"));
  if (horizon == "infinite") {
    config.horizon = InfiniteHorizon{};
  } else if (horizon == "finite") {
    config.horizon = FiniteHorizon{get_number(*game, "game", "tau", std::nullopt)};
  } else {
    throw ScenarioError("horizon must be 'infinite' or 'finite', got '" + horizon + "'");
  }

  std::map<int, PlayerParams> numbered;
  for (const auto& [name, section] : tree) {
    if (name.rfind("player", 0) != 0 || name == "players") continue;
    const std::string digits = name.substr(6);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw ScenarioError("unrecognised section [" + name + "]");
    numbered[std::stoi(digits)] = read_player(section, name);
  }

  if (const auto shared = tree.get_child_optional("players")) {
    if (!numbered.empty())
      throw ScenarioError("use either a [players] section or [playerK] sections, not both");
    double n = get_number(*shared, "players", "n_players",
                          game->get_optional<double>("n_players").value_or(-1.0));
    if (!(n >= 1.0) || n != std::floor(n)) throw ScenarioError("n_players must be an integer >= 1");
    config.players.assign(static_cast<std::size_t>(n), read_player(*shared, "players"));
  } else {
    if (numbered.empty()) throw ScenarioError("no [players] or [playerK] sections found");
    int expected = 1;
    for (const auto& [k, q] : numbered) {
      if (k != expected)
        throw ScenarioError("player sections must be numbered 1..N without gaps");
      config.players.push_back(q);
      ++expected;
    }
    if (const auto n = game->get_optional<double>("n_players");
        n && static_cast<std::size_t>(*n) != config.players.size())
      throw ScenarioError("n_players disagrees with the number of [playerK] sections");
  }
  return config;
}

GameConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  return parse_scenario(in);
}

void write_scenario(std::ostream& out, const GameConfig& config) {
  out << std::setprecision(17);
  out << "[game]\n";
  out << "u_min = " << config.u_min << "\n";
  out << "u_max = " << config.u_max << "\n";
  if (const auto* fh = std::get_if<FiniteHorizon>(&config.horizon))
    out << "horizon = finite\ntau = " << fh->tau << "\n";
  else
    out << "horizon = infinite\n";
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& q = config.players[i];
    out << "\n[player" << i + 1 << "]\n";
    out << "lambda = " << q.lambda << "\ngamma = " << q.gamma << "\np = " << q.p
        << "\nz = " << q.z << "\n";
  }
}

}  // namespace viewrace
