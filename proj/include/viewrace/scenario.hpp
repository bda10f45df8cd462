#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "viewrace/model.hpp"

namespace viewrace {

// Scenario files are INI-style:
//
//   [game]
//   u_min = 1
//   u_max = 10
//   horizon = infinite        ; or "finite", with tau = <days>
//
//   [players]                 ; homogeneous shorthand
//   n_players = 10
//   lambda = 100
//   gamma = 70
//   p = 100
//   z = 0
//
// or one [playerK] section per player (K = 1..N). z defaults to 0.

/// Throws ScenarioError on I/O or syntax problems. Semantic checks are left to validate().
GameConfig parse_scenario(std::istream& in);
GameConfig load_scenario(const std::filesystem::path& path);

void write_scenario(std::ostream& out, const GameConfig& config);

}  // namespace viewrace
