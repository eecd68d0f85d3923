#pragma once

#include <iosfwd>
#include <string>

#include "rsrl/mdp.hpp"

namespace rsrl {

// Plain-text MDP definition format (one directive per line, '#' comments):
//
//   states N
//   actions A
//   terminal s [s ...]
//   t s a s' p r
//
// `states` and `actions` must appear before any `terminal` or `t` line.
// Each `t` line appends one outcome (next state s', probability p, reward r)
// to the (s, a) transition list. See docs/FORMATS.md for the full grammar.

TabularMDP parse_mdp(std::istream& in);
TabularMDP load_mdp(const std::string& path);

void write_mdp(std::ostream& out, const TabularMDP& mdp);
void save_mdp(const std::string& path, const TabularMDP& mdp);

}  // namespace rsrl
