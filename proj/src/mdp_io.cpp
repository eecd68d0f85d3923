#include "rsrl/mdp_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rsrl {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw std::runtime_error("mdp file, line " + std::to_string(line_no) + ": " +
                           what);
}

}  // namespace

TabularMDP parse_mdp(std::istream& in) {
  TabularMDP mdp;
  bool have_dims = false;
  int n_states = -1, n_actions = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    if (tok == "states") {
      if (!(ls >> n_states) || n_states <= 0) fail(line_no, "bad state count");
    } else if (tok == "actions") {
      if (!(ls >> n_actions) || n_actions <= 0)
        fail(line_no, "bad action count");
    } else if (tok == "terminal") {
      if (n_states < 0 || n_actions < 0)
        fail(line_no, "terminal before states/actions");
      if (!have_dims) {
        mdp = TabularMDP(n_states, n_actions);
        have_dims = true;
      }
      int s;
      while (ls >> s) {
        if (s < 0 || s >= n_states) fail(line_no, "terminal state out of range");
        mdp.make_terminal(s);
      }
    } else if (tok == "t") {
      if (n_states < 0 || n_actions < 0)
        fail(line_no, "transition before states/actions");
      if (!have_dims) {
        mdp = TabularMDP(n_states, n_actions);
        have_dims = true;
      }
      int s, a, s2;
      double p, r;
      if (!(ls >> s >> a >> s2 >> p >> r))
        fail(line_no, "expected 't s a s2 p r'");
      if (s < 0 || s >= n_states || a < 0 || a >= n_actions || s2 < 0 ||
          s2 >= n_states)
        fail(line_no, "index out of range");
      if (mdp.terminal[s]) fail(line_no, "transition out of a terminal state");
      mdp.outcomes(s, a).push_back({s2, p, r});
    } else {
      fail(line_no, "unknown directive '" + tok + "'");
    }
  }
  if (!have_dims) {
    if (n_states < 0 || n_actions < 0)
      throw std::runtime_error("mdp file: missing states/actions header");
    mdp = TabularMDP(n_states, n_actions);
  }
  return mdp;
}

TabularMDP load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mdp file: " + path);
  return parse_mdp(in);
}

void write_mdp(std::ostream& out, const TabularMDP& mdp) {
  out << "states " << mdp.n_states << "\n";
  out << "actions " << mdp.n_actions << "\n";
  bool any_terminal = false;
  for (int s = 0; s < mdp.n_states; ++s) any_terminal |= bool(mdp.terminal[s]);
  if (any_terminal) {
    out << "terminal";
    for (int s = 0; s < mdp.n_states; ++s)
      if (mdp.terminal[s]) out << ' ' << s;
    out << "\n";
  }
  out.precision(17);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal[s]) continue;  // implied self-loops
    for (int a = 0; a < mdp.n_actions; ++a)
      for (const auto& o : mdp.outcomes(s, a))
        out << "t " << s << ' ' << a << ' ' << o.next_state << ' ' << o.prob
            << ' ' << o.reward << "\n";
  }
}

void save_mdp(const std::string& path, const TabularMDP& mdp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mdp file: " + path);
  write_mdp(out, mdp);
}

}  // namespace rsrl
