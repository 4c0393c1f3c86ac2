#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "imdp.hpp"
#include "intervals.hpp"

namespace cdpta {

/// State of the reduced IMC: Base(s) mirrors an IMDP state, Pair(s,a) one of
/// its available actions.
struct ImcState {
  bool is_pair = false;
  int base = -1;    // IMDP state index
  int action = -1;  // index into the IMDP state's action list (pairs only)
  std::string name;
  std::string loc;  // location of base region states, "" otherwise
};

struct Imc {
  std::vector<ImcState> states;
  std::vector<IntervalDist<int>> rows;
  int initial = 0;
  int n_base = 0;

  /// Base states occupy the indices of their IMDP originals.
  int base_index(int imdp_state) const { return imdp_state; }
};

/// The IMDP-to-IMC reduction: Base(s) reaches each Pair(s,a) with [0,1];
/// Pair(s,a) carries the IMDP row re-keyed to Base targets.
inline Imc reduce_to_imc(const Imdp& m) {
  Imc c;
  c.n_base = static_cast<int>(m.states.size());
  for (int s = 0; s < c.n_base; ++s) {
    std::string loc = m.states[s].region ? m.states[s].region->loc : "";
    c.states.push_back({false, s, -1, m.states[s].name, loc});
  }
  c.rows.resize(c.n_base);
  for (int s = 0; s < c.n_base; ++s) {
    IntervalDist<int> base_row;
    for (int a = 0; a < static_cast<int>(m.actions[s].size()); ++a) {
      int pair_idx = static_cast<int>(c.states.size());
      const auto& [act, row] = m.actions[s][a];
      c.states.push_back({true, s, a, "(" + m.states[s].name + "," + act.name + ")", ""});
      c.rows.push_back(row);  // Base targets reuse IMDP state indices
      base_row.entries[pair_idx] = pi_closed(Rat(0), Rat(1));
    }
    c.rows[s] = std::move(base_row);
  }
  c.initial = m.initial;
  return c;
}

/// Lifts an IMDP target set to the IMC.
inline std::set<int> lift_targets(const Imc& c, const std::set<int>& imdp_targets) {
  std::set<int> out;
  for (int t : imdp_targets) out.insert(c.base_index(t));
  return out;
}

inline std::size_t transition_count(const Imc& c) {
  std::size_t n = 0;
  for (const auto& r : c.rows) n += r.entries.size();
  return n;
}

inline std::string imc_to_dot(const Imc& c) {
  std::string out = "digraph imc {\n  rankdir=LR;\n  node [fontsize=10];\n";
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    out += "  s" + std::to_string(i) + " [label=\"" + c.states[i].name + "\", shape=" +
           (c.states[i].is_pair ? "box" : "ellipse");
    if (static_cast<int>(i) == c.initial) out += ", penwidth=2";
    out += "];\n";
  }
  for (std::size_t s = 0; s < c.rows.size(); ++s)
    for (const auto& [t, iv] : c.rows[s].entries)
      out += "  s" + std::to_string(s) + " -> s" + std::to_string(t) + " [label=\"" +
             to_string(iv) + "\"];\n";
  out += "}\n";
  return out;
}

/// Versioned structured-text export; loadable with imc_from_text.
inline std::string imc_to_text(const Imc& c) {
  std::string out = "imc/1\n";
  out += "states " + std::to_string(c.states.size()) + "\n";
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    const auto& st = c.states[i];
    out += "state " + std::to_string(i) + " " + (st.is_pair ? "pair" : "base") + " " +
           (st.loc.empty() ? "-" : st.loc) + " " + quote(st.name) + "\n";
  }
  out += "initial " + std::to_string(c.initial) + "\n";
  for (std::size_t s = 0; s < c.rows.size(); ++s)
    for (const auto& [t, iv] : c.rows[s].entries)
      out += "edge " + std::to_string(s) + " " + std::to_string(t) + " " + to_string(iv) + "\n";
  return out;
}

inline Imc imc_from_text(std::string_view text) {
  Imc c;
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](std::size_t lineno, const std::string& msg) -> void {
    throw Error("PARSE", "imc text line " + std::to_string(lineno) + ": " + msg);
  };
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (!have_header) {
      if (head != "imc/1") fail(lineno, "expected header imc/1");
      have_header = true;
      continue;
    }
    if (head == "states") {
      std::size_t n = 0;
      ls >> n;
      c.states.resize(n);
      c.rows.assign(n, {});
    } else if (head == "state") {
      std::size_t i;
      std::string kind, loc;
      if (!(ls >> i >> kind >> loc) || i >= c.states.size()) fail(lineno, "bad state line");
      std::string rest;
      std::getline(ls, rest);
      auto q0 = rest.find('"');
      auto q1 = rest.rfind('"');
      std::string name =
          q0 != std::string::npos && q1 > q0 ? rest.substr(q0 + 1, q1 - q0 - 1) : rest;
      c.states[i] = {kind == "pair", -1, -1, name, loc == "-" ? "" : loc};
      if (!c.states[i].is_pair) ++c.n_base;
    } else if (head == "initial") {
      ls >> c.initial;
    } else if (head == "edge") {
      std::size_t s, t;
      std::string ivtext;
      if (!(ls >> s >> t >> ivtext) || s >= c.rows.size() || t >= c.states.size())
        fail(lineno, "bad edge line");
      auto iv = interval_from_string(ivtext);
      if (!iv) fail(lineno, "bad interval " + ivtext);
      c.rows[s].entries[static_cast<int>(t)] = *iv;
    } else {
      fail(lineno, "unknown directive " + head);
    }
  }
  if (!have_header) throw Error("PARSE", "empty imc text");
  for (std::size_t s = 0; s < c.rows.size(); ++s)
    if (!is_interval_distribution(c.rows[s]))
      throw Error("PARSE", "row of state " + std::to_string(s) + " is not an interval distribution");
  return c;
}

}  // namespace cdpta
