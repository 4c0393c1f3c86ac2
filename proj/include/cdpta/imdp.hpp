#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "intervals.hpp"
#include "model.hpp"

namespace cdpta {

/// Sorted distinct naturals b_0 = 0 < b_1 < ... < b_k.
using Boundaries = std::vector<unsigned long long>;

/// One cell of the alternating partition [b0,b0], (b0,b1), [b1,b1], ...
/// idx is the cell's position; even cells are points, odd cells open.
struct IntervalB {
  int idx = 0;
  unsigned long long lo = 0;
  unsigned long long hi = 0;

  bool is_point() const { return lo == hi; }
  Rat le() const { return Rat(static_cast<long long>(lo)); }
  Rat re() const { return Rat(static_cast<long long>(hi)); }
  bool contains(const Rat& v) const {
    if (is_point()) return v == le();
    return v > le() && v < re();
  }
  friend bool operator==(const IntervalB&, const IntervalB&) = default;
  friend auto operator<=>(const IntervalB& a, const IntervalB& b) { return a.idx <=> b.idx; }
};

inline std::string to_string(const IntervalB& b) {
  if (b.is_point()) return "[" + std::to_string(b.lo) + "," + std::to_string(b.hi) + "]";
  return "(" + std::to_string(b.lo) + "," + std::to_string(b.hi) + ")";
}

/// {0} together with every constant appearing in guards and invariants.
inline Boundaries boundary_set(const Cdpta& model) {
  std::set<unsigned long long> s{0};
  for (const auto& [l, inv] : model.locations) s.insert(inv.bound);
  for (const auto& e : model.edges)
    for (const auto& a : e.guard.atoms) s.insert(a.bound);
  return Boundaries(s.begin(), s.end());
}

inline std::vector<IntervalB> interval_partition(const Boundaries& b) {
  std::vector<IntervalB> out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.push_back({static_cast<int>(out.size()), b[i], b[i]});
    if (i + 1 < b.size()) out.push_back({static_cast<int>(out.size()), b[i], b[i + 1]});
  }
  return out;
}

/// The unique partition cell containing v (v must lie in [0, b_k]).
inline const IntervalB& find_interval(const std::vector<IntervalB>& partition, const Rat& v) {
  for (const auto& b : partition)
    if (b.contains(v)) return b;
  throw Error("OUT_OF_INTERVAL", rat_to_string(v) + " lies outside the partition");
}

/// All valuations of B satisfy the atom; exact endpoint comparison.
inline bool interval_sat(const IntervalB& b, const ConstraintAtom& a) {
  if (b.is_point()) {
    switch (a.rel) {
      case Rel::lt: return b.lo < a.bound;
      case Rel::le: return b.lo <= a.bound;
      case Rel::ge: return b.lo >= a.bound;
      case Rel::gt: return b.lo > a.bound;
    }
  }
  switch (a.rel) {
    case Rel::lt: return b.hi <= a.bound;
    case Rel::le: return b.hi <= a.bound;
    case Rel::ge: return b.lo >= a.bound;
    case Rel::gt: return b.lo >= a.bound;
  }
  return false;
}

inline bool interval_sat(const IntervalB& b, const ClockConstraint& psi) {
  for (const auto& a : psi.atoms)
    if (!interval_sat(b, a)) return false;
  return true;
}

inline bool interval_sat(const IntervalB& b, const InvariantSpec& inv) {
  return interval_sat(b, ConstraintAtom{inv.strict ? Rel::lt : Rel::le, inv.bound});
}

struct RegionState {
  std::string loc;
  IntervalB b;
  friend bool operator==(const RegionState&, const RegionState&) = default;
};

enum class Ep { le, re };

inline std::string to_string(Ep ep) { return ep == Ep::le ? "le" : "re"; }

struct EndpointIndicator {
  IntervalB bhat;
  std::string edge;
  Ep ep = Ep::le;
  friend bool operator==(const EndpointIndicator&, const EndpointIndicator&) = default;
};

inline std::string to_string(const RegionState& r) {
  return "(" + r.loc + "," + to_string(r.b) + ")";
}
inline std::string to_string(const EndpointIndicator& e) {
  return "(" + to_string(e.bhat) + "," + e.edge + "," + to_string(e.ep) + ")";
}

struct ImdpState {
  std::string name;
  std::optional<RegionState> region;
  std::optional<EndpointIndicator> endpoint;
};

/// Action of an IMDP state: either (B̂, edge) or the internal action tau.
struct ImdpAction {
  bool tau = false;
  IntervalB bhat{};
  std::string edge;
  std::string name = "tau";
};

/// Interval Markov decision process. States built from a 1c-cdPTA carry
/// region/endpoint identity; freestanding IMDPs (e.g. random test instances)
/// leave those fields empty.
struct Imdp {
  std::vector<IntervalB> partition;
  std::vector<ImdpState> states;
  std::vector<std::vector<std::pair<ImdpAction, IntervalDist<int>>>> actions;
  int initial = 0;
  int region_count = 0;
  int endpoint_count = 0;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].name == name) return static_cast<int>(i);
    return -1;
  }
  std::size_t action_total() const {
    std::size_t n = 0;
    for (const auto& a : actions) n += a.size();
    return n;
  }
};

/// The four-case endpoint probability: mass an endpoint indicator sends to a
/// region, read off the distribution template evaluated at the endpoint.
inline Rat endpoint_target_prob(const IntervalB& bhat, const ProbEdge& edge, Ep ep,
                                const RegionState& target) {
  Rat vstar = ep == Ep::le ? bhat.le() : bhat.re();
  bool bhat_zero = bhat.idx == 0;
  bool target_zero = target.b.idx == 0;
  Rat p = 0;
  for (const auto& o : edge.outcomes) {
    if (o.target != target.loc) continue;
    if (bhat_zero && target.b == bhat) {
      p += o.expr.eval(vstar);  // reset and non-reset both land on valuation 0
    } else if (!bhat_zero && target.b == bhat && !o.reset) {
      p += o.expr.eval(vstar);
    } else if (!bhat_zero && target_zero && o.reset) {
      p += o.expr.eval(vstar);
    }
  }
  return p;
}

/// Weights encoding the position of v̂ inside the open interval B̂.
inline Assignment<Ep> valuation_to_assignment(const IntervalB& bhat, const Rat& vhat) {
  if (bhat.is_point() || !(vhat > bhat.le() && vhat < bhat.re()))
    throw Error("OUT_OF_INTERVAL",
                rat_to_string(vhat) + " is not strictly inside " + to_string(bhat));
  Rat width = bhat.re() - bhat.le();
  Assignment<Ep> a;
  a[Ep::le] = (bhat.re() - vhat) / width;
  a[Ep::re] = (vhat - bhat.le()) / width;
  return a;
}

/// Inverse of valuation_to_assignment.
inline Rat assignment_to_valuation(const IntervalB& bhat, const Assignment<Ep>& a) {
  if (bhat.is_point()) throw Error("DEGENERATE", "point interval has no interior");
  auto le_it = a.find(Ep::le), re_it = a.find(Ep::re);
  Rat w_le = le_it == a.end() ? Rat(0) : le_it->second;
  Rat w_re = re_it == a.end() ? Rat(0) : re_it->second;
  if (w_le + w_re != 1 || w_le <= 0 || w_le >= 1)
    throw Error("DEGENERATE", "assignment must put weights strictly inside (0,1)");
  return bhat.re() - w_le * (bhat.re() - bhat.le());
}

/// Builds the IMDP: regions (l,B) with B |= inv(l), endpoint indicators
/// (B̂,p,ep) with B̂ |= guard ∧ inv, region rows {le: (0,1), re: (0,1)} per
/// available (B̂,p), and singleton tau rows from the endpoint probabilities.
inline Imdp build_imdp(const Cdpta& model) {
  {
    auto rep = validate(model);
    if (!rep.ok) {
      std::string msg = "model fails validation:";
      for (const auto& v : rep.violations) msg += " [" + v.code + " at " + v.ref + "]";
      throw Error("PRE_VIOLATION", msg);
    }
  }
  Imdp m;
  m.partition = interval_partition(boundary_set(model));
  std::map<std::string, int> index;

  for (const auto& [loc, inv] : model.locations)
    for (const auto& b : m.partition)
      if (interval_sat(b, inv)) {
        RegionState r{loc, b};
        index[to_string(r)] = static_cast<int>(m.states.size());
        m.states.push_back({to_string(r), r, std::nullopt});
      }
  m.region_count = static_cast<int>(m.states.size());

  for (const auto& bhat : m.partition)
    for (const auto& e : model.edges) {
      if (!interval_sat(bhat, e.guard) || !interval_sat(bhat, model.locations.at(e.source)))
        continue;
      for (Ep ep : {Ep::le, Ep::re}) {
        EndpointIndicator ind{bhat, e.id, ep};
        index[to_string(ind)] = static_cast<int>(m.states.size());
        m.states.push_back({to_string(ind), std::nullopt, ind});
      }
    }
  m.endpoint_count = static_cast<int>(m.states.size()) - m.region_count;

  m.actions.resize(m.states.size());
  for (int s = 0; s < static_cast<int>(m.states.size()); ++s) {
    const auto& st = m.states[s];
    if (st.region) {
      const auto& r = *st.region;
      const auto& inv = model.locations.at(r.loc);
      for (const auto& e : model.edges) {
        if (e.source != r.loc) continue;
        for (const auto& bhat : m.partition) {
          if (bhat.idx < r.b.idx) continue;
          if (!interval_sat(bhat, e.guard) || !interval_sat(bhat, inv)) continue;
          ImdpAction act{false, bhat, e.id, "(" + to_string(bhat) + "," + e.id + ")"};
          IntervalDist<int> row;
          row.entries[index.at(to_string(EndpointIndicator{bhat, e.id, Ep::le}))] =
              pi_open(Rat(0), Rat(1));
          row.entries[index.at(to_string(EndpointIndicator{bhat, e.id, Ep::re}))] =
              pi_open(Rat(0), Rat(1));
          m.actions[s].push_back({std::move(act), std::move(row)});
        }
      }
      if (m.actions[s].empty())
        throw Error("ASSUMPTION_BROKEN", "region " + st.name + " has no available action");
    } else {
      const auto& ind = *st.endpoint;
      const ProbEdge& e = *model.edge(ind.edge);
      Rat vstar = ind.ep == Ep::le ? ind.bhat.le() : ind.bhat.re();
      std::map<int, Rat> mass;
      Rat total = 0;
      for (const auto& o : e.outcomes) {
        Rat p = o.expr.eval(vstar);
        if (p == 0) continue;
        total += p;
        RegionState target{o.target, o.reset ? m.partition.front() : ind.bhat};
        auto it = index.find(to_string(target));
        if (it == index.end())
          throw Error("ASSUMPTION_BROKEN", "endpoint row of " + st.name +
                                               " targets missing region " + to_string(target));
        mass[it->second] += p;
      }
      if (total != 1)
        throw Error("ASSUMPTION_BROKEN",
                    "endpoint row of " + st.name + " sums to " + rat_to_string(total));
      IntervalDist<int> row;
      for (const auto& [t, p] : mass) row.entries[t] = pi_point(p);
      m.actions[s].push_back({ImdpAction{true, {}, "", "tau"}, std::move(row)});
    }
  }
  m.initial = index.at(to_string(RegionState{model.initial, m.partition.front()}));
  return m;
}

/// DOT export: regions as boxes, endpoint indicators shaded, actions as
/// point nodes; zero-probability outcome edges drawn dashed with [0,0].
inline std::string imdp_to_dot(const Imdp& m, const Cdpta* model = nullptr) {
  std::string out = "digraph imdp {\n  rankdir=TB;\n  node [fontsize=10];\n";
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    const auto& st = m.states[i];
    out += "  s" + std::to_string(i) + " [label=\"" + st.name + "\", shape=box";
    if (st.endpoint) out += ", style=filled, fillcolor=gray85";
    if (static_cast<int>(i) == m.initial) out += ", penwidth=2";
    out += "];\n";
  }
  int nail = 0;
  for (std::size_t s = 0; s < m.actions.size(); ++s) {
    for (const auto& [act, row] : m.actions[s]) {
      if (!act.tau) {
        std::string a = "a" + std::to_string(nail++);
        out += "  " + a + " [shape=point, width=0.08];\n";
        out += "  s" + std::to_string(s) + " -> " + a + " [label=\"" + act.name +
               "\", arrowhead=none];\n";
        for (const auto& [t, iv] : row.entries)
          out += "  " + a + " -> s" + std::to_string(t) + " [label=\"" + to_string(iv) + "\"];\n";
      } else {
        for (const auto& [t, iv] : row.entries)
          out += "  s" + std::to_string(s) + " -> s" + std::to_string(t) + " [label=\"" +
                 to_string(iv) + "\"];\n";
        // dashed zero edges towards the regions the edge's outcomes name
        if (model && m.states[s].endpoint) {
          const auto& ind = *m.states[s].endpoint;
          const ProbEdge* e = model->edge(ind.edge);
          Rat vstar = ind.ep == Ep::le ? ind.bhat.le() : ind.bhat.re();
          for (const auto& o : e->outcomes) {
            if (o.expr.eval(vstar) != 0) continue;
            RegionState target{o.target, o.reset ? m.partition.front() : ind.bhat};
            int t = m.index_of(to_string(target));
            if (t >= 0)
              out += "  s" + std::to_string(s) + " -> s" + std::to_string(t) +
                     " [label=\"[0,0]\", style=dashed];\n";
          }
        }
      }
    }
  }
  out += "}\n";
  return out;
}

}  // namespace cdpta
