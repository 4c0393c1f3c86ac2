#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "imdp.hpp"
#include "model.hpp"

namespace cdpta {

/// Finite MDP over the grid {0, 2^-k, 2*2^-k, ...}: states are (location,
/// grid valuation), actions are (grid delay, edge), rows delegate to
/// transition_distribution. Rows are stored once per (edge, delay); actions
/// of a state are the delays at or above its valuation.
struct FiniteMdp {
  int k = 1;
  long long denom = 2;  // 2^k
  unsigned long long bmax = 0;
  std::vector<std::string> locs;
  std::vector<InvariantSpec> invs;
  std::vector<long long> count;   // grid states per location
  std::vector<long long> offset;  // state id = offset[loc] + grid index
  long long total_states = 0;

  struct EdgeGrid {
    int edge = 0;  // index into the model's edge vector
    int loc = 0;   // source location index
    long long lo = 0, hi = -1;
    std::vector<std::vector<std::pair<long long, Rat>>> rows;  // per delay index
  };
  std::vector<EdgeGrid> grids;

  int loc_index(const std::string& name) const {
    auto it = std::lower_bound(locs.begin(), locs.end(), name);
    if (it == locs.end() || *it != name) return -1;
    return static_cast<int>(it - locs.begin());
  }
  long long state_id(int loc, long long i) const { return offset[loc] + i; }
  Rat valuation(long long i) const { return Rat(i, denom); }
};

inline FiniteMdp discretize(const Cdpta& model, int k) {
  if (k < 1) throw Error("PRE_VIOLATION", "discretization level must be at least 1");
  FiniteMdp m;
  m.k = k;
  m.denom = 1LL << k;
  for (const auto& [l, inv] : model.locations) {
    m.locs.push_back(l);
    m.invs.push_back(inv);
    m.bmax = std::max(m.bmax, inv.bound);
  }
  for (const auto& e : model.edges)
    for (const auto& a : e.guard.atoms) m.bmax = std::max(m.bmax, a.bound);
  for (std::size_t l = 0; l < m.locs.size(); ++l) {
    long long bound_idx = static_cast<long long>(m.invs[l].bound) * m.denom;
    m.offset.push_back(m.total_states);
    m.count.push_back(m.invs[l].strict ? bound_idx : bound_idx + 1);
    m.total_states += m.count.back();
  }
  for (std::size_t e = 0; e < model.edges.size(); ++e) {
    auto iv = enabled_interval(model.edges[e], model);
    if (!iv) continue;
    FiniteMdp::EdgeGrid g;
    g.edge = static_cast<int>(e);
    g.loc = m.loc_index(model.edges[e].source);
    g.lo = numerator(iv->lo).convert_to<long long>() * m.denom / denominator(iv->lo).convert_to<long long>() +
           (iv->lo_open ? 1 : 0);
    g.hi = numerator(iv->hi).convert_to<long long>() * m.denom / denominator(iv->hi).convert_to<long long>() -
           (iv->hi_open ? 1 : 0);
    if (g.lo > g.hi) continue;
    g.rows.reserve(g.hi - g.lo + 1);
    for (long long i = g.lo; i <= g.hi; ++i) {
      Rat vhat = m.valuation(i);
      std::map<long long, Rat> mass;  // reset and non-reset can share a target
      for (const auto& o : model.edges[e].outcomes) {
        Rat p = o.expr.eval(vhat);
        if (p == 0) continue;
        int tl = m.loc_index(o.target);
        long long ti = o.reset ? 0 : i;
        if (ti >= m.count[tl])
          throw Error("ASSUMPTION_BROKEN", "grid target violates invariant of " + o.target);
        mass[m.state_id(tl, ti)] += p;
      }
      g.rows.emplace_back(mass.begin(), mass.end());
    }
    m.grids.push_back(std::move(g));
  }
  return m;
}

/// The exact row of action (vhat, edge) from state (loc, v); mirrors
/// transition_distribution on the grid.
inline std::map<CdptaState, Rat> oracle_row(const FiniteMdp& m, const Cdpta& model,
                                            const CdptaState& state, const Rat& vhat,
                                            const std::string& edge_id) {
  int l = m.loc_index(state.first);
  if (l < 0) throw Error("PRE_VIOLATION", "unknown location " + state.first);
  Rat scaled_v = state.second * m.denom, scaled = vhat * m.denom;
  if (denominator(scaled) != 1 || denominator(scaled_v) != 1)
    throw Error("PRE_VIOLATION", "valuations must lie on the grid");
  long long i = numerator(scaled_v).convert_to<long long>();
  long long j = numerator(scaled).convert_to<long long>();
  for (const auto& g : m.grids) {
    if (g.loc != l || model.edges[g.edge].id != edge_id) continue;
    if (j < std::max(i, g.lo) || j > g.hi) continue;
    std::map<CdptaState, Rat> out;
    for (const auto& [t, p] : g.rows[j - g.lo]) {
      int tl = static_cast<int>(std::upper_bound(m.offset.begin(), m.offset.end(), t) -
                                m.offset.begin()) - 1;
      out[{m.locs[tl], m.valuation(t - m.offset[tl])}] += p;
    }
    return out;
  }
  throw Error("PRE_VIOLATION", "action (" + rat_to_string(vhat) + "," + edge_id +
                                   ") unavailable at (" + state.first + "," +
                                   rat_to_string(state.second) + ")");
}

struct OracleResult {
  std::vector<double> values;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace oracle_detail {

/// All the precomputation sets of the grid MDP are downward closed per
/// location (a lower valuation has every action of a higher one), so they are
/// stored as one prefix bound per location (-1 = empty, count-1 = all).
using Prefix = std::vector<long long>;

template <typename RowOk>
long long best_index(const FiniteMdp::EdgeGrid& g, RowOk&& ok) {
  for (long long i = g.hi; i >= g.lo; --i)
    if (ok(g.rows[i - g.lo])) return i;
  return -1;
}

inline int loc_of_state(const FiniteMdp& m, long long t) {
  int tl = static_cast<int>(std::upper_bound(m.offset.begin(), m.offset.end(), t) -
                            m.offset.begin()) - 1;
  return tl;
}

/// Prefix fixpoint: grow bounds[g.loc] while some row at index i hits `hit`,
/// marking the prefix [0, i].
template <typename RowPred>
void grow_to_fixpoint(const FiniteMdp& m, Prefix& bounds, const std::vector<char>& skip_loc,
                      RowPred&& row_pred) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& g : m.grids) {
      if (skip_loc[g.loc]) continue;
      long long best = best_index(g, row_pred);
      best = std::min(best, m.count[g.loc] - 1);
      if (best > bounds[g.loc]) {
        bounds[g.loc] = best;
        changed = true;
      }
    }
  }
}

inline Prefix reach_set(const FiniteMdp& m, const std::vector<char>& target) {
  Prefix r(m.locs.size(), -1);
  for (std::size_t l = 0; l < m.locs.size(); ++l)
    if (target[l]) r[l] = m.count[l] - 1;
  std::vector<char> skip(m.locs.size(), 0);
  grow_to_fixpoint(m, r, skip, [&](const std::vector<std::pair<long long, Rat>>& row) {
    for (const auto& [t, p] : row) {
      int tl = loc_of_state(m, t);
      if (t - m.offset[tl] <= r[tl]) return true;
    }
    return false;
  });
  return r;
}

/// Prob1E: greatest fixpoint of U over least fixpoints of the attractor V.
inline Prefix prob1e(const FiniteMdp& m, const std::vector<char>& target) {
  Prefix u(m.locs.size());
  for (std::size_t l = 0; l < m.locs.size(); ++l) u[l] = m.count[l] - 1;
  std::vector<char> skip(m.locs.size(), 0);
  for (;;) {
    Prefix v(m.locs.size(), -1);
    for (std::size_t l = 0; l < m.locs.size(); ++l)
      if (target[l]) v[l] = std::min(u[l], m.count[l] - 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& g : m.grids) {
        long long best = best_index(g, [&](const std::vector<std::pair<long long, Rat>>& row) {
          bool hit = false;
          for (const auto& [t, p] : row) {
            int tl = loc_of_state(m, t);
            long long j = t - m.offset[tl];
            if (j > u[tl]) return false;  // support must stay inside U
            if (j <= v[tl] || target[tl]) hit = true;
          }
          return hit;
        });
        best = std::min(best, u[g.loc]);
        if (best > v[g.loc]) {
          v[g.loc] = best;
          changed = true;
        }
      }
    }
    bool shrunk = false;
    for (std::size_t l = 0; l < m.locs.size(); ++l) {
      long long keep = target[l] ? m.count[l] - 1 : v[l];
      if (keep < u[l]) shrunk = true;
      u[l] = keep;
    }
    if (!shrunk) return u;
  }
}

/// Prob0E: greatest fixpoint of target-free states with an action whose
/// support stays inside.
inline Prefix prob0e(const FiniteMdp& m, const std::vector<char>& target) {
  Prefix u(m.locs.size());
  for (std::size_t l = 0; l < m.locs.size(); ++l) u[l] = target[l] ? -1 : m.count[l] - 1;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<long long> best_loc(m.locs.size(), -1);
    for (const auto& g : m.grids) {
      if (target[g.loc]) continue;
      long long best = best_index(g, [&](const std::vector<std::pair<long long, Rat>>& row) {
        for (const auto& [t, p] : row) {
          int tl = loc_of_state(m, t);
          if (t - m.offset[tl] > u[tl]) return false;
        }
        return true;
      });
      best_loc[g.loc] = std::max(best_loc[g.loc], best);
    }
    for (std::size_t l = 0; l < m.locs.size(); ++l) {
      if (target[l]) continue;
      long long nb = std::min(u[l], best_loc[l]);
      if (nb < u[l]) {
        u[l] = nb;
        changed = true;
      }
    }
  }
  return u;
}

}  // namespace oracle_detail

/// Standard value iteration with zero/one precomputation on the grid MDP.
/// Kept free of the interval solver so the two value paths stay independent.
inline OracleResult mdp_reach(const FiniteMdp& m, const std::set<std::string>& target_locs,
                              Mode mode, double epsilon = 1e-9,
                              std::size_t max_iterations = 1000000) {
  using namespace oracle_detail;
  const std::size_t nloc = m.locs.size();
  std::vector<char> target(nloc, 0);
  for (const auto& l : target_locs) {
    int li = m.loc_index(l);
    if (li < 0) throw Error("TARGET_UNKNOWN_STATE", "unknown target location " + l);
    target[li] = 1;
  }
  // pinned sets, all downward or upward closed per location
  Prefix one_upto(nloc, -1), zero_upto(nloc, -1);
  std::vector<long long> one_from(nloc), zero_from(nloc);
  for (std::size_t l = 0; l < nloc; ++l) {
    one_from[l] = m.count[l];
    zero_from[l] = m.count[l];
  }
  if (mode == Mode::max) {
    one_upto = prob1e(m, target);
    Prefix reach = reach_set(m, target);
    for (std::size_t l = 0; l < nloc; ++l) zero_from[l] = reach[l] + 1;
  } else {
    zero_upto = prob0e(m, target);
    // bad = states from which some scheduler reaches the avoid set without
    // touching a target; the rest has minimum value exactly 1
    Prefix bad = zero_upto;
    grow_to_fixpoint(m, bad, target, [&](const std::vector<std::pair<long long, Rat>>& row) {
      for (const auto& [t, p] : row) {
        int tl = loc_of_state(m, t);
        if (!target[tl] && t - m.offset[tl] <= bad[tl]) return true;
      }
      return false;
    });
    for (std::size_t l = 0; l < nloc; ++l)
      if (target[l])
        one_upto[l] = m.count[l] - 1;
      else
        one_from[l] = bad[l] + 1;
  }

  OracleResult res;
  std::vector<double>& x = res.values;
  x.assign(m.total_states, 0.0);
  auto pinned = [&](std::size_t l, long long j) {
    return j <= one_upto[l] || j <= zero_upto[l] || j >= one_from[l] || j >= zero_from[l];
  };
  for (std::size_t l = 0; l < nloc; ++l)
    for (long long j = 0; j < m.count[l]; ++j)
      if (j <= one_upto[l] || j >= one_from[l]) x[m.offset[l] + j] = 1.0;

  std::vector<std::vector<double>> suffix(m.grids.size());
  for (std::size_t gi = 0; gi < m.grids.size(); ++gi)
    suffix[gi].resize(m.grids[gi].rows.size());
  std::vector<double> next = x;
  const bool maximize = mode == Mode::max;
  while (res.iterations < max_iterations) {
    for (std::size_t gi = 0; gi < m.grids.size(); ++gi) {
      const auto& g = m.grids[gi];
      for (long long i = g.hi; i >= g.lo; --i) {
        double v = 0;
        for (const auto& [t, p] : g.rows[i - g.lo]) v += to_double(p) * x[t];
        if (i < g.hi) {
          double s = suffix[gi][i - g.lo + 1];
          v = maximize ? std::max(v, s) : std::min(v, s);
        }
        suffix[gi][i - g.lo] = v;
      }
    }
    double delta = 0;
    for (std::size_t l = 0; l < nloc; ++l) {
      for (long long j = 0; j < m.count[l]; ++j) {
        if (pinned(l, j)) continue;
        double best = 0;
        bool first = true;
        for (std::size_t gi = 0; gi < m.grids.size(); ++gi) {
          const auto& g = m.grids[gi];
          if (g.loc != static_cast<int>(l) || g.hi < j) continue;
          double v = suffix[gi][std::max(j, g.lo) - g.lo];
          if (first || (maximize ? v > best : v < best)) best = v;
          first = false;
        }
        if (first) continue;  // no grid action; value stays at its initialization
        next[m.offset[l] + j] = best;
        delta = std::max(delta, std::abs(best - x[m.offset[l] + j]));
      }
    }
    x.swap(next);
    ++res.iterations;
    if (delta < epsilon) {
      res.converged = true;
      break;
    }
  }
  return res;
}

inline double oracle_value_at(const FiniteMdp& m, const OracleResult& r, const std::string& loc,
                              const Rat& v = Rat(0)) {
  int l = m.loc_index(loc);
  Rat scaled = v * m.denom;
  if (l < 0 || denominator(scaled) != 1)
    throw Error("PRE_VIOLATION", "state not on the grid");
  long long j = numerator(scaled).convert_to<long long>();
  return r.values[m.offset[l] + j];
}

/// Finite decision table keyed by the B-path of the history. CDPTA moves are
/// (delay valuation, edge); IMDP moves are ((B̂, edge), weight on le/re).
struct TableScheduler {
  enum class Kind { cdpta, imdp };

  struct CdptaMove {
    Rat vhat;
    std::string edge;
  };
  struct ImdpMove {
    unsigned long long b_lo = 0, b_hi = 0;  // B̂ endpoints
    std::string edge;
    Rat w_le, w_re;
  };

  Kind kind = Kind::cdpta;
  bool b_minimal = false;
  std::map<std::string, std::vector<std::pair<CdptaMove, Rat>>> cdpta_table;
  std::map<std::string, std::vector<std::pair<ImdpMove, Rat>>> imdp_table;
};

inline std::string bpath_region(const std::string& loc, const IntervalB& b) {
  return "(" + loc + "," + to_string(b) + ")";
}
inline std::string bpath_move(const IntervalB& bhat, const std::string& edge) {
  return "(" + to_string(bhat) + "," + edge + ")";
}

/// Verifies the B-minimality invariant: per entry, at most one supported move
/// per (edge, containing interval) pair.
inline void check_b_minimal(const TableScheduler& s, const std::vector<IntervalB>& partition) {
  if (!s.b_minimal) throw Error("NOT_B_MINIMAL", "scheduler is not flagged B-minimal");
  for (const auto& [key, moves] : s.cdpta_table) {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& [mv, p] : moves) {
      const IntervalB& b = find_interval(partition, mv.vhat);
      if (!seen.insert({mv.edge, b.idx}).second)
        throw Error("NOT_B_MINIMAL",
                    "entry " + key + " has two moves in " + to_string(b) + " via " + mv.edge);
    }
  }
}

/// Exact probability that a target location is visited within `horizon`
/// transitions of the 1c-cdPTA under the table scheduler.
inline Rat bounded_reach_exact(const Cdpta& model, const TableScheduler& sched, int horizon,
                               const std::set<std::string>& target_locs) {
  if (sched.kind != TableScheduler::Kind::cdpta)
    throw Error("PRE_VIOLATION", "scheduler kind does not match the system");
  auto partition = interval_partition(boundary_set(model));
  std::function<Rat(const std::string&, const Rat&, const std::string&, int)> rec =
      [&](const std::string& loc, const Rat& v, const std::string& key, int depth) -> Rat {
    if (target_locs.count(loc)) return 1;
    if (depth == horizon) return 0;
    auto it = sched.cdpta_table.find(key);
    if (it == sched.cdpta_table.end()) throw Error("MISSING_TABLE_ENTRY", key);
    Rat total = 0;
    for (const auto& [mv, q] : it->second) {
      const ProbEdge* e = model.edge(mv.edge);
      if (!e) throw Error("PRE_VIOLATION", "scheduler names unknown edge " + mv.edge);
      auto dist = transition_distribution(model, {loc, v}, mv.vhat, *e);
      const IntervalB& bhat = find_interval(partition, mv.vhat);
      for (const auto& [succ, p] : dist) {
        const IntervalB& bsucc = find_interval(partition, succ.second);
        std::string key2 =
            key + " " + bpath_move(bhat, mv.edge) + " " + bpath_region(succ.first, bsucc);
        total += q * p * rec(succ.first, succ.second, key2, depth + 1);
      }
    }
    return total;
  };
  const IntervalB& b0 = find_interval(partition, Rat(0));
  return rec(model.initial, Rat(0), bpath_region(model.initial, b0), 0);
}

/// Exact probability that a target region is visited within `horizon`
/// region-to-region steps of the IMDP (2*horizon raw transitions).
inline Rat bounded_reach_exact(const Imdp& imdp, const TableScheduler& sched, int horizon,
                               const std::set<std::string>& target_locs) {
  if (sched.kind != TableScheduler::Kind::imdp)
    throw Error("PRE_VIOLATION", "scheduler kind does not match the system");
  std::function<Rat(int, const std::string&, int)> rec = [&](int state, const std::string& key,
                                                             int depth) -> Rat {
    const auto& region = imdp.states[state].region;
    if (region && target_locs.count(region->loc)) return 1;
    if (depth == horizon) return 0;
    auto it = sched.imdp_table.find(key);
    if (it == sched.imdp_table.end()) throw Error("MISSING_TABLE_ENTRY", key);
    Rat total = 0;
    for (const auto& [mv, q] : it->second) {
      const std::pair<ImdpAction, IntervalDist<int>>* found = nullptr;
      for (const auto& ar : imdp.actions[state])
        if (!ar.first.tau && ar.first.edge == mv.edge && ar.first.bhat.lo == mv.b_lo &&
            ar.first.bhat.hi == mv.b_hi) {
          found = &ar;
          break;
        }
      if (!found)
        throw Error("PRE_VIOLATION", "scheduler move " + mv.edge + " unavailable at " +
                                         imdp.states[state].name);
      for (const auto& [ind_state, iv] : found->second.entries) {
        const auto& ind = imdp.states[ind_state].endpoint;
        Rat w = ind->ep == Ep::le ? mv.w_le : mv.w_re;
        if (w == 0) continue;
        const auto& tau_row = imdp.actions[ind_state].front().second;
        for (const auto& [succ, p] : tau_row.entries) {
          std::string key2 = key + " " + bpath_move(found->first.bhat, mv.edge) + " " +
                             imdp.states[succ].name;
          total += q * w * p.lep * rec(succ, key2, depth + 1);
        }
      }
    }
    return total;
  };
  return rec(imdp.initial, imdp.states[imdp.initial].name, 0);
}

/// The scheduler-mimicry construction: each chosen (v̂, edge) becomes the IMDP
/// action ((B̂, edge)) with the assignment encoding v̂'s position inside B̂.
/// Point intervals have identical le/re rows, so their weight split is fixed
/// at 1/2.
inline TableScheduler mimic_scheduler(const TableScheduler& sched, const Imdp& imdp) {
  if (sched.kind != TableScheduler::Kind::cdpta)
    throw Error("PRE_VIOLATION", "mimic_scheduler starts from a CDPTA scheduler");
  check_b_minimal(sched, imdp.partition);
  TableScheduler out;
  out.kind = TableScheduler::Kind::imdp;
  out.b_minimal = true;
  for (const auto& [key, moves] : sched.cdpta_table) {
    auto& entry = out.imdp_table[key];
    for (const auto& [mv, q] : moves) {
      const IntervalB& bhat = find_interval(imdp.partition, mv.vhat);
      TableScheduler::ImdpMove im;
      im.b_lo = bhat.lo;
      im.b_hi = bhat.hi;
      im.edge = mv.edge;
      if (bhat.is_point()) {
        im.w_le = Rat(1, 2);
        im.w_re = Rat(1, 2);
      } else {
        auto alpha = valuation_to_assignment(bhat, mv.vhat);
        im.w_le = alpha[Ep::le];
        im.w_re = alpha[Ep::re];
      }
      entry.push_back({im, q});
    }
  }
  return out;
}

/// Text form: one line per (B-path key, move, probability).
inline std::string scheduler_to_text(const TableScheduler& s) {
  std::string out = "scheduler/1 ";
  out += s.kind == TableScheduler::Kind::cdpta ? "cdpta" : "imdp";
  if (s.b_minimal) out += " b-minimal";
  out += "\n";
  if (s.kind == TableScheduler::Kind::cdpta) {
    for (const auto& [key, moves] : s.cdpta_table)
      for (const auto& [mv, q] : moves)
        out += "entry " + quote(key) + " move " + rat_to_string(mv.vhat) + " " + mv.edge +
               " prob " + rat_to_string(q) + "\n";
  } else {
    for (const auto& [key, moves] : s.imdp_table)
      for (const auto& [mv, q] : moves)
        out += "entry " + quote(key) + " move " + std::to_string(mv.b_lo) + " " +
               std::to_string(mv.b_hi) + " " + mv.edge + " alpha " + rat_to_string(mv.w_le) +
               " " + rat_to_string(mv.w_re) + " prob " + rat_to_string(q) + "\n";
  }
  return out;
}

inline TableScheduler scheduler_from_text(std::string_view text) {
  TableScheduler s;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (!have_header) {
      if (head != "scheduler/1")
        throw Error("PARSE", "scheduler text line 1: expected header scheduler/1");
      std::string kind, flag;
      ls >> kind;
      s.kind = kind == "imdp" ? TableScheduler::Kind::imdp : TableScheduler::Kind::cdpta;
      if (kind != "imdp" && kind != "cdpta")
        throw Error("PARSE", "scheduler kind must be cdpta or imdp");
      if (ls >> flag && flag == "b-minimal") s.b_minimal = true;
      have_header = true;
      continue;
    }
    if (head != "entry")
      throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": expected entry");
    auto q0 = line.find('"');
    auto q1 = line.rfind('"');
    if (q0 == std::string::npos || q1 <= q0)
      throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": missing key");
    std::string key = line.substr(q0 + 1, q1 - q0 - 1);
    std::istringstream rest(line.substr(q1 + 1));
    std::string kw;
    if (!(rest >> kw) || kw != "move")
      throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": expected move");
    if (s.kind == TableScheduler::Kind::cdpta) {
      std::string v, edge, probkw, prob;
      if (!(rest >> v >> edge >> probkw >> prob) || probkw != "prob")
        throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": bad move");
      auto vr = rat_from_string(v), pr = rat_from_string(prob);
      if (!vr || !pr)
        throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": bad rational");
      s.cdpta_table[key].push_back({{*vr, edge}, *pr});
    } else {
      unsigned long long lo, hi;
      std::string edge, alphakw, wle, wre, probkw, prob;
      if (!(rest >> lo >> hi >> edge >> alphakw >> wle >> wre >> probkw >> prob) ||
          alphakw != "alpha" || probkw != "prob")
        throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": bad move");
      auto le = rat_from_string(wle), re = rat_from_string(wre), pr = rat_from_string(prob);
      if (!le || !re || !pr)
        throw Error("PARSE", "scheduler text line " + std::to_string(lineno) + ": bad rational");
      s.imdp_table[key].push_back({{lo, hi, edge, *le, *re}, *pr});
    }
  }
  if (!have_header) throw Error("PARSE", "empty scheduler text");
  return s;
}

}  // namespace cdpta
