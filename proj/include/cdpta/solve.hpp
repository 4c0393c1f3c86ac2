#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imc.hpp"
#include "imdp.hpp"
#include "intervals.hpp"
#include "model.hpp"

namespace cdpta {

struct SolveConfig {
  double epsilon = 1e-9;
  std::size_t max_iterations = 1000000;
  Mode mode = Mode::max;
};

struct QuantResult {
  std::vector<double> values;
  std::size_t iterations = 0;
  bool converged = false;
  std::set<int> exact_zero;  // value exactly 0
  std::set<int> exact_one;   // value exactly 1
};

enum class QualMode { forall0, exists0, exists1, forall1 };

inline std::string to_string(QualMode m) {
  switch (m) {
    case QualMode::forall0: return "forall0";
    case QualMode::exists0: return "exists0";
    case QualMode::exists1: return "exists1";
    case QualMode::forall1: return "forall1";
  }
  return "";
}

struct QualResult {
  QualMode mode = QualMode::forall0;
  std::set<int> holds;
};

/// Optimal expected value of an all-closed interval row against a value map,
/// together with a witnessing assignment. Greedy: start every entry at its
/// left endpoint and pour the remaining budget in sorted value order
/// (descending for MAX, ascending for MIN; ties by key).
template <typename K, typename ValueFn>
std::pair<double, Assignment<K>> extremal_value_fn(const IntervalDist<K>& row, ValueFn&& value,
                                                   Mode mode) {
  for (const auto& [k, iv] : row.entries)
    if (!iv.left_closed || !iv.right_closed)
      throw Error("PRE_VIOLATION", "extremal_value needs an all-closed row");
  if (!is_interval_distribution(row))
    throw Error("PRE_VIOLATION", "extremal_value needs an interval distribution");
  std::vector<const K*> keys;
  Rat budget = 1;
  Assignment<K> alpha;
  for (const auto& [k, iv] : row.entries) {
    keys.push_back(&k);
    alpha[k] = iv.lep;
    budget -= iv.lep;
  }
  std::stable_sort(keys.begin(), keys.end(), [&](const K* a, const K* b) {
    double va = value(*a), vb = value(*b);
    if (va != vb) return mode == Mode::max ? va > vb : va < vb;
    return *a < *b;
  });
  for (const K* k : keys) {
    if (budget == 0) break;
    const auto& iv = row.entries.at(*k);
    Rat room = iv.rep - iv.lep;
    Rat pour = std::min(room, budget);
    alpha[*k] += pour;
    budget -= pour;
  }
  double v = 0;
  for (const auto& [k, q] : alpha) v += to_double(q) * value(k);
  return {v, std::move(alpha)};
}

template <typename K>
std::pair<double, Assignment<K>> extremal_value(const IntervalDist<K>& row,
                                                const std::map<K, double>& values, Mode mode) {
  return extremal_value_fn(
      row, [&](const K& k) { return values.at(k); }, mode);
}

namespace detail {

/// Uniform view for the qualitative fixpoints: one row per IMC state, one row
/// per available action for IMDP states.
struct QualSystem {
  std::vector<std::vector<IntervalDist<int>>> rows;
  std::vector<std::vector<Rat>> row_lep_sum;

  std::size_t n() const { return rows.size(); }

  void finish() {
    row_lep_sum.resize(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s)
      for (const auto& r : rows[s]) {
        Rat sum = 0;
        for (const auto& [t, iv] : r.entries) sum += iv.lep;
        row_lep_sum[s].push_back(sum);
      }
  }

  QualSystem closed() const {
    QualSystem out;
    out.rows.resize(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s)
      for (const auto& r : rows[s]) out.rows[s].push_back(close_intervals(r));
    out.finish();
    return out;
  }
};

inline QualSystem system_of(const Imc& c) {
  QualSystem sys;
  sys.rows.resize(c.rows.size());
  for (std::size_t s = 0; s < c.rows.size(); ++s) sys.rows[s].push_back(c.rows[s]);
  sys.finish();
  return sys;
}

inline QualSystem system_of(const Imdp& m) {
  QualSystem sys;
  sys.rows.resize(m.states.size());
  for (std::size_t s = 0; s < m.states.size(); ++s)
    for (const auto& [act, row] : m.actions[s]) sys.rows[s].push_back(row);
  sys.finish();
  return sys;
}

/// States from which some positive-upper-bound path reaches the targets.
inline std::vector<char> can_reach(const QualSystem& sys, const std::set<int>& targets) {
  std::vector<std::vector<int>> rev(sys.n());
  for (std::size_t s = 0; s < sys.n(); ++s)
    for (const auto& r : sys.rows[s])
      for (const auto& [t, iv] : r.entries)
        if (iv.rep > 0) rev[t].push_back(static_cast<int>(s));
  std::vector<char> reach(sys.n(), 0);
  std::vector<int> queue;
  for (int t : targets)
    if (!reach[t]) {
      reach[t] = 1;
      queue.push_back(t);
    }
  for (std::size_t qi = 0; qi < queue.size(); ++qi)
    for (int s : rev[queue[qi]])
      if (!reach[s]) {
        reach[s] = 1;
        queue.push_back(s);
      }
  return reach;
}

inline std::set<int> qual_forall0(const QualSystem& sys, const std::set<int>& targets) {
  auto reach = can_reach(sys, targets);
  std::set<int> holds;
  for (std::size_t s = 0; s < sys.n(); ++s)
    if (!reach[s]) holds.insert(static_cast<int>(s));
  return holds;
}

/// Greatest fixpoint of target-free states that can keep all mass inside.
inline std::set<int> qual_exists0(const QualSystem& sys, const std::set<int>& targets) {
  std::vector<char> in_u(sys.n(), 1);
  for (int t : targets) in_u[t] = 0;
  auto pred = [&](int k) { return in_u[k] != 0; };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < sys.n(); ++s) {
      if (!in_u[s]) continue;
      bool ok = false;
      for (const auto& r : sys.rows[s])
        if (support_feasible_pred(r, pred)) {
          ok = true;
          break;
        }
      if (!ok) {
        in_u[s] = 0;
        changed = true;
      }
    }
  }
  std::set<int> holds;
  for (std::size_t s = 0; s < sys.n(); ++s)
    if (in_u[s]) holds.insert(static_cast<int>(s));
  return holds;
}

/// Nested fixpoint (Prob1E shape) with openness-aware feasibility.
inline std::set<int> qual_exists1(const QualSystem& sys, const std::set<int>& targets) {
  std::vector<char> in_u(sys.n(), 1);
  std::vector<char> is_target(sys.n(), 0);
  for (int t : targets) is_target[t] = 1;
  for (;;) {
    std::vector<char> in_v(sys.n(), 0);
    for (int t : targets) in_v[t] = 1;
    auto u_pred = [&](int k) { return in_u[k] != 0; };
    auto v_pred = [&](int k) { return in_v[k] != 0; };
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t s = 0; s < sys.n(); ++s) {
        if (!in_u[s] || in_v[s]) continue;
        for (const auto& r : sys.rows[s])
          if (positive_mass_feasible_pred(r, u_pred, v_pred)) {
            in_v[s] = 1;
            grew = true;
            break;
          }
      }
    }
    bool shrunk = false;
    for (std::size_t s = 0; s < sys.n(); ++s) {
      char keep = is_target[s] || in_v[s];
      if (in_u[s] && !keep) shrunk = true;
      in_u[s] = keep;
    }
    if (!shrunk) break;
  }
  std::set<int> holds;
  for (std::size_t s = 0; s < sys.n(); ++s)
    if (in_u[s]) holds.insert(static_cast<int>(s));
  return holds;
}

/// A step is assignably positive when some assignment of one row puts
/// positive mass on the target.
inline bool assignably_positive(const QualSystem& sys, int s, int t) {
  for (std::size_t a = 0; a < sys.rows[s].size(); ++a) {
    const auto& r = sys.rows[s][a];
    auto it = r.entries.find(t);
    if (it == r.entries.end()) continue;
    if (it->second.rep > 0 && (sys.row_lep_sum[s][a] < 1 || it->second.lep > 0)) return true;
  }
  return false;
}

/// FORALL1: the avoid-set is computed on the closed system, because a
/// scheduler can lose value-1 by steering arbitrarily close to an avoidance
/// strategy that is only attained in the closure (shrinking leaks).
inline std::set<int> qual_forall1(const QualSystem& sys, const std::set<int>& targets) {
  std::set<int> e0 = qual_exists0(sys.closed(), targets);
  std::vector<char> is_target(sys.n(), 0);
  for (int t : targets) is_target[t] = 1;
  std::vector<std::vector<int>> rev(sys.n());
  for (std::size_t s = 0; s < sys.n(); ++s) {
    if (is_target[s]) continue;
    for (const auto& r : sys.rows[s])
      for (const auto& [t, iv] : r.entries)
        if (!is_target[t] && assignably_positive(sys, static_cast<int>(s), t))
          rev[t].push_back(static_cast<int>(s));
  }
  std::vector<char> bad(sys.n(), 0);
  std::vector<int> queue;
  for (int t : e0)
    if (!bad[t]) {
      bad[t] = 1;
      queue.push_back(t);
    }
  for (std::size_t qi = 0; qi < queue.size(); ++qi)
    for (int s : rev[queue[qi]])
      if (!bad[s]) {
        bad[s] = 1;
        queue.push_back(s);
      }
  std::set<int> holds;
  for (std::size_t s = 0; s < sys.n(); ++s)
    if (is_target[s] || !bad[s]) holds.insert(static_cast<int>(s));
  return holds;
}

inline std::set<int> qual_solve(const QualSystem& sys, const std::set<int>& targets,
                                QualMode mode) {
  switch (mode) {
    case QualMode::forall0: return qual_forall0(sys, targets);
    case QualMode::exists0: return qual_exists0(sys, targets);
    case QualMode::exists1: return qual_exists1(sys, targets);
    case QualMode::forall1: return qual_forall1(sys, targets);
  }
  return {};
}

/// Shared quantitative core: per state a list of closed rows; the value is
/// the best (MAX) or worst (MIN) extremal row value.
inline QuantResult quant_solve(const QualSystem& sys, const std::set<int>& targets,
                               const SolveConfig& cfg,
                               const std::function<void(const std::vector<double>&)>& observer) {
  const std::size_t n = sys.n();
  for (int t : targets)
    if (t < 0 || static_cast<std::size_t>(t) >= n)
      throw Error("TARGET_UNKNOWN_STATE", "target index " + std::to_string(t));
  QuantResult res;
  QualSystem closed = sys.closed();
  auto reach = can_reach(sys, targets);
  for (std::size_t s = 0; s < n; ++s)
    if (!reach[s]) res.exact_zero.insert(static_cast<int>(s));
  // On closed rows the extremal assignment is attained, so the closed-system
  // qualitative sets pin states whose value is exactly 1.
  res.exact_one = cfg.mode == Mode::max ? qual_exists1(closed, targets)
                                        : qual_forall1(closed, targets);
  std::vector<char> pinned(n, 0);
  std::vector<double> x(n, 0.0);
  for (int t : targets) {
    pinned[t] = 1;
    x[t] = 1.0;
  }
  for (int t : res.exact_one) {
    pinned[t] = 1;
    x[t] = 1.0;
  }
  for (int t : res.exact_zero)
    if (!pinned[t]) pinned[t] = 1;

  std::vector<double> next = x;
  auto value = [&x](int k) { return x[k]; };
  while (res.iterations < cfg.max_iterations) {
    double delta = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (pinned[s]) continue;
      double best = 0;
      bool first = true;
      for (const auto& r : closed.rows[s]) {
        double v = extremal_value_fn(r, value, cfg.mode).first;
        if (first || (cfg.mode == Mode::max ? v > best : v < best)) best = v;
        first = false;
      }
      next[s] = best;
      delta = std::max(delta, std::abs(best - x[s]));
    }
    x.swap(next);
    ++res.iterations;
    if (observer) observer(x);
    if (delta < cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.values = std::move(x);
  return res;
}

}  // namespace detail

inline void check_targets(std::size_t n, const std::set<int>& targets) {
  for (int t : targets)
    if (t < 0 || static_cast<std::size_t>(t) >= n)
      throw Error("TARGET_UNKNOWN_STATE", "target index " + std::to_string(t));
}

/// Quantitative reachability on an IMC: close the intervals, pin the exact
/// zero/one sets, then robust value iteration from below.
inline QuantResult solve_quant(const Imc& c, const std::set<int>& targets, SolveConfig cfg = {},
                               std::function<void(const std::vector<double>&)> observer = {}) {
  check_targets(c.states.size(), targets);
  return detail::quant_solve(detail::system_of(c), targets, cfg, observer);
}

/// Qualitative reachability on the original (unclosed) rows.
inline QualResult solve_qual(const Imc& c, const std::set<int>& targets, QualMode mode) {
  check_targets(c.states.size(), targets);
  return {mode, detail::qual_solve(detail::system_of(c), targets, mode)};
}

/// Direct robust value iteration on an IMDP (action choice and assignment
/// choice combined); the reference point for the reduction tests.
inline QuantResult solve_quant_imdp(const Imdp& m, const std::set<int>& targets,
                                    SolveConfig cfg = {},
                                    std::function<void(const std::vector<double>&)> observer = {}) {
  check_targets(m.states.size(), targets);
  return detail::quant_solve(detail::system_of(m), targets, cfg, observer);
}

inline QualResult solve_qual_imdp(const Imdp& m, const std::set<int>& targets, QualMode mode) {
  check_targets(m.states.size(), targets);
  return {mode, detail::qual_solve(detail::system_of(m), targets, mode)};
}

enum class Cmp { ge, gt, le, lt };

inline std::string to_string(Cmp c) {
  switch (c) {
    case Cmp::ge: return ">=";
    case Cmp::gt: return ">";
    case Cmp::le: return "<=";
    case Cmp::lt: return "<";
  }
  return "";
}

struct Query {
  bool quantitative = true;
  Mode mode = Mode::max;
  QualMode qual_mode = QualMode::exists1;
  std::optional<std::pair<Cmp, Rat>> threshold;
};

struct QueryStats {
  std::size_t regions = 0;
  std::size_t endpoints = 0;
  std::size_t imdp_actions = 0;
  std::size_t imc_states = 0;
  std::size_t imc_transitions = 0;
  std::size_t iterations = 0;
  bool converged = true;
  double wall_ms = 0;
};

struct QueryResult {
  double value = 0;             // quantitative value at the initial state
  bool qual_holds = false;      // qualitative answer at the initial state
  std::optional<bool> verdict;  // threshold comparison, when requested
  QuantResult quant_result;
  QualResult qual_result;
  QueryStats stats;
};

/// End-to-end pipeline: validate, build the IMDP, reduce to an IMC, solve.
/// The query is evaluated at Base(initial location, [0,0]).
inline QueryResult solve_query(const Cdpta& model, const std::set<std::string>& target_locs,
                               const Query& q, SolveConfig cfg = {}) {
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& l : target_locs)
    if (!model.locations.count(l))
      throw Error("TARGET_UNKNOWN_STATE", "unknown target location " + l);
  Imdp imdp = build_imdp(model);
  Imc imc = reduce_to_imc(imdp);
  std::set<int> targets;
  for (int s = 0; s < imdp.region_count; ++s)
    if (imdp.states[s].region && target_locs.count(imdp.states[s].region->loc))
      targets.insert(imc.base_index(s));

  QueryResult r;
  r.stats.regions = imdp.region_count;
  r.stats.endpoints = imdp.endpoint_count;
  r.stats.imdp_actions = imdp.action_total();
  r.stats.imc_states = imc.states.size();
  r.stats.imc_transitions = transition_count(imc);

  int at = imc.base_index(imdp.initial);
  if (q.quantitative) {
    cfg.mode = q.mode;
    r.quant_result = solve_quant(imc, targets, cfg);
    r.value = r.quant_result.values[at];
    r.stats.iterations = r.quant_result.iterations;
    r.stats.converged = r.quant_result.converged;
    if (q.threshold) {
      // Value iteration approaches the fixpoint from below, so comparisons
      // get one epsilon of slack towards the claim.
      double lambda = to_double(q.threshold->second);
      switch (q.threshold->first) {
        case Cmp::ge: r.verdict = r.value >= lambda - cfg.epsilon; break;
        case Cmp::gt: r.verdict = r.value > lambda - cfg.epsilon; break;
        case Cmp::le: r.verdict = r.value <= lambda + cfg.epsilon; break;
        case Cmp::lt: r.verdict = r.value < lambda + cfg.epsilon; break;
      }
    }
  } else {
    r.qual_result = solve_qual(imc, targets, q.qual_mode);
    r.qual_holds = r.qual_result.holds.count(at) > 0;
  }
  r.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace cdpta
