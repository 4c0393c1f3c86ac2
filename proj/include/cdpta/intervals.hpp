#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rational.hpp"

namespace cdpta {

/// Optimization direction shared by the solvers and the oracle.
enum class Mode { max, min };

/// A subinterval of [0,1] with independently open or closed endpoints.
struct ProbInterval {
  Rat lep{0};
  Rat rep{0};
  bool left_closed = true;
  bool right_closed = true;

  bool contains(const Rat& q) const {
    if (left_closed ? q < lep : q <= lep) return false;
    if (right_closed ? q > rep : q >= rep) return false;
    return true;
  }

  friend bool operator==(const ProbInterval&, const ProbInterval&) = default;
};

/// Checked constructor: endpoints in [0,1], lep <= rep, point intervals closed.
inline ProbInterval prob_interval(const Rat& lep, const Rat& rep, bool left_closed,
                                  bool right_closed) {
  if (lep < 0 || rep > 1 || lep > rep)
    throw Error("BAD_INTERVAL", "endpoints must satisfy 0 <= " + rat_to_string(lep) +
                                    " <= " + rat_to_string(rep) + " <= 1");
  if (lep == rep && !(left_closed && right_closed))
    throw Error("BAD_INTERVAL", "point interval at " + rat_to_string(lep) + " must be closed");
  return ProbInterval{lep, rep, left_closed, right_closed};
}

inline ProbInterval pi_point(const Rat& q) { return prob_interval(q, q, true, true); }
inline ProbInterval pi_closed(const Rat& a, const Rat& b) { return prob_interval(a, b, true, true); }
inline ProbInterval pi_open(const Rat& a, const Rat& b) { return prob_interval(a, b, false, false); }

inline std::string to_string(const ProbInterval& i) {
  std::string s;
  s += i.left_closed ? '[' : '(';
  s += rat_to_string(i.lep);
  s += ',';
  s += rat_to_string(i.rep);
  s += i.right_closed ? ']' : ')';
  return s;
}

/// Parses the interval text form "(a,b)" / "[a,b]" / "(a,b]" / "[a,b)".
inline std::optional<ProbInterval> interval_from_string(std::string_view s) {
  if (s.size() < 5) return std::nullopt;
  char lo = s.front(), hi = s.back();
  if ((lo != '[' && lo != '(') || (hi != ']' && hi != ')')) return std::nullopt;
  auto comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  auto a = rat_from_string(s.substr(1, comma - 1));
  auto b = rat_from_string(s.substr(comma + 1, s.size() - comma - 2));
  if (!a || !b) return std::nullopt;
  try {
    return prob_interval(*a, *b, lo == '[', hi == ']');
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// Interval distribution over keys of type K; absent keys denote [0,0].
template <typename K>
struct IntervalDist {
  std::map<K, ProbInterval> entries;

  const ProbInterval& at(const K& k) const {
    static const ProbInterval zero{};
    auto it = entries.find(k);
    return it == entries.end() ? zero : it->second;
  }

  friend bool operator==(const IntervalDist&, const IntervalDist&) = default;
};

template <typename K>
using Assignment = std::map<K, Rat>;

/// Conditions (1), (2a), (2b): sum of left endpoints <= 1 <= sum of right
/// endpoints, with closedness forced when either sum attains 1.
template <typename K>
bool is_interval_distribution(const IntervalDist<K>& d) {
  Rat sum_lep = 0, sum_rep = 0;
  for (const auto& [k, i] : d.entries) {
    sum_lep += i.lep;
    sum_rep += i.rep;
  }
  if (sum_lep > 1 || sum_rep < 1) return false;
  if (sum_lep == 1)
    for (const auto& [k, i] : d.entries)
      if (!i.left_closed) return false;
  if (sum_rep == 1)
    for (const auto& [k, i] : d.entries)
      if (!i.right_closed) return false;
  return true;
}

template <typename K>
bool is_assignment(const IntervalDist<K>& d, const Assignment<K>& a) {
  Rat sum = 0;
  for (const auto& [k, q] : a) {
    if (q < 0) return false;
    sum += q;
    if (d.entries.find(k) == d.entries.end() && q != 0) return false;
  }
  if (sum != 1) return false;
  for (const auto& [k, i] : d.entries) {
    auto it = a.find(k);
    Rat q = it == a.end() ? Rat(0) : it->second;
    if (!i.contains(q)) return false;
  }
  return true;
}

/// Produces one valid assignment. Every entry starts at its left endpoint;
/// open-left entries are nudged strictly inside by a common delta, then the
/// remaining budget fills right-closed headroom in key order and any residue
/// is spread proportionally over right-open headroom (which keeps those
/// entries strictly below their right endpoints).
template <typename K>
Assignment<K> witness_assignment(const IntervalDist<K>& d) {
  if (!is_interval_distribution(d))
    throw Error("PRE_VIOLATION", "witness_assignment requires an interval distribution");
  Assignment<K> a;
  Rat sum_lep = 0;
  long open_left = 0;
  Rat min_gap = 0;
  for (const auto& [k, i] : d.entries) {
    a[k] = i.lep;
    sum_lep += i.lep;
    if (!i.left_closed) {
      if (open_left == 0 || i.rep - i.lep < min_gap) min_gap = i.rep - i.lep;
      ++open_left;
    }
  }
  Rat budget = Rat(1) - sum_lep;
  if (open_left > 0) {
    Rat delta = min_gap / Rat(4 * open_left);
    Rat cap = budget / Rat(2 * open_left);
    if (cap < delta) delta = cap;
    for (const auto& [k, i] : d.entries)
      if (!i.left_closed) {
        a[k] += delta;
        budget -= delta;
      }
  }
  if (budget > 0) {
    for (const auto& [k, i] : d.entries) {
      if (!i.right_closed) continue;
      Rat room = i.rep - a[k];
      Rat pour = std::min(room, budget);
      a[k] += pour;
      budget -= pour;
      if (budget == 0) break;
    }
  }
  if (budget > 0) {
    Rat open_room = 0;
    for (const auto& [k, i] : d.entries)
      if (!i.right_closed) open_room += i.rep - a[k];
    for (const auto& [k, i] : d.entries)
      if (!i.right_closed) a[k] += (i.rep - a[k]) * budget / open_room;
  }
  return a;
}

/// Same endpoints, all closed.
template <typename K>
IntervalDist<K> close_intervals(const IntervalDist<K>& d) {
  IntervalDist<K> out = d;
  for (auto& [k, i] : out.entries) {
    i.left_closed = true;
    i.right_closed = true;
  }
  return out;
}

namespace detail {

/// Core of support_feasible over an arbitrary membership predicate.
template <typename K, typename InU>
bool support_feasible_pred(const IntervalDist<K>& d, InU&& in_u) {
  Rat sum_lep = 0, sum_rep = 0;
  std::vector<const ProbInterval*> inside;
  for (const auto& [k, i] : d.entries) {
    if (!in_u(k)) {
      if (!(i.left_closed && i.lep == 0)) return false;
    } else {
      sum_lep += i.lep;
      sum_rep += i.rep;
      inside.push_back(&i);
    }
  }
  if (sum_lep > 1 || sum_rep < 1) return false;
  if (sum_lep == 1)
    for (auto* i : inside)
      if (!i->left_closed) return false;
  if (sum_rep == 1)
    for (auto* i : inside)
      if (!i->right_closed) return false;
  return true;
}

template <typename K, typename InU, typename InV>
bool positive_mass_feasible_pred(const IntervalDist<K>& d, InU&& in_u, InV&& in_v) {
  if (!support_feasible_pred(d, in_u)) return false;
  Rat sum_lep_u = 0;
  for (const auto& [k, i] : d.entries)
    if (in_u(k)) sum_lep_u += i.lep;
  for (const auto& [k, i] : d.entries) {
    if (!in_u(k) || !in_v(k)) continue;
    if (i.rep > 0 && (sum_lep_u < 1 || i.lep > 0)) return true;
  }
  return false;
}

}  // namespace detail

/// True iff some assignment has support contained in U.
template <typename K>
bool support_feasible(const IntervalDist<K>& d, const std::set<K>& u) {
  return detail::support_feasible_pred(d, [&](const K& k) { return u.count(k) > 0; });
}

/// True iff some assignment has support in U and strictly positive mass on V∩U.
template <typename K>
bool positive_mass_feasible(const IntervalDist<K>& d, const std::set<K>& u,
                            const std::set<K>& v) {
  return detail::positive_mass_feasible_pred(
      d, [&](const K& k) { return u.count(k) > 0; }, [&](const K& k) { return v.count(k) > 0; });
}

}  // namespace cdpta
