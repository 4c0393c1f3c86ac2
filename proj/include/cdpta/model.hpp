#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "intervals.hpp"
#include "rational.hpp"

namespace cdpta {

enum class Rel { lt, le, ge, gt };

struct ConstraintAtom {
  Rel rel = Rel::le;
  unsigned long long bound = 0;
  friend bool operator==(const ConstraintAtom&, const ConstraintAtom&) = default;
};

/// Conjunction of atoms over the single clock x; empty means true.
struct ClockConstraint {
  std::vector<ConstraintAtom> atoms;
  friend bool operator==(const ClockConstraint&, const ClockConstraint&) = default;
};

/// Location invariant x <= bound, or x < bound when strict (then bound >= 1).
struct InvariantSpec {
  bool strict = false;
  unsigned long long bound = 0;
  friend bool operator==(const InvariantSpec&, const InvariantSpec&) = default;
};

/// v |-> c + d*v.
struct AffineExpr {
  Rat c{0};
  Rat d{0};
  Rat eval(const Rat& v) const { return c + d * v; }
  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;
};

struct Outcome {
  bool reset = false;
  std::string target;
  AffineExpr expr;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct ProbEdge {
  std::string id;
  std::string source;
  ClockConstraint guard;
  std::vector<Outcome> outcomes;
  /// True iff every outcome has zero slope.
  bool constant() const {
    for (const auto& o : outcomes)
      if (o.expr.d != 0) return false;
    return true;
  }
  friend bool operator==(const ProbEdge&, const ProbEdge&) = default;
};

struct Cdpta {
  std::map<std::string, InvariantSpec> locations;
  std::vector<ProbEdge> edges;  // kept sorted by id
  std::string initial;

  const ProbEdge* edge(const std::string& id) const {
    for (const auto& e : edges)
      if (e.id == id) return &e;
    return nullptr;
  }
  friend bool operator==(const Cdpta&, const Cdpta&) = default;
};

/// A bounded subinterval of the nonnegative reals.
struct ClockInterval {
  Rat lo{0};
  Rat hi{0};
  bool lo_open = false;
  bool hi_open = false;

  bool singleton() const { return lo == hi; }
  bool more_than_one_point() const { return lo < hi; }
  bool contains(const Rat& v) const {
    if (lo_open ? v <= lo : v < lo) return false;
    if (hi_open ? v >= hi : v > hi) return false;
    return true;
  }
  bool contains_closure(const Rat& v) const { return v >= lo && v <= hi; }
  friend bool operator==(const ClockInterval&, const ClockInterval&) = default;
};

inline std::string to_string(const ClockInterval& i) {
  std::string s;
  s += i.lo_open ? '(' : '[';
  s += rat_to_string(i.lo) + "," + rat_to_string(i.hi);
  s += i.hi_open ? ')' : ']';
  return s;
}

inline bool eval_constraint(const ClockConstraint& psi, const Rat& v) {
  for (const auto& a : psi.atoms) {
    Rat b(static_cast<long long>(a.bound));
    switch (a.rel) {
      case Rel::lt:
        if (!(v < b)) return false;
        break;
      case Rel::le:
        if (!(v <= b)) return false;
        break;
      case Rel::ge:
        if (!(v >= b)) return false;
        break;
      case Rel::gt:
        if (!(v > b)) return false;
        break;
    }
  }
  return true;
}

inline bool invariant_sat(const InvariantSpec& inv, const Rat& v) {
  Rat b(static_cast<long long>(inv.bound));
  return inv.strict ? v < b : v <= b;
}

inline ClockConstraint invariant_as_constraint(const InvariantSpec& inv) {
  return ClockConstraint{{ConstraintAtom{inv.strict ? Rel::lt : Rel::le, inv.bound}}};
}

namespace detail {

/// Intersects interval with one atom; returns false when it becomes empty.
inline bool restrict_interval(ClockInterval& i, const ConstraintAtom& a) {
  Rat b(static_cast<long long>(a.bound));
  switch (a.rel) {
    case Rel::lt:
      if (b < i.hi || (b == i.hi && !i.hi_open)) {
        i.hi = b;
        i.hi_open = true;
      }
      break;
    case Rel::le:
      if (b < i.hi) {
        i.hi = b;
        i.hi_open = false;
      }
      break;
    case Rel::ge:
      if (b > i.lo) {
        i.lo = b;
        i.lo_open = false;
      }
      break;
    case Rel::gt:
      if (b > i.lo || (b == i.lo && !i.lo_open)) {
        i.lo = b;
        i.lo_open = true;
      }
      break;
  }
  if (i.lo > i.hi) return false;
  if (i.lo == i.hi && (i.lo_open || i.hi_open)) return false;
  return true;
}

inline std::optional<ClockInterval> constraint_interval(const ClockConstraint& g,
                                                        const InvariantSpec& inv) {
  ClockInterval i{Rat(0), Rat(static_cast<long long>(inv.bound)), false, inv.strict};
  if (i.lo == i.hi && i.hi_open) return std::nullopt;
  for (const auto& a : g.atoms)
    if (!restrict_interval(i, a)) return std::nullopt;
  return i;
}

}  // namespace detail

/// The set {v >= 0 | v ⊨ guard ∧ inv(source)}; nullopt when empty.
inline std::optional<ClockInterval> enabled_interval(const ProbEdge& edge, const Cdpta& model) {
  auto it = model.locations.find(edge.source);
  if (it == model.locations.end())
    throw Error("PRE_VIOLATION", "edge " + edge.id + " has undeclared source " + edge.source);
  return detail::constraint_interval(edge.guard, it->second);
}

/// Evaluates the edge's distribution template for one outcome, exactly.
inline Rat template_eval(const Cdpta& model, const ProbEdge& edge, const Outcome& outcome,
                         const Rat& v) {
  auto iv = enabled_interval(edge, model);
  if (!iv || !iv->contains_closure(v))
    throw Error("OUT_OF_DOMAIN", "valuation " + rat_to_string(v) +
                                     " outside the closure of the enabled interval of " + edge.id);
  return outcome.expr.eval(v);
}

namespace detail {

/// Affine expression strictly positive on the whole (sub)interval: value > 0
/// at every closed endpoint, and at an open endpoint either > 0 or == 0 with
/// the slope pointing inside.
inline bool strictly_positive_on(const AffineExpr& e, const ClockInterval& i) {
  Rat at_lo = e.eval(i.lo), at_hi = e.eval(i.hi);
  if (i.singleton()) return at_lo > 0;
  bool lo_ok = i.lo_open ? (at_lo > 0 || (at_lo == 0 && e.d > 0)) : at_lo > 0;
  bool hi_ok = i.hi_open ? (at_hi > 0 || (at_hi == 0 && e.d < 0)) : at_hi > 0;
  return lo_ok && hi_ok;
}

/// The subset of `i` where the affine expression is strictly positive.
inline std::optional<ClockInterval> positive_subset(const AffineExpr& e, const ClockInterval& i) {
  if (e.d == 0) {
    if (e.c > 0) return i;
    return std::nullopt;
  }
  ClockInterval r = i;
  Rat root = -e.c / e.d;
  if (e.d > 0) {
    // positive for v > root
    if (root > r.lo || (root == r.lo && !r.lo_open)) {
      r.lo = root;
      r.lo_open = true;
    }
  } else {
    if (root < r.hi || (root == r.hi && !r.hi_open)) {
      r.hi = root;
      r.hi_open = true;
    }
  }
  if (r.lo > r.hi) return std::nullopt;
  if (r.lo == r.hi && (r.lo_open || r.hi_open)) return std::nullopt;
  return r;
}

inline std::optional<ClockInterval> intersect(const ClockInterval& a, const ClockInterval& b) {
  ClockInterval r = a;
  if (b.lo > r.lo || (b.lo == r.lo && b.lo_open)) {
    r.lo = b.lo;
    r.lo_open = b.lo_open;
  }
  if (b.hi < r.hi || (b.hi == r.hi && b.hi_open)) {
    r.hi = b.hi;
    r.hi_open = b.hi_open;
  }
  if (r.lo > r.hi) return std::nullopt;
  if (r.lo == r.hi && (r.lo_open || r.hi_open)) return std::nullopt;
  return r;
}

}  // namespace detail

/// Arc of the initialisation graph: some non-reset outcome of `from` towards
/// source(to) is strictly positive on all of I_from, and the enabled intervals
/// overlap in more than one valuation.
inline bool initialisation_arc(const Cdpta& model, const ProbEdge& from, const ProbEdge& to) {
  auto i_from = enabled_interval(from, model);
  auto i_to = enabled_interval(to, model);
  if (!i_from || !i_to) return false;
  auto overlap = detail::intersect(*i_from, *i_to);
  if (!overlap || !overlap->more_than_one_point()) return false;
  for (const auto& o : from.outcomes)
    if (!o.reset && o.target == to.source && detail::strictly_positive_on(o.expr, *i_from))
      return true;
  return false;
}

/// OK (nullopt) or a violating fragment: a path of length >= 1 in the arc
/// graph from a non-constant edge to a non-constant edge.
inline std::optional<std::vector<std::string>> check_initialised(const Cdpta& model) {
  const auto n = model.edges.size();
  std::vector<std::vector<std::size_t>> arcs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (initialisation_arc(model, model.edges[i], model.edges[j])) arcs[i].push_back(j);
  for (std::size_t start = 0; start < n; ++start) {
    if (model.edges[start].constant()) continue;
    std::vector<long long> parent(n, -1);
    std::vector<std::size_t> queue;
    for (std::size_t j : arcs[start])
      if (parent[j] == -1) {
        parent[j] = static_cast<long long>(start);
        queue.push_back(j);
      }
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      std::size_t u = queue[qi];
      if (!model.edges[u].constant()) {
        std::vector<std::string> rev{model.edges[u].id};
        std::size_t w = u;
        do {
          w = static_cast<std::size_t>(parent[w]);
          rev.push_back(model.edges[w].id);
        } while (w != start);
        std::reverse(rev.begin(), rev.end());
        return rev;
      }
      for (std::size_t j : arcs[u])
        if (parent[j] == -1) {
          parent[j] = static_cast<long long>(u);
          queue.push_back(j);
        }
    }
  }
  return std::nullopt;
}

struct Violation {
  std::string code;
  std::string ref;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

/// Checks the structural assumptions: invariant shape, edge availability at
/// the invariant bound, target invariants on non-reset outcomes, non-negative
/// and one-summing templates, non-empty enabled intervals, initialisation.
inline ValidationReport validate(const Cdpta& model) {
  ValidationReport rep;
  auto add = [&](std::string code, std::string ref, std::string msg) {
    rep.ok = false;
    rep.violations.push_back({std::move(code), std::move(ref), std::move(msg)});
  };
  if (model.locations.find(model.initial) == model.locations.end())
    throw Error("PRE_VIOLATION", "initial location " + model.initial + " is not declared");
  for (const auto& e : model.edges) {
    if (model.locations.find(e.source) == model.locations.end())
      throw Error("PRE_VIOLATION", "edge " + e.id + " has undeclared source " + e.source);
    if (e.outcomes.empty())
      throw Error("PRE_VIOLATION", "edge " + e.id + " has no outcomes");
    std::set<std::pair<bool, std::string>> seen;
    for (const auto& o : e.outcomes) {
      if (model.locations.find(o.target) == model.locations.end())
        throw Error("PRE_VIOLATION", "edge " + e.id + " has undeclared target " + o.target);
      if (!seen.insert({o.reset, o.target}).second)
        throw Error("PRE_VIOLATION", "edge " + e.id + " repeats outcome to " + o.target);
    }
  }

  // (a) invariant shape
  for (const auto& [l, inv] : model.locations)
    if (inv.strict && inv.bound < 1)
      add("INV_SHAPE", l, "strict invariant needs bound >= 1");

  // (b) some edge must be enabled at (or arbitrarily close below) the bound
  for (const auto& [l, inv] : model.locations) {
    bool found = false;
    for (const auto& e : model.edges) {
      if (e.source != l) continue;
      if (!inv.strict) {
        if (eval_constraint(e.guard, Rat(static_cast<long long>(inv.bound)))) found = true;
      } else {
        // (bound-1, bound) must lie inside sat(guard)
        InvariantSpec unbounded{false, inv.bound};
        auto g = detail::constraint_interval(e.guard, unbounded);
        if (g && g->lo <= Rat(static_cast<long long>(inv.bound) - 1) &&
            g->hi >= Rat(static_cast<long long>(inv.bound)))
          found = true;
      }
      if (found) break;
    }
    if (!found) add("NO_ENABLED_EDGE", l, "no probabilistic edge is enabled at the invariant bound");
  }

  for (const auto& e : model.edges) {
    auto iv = enabled_interval(e, model);
    if (!iv) {
      add("EMPTY_GUARD", e.id, "guard and source invariant are unsatisfiable");
      continue;
    }
    // (d) non-negative on the closure: endpoints suffice for affine maps
    for (const auto& o : e.outcomes)
      if (o.expr.eval(iv->lo) < 0 || o.expr.eval(iv->hi) < 0)
        add("AFFINE_NEGATIVE", e.id,
            "outcome to " + o.target + " is negative on the enabled interval");
    // (e) sums: canonical when more than one point, pointwise otherwise
    Rat sum_c = 0, sum_d = 0;
    for (const auto& o : e.outcomes) {
      sum_c += o.expr.c;
      sum_d += o.expr.d;
    }
    if (iv->more_than_one_point()) {
      if (sum_c != 1 || sum_d != 0)
        add("AFFINE_SUM", e.id, "outcome templates must sum to the constant 1");
    } else {
      if (sum_c + sum_d * iv->lo != 1)
        add("AFFINE_SUM", e.id, "outcome templates must sum to 1 at " + rat_to_string(iv->lo));
    }
    // (c) positive non-reset mass must satisfy the target invariant
    for (const auto& o : e.outcomes) {
      if (o.reset) continue;
      auto pos = detail::positive_subset(o.expr, *iv);
      if (!pos) continue;
      const auto& tinv = model.locations.at(o.target);
      Rat b(static_cast<long long>(tinv.bound));
      bool inside = pos->hi < b || (pos->hi == b && (!tinv.strict || pos->hi_open));
      if (!inside)
        add("TARGET_INVARIANT", e.id,
            "outcome to " + o.target + " can exceed the target invariant");
    }
  }

  // (g) initialisation, only meaningful once the template checks pass
  if (rep.ok) {
    if (auto witness = check_initialised(model)) {
      std::string frag;
      for (const auto& id : *witness) frag += (frag.empty() ? "" : " -> ") + id;
      add("NOT_INITIALISED", frag,
          "two non-constant edges are linked without the clock passing a natural value");
    }
  }
  return rep;
}

using CdptaState = std::pair<std::string, Rat>;  // (location, valuation)

/// One transition of the semantics: from (l,v), delay to v̂ and take the edge.
/// Reset outcomes land on valuation 0; masses to the same state are summed
/// and zero-mass entries are omitted.
inline std::map<CdptaState, Rat> transition_distribution(const Cdpta& model,
                                                         const CdptaState& state, const Rat& vhat,
                                                         const ProbEdge& edge) {
  const auto& [loc, v] = state;
  auto lit = model.locations.find(loc);
  if (lit == model.locations.end() || !invariant_sat(lit->second, v))
    throw Error("PRE_VIOLATION", "state valuation violates the invariant of " + loc);
  if (edge.source != loc)
    throw Error("PRE_VIOLATION", "edge " + edge.id + " does not leave " + loc);
  if (vhat < v) throw Error("PRE_VIOLATION", "time cannot decrease");
  if (!eval_constraint(edge.guard, vhat) || !invariant_sat(lit->second, vhat))
    throw Error("PRE_VIOLATION", "delayed valuation does not satisfy guard and invariant");
  std::map<CdptaState, Rat> out;
  for (const auto& o : edge.outcomes) {
    Rat p = o.expr.eval(vhat);
    if (p == 0) continue;
    Rat target_v = o.reset ? Rat(0) : vhat;
    out[{o.target, target_v}] += p;
  }
  return out;
}

}  // namespace cdpta
