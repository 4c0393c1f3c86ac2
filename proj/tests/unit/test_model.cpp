#include <catch2/catch_amalgamated.hpp>

#include <cdpta/model.hpp>

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace cdpta;
using testsupport::fig1;
using testsupport::notinit;

namespace {

const ProbEdge& edge_of(const Cdpta& m, const std::string& id) {
  const ProbEdge* e = m.edge(id);
  REQUIRE(e != nullptr);
  return *e;
}

const Outcome& outcome_to(const ProbEdge& e, const std::string& target, bool reset = false) {
  for (const auto& o : e.outcomes)
    if (o.target == target && o.reset == reset) return o;
  FAIL("no outcome to " + target);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("eval_constraint") {
  ClockConstraint g{{{Rel::gt, 1}, {Rel::lt, 3}}};
  CHECK(eval_constraint(g, rat(2)));
  CHECK(!eval_constraint(g, rat(3)));
  ClockConstraint f_guard{{{Rel::gt, 4}, {Rel::lt, 5}}};
  CHECK(eval_constraint(f_guard, rat(9, 2)));
  CHECK(eval_constraint(ClockConstraint{}, rat(0)));
}

TEST_CASE("enabled_interval") {
  auto m = fig1();
  auto iw = enabled_interval(edge_of(m, "pW"), m);
  REQUIRE(iw);
  CHECK(*iw == ClockInterval{rat(1), rat(3), true, true});

  Cdpta tiny;
  tiny.locations["a"] = InvariantSpec{false, 2};
  tiny.initial = "a";
  ProbEdge e{"e", "a", ClockConstraint{{{Rel::le, 2}}}, {{false, "a", {rat(1), rat(0)}}}};
  tiny.edges.push_back(e);
  auto full = enabled_interval(tiny.edges[0], tiny);
  REQUIRE(full);
  CHECK(*full == ClockInterval{rat(0), rat(2), false, false});

  Cdpta empty_guard;
  empty_guard.locations["a"] = InvariantSpec{true, 5};
  empty_guard.initial = "a";
  empty_guard.edges.push_back(
      {"e", "a", ClockConstraint{{{Rel::gt, 5}}}, {{false, "a", {rat(1), rat(0)}}}});
  CHECK(!enabled_interval(empty_guard.edges[0], empty_guard));
}

TEST_CASE("template_eval") {
  auto m = fig1();
  const auto& pw = edge_of(m, "pW");
  CHECK(template_eval(m, pw, outcome_to(pw, "S"), rat(3, 2)) == rat(3, 16));
  CHECK(template_eval(m, pw, outcome_to(pw, "S"), rat(1)) == rat(0));
  const auto& pf = edge_of(m, "pF");
  // (x-4)/2 at 9/2, cross-checked by direct rational evaluation
  Rat by_hand = (rat(9, 2) - rat(4)) / rat(2);
  CHECK(template_eval(m, pf, outcome_to(pf, "W", true), rat(9, 2)) == by_hand);
  CHECK(by_hand == rat(1, 4));
  CHECK_THROWS_MATCHES(template_eval(m, pw, outcome_to(pw, "S"), rat(7, 2)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == "OUT_OF_DOMAIN"; }));
}

TEST_CASE("validate accepts fig1") {
  auto rep = validate(fig1());
  std::string diagnostics;
  for (const auto& v : rep.violations) diagnostics += v.code + " at " + v.ref + "; ";
  CAPTURE(diagnostics);
  CHECK(rep.ok);
}

TEST_CASE("validate flags a broken sum") {
  auto m = fig1();
  for (auto& e : m.edges)
    if (e.id == "pW")
      for (auto& o : e.outcomes)
        if (o.target == "S") o.expr = AffineExpr{rat(-3, 4), rat(3, 4)};
  auto rep = validate(m);
  REQUIRE(!rep.ok);
  bool found = false;
  for (const auto& v : rep.violations) found |= v.code == "AFFINE_SUM" && v.ref == "pW";
  CHECK(found);
}

namespace {

bool has_code(const ValidationReport& rep, const std::string& code, const std::string& ref) {
  for (const auto& v : rep.violations)
    if (v.code == code && v.ref == ref) return true;
  return false;
}

Cdpta skeleton(std::initializer_list<std::pair<std::string, InvariantSpec>> locs) {
  Cdpta m;
  for (const auto& [name, inv] : locs) m.locations[name] = inv;
  m.initial = m.locations.begin()->first;
  return m;
}

}  // namespace

TEST_CASE("validate covers every code") {
  SECTION("INV_SHAPE: strict invariant with bound zero") {
    auto m = skeleton({{"a", InvariantSpec{true, 0}}});
    m.edges.push_back({"e", "a", {}, {{false, "a", {rat(1), rat(0)}}}});
    CHECK(has_code(validate(m), "INV_SHAPE", "a"));
  }
  SECTION("NO_ENABLED_EDGE: guard unreachable at the bound") {
    auto m = skeleton({{"a", InvariantSpec{false, 5}}});
    m.edges.push_back(
        {"e", "a", ClockConstraint{{{Rel::le, 2}}}, {{false, "a", {rat(1), rat(0)}}}});
    CHECK(has_code(validate(m), "NO_ENABLED_EDGE", "a"));
    auto s = skeleton({{"a", InvariantSpec{true, 5}}});
    s.edges.push_back(
        {"e", "a", ClockConstraint{{{Rel::lt, 4}}}, {{false, "a", {rat(1), rat(0)}}}});
    CHECK(has_code(validate(s), "NO_ENABLED_EDGE", "a"));
  }
  SECTION("TARGET_INVARIANT: non-reset outcome escapes the target bound") {
    auto m = skeleton({{"a", InvariantSpec{false, 3}}, {"b", InvariantSpec{false, 2}}});
    m.edges.push_back({"e", "a", {}, {{false, "b", {rat(1), rat(0)}}}});
    m.edges.push_back({"f", "b", {}, {{false, "b", {rat(1), rat(0)}}}});
    CHECK(has_code(validate(m), "TARGET_INVARIANT", "e"));
  }
  SECTION("AFFINE_NEGATIVE: negative value at a closure endpoint") {
    auto m = skeleton({{"a", InvariantSpec{false, 2}}});
    m.edges.push_back({"e", "a", {},
                       {{false, "a", {rat(-1), rat(1)}}, {true, "a", {rat(2), rat(-1)}}}});
    auto rep = validate(m);
    CHECK(has_code(rep, "AFFINE_NEGATIVE", "e"));
    CHECK(!has_code(rep, "AFFINE_SUM", "e"));
  }
  SECTION("AFFINE_SUM on a point interval uses the single valuation") {
    auto m = skeleton({{"a", InvariantSpec{false, 2}}});
    // enabled interval is the point [2,2]; the slopes need not cancel there
    m.edges.push_back({"e", "a", ClockConstraint{{{Rel::ge, 2}}},
                       {{true, "a", {rat(-1, 2), rat(1, 2)}}, {false, "a", {rat(1, 2), rat(0)}}}});
    CHECK(validate(m).ok);
    m.edges[0].outcomes[1].expr.c = rat(1, 4);
    CHECK(has_code(validate(m), "AFFINE_SUM", "e"));
  }
  SECTION("EMPTY_GUARD: contradictory atoms") {
    auto m = skeleton({{"a", InvariantSpec{false, 5}}});
    m.edges.push_back({"e", "a", ClockConstraint{{{Rel::le, 5}}}, {{false, "a", {rat(1), rat(0)}}}});
    m.edges.push_back({"bad", "a", ClockConstraint{{{Rel::gt, 3}, {Rel::lt, 2}}},
                       {{false, "a", {rat(1), rat(0)}}}});
    CHECK(has_code(validate(m), "EMPTY_GUARD", "bad"));
  }
  SECTION("structural breakage throws instead of reporting") {
    auto m = skeleton({{"a", InvariantSpec{false, 1}}});
    m.edges.push_back({"e", "ghost", {}, {{false, "a", {rat(1), rat(0)}}}});
    CHECK_THROWS_AS(validate(m), Error);
    auto dup = skeleton({{"a", InvariantSpec{false, 1}}});
    dup.edges.push_back(
        {"e", "a", {}, {{false, "a", {rat(1, 2), rat(0)}}, {false, "a", {rat(1, 2), rat(0)}}}});
    CHECK_THROWS_AS(validate(dup), Error);
  }
}

TEST_CASE("validate flags the non-initialised model") {
  auto rep = validate(notinit());
  REQUIRE(!rep.ok);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].code == "NOT_INITIALISED");
}

TEST_CASE("check_initialised") {
  CHECK(!check_initialised(fig1()));
  auto witness = check_initialised(notinit());
  REQUIRE(witness);
  CHECK(*witness == std::vector<std::string>{"pA", "pB"});
  // every edge constant: no non-constant endpoints exist
  auto constant = testsupport::bound_family_model(3, 2, 4);
  CHECK(!check_initialised(constant));
}

TEST_CASE("transition_distribution on fig1") {
  auto m = fig1();
  auto d1 = transition_distribution(m, {"W", rat(0)}, rat(3, 2), edge_of(m, "pW"));
  REQUIRE(d1.size() == 3);
  CHECK(d1.at({"S", rat(3, 2)}) == rat(3, 16));
  CHECK(d1.at({"T", rat(3, 2)}) == rat(13, 32));
  CHECK(d1.at({"F", rat(3, 2)}) == rat(13, 32));

  auto d2 = transition_distribution(m, {"F", rat(9, 2)}, rat(9, 2), edge_of(m, "pF"));
  REQUIRE(d2.size() == 2);
  CHECK(d2.at({"W", rat(0)}) == rat(1, 4));
  CHECK(d2.at({"T", rat(9, 2)}) == rat(3, 4));

  CHECK_THROWS_AS(transition_distribution(m, {"W", rat(0)}, rat(1, 2), edge_of(m, "pW")), Error);
  CHECK_THROWS_AS(transition_distribution(m, {"W", rat(2)}, rat(3, 2), edge_of(m, "pW")), Error);
}

TEST_CASE("a zero-delay move merges reset and non-reset mass") {
  Cdpta m;
  m.locations["a"] = InvariantSpec{false, 1};
  m.locations["b"] = InvariantSpec{false, 1};
  m.initial = "a";
  ProbEdge e{"e",
             "a",
             ClockConstraint{{{Rel::le, 0}}},
             {{true, "b", {rat(1, 2), rat(0)}}, {false, "b", {rat(1, 2), rat(0)}}}};
  m.edges.push_back(e);
  auto d = transition_distribution(m, {"a", rat(0)}, rat(0), m.edges[0]);
  REQUIRE(d.size() == 1);
  CHECK(d.at({"b", rat(0)}) == rat(1));
}

TEST_CASE("validated templates sum to one and stay within [0,1]") {
  auto m = fig1();
  testsupport::Rng rng(11);
  for (const auto& e : m.edges) {
    auto iv = enabled_interval(e, m);
    REQUIRE(iv);
    for (int i = 0; i < 50; ++i) {
      Rat v = testsupport::random_rat(rng, 32, iv->lo, iv->hi);
      Rat sum = 0;
      for (const auto& o : e.outcomes) {
        Rat p = o.expr.eval(v);
        CHECK(p >= 0);
        CHECK(p <= 1);
        sum += p;
      }
      CHECK(sum == 1);
    }
  }
}

TEST_CASE("non-constant outcomes are strictly positive inside the enabled interval") {
  auto m = fig1();
  testsupport::Rng rng(12);
  for (const auto& e : m.edges) {
    if (e.constant()) continue;
    auto iv = enabled_interval(e, m);
    REQUIRE(iv);
    for (const auto& o : e.outcomes) {
      if (o.expr.d == 0) continue;
      for (int i = 0; i < 50; ++i) {
        Rat v = testsupport::random_interior(rng, 64, iv->lo, iv->hi);
        CHECK(o.expr.eval(v) > 0);
      }
    }
  }
}

TEST_CASE("transition_distribution sums to one and lands inside invariants") {
  auto m = fig1();
  testsupport::Rng rng(13);
  for (const auto& e : m.edges) {
    auto iv = enabled_interval(e, m);
    REQUIRE(iv);
    for (int i = 0; i < 30; ++i) {
      Rat vhat = iv->singleton() ? iv->lo : testsupport::random_interior(rng, 32, iv->lo, iv->hi);
      auto d = transition_distribution(m, {e.source, rat(0)}, vhat, e);
      Rat sum = 0;
      for (const auto& [succ, p] : d) {
        CHECK(p > 0);
        sum += p;
        CHECK(invariant_sat(m.locations.at(succ.first), succ.second));
      }
      CHECK(sum == 1);
    }
  }
}

namespace {

/// Independent affine positivity test: nonnegative at both closure endpoints,
/// positive at the midpoint, and positive at every closed endpoint.
bool positive_on_all(const AffineExpr& e, const ClockInterval& iv) {
  Rat lo = e.eval(iv.lo), hi = e.eval(iv.hi), mid = e.eval((iv.lo + iv.hi) / 2);
  if (iv.singleton()) return lo > 0;
  if (lo < 0 || hi < 0 || mid <= 0) return false;
  if (!iv.lo_open && lo <= 0) return false;
  if (!iv.hi_open && hi <= 0) return false;
  return true;
}

/// Brute-force search for a violating fragment of at most max_len edges,
/// straight from the definition.
bool has_violating_fragment(const Cdpta& m, std::size_t max_len) {
  std::vector<std::vector<const ProbEdge*>> stack;
  for (const auto& e : m.edges) stack.push_back({&e});
  while (!stack.empty()) {
    auto frag = stack.back();
    stack.pop_back();
    if (frag.size() >= 2 && !frag.front()->constant() && !frag.back()->constant()) return true;
    if (frag.size() >= max_len) continue;
    const ProbEdge* last = frag.back();
    auto i_last = enabled_interval(*last, m);
    if (!i_last) continue;
    for (const auto& next : m.edges) {
      auto i_next = enabled_interval(next, m);
      if (!i_next) continue;
      // non-reset outcome positive on all of I_last, overlap of more than one point
      bool connects = false;
      for (const auto& o : last->outcomes)
        if (!o.reset && o.target == next.source && positive_on_all(o.expr, *i_last))
          connects = true;
      if (!connects) continue;
      Rat lo = std::max(i_last->lo, i_next->lo), hi = std::min(i_last->hi, i_next->hi);
      if (!(lo < hi)) continue;
      auto extended = frag;
      extended.push_back(&next);
      stack.push_back(extended);
    }
  }
  return false;
}

}  // namespace

TEST_CASE("initialisation witnesses re-verify and OK models have no short fragment") {
  auto w = check_initialised(notinit());
  REQUIRE(w);
  auto m = notinit();
  // re-verify the witness against the definition: consecutive arcs, ends non-constant
  REQUIRE(w->size() >= 2);
  CHECK(!m.edge(w->front())->constant());
  CHECK(!m.edge(w->back())->constant());
  for (std::size_t i = 0; i + 1 < w->size(); ++i)
    CHECK(initialisation_arc(m, *m.edge((*w)[i]), *m.edge((*w)[i + 1])));
  CHECK(has_violating_fragment(m, 4));
  CHECK(!has_violating_fragment(fig1(), 4));
  CHECK(!has_violating_fragment(testsupport::bound_family_model(4, 2, 3), 4));
  CHECK(!has_violating_fragment(testsupport::load_model("loopy.cdpta"), 4));
  CHECK(!check_initialised(testsupport::load_model("loopy.cdpta")));
}
