#include <catch2/catch_amalgamated.hpp>

#include <cdpta/oracle.hpp>
#include <cdpta/solve.hpp>

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace cdpta;
using testsupport::fig1;

TEST_CASE("discretize puts states and actions on the grid") {
  auto m = fig1();
  FiniteMdp mdp = discretize(m, 1);
  CHECK(mdp.denom == 2);
  // valuations 0, 1/2, 1, 3/2, ... below each invariant bound
  CHECK(mdp.count[mdp.loc_index("W")] == 6);   // x < 3
  CHECK(mdp.count[mdp.loc_index("S")] == 7);   // x <= 3
  CHECK(mdp.count[mdp.loc_index("T")] == 11);  // x <= 5
  CHECK(mdp.count[mdp.loc_index("F")] == 10);  // x < 5
  CHECK(mdp.total_states <= static_cast<long long>(m.locations.size()) * (5 * 2 + 1));

  auto row = oracle_row(mdp, m, {"W", rat(0)}, rat(3, 2), "pW");
  auto expected = transition_distribution(m, {"W", rat(0)}, rat(3, 2), *m.edge("pW"));
  CHECK(row == expected);
  CHECK_THROWS_AS(oracle_row(mdp, m, {"W", rat(0)}, rat(1), "pW"), Error);  // guard is strict
  CHECK_THROWS_AS(discretize(m, 0), Error);
}

TEST_CASE("grid rows are exact distributions") {
  auto m = fig1();
  FiniteMdp mdp = discretize(m, 3);
  for (const auto& g : mdp.grids)
    for (const auto& row : g.rows) {
      Rat sum = 0;
      for (const auto& [t, p] : row) {
        CHECK(p > 0);
        sum += p;
      }
      CHECK(sum == 1);
    }
}

TEST_CASE("mdp_reach approaches the solver value from below") {
  auto m = fig1();
  FiniteMdp mdp = discretize(m, 6);
  auto res = mdp_reach(mdp, {"S"}, Mode::max);
  REQUIRE(res.converged);
  double v = oracle_value_at(mdp, res, "W", rat(0));
  CHECK(std::abs(v - 0.8) < 0.05);
  CHECK(v <= 0.8 + 1e-9);
}

TEST_CASE("mdp_reach trivial cases") {
  auto m = fig1();
  FiniteMdp mdp = discretize(m, 2);
  auto res = mdp_reach(mdp, {"T"}, Mode::max);
  CHECK(oracle_value_at(mdp, res, "T", rat(0)) == 1.0);  // absorbing target
  auto none = mdp_reach(mdp, {"W"}, Mode::max);
  CHECK(oracle_value_at(mdp, none, "T", rat(0)) == 0.0);  // no path out of T
}

TEST_CASE("oracle values are monotone in the grid resolution") {
  auto m = fig1();
  Query q{true, Mode::max, QualMode::exists1, std::nullopt};
  double solver = solve_query(m, {"S"}, q).value;
  double prev = 0;
  for (int k = 3; k <= 5; ++k) {
    FiniteMdp mdp = discretize(m, k);
    double v = oracle_value_at(mdp, mdp_reach(mdp, {"S"}, Mode::max), "W", rat(0));
    CHECK(v >= prev - 1e-12);
    CHECK(v <= solver + 1e-9);
    prev = v;
  }
  // minimum values approach from above
  double solver_min = [&] {
    Query qm{true, Mode::min, QualMode::exists1, std::nullopt};
    return solve_query(m, {"T"}, qm).value;
  }();
  double prev_min = 1.0;
  for (int k = 3; k <= 5; ++k) {
    FiniteMdp mdp = discretize(m, k);
    double v = oracle_value_at(mdp, mdp_reach(mdp, {"T"}, Mode::min), "W", rat(0));
    CHECK(v <= prev_min + 1e-12);
    CHECK(v >= solver_min - 1e-9);
    prev_min = v;
  }
}

namespace {

TableScheduler two_step_scheduler() {
  TableScheduler s;
  s.kind = TableScheduler::Kind::cdpta;
  s.b_minimal = true;
  s.cdpta_table["(W,[0,0])"] = {{{rat(3, 2), "pW"}, rat(1)}};
  s.cdpta_table["(W,[0,0]) ((1,3),pW) (F,(1,3))"] = {{{rat(9, 2), "pF"}, rat(1)}};
  s.cdpta_table["(W,[0,0]) ((1,3),pW) (S,(1,3))"] = {{{rat(2), "pS"}, rat(1)}};
  s.cdpta_table["(W,[0,0]) ((1,3),pW) (T,(1,3))"] = {{{rat(2), "pT"}, rat(1)}};
  return s;
}

}  // namespace

TEST_CASE("bounded_reach_exact two-step value") {
  auto m = fig1();
  TableScheduler s = two_step_scheduler();
  // independent recursion over the templates: P(T within 2 steps)
  Rat to_t = (rat(11) - rat(3) * rat(3, 2)) / 16;        // first step straight to T
  Rat to_f = to_t;                                       // same expression towards F
  Rat f_to_t = (rat(6) - rat(9, 2)) / 2;                 // second step from (F, 9/2)
  Rat expected = to_t + to_f * f_to_t;
  CHECK(expected == rat(91, 128));
  CHECK(bounded_reach_exact(m, s, 2, {"T"}) == expected);
  CHECK(bounded_reach_exact(m, s, 0, {"T"}) == 0);
  CHECK(bounded_reach_exact(m, s, 3, {"W"}) == 1);  // the initial location is the target

  TableScheduler missing = s;
  missing.cdpta_table.erase("(W,[0,0]) ((1,3),pW) (S,(1,3))");
  CHECK_THROWS_MATCHES(bounded_reach_exact(m, missing, 2, {"T"}), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == "MISSING_TABLE_ENTRY"; }));
}

TEST_CASE("mimic_scheduler encodes valuations as endpoint weights") {
  auto m = fig1();
  Imdp imdp = build_imdp(m);
  TableScheduler s = two_step_scheduler();
  TableScheduler mimic = mimic_scheduler(s, imdp);
  CHECK(mimic.kind == TableScheduler::Kind::imdp);

  const auto& first = mimic.imdp_table.at("(W,[0,0])");
  REQUIRE(first.size() == 1);
  CHECK(first[0].first.edge == "pW");
  CHECK(first[0].first.w_le == rat(3, 4));
  CHECK(first[0].first.w_re == rat(1, 4));

  const auto& second = mimic.imdp_table.at("(W,[0,0]) ((1,3),pW) (F,(1,3))");
  CHECK(second[0].first.w_le == rat(1, 2));
  CHECK(second[0].first.w_re == rat(1, 2));

  TableScheduler not_minimal = s;
  not_minimal.b_minimal = false;
  CHECK_THROWS_MATCHES(mimic_scheduler(not_minimal, imdp), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == "NOT_B_MINIMAL"; }));
}

TEST_CASE("scheduler mimicry preserves bounded reachability exactly") {
  auto m = fig1();
  Imdp imdp = build_imdp(m);
  TableScheduler s = two_step_scheduler();
  TableScheduler mimic = mimic_scheduler(s, imdp);
  for (const auto& targets : {std::set<std::string>{"T"}, {"S"}, {"S", "T"}}) {
    CHECK(bounded_reach_exact(m, s, 2, targets) == bounded_reach_exact(imdp, mimic, 2, targets));
  }

  testsupport::Rng rng(99);
  for (int it = 0; it < 10; ++it) {
    int horizon = 1 + it % 4;
    TableScheduler random_s = testsupport::random_b_minimal_scheduler(rng, m, horizon);
    TableScheduler random_m = mimic_scheduler(random_s, imdp);
    std::set<std::string> targets = it % 2 == 0 ? std::set<std::string>{"T"}
                                                : std::set<std::string>{"S", "T"};
    Rat lhs = bounded_reach_exact(m, random_s, horizon, targets);
    Rat rhs = bounded_reach_exact(imdp, random_m, horizon, targets);
    CHECK(lhs == rhs);
  }

  // the retry loop exercises point-interval moves and zero-delay resets
  auto loopy = testsupport::load_model("loopy.cdpta");
  Imdp loopy_imdp = build_imdp(loopy);
  for (int it = 0; it < 10; ++it) {
    int horizon = 1 + it % 3;
    TableScheduler sched = testsupport::random_b_minimal_scheduler(rng, loopy, horizon);
    TableScheduler mim = mimic_scheduler(sched, loopy_imdp);
    CHECK(bounded_reach_exact(loopy, sched, horizon, {"b"}) ==
          bounded_reach_exact(loopy_imdp, mim, horizon, {"b"}));
  }
}

TEST_CASE("scheduler text round-trips") {
  auto m = fig1();
  TableScheduler s = two_step_scheduler();
  TableScheduler back = scheduler_from_text(scheduler_to_text(s));
  CHECK(back.kind == s.kind);
  CHECK(back.b_minimal == s.b_minimal);
  REQUIRE(back.cdpta_table.size() == s.cdpta_table.size());
  CHECK(bounded_reach_exact(m, back, 2, {"T"}) == rat(91, 128));

  Imdp imdp = build_imdp(m);
  TableScheduler mimic = mimic_scheduler(s, imdp);
  TableScheduler mback = scheduler_from_text(scheduler_to_text(mimic));
  CHECK(bounded_reach_exact(imdp, mback, 2, {"T"}) == rat(91, 128));
  CHECK_THROWS_AS(scheduler_from_text("nonsense"), Error);
}
