#include <catch2/catch_amalgamated.hpp>

#include <cdpta/dsl.hpp>

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace cdpta;

TEST_CASE("fig1 parses to the expected structure") {
  auto r = parse(testsupport::read_fixture("fig1.cdpta"));
  REQUIRE(r.errors.empty());
  REQUIRE(r.model);
  const Cdpta& m = *r.model;
  CHECK(m.locations.size() == 4);
  CHECK(m.edges.size() == 4);  // two main edges plus the absorbing self-loops
  CHECK(m.initial == "W");
  CHECK(m.locations.at("W") == InvariantSpec{true, 3});
  CHECK(m.locations.at("T") == InvariantSpec{false, 5});
  const ProbEdge* pw = m.edge("pW");
  REQUIRE(pw);
  REQUIRE(pw->outcomes.size() == 3);
  CHECK(pw->outcomes[0].expr == AffineExpr{rat(-3, 8), rat(3, 8)});
  CHECK(pw->outcomes[1].expr == AffineExpr{rat(11, 16), rat(-3, 16)});
  const ProbEdge* pf = m.edge("pF");
  REQUIRE(pf);
  CHECK(pf->outcomes[0].reset);
  CHECK(pf->outcomes[0].expr == AffineExpr{rat(-2), rat(1, 2)});
}

TEST_CASE("linear expressions normalize to affine pairs") {
  auto parse_expr = [](const std::string& body) {
    std::string text = "location a { invariant x <= 9; initial; }\n"
                       "edge e from a guard true { to a prob " +
                       body + "; }";
    return parse(text);
  };
  auto ok = parse_expr("(3*x - 3)/8");
  REQUIRE(ok.model);
  CHECK(ok.model->edges[0].outcomes[0].expr == AffineExpr{rat(-3, 8), rat(3, 8)});

  auto nested = parse_expr("1/2 - (x - 4)/2 + x*3/6");
  REQUIRE(nested.model);
  CHECK(nested.model->edges[0].outcomes[0].expr == AffineExpr{rat(5, 2), rat(0)});

  auto nonlinear = parse_expr("x*x/2");
  REQUIRE(!nonlinear.model);
  REQUIRE(nonlinear.errors.size() == 1);
  CHECK(nonlinear.errors[0].kind == ParseErrorKind::nonlinear_expr);

  auto div0 = parse_expr("x/0");
  REQUIRE(!div0.model);
  CHECK(div0.errors[0].kind == ParseErrorKind::bad_rational);
}

TEST_CASE("structural errors are all reported with spans inside the input") {
  std::string text = "location a { invariant x <= 1; initial; }\n"
                     "location a { invariant x <= 2; }\n"
                     "edge e from nowhere guard true { to ghost prob 1; }\n"
                     "edge e from a guard true { to a prob 1; }\n";
  auto r = parse(text);
  REQUIRE(!r.model);
  REQUIRE(r.errors.size() >= 4);
  std::set<ParseErrorKind> kinds;
  for (const auto& e : r.errors) {
    kinds.insert(e.kind);
    CHECK(e.span.begin <= e.span.end);
    CHECK(e.span.end <= text.size());
    CHECK(e.span.line >= 1);
  }
  CHECK(kinds.count(ParseErrorKind::duplicate));
  CHECK(kinds.count(ParseErrorKind::unknown_ident));
}

TEST_CASE("missing initial is an error") {
  auto r = parse("location a { invariant x <= 1; }");
  REQUIRE(!r.model);
  CHECK(r.errors[0].kind == ParseErrorKind::syntax);
}

TEST_CASE("two initial markers are a duplicate error") {
  auto r = parse("location a { invariant x <= 1; initial; }\n"
                 "location b { invariant x <= 1; initial; }\n");
  REQUIRE(!r.model);
  CHECK(r.errors[0].kind == ParseErrorKind::duplicate);
}

TEST_CASE("oversized constants are reported, not thrown") {
  auto r = parse("location a { invariant x <= 99999999999999999999999999; initial; }");
  REQUIRE(!r.model);
  CHECK(r.errors[0].kind == ParseErrorKind::bad_rational);
}

TEST_CASE("syntax errors recover at item boundaries") {
  std::string text = "location a { invariant y <= 1; }\n"
                     "location b { invariant x <= 1; initial; }\n"
                     "edge e from b guard x < { to b prob 1; }\n"
                     "edge f from b guard true { to b prob 1; }\n";
  auto r = parse(text);
  REQUIRE(!r.model);
  CHECK(r.errors.size() >= 2);
}

TEST_CASE("render canonicalizes affine expressions") {
  CHECK(render_affine(AffineExpr{rat(1), rat(0)}) == "1");
  CHECK(render_affine(AffineExpr{rat(-2), rat(1, 2)}) == "-2 + 1/2*x");
  CHECK(render_affine(AffineExpr{rat(11, 16), rat(-3, 16)}) == "11/16 - 3/16*x");
  CHECK(render_affine(AffineExpr{rat(0), rat(1)}) == "1*x");
  CHECK(render_affine(AffineExpr{rat(0), rat(0)}) == "0");
}

TEST_CASE("round-trip on fig1") {
  auto m = testsupport::fig1();
  auto again = parse(render(m));
  REQUIRE(again.model);
  CHECK(*again.model == m);
}

TEST_CASE("round-trip on random models") {
  testsupport::Rng rng(777);
  for (int it = 0; it < 200; ++it) {
    auto m = testsupport::random_model(rng, 1 + it % 5, it % 7);
    auto again = parse(render(m));
    REQUIRE(again.model);
    CHECK(*again.model == m);
  }
}
