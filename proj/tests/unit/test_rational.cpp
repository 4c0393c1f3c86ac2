#include <catch2/catch_amalgamated.hpp>

#include <cdpta/rational.hpp>

using namespace cdpta;

TEST_CASE("rational parsing and printing") {
  CHECK(rat_to_string(rat(3, 8)) == "3/8");
  CHECK(rat_to_string(rat(4, 2)) == "2");
  CHECK(rat_to_string(rat(-1, 2)) == "-1/2");
  CHECK(*rat_from_string("11/16") == rat(11, 16));
  CHECK(*rat_from_string("-3") == rat(-3));
  CHECK(!rat_from_string("1/0"));
  CHECK(!rat_from_string("x"));
  CHECK(!rat_from_string("1.5"));
}

TEST_CASE("best rational approximation") {
  CHECK(best_rational(0.8) == rat(4, 5));
  CHECK(best_rational(0.2) == rat(1, 5));
  CHECK(best_rational(1.0) == rat(1));
  CHECK(best_rational(0.0) == rat(0));
  CHECK(best_rational(1.0 / 3.0) == rat(1, 3));
  CHECK(best_rational(to_double(rat(65, 128))) == rat(65, 128));
}
