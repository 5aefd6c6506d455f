#include <catch2/catch_amalgamated.hpp>

#include "cftp/rational.hpp"
#include "cftp/rng.hpp"
#include "cftp/state.hpp"

using namespace cftp;

TEST_CASE("state space basics", "[state]") {
  StateSpace s({10, 10, 10});
  REQUIRE(s.dim() == 3);
  REQUIRE(s.cardinality() == 11ULL * 11 * 11);
  REQUIRE(s.contains(State{{0, 10, 3}}));
  REQUIRE_FALSE(s.contains(State{{0, 11, 3}}));
  REQUIRE_FALSE(s.contains(State{{-1, 0, 0}}));
  REQUIRE(s.bottom() == State{{0, 0, 0}});
  REQUIRE(s.top() == State{{10, 10, 10}});

  REQUIRE_THROWS_AS(StateSpace(std::vector<Coord>{}), ConfigError);
  REQUIRE_THROWS_AS(StateSpace({3, -1}), ConfigError);

  // zero capacity is a legal (single-point) axis
  StateSpace point({0});
  REQUIRE(point.cardinality() == 1);
}

TEST_CASE("cardinality respects the oracle limit", "[state]") {
  StateSpace s({999, 999, 999});
  REQUIRE_FALSE(s.cardinality(1'000'000).has_value());
  REQUIRE(s.cardinality(1'000'000'000).has_value());
}

TEST_CASE("rank and unrank invert each other", "[state]") {
  StateSpace s({3, 0, 5});
  const std::uint64_t n = *s.cardinality();
  for (std::uint64_t r = 0; r < n; ++r) {
    REQUIRE(s.rank(s.unrank(r)) == r);
    REQUIRE(s.contains(s.unrank(r)));
  }
}

TEST_CASE("interval width, membership and hulls", "[state]") {
  Interval iv{State{{1, 2}}, State{{3, 2}}};
  REQUIRE(iv.valid());
  REQUIRE(iv.width() == 2);
  REQUIRE_FALSE(iv.singleton());
  REQUIRE(iv.contains(State{{2, 2}}));
  REQUIRE_FALSE(iv.contains(State{{2, 3}}));
  REQUIRE(Interval{State{{5}}, State{{5}}}.singleton());
  REQUIRE_FALSE(Interval{State{{2, 0}}, State{{1, 4}}}.valid());

  Interval h = hull(iv, Interval{State{{0, 3}}, State{{2, 4}}});
  REQUIRE(h == Interval{State{{0, 2}}, State{{3, 4}}});

  std::size_t count = 0;
  for_each_state(Interval{State{{0, 0}}, State{{2, 3}}}, [&](const State&) { ++count; });
  REQUIRE(count == 12);
}

TEST_CASE("rational parsing accepts integers and fractions only", "[state]") {
  REQUIRE(*parse_rational("3/4") == Rational(3, 4));
  REQUIRE(*parse_rational("-2") == Rational(-2));
  REQUIRE(*parse_rational("6/4") == Rational(3, 2));
  REQUIRE_FALSE(parse_rational("1.5").has_value());
  REQUIRE_FALSE(parse_rational("1/0").has_value());
  REQUIRE_FALSE(parse_rational("").has_value());
  REQUIRE_FALSE(parse_rational("a/b").has_value());
  REQUIRE(floor_to_int(Rational(7, 2)) == 3);
  REQUIRE(ceil_to_int(Rational(7, 2)) == 4);
  REQUIRE(floor_to_int(Rational(-7, 2)) == -4);
  REQUIRE(ceil_to_int(Rational(-7, 2)) == -3);
}

TEST_CASE("rng below is exact and deterministic", "[state]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.below(7) == b.below(7));
  Rng c(7);
  std::vector<std::uint64_t> counts(3, 0);
  for (int i = 0; i < 30'000; ++i) ++counts[c.below(3)];
  for (auto n : counts) {
    REQUIRE(n > 9'000);
    REQUIRE(n < 11'000);
  }
}
