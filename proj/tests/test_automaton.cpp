#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "cftp/event.hpp"
#include "cftp/queueing.hpp"
#include "cftp/stationary.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"

using namespace cftp;

namespace {

// Single M/M/1/C queue as an event table.
EventTable mm1(Coord capacity, const Rational& lambda, const Rational& mu) {
  StateSpace space({capacity});
  std::vector<Event> events;
  events.push_back({"arr", lambda, Ashe({1}, {})});
  events.push_back({"dep", mu, Ashe({-1}, {})});
  return EventTable(std::move(space), std::move(events));
}

EventTable fork_table() {
  StateSpace space({10, 10, 10});
  std::vector<Event> events;
  events.push_back({"fork", Rational(1), fork_event(3, 0, {1, 2})});
  return EventTable(std::move(space), std::move(events));
}

// Two queues in tandem with client loss, on [0,2]^2.
EventTable tandem2() {
  std::vector<QueueSpec> qs(2);
  qs[0] = {2, Rational(1), Rational(1), 1};
  qs[1] = {2, Rational(1), Rational(0), 1};
  RoutingSpec routing;
  routing.prob = {{Rational(0), Rational(1)}, {Rational(0), Rational(0)}};
  routing.policy = Policy::client_loss;
  return build_jackson(qs, routing);
}

}  // namespace

TEST_CASE("table construction rejects bad input", "[automaton]") {
  StateSpace space({3});
  REQUIRE_THROWS_AS(EventTable(space, {}), ConfigError);
  REQUIRE_THROWS_AS(EventTable(space, {{"a", Rational(0), Ashe({1}, {})}}), ConfigError);
  REQUIRE_THROWS_AS(EventTable(space, {{"a", Rational(1), Ashe({1, 1}, {})}}), ConfigError);
  REQUIRE_THROWS_AS(EventTable(space, {{"a", Rational(1), Ashe({1}, {})},
                                       {"a", Rational(1), Ashe({-1}, {})}}),
                    ConfigError);
}

TEST_CASE("apply dispatches and stays in the box", "[automaton]") {
  const EventTable q = mm1(5, 1, 1);
  REQUIRE(q.apply(State{{3}}, "dep") == State{{2}});
  REQUIRE(q.apply(State{{0}}, "dep") == State{{0}});
  REQUIRE_THROWS_AS(q.apply(State{{0}}, "poof"), ConfigError);

  const EventTable f = fork_table();
  REQUIRE(f.apply(State{{0, 2, 4}}, 0) == State{{0, 2, 4}});
}

TEST_CASE("words fold left to right", "[automaton]") {
  const EventTable q = mm1(5, 1, 1);
  REQUIRE(q.apply_word(State{{3}}, std::span<const int>{}) == State{{3}});
  const std::vector<std::string> w{"arr", "arr", "dep"};
  REQUIRE(q.apply_word(State{{0}}, std::span<const std::string>(w)) == State{{1}});

  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const State x{{fuzz::draw_coord(rng, 0, 5)}};
    const int a = static_cast<int>(rng.below(2));
    const std::vector<int> word{a};
    REQUIRE(q.apply_word(x, word) == q.apply(x, a));
  }
  // splitting a word anywhere gives the same fold
  Rng rng2(18);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> u, v;
    for (int i = 0; i < 6; ++i) u.push_back(static_cast<int>(rng2.below(2)));
    for (int i = 0; i < 5; ++i) v.push_back(static_cast<int>(rng2.below(2)));
    std::vector<int> uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    const State x{{fuzz::draw_coord(rng2, 0, 5)}};
    REQUIRE(q.apply_word(x, uv) == q.apply_word(q.apply_word(x, u), v));
  }
}

TEST_CASE("event drawing follows the rates", "[automaton]") {
  {
    StateSpace space({1});
    EventTable solo(space, {{"only", Rational(5, 3), Ashe({1}, {})}});
    Rng rng(1);
    for (int i = 0; i < 100; ++i) REQUIRE(solo.draw(rng) == 0);
  }
  {
    StateSpace space({1});
    EventTable two(space, {{"light", Rational(1), Ashe({1}, {})},
                           {"heavy", Rational(3), Ashe({-1}, {})}});
    REQUIRE(two.probability(1) == Rational(3, 4));
    Rng rng(123);
    std::uint64_t heavy = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) heavy += two.draw(rng) == 1;
    const double freq = static_cast<double>(heavy) / n;
    REQUIRE(freq > 0.745);
    REQUIRE(freq < 0.755);

    Rng r1(777), r2(777);
    for (int i = 0; i < 1'000; ++i) REQUIRE(two.draw(r1) == two.draw(r2));
  }
}

TEST_CASE("set images by brute force", "[automaton]") {
  const EventTable q = mm1(1, 1, 1);
  REQUIRE(image(q, std::vector<State>{State{{1}}}, q.index_of("dep")) ==
          std::vector<State>{State{{0}}});
  REQUIRE(image(q, Interval{State{{0}}, State{{1}}}, q.index_of("dep")) ==
          std::vector<State>{State{{0}}});

  const EventTable f = fork_table();
  const auto img = image(f, Interval{State{{0, 0, 0}}, State{{2, 0, 0}}}, 0);
  REQUIRE(img == std::vector<State>{State{{0, 0, 0}}, State{{0, 1, 1}}, State{{1, 1, 1}}});

  StateSpace big({99, 99, 99});
  EventTable wide(big, {{"a", Rational(1), Ashe({1, 0, 0}, {})}});
  REQUIRE_THROWS_AS(image(wide, Interval{big.bottom(), big.top()}, 0, 1000), OracleLimitError);
}

TEST_CASE("image is monotone in the set argument", "[automaton]") {
  const EventTable f = fork_table();
  Rng rng(5);
  const StateSpace& space = f.space();
  for (int t = 0; t < 200; ++t) {
    std::vector<State> small, large;
    for (int i = 0; i < 8; ++i) {
      const State x = fuzz::draw_state(rng, space);
      large.push_back(x);
      if (rng.below(2)) small.push_back(x);
    }
    if (small.empty()) continue;
    const auto a = image(f, small, 0);
    const auto b = image(f, large, 0);
    for (const auto& y : a) REQUIRE(std::find(b.begin(), b.end(), y) != b.end());
  }
}

TEST_CASE("stationary law of small birth-death chains", "[automaton]") {
  {
    const auto pi = stationary_solve(mm1(1, 1, 1));
    REQUIRE(pi.size() == 2);
    REQUIRE_THAT(pi[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(pi[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
  }
  for (const Rational& rho : {Rational(1, 2), Rational(2)}) {
    const auto pi = stationary_solve(mm1(3, rho, 1));
    const auto want = oracle::mm1_stationary(rho.get_d(), 3);
    for (int k = 0; k <= 3; ++k)
      REQUIRE_THAT(pi[static_cast<std::size_t>(k)],
                   Catch::Matchers::WithinAbs(want[static_cast<std::size_t>(k)], 1e-10));
  }
}

TEST_CASE("stationary law matches long-run frequencies", "[automaton]") {
  const EventTable net = tandem2();
  const auto pi = stationary_solve(net);
  const auto freq = oracle::forward_occupation(net, 1'000'000, 99);
  double tv = 0;
  for (std::size_t r = 0; r < pi.size(); ++r) tv += std::abs(pi[r] - freq[r]);
  REQUIRE(tv / 2 < 0.01);
}

TEST_CASE("stationary law survives splitting an event in two", "[automaton]") {
  StateSpace space({2, 2});
  std::vector<Event> one;
  one.push_back({"arr", Rational(1), Ashe({1, 0}, {})});
  one.push_back({"move", Rational(2), Ashe({-1, 1}, {{0, 1}})});
  one.push_back({"dep", Rational(3, 2), Ashe({0, -1}, {})});
  std::vector<Event> two = one;
  two[1].rate = Rational(1);
  two.push_back({"move_twin", Rational(1), Ashe({-1, 1}, {{0, 1}})});
  const auto pa = stationary_solve(EventTable(space, one));
  const auto pb = stationary_solve(EventTable(space, two));
  double tv = 0;
  for (std::size_t r = 0; r < pa.size(); ++r) tv += std::abs(pa[r] - pb[r]);
  REQUIRE(tv / 2 < 1e-10);
}

TEST_CASE("reducible chains are reported with their strata", "[automaton]") {
  StateSpace space({3});
  EventTable up(space, {{"up", Rational(1), Ashe({1}, {{0, 0}})}});
  REQUIRE_THROWS_WITH(stationary_solve(up), Catch::Matchers::ContainsSubstring("reducible"));
  StateSpace big({999, 999});
  EventTable wide(big, {{"a", Rational(1), Ashe({1, 0}, {})}});
  REQUIRE_THROWS_AS(stationary_solve(wide, 100'000), OracleLimitError);
}
