#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cftp/common.hpp"

namespace cftp {

using Coord = std::int64_t;

// A point of the box lattice [0, C].
struct State {
  std::vector<Coord> c;

  friend bool operator==(const State&, const State&) = default;
};

// Lexicographic order, so states can key ordered containers. The lattice
// (componentwise) order lives in leq() below.
inline bool operator<(const State& a, const State& b) { return a.c < b.c; }

inline bool leq(const State& a, const State& b) {
  CFTP_CHECK(a.c.size() == b.c.size(), "dimension mismatch");
  for (std::size_t i = 0; i < a.c.size(); ++i)
    if (a.c[i] > b.c[i]) return false;
  return true;
}

inline State meet(const State& a, const State& b) {
  State r = a;
  for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = std::min(r.c[i], b.c[i]);
  return r;
}

inline State join(const State& a, const State& b) {
  State r = a;
  for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = std::max(r.c[i], b.c[i]);
  return r;
}

inline std::string to_string(const State& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.c.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(x.c[i]);
  }
  return s + ")";
}

inline std::ostream& operator<<(std::ostream& os, const State& x) { return os << to_string(x); }

// The box lattice [0, C] in Z^d.
class StateSpace {
 public:
  explicit StateSpace(std::vector<Coord> capacities) : cap_(std::move(capacities)) {
    if (cap_.empty()) throw ConfigError("state space needs at least one dimension");
    for (Coord c : cap_)
      if (c < 0) throw ConfigError("capacities must be nonnegative");
  }

  int dim() const { return static_cast<int>(cap_.size()); }
  Coord capacity(int i) const { return cap_[static_cast<std::size_t>(i)]; }
  const std::vector<Coord>& capacities() const { return cap_; }

  bool contains(const State& x) const {
    if (x.c.size() != cap_.size()) return false;
    for (std::size_t i = 0; i < cap_.size(); ++i)
      if (x.c[i] < 0 || x.c[i] > cap_[i]) return false;
    return true;
  }

  State bottom() const { return State{std::vector<Coord>(cap_.size(), 0)}; }
  State top() const { return State{cap_}; }

  // Number of states if it does not exceed `limit`, nullopt otherwise.
  std::optional<std::uint64_t> cardinality(std::uint64_t limit = kDefaultOracleLimit) const {
    std::uint64_t n = 1;
    for (Coord c : cap_) {
      const std::uint64_t f = static_cast<std::uint64_t>(c) + 1;
      if (n > limit / f + 1) return std::nullopt;
      n *= f;
      if (n > limit) return std::nullopt;
    }
    return n;
  }

  // Mixed-radix rank of a state, row-major in declaration order.
  std::uint64_t rank(const State& x) const {
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < cap_.size(); ++i)
      r = r * (static_cast<std::uint64_t>(cap_[i]) + 1) + static_cast<std::uint64_t>(x.c[i]);
    return r;
  }

  State unrank(std::uint64_t r) const {
    State x{std::vector<Coord>(cap_.size())};
    for (std::size_t i = cap_.size(); i-- > 0;) {
      const std::uint64_t f = static_cast<std::uint64_t>(cap_[i]) + 1;
      x.c[i] = static_cast<Coord>(r % f);
      r /= f;
    }
    return x;
  }

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::vector<Coord> cap_;
};

// A nonempty lattice interval [lo, hi], the envelope chain's state.
struct Interval {
  State lo, hi;

  bool valid() const {
    return lo.c.size() == hi.c.size() && leq(lo, hi);
  }

  // L1 diameter; zero iff the interval is a single state.
  Coord width() const {
    Coord w = 0;
    for (std::size_t i = 0; i < lo.c.size(); ++i) w += hi.c[i] - lo.c[i];
    return w;
  }

  bool singleton() const { return width() == 0; }

  bool contains(const State& x) const { return leq(lo, x) && leq(x, hi); }

  std::optional<std::uint64_t> count(std::uint64_t limit = kDefaultOracleLimit) const {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < lo.c.size(); ++i) {
      const std::uint64_t f = static_cast<std::uint64_t>(hi.c[i] - lo.c[i]) + 1;
      if (n > limit / f + 1) return std::nullopt;
      n *= f;
      if (n > limit) return std::nullopt;
    }
    return n;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline std::string to_string(const Interval& iv) {
  return "[" + to_string(iv.lo) + "," + to_string(iv.hi) + "]";
}

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << to_string(iv);
}

// Smallest interval containing both arguments.
inline Interval hull(const Interval& a, const Interval& b) {
  return Interval{meet(a.lo, b.lo), join(a.hi, b.hi)};
}

// Visits every state of [lo, hi] in lexicographic order.
template <typename F>
void for_each_state(const Interval& iv, F&& f) {
  CFTP_CHECK(iv.valid(), "iterating an invalid interval");
  State x = iv.lo;
  const std::size_t d = x.c.size();
  for (;;) {
    f(x);
    std::size_t i = d;
    while (i-- > 0) {
      if (x.c[i] < iv.hi.c[i]) {
        ++x.c[i];
        break;
      }
      x.c[i] = iv.lo.c[i];
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
}

template <typename F>
void for_each_state(const StateSpace& space, F&& f) {
  for_each_state(Interval{space.bottom(), space.top()}, std::forward<F>(f));
}

}  // namespace cftp
