#pragma once

#include <algorithm>
#include <cstdlib>
#include <utility>
#include <vector>

#include "cftp/common.hpp"
#include "cftp/state.hpp"

namespace cftp {

// An event that shifts every state by a fixed integer vector, except near the
// boundary: a component pushed outside the box is "critical", and each
// critical component freezes the components it points to in the blocking
// relation. Components outside the blocked set saturate at the boundary.
class Ashe {
 public:
  Ashe(std::vector<Coord> shift, std::vector<std::pair<int, int>> blocking)
      : v_(std::move(shift)), pairs_(std::move(blocking)) {
    const int d = static_cast<int>(v_.size());
    if (d == 0) throw ConfigError("event shift vector is empty");
    blockers_of_.resize(v_.size());
    for (auto& [i, j] : pairs_) {
      if (i < 0 || i >= d || j < 0 || j >= d)
        throw ConfigError("blocking pair refers to a component outside the state space");
      blockers_of_[static_cast<std::size_t>(j)].push_back(i);
    }
    self_only_ = std::all_of(pairs_.begin(), pairs_.end(),
                             [](const auto& p) { return p.first == p.second; });
  }

  int dim() const { return static_cast<int>(v_.size()); }
  const std::vector<Coord>& shift() const { return v_; }
  const std::vector<std::pair<int, int>>& blocking() const { return pairs_; }

  // Sources i with (i, j) in the blocking relation.
  const std::vector<int>& blockers_of(int j) const {
    return blockers_of_[static_cast<std::size_t>(j)];
  }

  // True when every pair is of the form (i, i).
  bool self_blocking_only() const { return self_only_; }

  Coord shift_l1() const {
    Coord s = 0;
    for (Coord vi : v_) s += std::abs(vi);
    return s;
  }

  friend bool operator==(const Ashe& a, const Ashe& b) {
    return a.v_ == b.v_ && a.pairs_ == b.pairs_;
  }

 private:
  std::vector<Coord> v_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<std::vector<int>> blockers_of_;
  bool self_only_ = false;
};

namespace detail {

// Criticality of component i at x: x_i + v_i falls outside [0, C_i].
// Components with v_i = 0 are never critical.
inline bool critical(const Ashe& a, const State& x, const StateSpace& space, int i) {
  const Coord t = x.c[static_cast<std::size_t>(i)] + a.shift()[static_cast<std::size_t>(i)];
  return t < 0 || t > space.capacity(i);
}

inline Coord clamp(Coord t, Coord cap) { return std::min(std::max<Coord>(t, 0), cap); }

}  // namespace detail

// CR(x): components pushed out of the box by the shift.
inline std::vector<int> critical_set(const Ashe& a, const State& x, const StateSpace& space) {
  std::vector<int> cr;
  for (int i = 0; i < a.dim(); ++i)
    if (detail::critical(a, x, space, i)) cr.push_back(i);
  return cr;
}

// B(x): components frozen because some critical component points to them.
inline std::vector<int> blocked_set(const Ashe& a, const State& x, const StateSpace& space) {
  std::vector<int> b;
  for (int j = 0; j < a.dim(); ++j) {
    for (int i : a.blockers_of(j)) {
      if (detail::critical(a, x, space, i)) {
        b.push_back(j);
        break;
      }
    }
  }
  return b;
}

inline void ashe_apply_into(const Ashe& a, const State& x, const StateSpace& space, State& out) {
  const auto& v = a.shift();
  const std::size_t d = v.size();
  out.c.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    bool blocked = false;
    for (int i : a.blockers_of(static_cast<int>(j))) {
      if (detail::critical(a, x, space, i)) {
        blocked = true;
        break;
      }
    }
    out.c[j] = blocked ? x.c[j] : detail::clamp(x.c[j] + v[j], space.capacity(static_cast<int>(j)));
  }
}

inline State ashe_apply(const Ashe& a, const State& x, const StateSpace& space) {
  State out;
  ashe_apply_into(a, x, space, out);
  return out;
}

// Exact envelope step: the smallest interval containing the pointwise image
// of [lo, hi]. Runs in O(d + |R|); the per-target blocker lists make the case
// analysis a scan over precomputed adjacency.
inline void ashe_envelope_into(const Ashe& a, const Interval& iv, const StateSpace& space,
                               Interval& out) {
  if (!iv.valid()) throw ConfigError("envelope step on an invalid interval");
  const auto& v = a.shift();
  const std::size_t d = v.size();
  CFTP_CHECK(iv.lo.c.size() == d, "interval dimension does not match the event");

  out = iv;
  // Criticality flags per endpoint. For every component the states where it
  // is critical form a prefix or suffix of [lo_i, hi_i], so the endpoints
  // determine criticality anywhere in the interval.
  thread_local std::vector<char> crit_lo, crit_hi;
  crit_lo.assign(d, 0);
  crit_hi.assign(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    crit_lo[i] = detail::critical(a, iv.lo, space, static_cast<int>(i));
    crit_hi[i] = detail::critical(a, iv.hi, space, static_cast<int>(i));
  }

  for (std::size_t j = 0; j < d; ++j) {
    if (v[j] == 0) continue;  // blocking a motionless component is a no-op
    const Coord cap = space.capacity(static_cast<int>(j));
    bool sometimes = false;  // blocked in at least one state of the interval
    bool always = false;     // blocked in every state of the interval
    bool by_other = false;   // blockable by a component other than j itself
    for (int i : a.blockers_of(static_cast<int>(j))) {
      const bool lo_c = crit_lo[static_cast<std::size_t>(i)];
      const bool hi_c = crit_hi[static_cast<std::size_t>(i)];
      if (lo_c || hi_c) {
        sometimes = true;
        if (i != static_cast<int>(j)) by_other = true;
      }
      if (lo_c && hi_c) always = true;
    }
    if (!sometimes) {
      out.lo.c[j] = detail::clamp(iv.lo.c[j] + v[j], cap);
      out.hi.c[j] = detail::clamp(iv.hi.c[j] + v[j], cap);
    } else if (always) {
      // frozen everywhere: endpoints unchanged
    } else if (by_other) {
      // One-sided stretch: the blocked copies keep [lo_j, hi_j], the moved
      // copies extend it in the direction of the shift.
      if (v[j] < 0)
        out.lo.c[j] = std::max<Coord>(iv.lo.c[j] + v[j], 0);
      else
        out.hi.c[j] = std::min<Coord>(iv.hi.c[j] + v[j], cap);
    } else {
      // Only j itself blocks j, and only on part of the interval.
      if (v[j] < 0) {
        out.lo.c[j] = 0;
        out.hi.c[j] = std::max<Coord>(iv.hi.c[j] + v[j], -v[j] - 1);
      } else {
        out.lo.c[j] = std::min<Coord>(iv.lo.c[j] + v[j], cap - v[j] + 1);
        out.hi.c[j] = cap;
      }
    }
  }
}

inline Interval ashe_envelope(const Ashe& a, const Interval& iv, const StateSpace& space) {
  Interval out;
  ashe_envelope_into(a, iv, space, out);
  return out;
}

// Width growth report for one envelope step, checking each applicable
// nonexpansiveness bound. A violated bound indicates a broken envelope, so
// callers treat `held == false` as a test failure.
struct ExpansionReport {
  Coord width_before = 0;
  Coord width_after = 0;

  bool unblocked_applicable = false;  // B(lo) and B(hi) both empty
  bool unblocked_held = true;         // then width may not grow

  bool self_only_applicable = false;  // blocking relation is all (i, i) pairs
  Coord self_only_bound = 0;
  bool self_only_held = true;

  bool straddling = false;  // some component is critical at one endpoint only
  Coord general_bound = 0;  // width + |v|_1 - 1 when straddling, width otherwise
  bool general_held = true;

  bool all_held() const { return unblocked_held && self_only_held && general_held; }
};

inline ExpansionReport expansion_bound_check(const Ashe& a, const Interval& iv,
                                             const StateSpace& space) {
  if (!iv.valid()) throw ConfigError("expansion check on an invalid interval");
  ExpansionReport rep;
  rep.width_before = iv.width();
  const Interval next = ashe_envelope(a, iv, space);
  rep.width_after = next.width();

  rep.unblocked_applicable =
      blocked_set(a, iv.lo, space).empty() && blocked_set(a, iv.hi, space).empty();
  if (rep.unblocked_applicable) rep.unblocked_held = rep.width_after <= rep.width_before;

  rep.self_only_applicable = a.self_blocking_only();
  if (rep.self_only_applicable) {
    std::vector<char> self(a.shift().size(), 0);
    for (const auto& [i, j] : a.blocking()) self[static_cast<std::size_t>(i)] = 1;
    Coord bound = 0;
    for (std::size_t i = 0; i < a.shift().size(); ++i) {
      const Coord gap = iv.hi.c[i] - iv.lo.c[i];
      bound += self[i] ? std::max(gap, std::abs(a.shift()[i]) - 1) : gap;
    }
    rep.self_only_bound = bound;
    rep.self_only_held = rep.width_after <= bound;
  }

  for (int i = 0; i < a.dim() && !rep.straddling; ++i)
    rep.straddling = detail::critical(a, iv.lo, space, i) != detail::critical(a, iv.hi, space, i);
  rep.general_bound =
      rep.straddling ? rep.width_before + a.shift_l1() - 1 : rep.width_before;
  rep.general_held = rep.width_after <= rep.general_bound;
  return rep;
}

}  // namespace cftp
