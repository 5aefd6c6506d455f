#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cftp/ashe.hpp"
#include "cftp/common.hpp"
#include "cftp/rational.hpp"
#include "cftp/rng.hpp"
#include "cftp/state.hpp"
#include "cftp/zones.hpp"

namespace cftp {

using EventSemantics = std::variant<Ashe, PiecewiseEvent>;

struct Event {
  std::string label;
  Rational rate;
  EventSemantics semantics;
};

// Traversal scratch for envelope sweeps. The zone graphs are immutable and
// shared; the visited stamps are not, so every concurrent run owns one of
// these.
struct SweepScratch {
  std::vector<std::vector<std::uint64_t>> marks;
  std::vector<std::uint64_t> epoch;

  void ensure(int n_events) {
    if (static_cast<int>(marks.size()) < n_events) {
      marks.resize(static_cast<std::size_t>(n_events));
      epoch.resize(static_cast<std::size_t>(n_events), 0);
    }
  }
};

// The Markov automaton: a state space, a finite alphabet of events with
// positive rational rates, and a deterministic action per event. An event is
// drawn with probability rate/total_rate; draws use integer cumulative
// weights over the insertion order, so a seed reproduces the same run on
// every platform.
class EventTable {
 public:
  EventTable(StateSpace space, std::vector<Event> events)
      : space_(std::move(space)), events_(std::move(events)) {
    if (events_.empty()) throw ConfigError("event table is empty");
    total_rate_ = 0;
    mpz_class lcm = 1;
    for (const auto& e : events_) {
      if (e.rate <= 0) throw ConfigError("event '" + e.label + "' must have a positive rate");
      if (dim_of(e.semantics) != space_.dim())
        throw ConfigError("event '" + e.label + "' does not match the state dimension");
      for (const auto& other : events_)
        if (&other != &e && other.label == e.label)
          throw ConfigError("duplicate event label '" + e.label + "'");
      total_rate_ += e.rate;
      mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), e.rate.get_den().get_mpz_t());
    }
    mpz_class cum = 0;
    for (const auto& e : events_) {
      cum += e.rate.get_num() * (lcm / e.rate.get_den());
      CFTP_CHECK(cum.fits_ulong_p() && cum.get_ui() < (1ULL << 63),
                 "event weights overflow the integer draw table; use smaller denominators");
      cum_weights_.push_back(cum.get_ui());
    }
  }

  const StateSpace& space() const { return space_; }
  int size() const { return static_cast<int>(events_.size()); }
  const Event& event(int i) const { return events_[static_cast<std::size_t>(i)]; }
  const Rational& total_rate() const { return total_rate_; }

  int index_of(std::string_view label) const {
    for (int i = 0; i < size(); ++i)
      if (events_[static_cast<std::size_t>(i)].label == label) return i;
    throw ConfigError("unknown event label '" + std::string(label) + "'");
  }

  // Probability of drawing event i, as an exact rational.
  Rational probability(int i) const {
    return events_[static_cast<std::size_t>(i)].rate / total_rate_;
  }

  State apply(const State& x, int i) const {
    CFTP_CHECK(space_.contains(x), "state outside the state space");
    const auto& sem = events_[static_cast<std::size_t>(i)].semantics;
    State y = std::holds_alternative<Ashe>(sem)
                  ? ashe_apply(std::get<Ashe>(sem), x, space_)
                  : std::get<PiecewiseEvent>(sem).apply(x, space_);
    CFTP_CHECK(space_.contains(y), "event '" + events_[static_cast<std::size_t>(i)].label +
                                       "' left the state space");
    return y;
  }

  State apply(const State& x, std::string_view label) const { return apply(x, index_of(label)); }

  State apply_word(const State& x, std::span<const int> word) const {
    State y = x;
    for (int a : word) y = apply(y, a);
    return y;
  }

  State apply_word(const State& x, std::span<const std::string> labels) const {
    State y = x;
    for (const auto& l : labels) y = apply(y, index_of(l));
    return y;
  }

  // Draws an event index with probability rate/total_rate, consuming a
  // geometric number of variates from the stream (mean below two).
  int draw(Rng& rng) const {
    const std::uint64_t r = rng.below(cum_weights_.back());
    const auto it = std::upper_bound(cum_weights_.begin(), cum_weights_.end(), r);
    return static_cast<int>(it - cum_weights_.begin());
  }

  // One envelope step for event i. Exact for plain shift events; for
  // piecewise events the result is the zone-sweep over-approximation.
  Interval envelope(const Interval& iv, int i, EnvelopeMode mode, SweepScratch& scratch) const {
    Interval out;
    envelope_into(iv, i, mode, scratch, out);
    return out;
  }

  // As envelope(), into a caller-owned buffer; out must not alias iv.
  void envelope_into(const Interval& iv, int i, EnvelopeMode mode, SweepScratch& scratch,
                     Interval& out) const {
    const auto& sem = events_[static_cast<std::size_t>(i)].semantics;
    if (std::holds_alternative<Ashe>(sem)) {
      ashe_envelope_into(std::get<Ashe>(sem), iv, space_, out);
      return;
    }
    scratch.ensure(size());
    std::get<PiecewiseEvent>(sem).envelope_into(iv, mode, space_,
                                                scratch.marks[static_cast<std::size_t>(i)],
                                                scratch.epoch[static_cast<std::size_t>(i)], out);
  }

  // Largest |v_i| over every event (and zone event); used as the default
  // interval-splitting threshold.
  Coord max_shift_abs() const {
    Coord m = 0;
    for (const auto& e : events_) {
      if (std::holds_alternative<Ashe>(e.semantics)) {
        for (Coord vi : std::get<Ashe>(e.semantics).shift()) m = std::max(m, std::abs(vi));
      } else {
        m = std::max(m, std::get<PiecewiseEvent>(e.semantics).max_shift_abs());
      }
    }
    return m;
  }

 private:
  static int dim_of(const EventSemantics& sem) {
    return std::holds_alternative<Ashe>(sem) ? std::get<Ashe>(sem).dim()
                                             : std::get<PiecewiseEvent>(sem).dim();
  }

  StateSpace space_;
  std::vector<Event> events_;
  Rational total_rate_;
  std::vector<std::uint64_t> cum_weights_;
};

// Exact image { x . a : x in set }, deduplicated. Brute force; refuses sets
// larger than the oracle limit.
inline std::vector<State> image(const EventTable& table, const std::vector<State>& set, int ev,
                                std::uint64_t oracle_limit = kDefaultOracleLimit) {
  if (set.size() > oracle_limit)
    throw OracleLimitError("image oracle asked to map " + std::to_string(set.size()) +
                           " states, limit " + std::to_string(oracle_limit));
  std::vector<State> out;
  out.reserve(set.size());
  for (const auto& x : set) out.push_back(table.apply(x, ev));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<State> image(const EventTable& table, const Interval& iv, int ev,
                                std::uint64_t oracle_limit = kDefaultOracleLimit) {
  if (!iv.count(oracle_limit))
    throw OracleLimitError("image oracle asked to enumerate an interval past its limit");
  std::vector<State> states;
  for_each_state(iv, [&](const State& x) { states.push_back(x); });
  return image(table, states, ev, oracle_limit);
}

}  // namespace cftp
