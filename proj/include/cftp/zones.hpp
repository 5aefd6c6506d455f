#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "cftp/ashe.hpp"
#include "cftp/common.hpp"
#include "cftp/lp.hpp"
#include "cftp/rational.hpp"
#include "cftp/rng.hpp"
#include "cftp/state.hpp"

namespace cftp {

// Oriented cut a . x <= c. Models must choose offsets so that no integer
// point of the state box lies on the cut itself; membership of integer
// states is then unambiguous on both sides.
struct Hyperplane {
  std::vector<Rational> a;
  Rational c;
};

enum class Side : unsigned char { neg, pos, any };

// One zone: a sign per hyperplane (any = unconstrained) plus the event that
// acts on the zone.
struct ZoneDef {
  std::vector<Side> signs;
  Ashe sub;
};

enum class EnvelopeMode { lp_exact, minkowski_fast };

// Constant-time emptiness test between a polytope and the rational box
// spanned by an integer interval: the box center must satisfy every
// constraint inflated by half the box size, and the bounding boxes must
// overlap. A "no" is always right; scaled by two to stay in the ring.
inline bool minkowski_intersects(const Polytope& p, const CoordBounds& bounds,
                                 const Interval& iv) {
  CFTP_CHECK(iv.valid(), "emptiness test on an invalid interval");
  const std::size_t d = iv.lo.c.size();
  for (std::size_t i = 0; i < d; ++i) {
    if (bounds.lo[i] > Rational(static_cast<long>(iv.hi.c[i]))) return false;
    if (Rational(static_cast<long>(iv.lo.c[i])) > bounds.hi[i]) return false;
  }
  for (int r = 0; r < p.rows(); ++r) {
    Rational lhs(0), slack(0);
    for (std::size_t i = 0; i < d; ++i) {
      const Rational& a = p.A[static_cast<std::size_t>(r)][i];
      lhs += a * Rational(static_cast<long>(iv.lo.c[i] + iv.hi.c[i]));
      slack += abs(a) * Rational(static_cast<long>(iv.hi.c[i] - iv.lo.c[i]));
    }
    if (lhs > 2 * p.b[static_cast<std::size_t>(r)] + slack) return false;
  }
  return true;
}

// An event defined zone by zone over a hyperplane partition of the state
// box. Zones share one binary DAG: internal nodes test a hyperplane, leaves
// name a zone (or nothing, for sign cells that contain no state). Sweeps
// stamp visited nodes with a per-traversal epoch, so concurrent runs need
// their own marks.
class PiecewiseEvent {
 public:
  PiecewiseEvent(const StateSpace& space, std::vector<Hyperplane> planes,
                 std::vector<ZoneDef> zones)
      : caps_(space.capacities()), planes_(std::move(planes)) {
    const int d = space.dim();
    for (const auto& z : zones) {
      if (static_cast<int>(z.signs.size()) != static_cast<int>(planes_.size()))
        throw ConfigError("zone sign vector length does not match the hyperplane count");
      if (z.sub.dim() != d) throw ConfigError("zone event dimension mismatch");
    }
    scale_planes(d);
    check_integer_separation(space);
    drop_empty_zones(space, std::move(zones));
    check_zone_count_bound(d);
    build_graph();
    validate_partition(space);
    for (const auto& z : zones_)
      for (Coord vi : z.sub.shift()) max_shift_ = std::max(max_shift_, std::abs(vi));
  }

  int dim() const { return static_cast<int>(caps_.size()); }
  int hyperplane_count() const { return static_cast<int>(planes_.size()); }
  int zone_count() const { return static_cast<int>(zones_.size()); }
  int dropped_zone_count() const { return dropped_zones_; }
  int internal_node_count() const { return internal_nodes_; }
  int graph_size() const { return static_cast<int>(nodes_.size()); }

  const Ashe& zone_event(int k) const { return zones_[static_cast<std::size_t>(k)].sub; }
  const Polytope& zone_polytope(int k) const { return polys_[static_cast<std::size_t>(k)]; }
  const CoordBounds& zone_bounds(int k) const { return bounds_[static_cast<std::size_t>(k)]; }

  // Largest |v_i| over all zone events; the natural interval-splitting size.
  Coord max_shift_abs() const { return max_shift_; }

  // The unique zone containing x, by one root-to-leaf walk.
  int locate_zone(const State& x) const {
    int n = root_;
    for (;;) {
      const Node& node = nodes_[static_cast<std::size_t>(n)];
      if (node.plane < 0) {
        CFTP_CHECK(node.zone >= 0, "state " + to_string(x) + " is not covered by any zone");
        return node.zone;
      }
      const std::int64_t v = eval_plane(node.plane, x);
      CFTP_CHECK(v != 0, "state " + to_string(x) + " lies on a zone hyperplane");
      n = v < 0 ? node.child_neg : node.child_pos;
    }
  }

  State apply(const State& x, const StateSpace& space) const {
    return ashe_apply(zones_[static_cast<std::size_t>(locate_zone(x))].sub, x, space);
  }

  // Interval containing every integer point of [lo, hi] inside zone k.
  // lp_exact solves 2d rational programs and rounds; minkowski_fast clamps
  // against the precomputed per-zone bounds after the constant-time
  // emptiness test. Returns nullopt when the intersection is empty.
  std::optional<Interval> zone_interval(int k, const Interval& iv, EnvelopeMode mode) const {
    Interval out;
    if (!zone_interval_into(k, iv, mode, out)) return std::nullopt;
    return out;
  }

  bool zone_interval_into(int k, const Interval& iv, EnvelopeMode mode, Interval& out) const {
    CFTP_CHECK(iv.valid(), "zone intersection of an invalid interval");
    if (mode == EnvelopeMode::lp_exact) {
      const BoxQ box = BoxQ::from(iv);
      out = iv;
      for (int i = 0; i < dim(); ++i) {
        auto b = integer_bounds(polys_[static_cast<std::size_t>(k)], box, i);
        if (!b) return false;
        out.lo.c[static_cast<std::size_t>(i)] = b->lo;
        out.hi.c[static_cast<std::size_t>(i)] = b->hi;
      }
      return true;
    }
    if (!minkowski_intersects(k, iv)) return false;
    out = iv;
    const CoordBounds& cb = bounds_[static_cast<std::size_t>(k)];
    for (int i = 0; i < dim(); ++i) {
      auto& lo = out.lo.c[static_cast<std::size_t>(i)];
      auto& hi = out.hi.c[static_cast<std::size_t>(i)];
      lo = std::max(lo, cb.lo_ceil[static_cast<std::size_t>(i)]);
      hi = std::min(hi, cb.hi_floor[static_cast<std::size_t>(i)]);
      if (lo > hi) return false;
    }
    return true;
  }

  // Constant-time emptiness test for zone k against the rational box
  // [lo, hi]: the box center must satisfy every zone constraint inflated by
  // half the box size, and the boxes must overlap. Everything is scaled by
  // two so the test runs in integer arithmetic.
  bool minkowski_intersects(int k, const Interval& iv) const {
    CFTP_CHECK(iv.valid(), "emptiness test on an invalid interval");
    const CoordBounds& cb = bounds_[static_cast<std::size_t>(k)];
    for (int i = 0; i < dim(); ++i) {
      if (cb.lo_ceil[static_cast<std::size_t>(i)] > iv.hi.c[static_cast<std::size_t>(i)])
        return false;
      if (iv.lo.c[static_cast<std::size_t>(i)] > cb.hi_floor[static_cast<std::size_t>(i)])
        return false;
    }
    for (const auto& [p, side] : zone_rows_[static_cast<std::size_t>(k)]) {
      const auto& a = scaled_a_[static_cast<std::size_t>(p)];
      std::int64_t lhs = 0, slack = 0;
      for (int i = 0; i < dim(); ++i) {
        lhs += a[static_cast<std::size_t>(i)] *
               (iv.lo.c[static_cast<std::size_t>(i)] + iv.hi.c[static_cast<std::size_t>(i)]);
        slack += std::abs(a[static_cast<std::size_t>(i)]) *
                 (iv.hi.c[static_cast<std::size_t>(i)] - iv.lo.c[static_cast<std::size_t>(i)]);
      }
      const std::int64_t c2 = 2 * scaled_c_[static_cast<std::size_t>(p)];
      if (side == Side::neg ? (lhs > c2 + slack) : (-lhs > -c2 + slack)) return false;
    }
    return true;
  }

  // Envelope step for the whole event: hull of the per-zone envelopes of the
  // per-zone intersections, computed by a DAG sweep that prunes a child as
  // soon as the box misses the node's halfspace.
  Interval envelope(const Interval& iv, EnvelopeMode mode, const StateSpace& space,
                    std::vector<std::uint64_t>& marks, std::uint64_t& epoch) const {
    Interval acc;
    envelope_into(iv, mode, space, marks, epoch, acc);
    return acc;
  }

  // As envelope(), writing into a caller-owned interval; out must not alias
  // the input. Steady-state allocation free.
  void envelope_into(const Interval& iv, EnvelopeMode mode, const StateSpace& space,
                     std::vector<std::uint64_t>& marks, std::uint64_t& epoch,
                     Interval& out) const {
    CFTP_CHECK(iv.valid(), "envelope step on an invalid interval");
    marks.resize(nodes_.size(), 0);
    ++epoch;
    thread_local Interval cut, img;  // leaf scratch, reused across calls
    bool any = false;
    sweep(root_, iv, mode, space, marks, epoch, cut, img, out, any);
    CFTP_CHECK(any, "interval missed every zone of a partition");
  }

  // Same result as envelope(); visits every zone without the graph. Kept as
  // the reference path for the pruning-equivalence tests.
  Interval envelope_naive(const Interval& iv, EnvelopeMode mode, const StateSpace& space) const {
    Interval acc;
    bool any = false;
    for (int k = 0; k < zone_count(); ++k) {
      if (auto zi = zone_interval(k, iv, mode)) {
        const Interval img = ashe_envelope(zones_[static_cast<std::size_t>(k)].sub, *zi, space);
        acc = any ? hull(acc, img) : img;
        any = true;
      }
    }
    CFTP_CHECK(any, "interval missed every zone of a partition");
    return acc;
  }

 private:
  struct Node {
    int plane = -1;  // -1 marks a leaf
    int child_neg = -1;
    int child_pos = -1;
    int zone = -1;  // leaf payload; -1 for a sign cell without states
  };

  std::int64_t eval_plane(int p, const State& x) const {
    const auto& a = scaled_a_[static_cast<std::size_t>(p)];
    std::int64_t v = -scaled_c_[static_cast<std::size_t>(p)];
    for (int i = 0; i < dim(); ++i)
      v += a[static_cast<std::size_t>(i)] * x.c[static_cast<std::size_t>(i)];
    return v;
  }

  void scale_planes(int d) {
    for (const auto& h : planes_) {
      if (static_cast<int>(h.a.size()) != d)
        throw ConfigError("hyperplane normal length does not match the state dimension");
      bool nonzero = false;
      for (const auto& ai : h.a) nonzero = nonzero || ai != 0;
      if (!nonzero) throw ConfigError("hyperplane normal must be nonzero");
      mpz_class lcm = h.c.get_den();
      for (const auto& ai : h.a)
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), ai.get_den().get_mpz_t());
      std::vector<std::int64_t> row;
      mpz_class bound = 0;
      for (std::size_t i = 0; i < h.a.size(); ++i) {
        mpz_class s = h.a[i].get_num() * (lcm / h.a[i].get_den());
        CFTP_CHECK(s.fits_slong_p(), "hyperplane coefficients too large for fast evaluation");
        row.push_back(s.get_si());
        bound += abs(s) * mpz_class(static_cast<unsigned long>(std::max<Coord>(1, caps_[i])));
      }
      mpz_class cs = h.c.get_num() * (lcm / h.c.get_den());
      CFTP_CHECK(cs.fits_slong_p(), "hyperplane offset too large for fast evaluation");
      bound += abs(cs);
      bound *= 4;
      if (!bound.fits_slong_p())
        throw ConfigError("hyperplane coefficients overflow the fast integer tests");
      scaled_a_.push_back(std::move(row));
      scaled_c_.push_back(cs.get_si());
    }
  }

  // No integer point of the box may lie on a hyperplane. A gcd divisibility
  // argument settles most offsets outright; otherwise scan the box
  // (exhaustively when small, sampled when not).
  void check_integer_separation(const StateSpace& space) {
    for (int p = 0; p < hyperplane_count(); ++p) {
      const auto& a = scaled_a_[static_cast<std::size_t>(p)];
      std::int64_t g = 0;
      for (std::int64_t ai : a) g = std::gcd(g, std::abs(ai));
      if (g != 0 && scaled_c_[static_cast<std::size_t>(p)] % g != 0) continue;
      auto on_plane = [&](const State& x) { return eval_plane(p, x) == 0; };
      if (space.cardinality(100'000)) {
        bool hit = false;
        for_each_state(space, [&](const State& x) { hit = hit || on_plane(x); });
        if (hit)
          throw ConfigError("hyperplane " + std::to_string(p) +
                            " passes through a state; shift its offset by a smaller epsilon");
      } else {
        Rng rng(0x5eed);
        for (int t = 0; t < 10'000; ++t) {
          State x{std::vector<Coord>(caps_.size())};
          for (std::size_t i = 0; i < caps_.size(); ++i)
            x.c[i] = static_cast<Coord>(rng.below(static_cast<std::uint64_t>(caps_[i]) + 1));
          if (on_plane(x))
            throw ConfigError("hyperplane " + std::to_string(p) +
                              " passes through a state; shift its offset by a smaller epsilon");
        }
      }
    }
  }

  void drop_empty_zones(const StateSpace& space, std::vector<ZoneDef> zones) {
    for (auto& z : zones) {
      Polytope poly;
      std::vector<std::pair<int, Side>> rows;
      for (int p = 0; p < hyperplane_count(); ++p) {
        const Side s = z.signs[static_cast<std::size_t>(p)];
        if (s == Side::any) continue;
        rows.emplace_back(p, s);
        std::vector<Rational> row = planes_[static_cast<std::size_t>(p)].a;
        Rational c = planes_[static_cast<std::size_t>(p)].c;
        if (s == Side::pos) {
          for (auto& v : row) v = -v;
          c = -c;
        }
        poly.A.push_back(std::move(row));
        poly.b.push_back(c);
      }
      if (!lp_feasible(poly, BoxQ::from(space))) {
        ++dropped_zones_;
        continue;
      }
      bounds_.push_back(precompute_coord_bounds(poly, space));
      polys_.push_back(std::move(poly));
      zone_rows_.push_back(std::move(rows));
      zones_.push_back(std::move(z));
    }
    if (zones_.empty()) throw ConfigError("piecewise event has no nonempty zone");
  }

  void check_zone_count_bound(int d) {
    // At most sum_{i<=d} C(H, i) cells of an arrangement of H hyperplanes
    // can be nonempty.
    const int h = hyperplane_count();
    unsigned long long bound = 0, term = 1;
    for (int i = 0; i <= std::min(d, h); ++i) {
      bound += term;
      if (bound > 1'000'000'000ULL) return;  // bound is vacuous at this size
      term = term * static_cast<unsigned long long>(h - i) / static_cast<unsigned long long>(i + 1);
    }
    if (static_cast<unsigned long long>(zone_count()) > bound)
      throw ConfigError("more zones than an arrangement of " + std::to_string(h) +
                        " hyperplanes admits");
  }

  void build_graph() {
    std::map<std::pair<int, std::vector<std::uint64_t>>, int> memo;
    std::vector<std::uint64_t> all((zones_.size() + 63) / 64, 0);
    for (std::size_t k = 0; k < zones_.size(); ++k) all[k / 64] |= 1ULL << (k % 64);
    root_ = build_node(0, all, memo);
    internal_nodes_ = 0;
    for (const auto& n : nodes_) internal_nodes_ += n.plane >= 0 ? 1 : 0;
    if (internal_nodes_ > 2 * zone_count())
      throw ConfigError("zone graph grew past twice the zone count; merge zone signs");
  }

  int build_node(int level, std::vector<std::uint64_t> compat,
                 std::map<std::pair<int, std::vector<std::uint64_t>>, int>& memo) {
    // Advance past hyperplanes no remaining zone distinguishes.
    const int h = hyperplane_count();
    auto zone_bit = [&](std::size_t k) { return (compat[k / 64] >> (k % 64)) & 1; };
    int count = 0;
    int only = -1;
    for (std::size_t k = 0; k < zones_.size(); ++k)
      if (zone_bit(k)) {
        ++count;
        only = static_cast<int>(k);
      }
    while (level < h && count > 1) {
      bool distinguishes = false;
      for (std::size_t k = 0; k < zones_.size() && !distinguishes; ++k)
        distinguishes = zone_bit(k) &&
                        zones_[k].signs[static_cast<std::size_t>(level)] != Side::any;
      if (distinguishes) break;
      ++level;
    }
    // A single surviving zone becomes a leaf outright: the partition scan
    // guarantees any state funneled here belongs to it.
    if (count <= 1 || level == h) {
      if (count > 1)
        throw ConfigError("zones overlap: one sign cell is claimed by several zones");
      const auto key = std::make_pair(h + 1 + only, std::vector<std::uint64_t>{});
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
      Node leaf;
      leaf.zone = only;
      nodes_.push_back(leaf);
      memo.emplace(key, static_cast<int>(nodes_.size()) - 1);
      return static_cast<int>(nodes_.size()) - 1;
    }
    const auto key = std::make_pair(level, compat);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<std::uint64_t> neg(compat.size(), 0), pos(compat.size(), 0);
    for (std::size_t k = 0; k < zones_.size(); ++k) {
      if (!zone_bit(k)) continue;
      const Side s = zones_[k].signs[static_cast<std::size_t>(level)];
      if (s != Side::pos) neg[k / 64] |= 1ULL << (k % 64);
      if (s != Side::neg) pos[k / 64] |= 1ULL << (k % 64);
    }
    Node node;
    node.plane = level;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    memo.emplace(key, self);
    const int cn = build_node(level + 1, std::move(neg), memo);
    const int cp = build_node(level + 1, std::move(pos), memo);
    nodes_[static_cast<std::size_t>(self)].child_neg = cn;
    nodes_[static_cast<std::size_t>(self)].child_pos = cp;
    return self;
  }

  // Every probed state must match exactly one zone's sign vector, and the
  // graph walk must find that zone. Exhaustive for small boxes, sampled for
  // large ones.
  void validate_partition(const StateSpace& space) {
    auto probe = [&](const State& x) {
      int member = -1;
      for (int k = 0; k < zone_count(); ++k) {
        bool inside = true;
        for (const auto& [p, side] : zone_rows_[static_cast<std::size_t>(k)]) {
          const std::int64_t v = eval_plane(p, x);
          if (v == 0)
            throw ConfigError("hyperplane " + std::to_string(p) + " passes through " +
                              to_string(x));
          if ((v < 0) != (side == Side::neg)) {
            inside = false;
            break;
          }
        }
        if (!inside) continue;
        if (member >= 0)
          throw ConfigError("zones overlap on state " + to_string(x));
        member = k;
      }
      if (member < 0) throw ConfigError("no zone contains state " + to_string(x));
      try {
        CFTP_CHECK(locate_zone(x) == member, "graph walk disagrees with zone membership");
      } catch (const InvariantError& e) {
        throw ConfigError(e.what());
      }
    };
    if (space.cardinality(100'000)) {
      for_each_state(space, probe);
    } else {
      Rng rng(0x5eed);
      for (int t = 0; t < 10'000; ++t) {
        State x{std::vector<Coord>(caps_.size())};
        for (std::size_t i = 0; i < caps_.size(); ++i)
          x.c[i] = static_cast<Coord>(rng.below(static_cast<std::uint64_t>(caps_[i]) + 1));
        probe(x);
      }
    }
  }

  void sweep(int n, const Interval& iv, EnvelopeMode mode, const StateSpace& space,
             std::vector<std::uint64_t>& marks, std::uint64_t epoch, Interval& cut,
             Interval& img, Interval& acc, bool& any) const {
    if (marks[static_cast<std::size_t>(n)] == epoch) return;
    marks[static_cast<std::size_t>(n)] = epoch;
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    if (node.plane < 0) {
      if (node.zone < 0) return;
      if (zone_interval_into(node.zone, iv, mode, cut)) {
        ashe_envelope_into(zones_[static_cast<std::size_t>(node.zone)].sub, cut, space, img);
        if (any) {
          for (std::size_t i = 0; i < img.lo.c.size(); ++i) {
            acc.lo.c[i] = std::min(acc.lo.c[i], img.lo.c[i]);
            acc.hi.c[i] = std::max(acc.hi.c[i], img.hi.c[i]);
          }
        } else {
          acc = img;
          any = true;
        }
      }
      return;
    }
    const auto& a = scaled_a_[static_cast<std::size_t>(node.plane)];
    std::int64_t box_min = 0, box_max = 0;
    for (int i = 0; i < dim(); ++i) {
      const std::int64_t ai = a[static_cast<std::size_t>(i)];
      box_min += ai * (ai > 0 ? iv.lo.c[static_cast<std::size_t>(i)]
                              : iv.hi.c[static_cast<std::size_t>(i)]);
      box_max += ai * (ai > 0 ? iv.hi.c[static_cast<std::size_t>(i)]
                              : iv.lo.c[static_cast<std::size_t>(i)]);
    }
    const std::int64_t c = scaled_c_[static_cast<std::size_t>(node.plane)];
    if (box_min <= c) sweep(node.child_neg, iv, mode, space, marks, epoch, cut, img, acc, any);
    if (box_max > c) sweep(node.child_pos, iv, mode, space, marks, epoch, cut, img, acc, any);
  }

  std::vector<Coord> caps_;
  std::vector<Hyperplane> planes_;
  std::vector<std::vector<std::int64_t>> scaled_a_;
  std::vector<std::int64_t> scaled_c_;
  std::vector<ZoneDef> zones_;
  std::vector<Polytope> polys_;
  std::vector<CoordBounds> bounds_;
  std::vector<std::vector<std::pair<int, Side>>> zone_rows_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int internal_nodes_ = 0;
  int dropped_zones_ = 0;
  Coord max_shift_ = 0;
};

}  // namespace cftp
