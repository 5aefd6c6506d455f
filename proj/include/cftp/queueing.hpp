#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cftp/common.hpp"
#include "cftp/event.hpp"
#include "cftp/rational.hpp"
#include "cftp/state.hpp"
#include "cftp/zones.hpp"

namespace cftp {

// What happens when a routed customer finds its destination full: the client
// is lost, or the service restarts at the source.
enum class Policy { client_loss, restart_service };

inline constexpr int kExterior = -1;

struct QueueSpec {
  Coord capacity = 0;
  Rational service_rate = 0;
  Rational arrival_rate = 0;
  int servers = 1;
};

struct RoutingSpec {
  std::vector<std::vector<Rational>> prob;  // prob[i][j], destinations inside the network
  Policy policy = Policy::client_loss;
  std::optional<std::vector<std::vector<Policy>>> per_edge;
};

namespace detail {

inline std::vector<Coord> unit_shift(int d, int plus, int minus) {
  std::vector<Coord> v(static_cast<std::size_t>(d), 0);
  if (plus >= 0) v[static_cast<std::size_t>(plus)] += 1;
  if (minus >= 0) v[static_cast<std::size_t>(minus)] -= 1;
  return v;
}

// Blocking pairs that name the exterior describe a boundary the chain never
// sees, so they are dropped rather than stored.
inline void add_pair(std::vector<std::pair<int, int>>& pairs, int i, int j) {
  if (i >= 0 && j >= 0) pairs.emplace_back(i, j);
}

inline void check_queue_index(int d, int q, const char* what) {
  if (q < kExterior || q >= d)
    throw ConfigError(std::string(what) + " index " + std::to_string(q) + " is out of range");
}

}  // namespace detail

// Routing step from queue i to queue j (either may be the exterior): the
// unit shift e_j - e_i with the blocking pairs of the chosen policy.
inline Ashe routing_event(int d, int from, int to, Policy policy) {
  detail::check_queue_index(d, from, "source");
  detail::check_queue_index(d, to, "destination");
  if (from == to) throw ConfigError("routing event needs distinct endpoints");
  std::vector<std::pair<int, int>> pairs;
  detail::add_pair(pairs, from, to);
  if (policy == Policy::restart_service) detail::add_pair(pairs, to, from);
  return Ashe(detail::unit_shift(d, to, from), std::move(pairs));
}

// Finite-capacity Jackson network: exogenous arrivals, Markovian routing,
// client-loss or restart-service blocking. One event per positive-rate
// (source, destination) pair; every event is monotone, so envelopes reduce
// to the two endpoint trajectories.
inline EventTable build_jackson(const std::vector<QueueSpec>& queues, const RoutingSpec& routing) {
  const int d = static_cast<int>(queues.size());
  if (d == 0) throw ConfigError("network needs at least one queue");
  for (const auto& q : queues) {
    if (q.capacity < 0 || q.arrival_rate < 0 || q.service_rate < 0)
      throw ConfigError("queue capacities and rates must be nonnegative");
    if (q.servers != 1)
      throw ConfigError("multi-server queues are built from piecewise service events");
  }
  if (static_cast<int>(routing.prob.size()) != d)
    throw ConfigError("routing matrix must have one row per queue");
  auto edge_policy = [&](int i, int j) {
    if (routing.per_edge)
      return (*routing.per_edge)[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return routing.policy;
  };

  std::vector<Coord> caps;
  for (const auto& q : queues) caps.push_back(q.capacity);
  StateSpace space(caps);

  std::vector<Event> events;
  for (int j = 0; j < d; ++j)
    if (queues[static_cast<std::size_t>(j)].arrival_rate > 0)
      events.push_back({"arr_" + std::to_string(j + 1),
                        queues[static_cast<std::size_t>(j)].arrival_rate,
                        routing_event(d, kExterior, j, routing.policy)});
  for (int i = 0; i < d; ++i) {
    const auto& row = routing.prob[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != d)
      throw ConfigError("routing matrix must be square");
    Rational row_sum = 0;
    for (const auto& p : row) {
      if (p < 0) throw ConfigError("routing probabilities must be nonnegative");
      row_sum += p;
    }
    if (row_sum > 1) throw ConfigError("routing probabilities of queue " + std::to_string(i + 1) +
                                       " sum above one");
    const Rational mu = queues[static_cast<std::size_t>(i)].service_rate;
    if (mu == 0) continue;
    for (int j = 0; j < d; ++j) {
      const Rational rate = mu * row[static_cast<std::size_t>(j)];
      if (rate > 0)
        events.push_back({"svc_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), rate,
                          routing_event(d, i, j, edge_policy(i, j))});
    }
    const Rational exit_rate = mu * (1 - row_sum);
    if (exit_rate > 0)
      events.push_back({"svc_" + std::to_string(i + 1) + "_out", exit_rate,
                        routing_event(d, i, kExterior, routing.policy)});
  }
  if (events.empty()) throw ConfigError("network has no positive-rate event");
  return EventTable(std::move(space), std::move(events));
}

// Service completion at `source` duplicated to every queue in `targets`.
// The default relation blocks the whole event on an empty source and drops
// every duplicate when any target is full; pass an explicit relation for the
// other variants.
inline Ashe fork_event(int d, int source, const std::vector<int>& targets,
                       std::optional<std::vector<std::pair<int, int>>> blocking = std::nullopt) {
  detail::check_queue_index(d, source, "fork source");
  if (source == kExterior) throw ConfigError("fork source must be a queue");
  if (targets.empty()) throw ConfigError("fork needs at least one target");
  std::vector<Coord> v(static_cast<std::size_t>(d), 0);
  v[static_cast<std::size_t>(source)] -= 1;
  for (int t : targets) {
    detail::check_queue_index(d, t, "fork target");
    if (t == kExterior || t == source) throw ConfigError("fork targets must be other queues");
    v[static_cast<std::size_t>(t)] += 1;
  }
  std::vector<std::pair<int, int>> pairs;
  if (blocking) {
    pairs = std::move(*blocking);
  } else {
    for (int t : targets) detail::add_pair(pairs, source, t);
    for (int t : targets)
      for (int u : targets)
        if (t != u) detail::add_pair(pairs, t, u);
  }
  return Ashe(std::move(v), std::move(pairs));
}

// Joint service of one customer from each input buffer, merged into the
// output buffer.
inline Ashe join_event(int d, int in1, int in2, int out, Policy policy) {
  detail::check_queue_index(d, in1, "join input");
  detail::check_queue_index(d, in2, "join input");
  detail::check_queue_index(d, out, "join output");
  if (in1 == in2 || in1 == out || in2 == out || in1 == kExterior || in2 == kExterior)
    throw ConfigError("join needs two distinct input queues and a distinct output");
  std::vector<Coord> v(static_cast<std::size_t>(d), 0);
  v[static_cast<std::size_t>(in1)] -= 1;
  v[static_cast<std::size_t>(in2)] -= 1;
  if (out != kExterior) v[static_cast<std::size_t>(out)] += 1;
  std::vector<std::pair<int, int>> pairs;
  detail::add_pair(pairs, in1, out);
  detail::add_pair(pairs, in2, out);
  detail::add_pair(pairs, in1, in2);
  detail::add_pair(pairs, in2, in1);
  if (policy == Policy::restart_service) {
    detail::add_pair(pairs, out, in1);
    detail::add_pair(pairs, out, in2);
  }
  return Ashe(std::move(v), std::move(pairs));
}

// Service at queue i whose departure kills one customer of queue j when
// there is one; an empty target only blocks the kill.
inline Ashe negative_customer(int d, int i, int j) {
  detail::check_queue_index(d, i, "negative-customer source");
  detail::check_queue_index(d, j, "negative-customer target");
  if (i == kExterior || j == kExterior || i == j)
    throw ConfigError("negative customer needs two distinct queues");
  std::vector<Coord> v(static_cast<std::size_t>(d), 0);
  v[static_cast<std::size_t>(i)] -= 1;
  v[static_cast<std::size_t>(j)] -= 1;
  return Ashe(std::move(v), {{i, j}});
}

// A batch of K customers leaves `from` and L customers join `to`. The
// service fires only with a full batch present; arrivals may be partial
// under client loss and all-or-nothing under restart service.
inline Ashe batch_event(int d, int from, int to, Coord batch_out, Coord batch_in, Policy policy) {
  detail::check_queue_index(d, from, "batch source");
  detail::check_queue_index(d, to, "batch destination");
  if (from == to) throw ConfigError("batch endpoints must differ");
  if (from == kExterior && to == kExterior) throw ConfigError("batch needs at least one queue");
  if (batch_out < 1 || batch_in < 1) throw ConfigError("batch sizes must be at least one");
  std::vector<Coord> v(static_cast<std::size_t>(d), 0);
  if (from >= 0) v[static_cast<std::size_t>(from)] -= batch_out;
  if (to >= 0) v[static_cast<std::size_t>(to)] += batch_in;
  std::vector<std::pair<int, int>> pairs;
  detail::add_pair(pairs, from, from);
  detail::add_pair(pairs, from, to);
  if (policy == Policy::restart_service) {
    detail::add_pair(pairs, to, from);
    detail::add_pair(pairs, to, to);
  }
  return Ashe(std::move(v), std::move(pairs));
}

// n identical exponential servers at `queue`, modeled as n events of rate mu
// each: the k-th is the identity below occupancy k and a departure (to
// `dest`, or out of the network) at or above it. The induced departure rate
// from level x is min(x, n) * mu.
inline std::vector<Event> multiserver_events(const StateSpace& space, int queue, int dest, int n,
                                             const Rational& mu, const std::string& label_prefix) {
  const int d = space.dim();
  detail::check_queue_index(d, queue, "multi-server queue");
  if (queue == kExterior) throw ConfigError("multi-server queue must be inside the network");
  detail::check_queue_index(d, dest, "multi-server destination");
  if (dest == queue) throw ConfigError("multi-server destination must differ from the queue");
  if (n < 1 || static_cast<Coord>(n) > space.capacity(queue) + 1)
    throw ConfigError("server count must lie between 1 and capacity + 1");
  if (mu <= 0) throw ConfigError("service rate must be positive");

  std::vector<Event> events;
  for (int k = 1; k <= n; ++k) {
    std::vector<Rational> normal(static_cast<std::size_t>(d), Rational(0));
    normal[static_cast<std::size_t>(queue)] = 1;
    Hyperplane cut{std::move(normal), Rational(2 * k - 1, 2)};  // x_q <= k - 1/2
    std::vector<ZoneDef> zones;
    zones.push_back({{Side::neg}, Ashe(std::vector<Coord>(static_cast<std::size_t>(d), 0), {})});
    zones.push_back({{Side::pos}, Ashe(detail::unit_shift(d, dest, queue), {})});
    events.push_back({label_prefix + "_" + std::to_string(k), mu,
                      PiecewiseEvent(space, {std::move(cut)}, std::move(zones))});
  }
  return events;
}

namespace detail {

// 1/(4 lcm of the denominators): offsets shifted by this can never meet an
// integer evaluation of the scaled normals.
inline Rational default_epsilon(const Rational& alpha1, const Rational& alpha2) {
  mpz_class l;
  mpz_lcm(l.get_mpz_t(), alpha1.get_den().get_mpz_t(), alpha2.get_den().get_mpz_t());
  return Rational(1) / (Rational(4) * Rational(l));
}

inline Hyperplane fullness_cut(int d, int queue, Coord capacity, const Rational& eps) {
  std::vector<Rational> normal(static_cast<std::size_t>(d), Rational(0));
  normal[static_cast<std::size_t>(queue)] = 1;
  return Hyperplane{std::move(normal), Rational(capacity - 1) + eps};
}

// Negative side: joining q1 yields the shorter expected wait. A positive
// tie_eps demands q1 be better by that margin (exact ties go to q2); a
// negative tie_eps hands ties to q1.
inline Hyperplane preference_cut(int d, int q1, int q2, const Rational& alpha1,
                                 const Rational& alpha2, const Rational& tie_eps) {
  std::vector<Rational> normal(static_cast<std::size_t>(d), Rational(0));
  normal[static_cast<std::size_t>(q1)] = alpha1;
  normal[static_cast<std::size_t>(q2)] = -alpha2;
  return Hyperplane{std::move(normal), alpha2 - alpha1 - tie_eps};
}

}  // namespace detail

// Join-the-shortest-waiting-time arrival for two queues with n1 and n2
// servers: route to the queue whose expected post-arrival wait is shorter,
// overflow to the other queue when the preferred one is full, reject when
// both are. Per zone the action is a plain non-blocking arrival, so the
// envelope of this event is exact.
inline PiecewiseEvent jsw_event(const StateSpace& space, int q1, int q2, int n1, int n2,
                                const Rational& mu1, const Rational& mu2,
                                std::optional<Rational> epsilon = std::nullopt) {
  const int d = space.dim();
  detail::check_queue_index(d, q1, "jsw queue");
  detail::check_queue_index(d, q2, "jsw queue");
  if (q1 == kExterior || q2 == kExterior || q1 == q2)
    throw ConfigError("jsw routing needs two distinct queues");
  if (mu1 <= 0 || mu2 <= 0 || n1 < 1 || n2 < 1)
    throw ConfigError("jsw queues need positive rates and server counts");
  const Rational alpha1 = Rational(1) / (Rational(n1) * mu1);
  const Rational alpha2 = Rational(1) / (Rational(n2) * mu2);
  const Rational eps = epsilon ? *epsilon : detail::default_epsilon(alpha1, alpha2);
  if (eps <= 0) throw ConfigError("jsw epsilon must be positive");

  std::vector<Hyperplane> planes;
  planes.push_back(detail::preference_cut(d, q1, q2, alpha1, alpha2, eps));
  planes.push_back(detail::fullness_cut(d, q1, space.capacity(q1), eps));
  planes.push_back(detail::fullness_cut(d, q2, space.capacity(q2), eps));

  const Ashe to1(detail::unit_shift(d, q1, kExterior), {});
  const Ashe to2(detail::unit_shift(d, q2, kExterior), {});
  const Ashe stay(std::vector<Coord>(static_cast<std::size_t>(d), 0), {});
  std::vector<ZoneDef> zones;
  zones.push_back({{Side::neg, Side::neg, Side::any}, to1});
  zones.push_back({{Side::pos, Side::any, Side::neg}, to2});
  zones.push_back({{Side::neg, Side::pos, Side::neg}, to2});
  zones.push_back({{Side::pos, Side::neg, Side::pos}, to1});
  zones.push_back({{Side::any, Side::pos, Side::pos}, stay});
  return PiecewiseEvent(space, std::move(planes), std::move(zones));
}

// Exact hull of [lo, hi] restricted to the routing-by-index zone
// { x : f_k(x_k) <= f_j(x_j) for all j }, for strictly increasing index
// functions. Inverses are found by bisection over the integer domain.
inline std::optional<Interval> index_routing_interval(
    const std::vector<std::function<Rational(Coord)>>& f, int k, const Interval& iv,
    const StateSpace& space) {
  const int d = space.dim();
  if (static_cast<int>(f.size()) != d)
    throw ConfigError("one index function per queue is required");
  if (k < 0 || k >= d) throw ConfigError("routing index out of range");
  CFTP_CHECK(iv.valid(), "index routing on an invalid interval");
  for (int i = 0; i < d; ++i) {
    const Coord cap = space.capacity(i);
    const auto& fi = f[static_cast<std::size_t>(i)];
    auto bad = [&](Coord y) { return fi(y + 1) <= fi(y); };
    bool broken = false;
    if (cap <= 4096) {
      for (Coord y = 0; y < cap && !broken; ++y) broken = bad(y);
    } else {
      for (Coord t = 0; t < 4096 && !broken; ++t) broken = bad(t * (cap - 1) / 4095);
    }
    if (broken)
      throw ConfigError("index function " + std::to_string(i + 1) +
                        " is not strictly increasing");
  }

  // Largest y in [0, cap] with f(y) <= bound, or none.
  auto last_below = [](const std::function<Rational(Coord)>& fi, Coord cap,
                       const Rational& bound) -> std::optional<Coord> {
    if (fi(0) > bound) return std::nullopt;
    Coord lo = 0, hi = cap;
    while (lo < hi) {
      const Coord mid = lo + (hi - lo + 1) / 2;
      if (fi(mid) <= bound)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  };
  // Smallest y in [0, cap] with f(y) >= bound, or none.
  auto first_above = [](const std::function<Rational(Coord)>& fi, Coord cap,
                        const Rational& bound) -> std::optional<Coord> {
    if (fi(cap) < bound) return std::nullopt;
    Coord lo = 0, hi = cap;
    while (lo < hi) {
      const Coord mid = lo + (hi - lo) / 2;
      if (fi(mid) >= bound)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  };

  Rational fmin = f[0](iv.hi.c[0]);
  for (int i = 1; i < d; ++i)
    fmin = std::min(fmin, f[static_cast<std::size_t>(i)](iv.hi.c[static_cast<std::size_t>(i)]));

  Interval out = iv;
  const auto top_k = last_below(f[static_cast<std::size_t>(k)], space.capacity(k), fmin);
  if (!top_k || *top_k < iv.lo.c[static_cast<std::size_t>(k)]) return std::nullopt;
  out.hi.c[static_cast<std::size_t>(k)] = *top_k;

  const Rational floor_k = f[static_cast<std::size_t>(k)](iv.lo.c[static_cast<std::size_t>(k)]);
  for (int i = 0; i < d; ++i) {
    if (i == k) continue;
    const auto lo_i = first_above(f[static_cast<std::size_t>(i)], space.capacity(i), floor_k);
    if (!lo_i) return std::nullopt;
    auto& lo = out.lo.c[static_cast<std::size_t>(i)];
    lo = std::max(lo, *lo_i);
    if (lo > out.hi.c[static_cast<std::size_t>(i)]) return std::nullopt;
  }
  return out;
}

namespace detail {

// Rational approximation of sqrt(x) to six decimal digits.
inline Rational approx_sqrt(const Rational& x) {
  const mpz_class scale("1000000");
  mpz_class t = x.get_num() * scale * scale;
  mpz_class q = t / x.get_den();
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), q.get_mpz_t());
  Rational out(r, scale);
  out.canonicalize();
  return out;
}

}  // namespace detail

// Two copies of a two-queue system fed by one duplicated arrival stream:
// copy one routes by shortest expected wait, copy two routes at random with
// the square-root-of-rates split. A client rejected by either copy is
// dropped by both, and departures fire simultaneously in both copies.
// Queues 0,1 form the routed copy, queues 2,3 the random one.
inline EventTable build_comparison_network(const Rational& mu1, const Rational& mu2,
                                           const Rational& lambda, Coord capacity,
                                           std::optional<Rational> epsilon = std::nullopt) {
  if (mu1 <= 0 || mu2 <= 0 || lambda <= 0) throw ConfigError("rates must be positive");
  if (capacity < 1) throw ConfigError("capacity must be at least one");
  StateSpace space(std::vector<Coord>(4, capacity));
  const Rational alpha1 = Rational(1) / mu1;
  const Rational alpha2 = Rational(1) / mu2;
  const Rational eps = epsilon ? *epsilon : detail::default_epsilon(alpha1, alpha2);

  const Rational root_ratio = detail::approx_sqrt(mu2 / mu1);
  const Rational p1 = Rational(1) / (1 + root_ratio);  // random branch toward queue 2

  auto arrival = [&](int random_target) {
    const int d = 4;
    std::vector<Hyperplane> planes;
    // ties go to queue 0, so a fully empty system fills its first queues
    planes.push_back(detail::preference_cut(d, 0, 1, alpha1, alpha2, -eps));
    planes.push_back(detail::fullness_cut(d, 0, capacity, eps));
    planes.push_back(detail::fullness_cut(d, 1, capacity, eps));
    planes.push_back(detail::fullness_cut(d, random_target, capacity, eps));
    auto pair_shift = [&](int routed) {
      std::vector<Coord> v(4, 0);
      v[static_cast<std::size_t>(routed)] += 1;
      v[static_cast<std::size_t>(random_target)] += 1;
      return Ashe(std::move(v), {});
    };
    const Ashe stay(std::vector<Coord>(4, 0), {});
    std::vector<ZoneDef> zones;
    zones.push_back({{Side::neg, Side::neg, Side::any, Side::neg}, pair_shift(0)});
    zones.push_back({{Side::pos, Side::any, Side::neg, Side::neg}, pair_shift(1)});
    zones.push_back({{Side::neg, Side::pos, Side::neg, Side::neg}, pair_shift(1)});
    zones.push_back({{Side::pos, Side::neg, Side::pos, Side::neg}, pair_shift(0)});
    zones.push_back({{Side::any, Side::pos, Side::pos, Side::neg}, stay});
    zones.push_back({{Side::any, Side::any, Side::any, Side::pos}, stay});
    return PiecewiseEvent(space, std::move(planes), std::move(zones));
  };

  std::vector<Event> events;
  events.push_back({"arr_rand_1", lambda * p1, arrival(2)});
  events.push_back({"arr_rand_2", lambda * (1 - p1), arrival(3)});
  events.push_back({"dep_1", mu1, Ashe({-1, 0, -1, 0}, {})});
  events.push_back({"dep_2", mu2, Ashe({0, -1, 0, -1}, {})});
  return EventTable(std::move(space), std::move(events));
}

}  // namespace cftp
