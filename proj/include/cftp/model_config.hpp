#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cftp/common.hpp"
#include "cftp/event.hpp"
#include "cftp/queueing.hpp"
#include "cftp/rational.hpp"
#include "cftp/sampler.hpp"
#include "cftp/state.hpp"
#include "cftp/zones.hpp"

namespace cftp {

using nlohmann::json;

// Observable reported per run next to the sample: the sum of the `plus`
// components minus the sum of the `minus` components.
struct Observable {
  std::vector<int> plus, minus;  // zero-based component indices

  Coord evaluate(const State& x) const {
    Coord v = 0;
    for (int i : plus) v += x.c[static_cast<std::size_t>(i)];
    for (int i : minus) v -= x.c[static_cast<std::size_t>(i)];
    return v;
  }
};

struct SweepSpec {
  std::string pointer;               // JSON pointer into the raw config
  std::vector<json> values;          // one grid point per entry
  std::vector<std::string> labels;   // printable form of each value
};

struct Model {
  EventTable table;
  Algorithm algorithm = Algorithm::epsa;
  SamplerOptions options;
  std::optional<Observable> observable;
  std::optional<SweepSpec> sweep;
};

namespace config_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown field '" + key + "'");
  }
}

inline const json& need(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

// Rationals arrive as integers or "p/q" strings; anything else is rejected
// so model arithmetic stays exact.
inline Rational rational_of(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Rational(static_cast<long>(v.get<std::int64_t>()));
  if (v.is_string())
    if (auto r = parse_rational(v.get<std::string>())) return *r;
  fail(where, "expected an integer or a \"p/q\" rational, got " + v.dump());
}

inline std::int64_t integer_of(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer, got " + v.dump());
  return v.get<std::int64_t>();
}

inline std::vector<Rational> rational_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  std::vector<Rational> out;
  for (const auto& e : v) out.push_back(rational_of(e, where));
  return out;
}

inline std::vector<Coord> coord_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of integers");
  std::vector<Coord> out;
  for (const auto& e : v) out.push_back(integer_of(e, where));
  return out;
}

// Queue/component indices are one-based in model files, with 0 standing for
// the outside world where a builder accepts it.
inline int queue_index(const json& v, const std::string& where, int dim, bool allow_exterior) {
  const std::int64_t q = integer_of(v, where);
  if (q == 0 && allow_exterior) return kExterior;
  if (q < 1 || q > dim) fail(where, "queue index " + std::to_string(q) + " out of range");
  return static_cast<int>(q - 1);
}

inline std::vector<std::pair<int, int>> blocking_pairs(const json& v, const std::string& where,
                                                       int dim) {
  if (!v.is_array()) fail(where, "expected an array of [i, j] pairs");
  std::vector<std::pair<int, int>> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2) fail(where, "expected [i, j] pairs");
    out.emplace_back(queue_index(e[0], where, dim, false),
                     queue_index(e[1], where, dim, false));
  }
  return out;
}

inline Policy policy_of(const json& v, const std::string& where) {
  const std::string s = v.is_string() ? v.get<std::string>() : "";
  if (s == "CL") return Policy::client_loss;
  if (s == "RS") return Policy::restart_service;
  fail(where, "policy must be \"CL\" or \"RS\"");
}

inline Side side_of(const json& v, const std::string& where) {
  const std::string s = v.is_string() ? v.get<std::string>() : "";
  if (s == "neg") return Side::neg;
  if (s == "pos") return Side::pos;
  if (s == "any") return Side::any;
  fail(where, "zone sign must be \"neg\", \"pos\" or \"any\"");
}

inline Ashe ashe_of(const json& e, const std::string& where, int dim) {
  std::vector<Coord> shift = coord_vector(need(e, where, "shift"), where + ".shift");
  if (static_cast<int>(shift.size()) != dim) fail(where, "shift length must match capacities");
  std::vector<std::pair<int, int>> pairs;
  if (e.contains("blocking")) pairs = blocking_pairs(e["blocking"], where + ".blocking", dim);
  return Ashe(std::move(shift), std::move(pairs));
}

inline PiecewiseEvent piecewise_of(const json& e, const std::string& where,
                                   const StateSpace& space) {
  const json& hp = need(e, where, "hyperplanes");
  if (!hp.is_array() || hp.empty()) fail(where, "expected a nonempty hyperplane array");
  std::vector<Hyperplane> planes;
  for (const auto& h : hp) {
    check_keys(h, where + ".hyperplanes", {"normal", "offset"});
    Hyperplane plane{rational_vector(need(h, where, "normal"), where + ".normal"),
                     rational_of(need(h, where, "offset"), where + ".offset")};
    if (static_cast<int>(plane.a.size()) != space.dim())
      fail(where, "hyperplane normal length must match capacities");
    planes.push_back(std::move(plane));
  }
  const json& zs = need(e, where, "zones");
  if (!zs.is_array() || zs.empty()) fail(where, "expected a nonempty zone array");
  std::vector<ZoneDef> zones;
  for (const auto& z : zs) {
    check_keys(z, where + ".zones", {"signs", "shift", "blocking"});
    const json& signs = need(z, where + ".zones", "signs");
    if (!signs.is_array() || signs.size() != planes.size())
      fail(where, "each zone needs one sign per hyperplane");
    ZoneDef def{{}, ashe_of(z, where + ".zones", space.dim())};
    for (const auto& s : signs) def.signs.push_back(side_of(s, where + ".zones.signs"));
    zones.push_back(std::move(def));
  }
  return PiecewiseEvent(space, std::move(planes), std::move(zones));
}

inline std::string label_of(const json& e, const std::string& where) {
  const json& l = need(e, where, "label");
  if (!l.is_string() || l.get<std::string>().empty()) fail(where, "label must be a string");
  return l.get<std::string>();
}

inline void expand_event(const json& e, const StateSpace& space, std::vector<Event>& events,
                         std::optional<Observable>& observable, int index) {
  const std::string where = "events[" + std::to_string(index) + "]";
  if (!e.is_object()) fail(where, "expected an object");
  const std::string kind = need(e, where, "kind").is_string() ? e["kind"].get<std::string>() : "";
  const int d = space.dim();
  auto rate_of = [&](const json& obj) { return rational_of(need(obj, where, "rate"), where); };

  if (kind == "ashe") {
    check_keys(e, where, {"kind", "label", "rate", "shift", "blocking"});
    events.push_back({label_of(e, where), rate_of(e), ashe_of(e, where, d)});
  } else if (kind == "piecewise") {
    check_keys(e, where, {"kind", "label", "rate", "hyperplanes", "zones"});
    events.push_back({label_of(e, where), rate_of(e), piecewise_of(e, where, space)});
  } else if (kind == "jackson") {
    check_keys(e, where, {"kind", "arrivals", "services", "routing", "policy", "policies"});
    std::vector<QueueSpec> qs(static_cast<std::size_t>(d));
    const auto arrivals = rational_vector(need(e, where, "arrivals"), where + ".arrivals");
    const auto services = rational_vector(need(e, where, "services"), where + ".services");
    if (static_cast<int>(arrivals.size()) != d || static_cast<int>(services.size()) != d)
      fail(where, "arrivals and services need one rate per queue");
    for (int i = 0; i < d; ++i) {
      qs[static_cast<std::size_t>(i)].capacity = space.capacity(i);
      qs[static_cast<std::size_t>(i)].arrival_rate = arrivals[static_cast<std::size_t>(i)];
      qs[static_cast<std::size_t>(i)].service_rate = services[static_cast<std::size_t>(i)];
    }
    RoutingSpec routing;
    const json& rows = need(e, where, "routing");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d)
      fail(where, "routing needs one row per queue");
    for (const auto& row : rows)
      routing.prob.push_back(rational_vector(row, where + ".routing"));
    if (e.contains("policy")) routing.policy = policy_of(e["policy"], where + ".policy");
    if (e.contains("policies")) {
      std::vector<std::vector<Policy>> per;
      for (const auto& row : e["policies"]) {
        per.emplace_back();
        for (const auto& p : row) per.back().push_back(policy_of(p, where + ".policies"));
      }
      routing.per_edge = std::move(per);
    }
    const EventTable sub = build_jackson(qs, routing);
    for (int i = 0; i < sub.size(); ++i) events.push_back(sub.event(i));
  } else if (kind == "fork") {
    check_keys(e, where, {"kind", "label", "rate", "source", "targets", "blocking"});
    const int source = queue_index(need(e, where, "source"), where, d, false);
    std::vector<int> targets;
    for (const auto& t : need(e, where, "targets"))
      targets.push_back(queue_index(t, where + ".targets", d, false));
    std::optional<std::vector<std::pair<int, int>>> blocking;
    if (e.contains("blocking")) blocking = blocking_pairs(e["blocking"], where, d);
    events.push_back({label_of(e, where), rate_of(e), fork_event(d, source, targets, blocking)});
  } else if (kind == "join") {
    check_keys(e, where, {"kind", "label", "rate", "inputs", "output", "policy"});
    const json& in = need(e, where, "inputs");
    if (!in.is_array() || in.size() != 2) fail(where, "join needs exactly two inputs");
    events.push_back({label_of(e, where), rate_of(e),
                      join_event(d, queue_index(in[0], where, d, false),
                                 queue_index(in[1], where, d, false),
                                 queue_index(need(e, where, "output"), where, d, true),
                                 policy_of(need(e, where, "policy"), where))});
  } else if (kind == "negative") {
    check_keys(e, where, {"kind", "label", "rate", "from", "to"});
    events.push_back({label_of(e, where), rate_of(e),
                      negative_customer(d, queue_index(need(e, where, "from"), where, d, false),
                                        queue_index(need(e, where, "to"), where, d, false))});
  } else if (kind == "batch") {
    check_keys(e, where, {"kind", "label", "rate", "from", "to", "k", "l", "policy"});
    events.push_back(
        {label_of(e, where), rate_of(e),
         batch_event(d, queue_index(need(e, where, "from"), where, d, true),
                     queue_index(need(e, where, "to"), where, d, true),
                     integer_of(need(e, where, "k"), where), integer_of(need(e, where, "l"), where),
                     policy_of(need(e, where, "policy"), where))});
  } else if (kind == "multiserver") {
    check_keys(e, where, {"kind", "label", "rate", "queue", "to", "servers"});
    const auto batch = multiserver_events(
        space, queue_index(need(e, where, "queue"), where, d, false),
        queue_index(need(e, where, "to"), where, d, true),
        static_cast<int>(integer_of(need(e, where, "servers"), where)), rate_of(e),
        label_of(e, where));
    for (const auto& ev : batch) events.push_back(ev);
  } else if (kind == "jsw") {
    check_keys(e, where, {"kind", "label", "rate", "queues", "servers", "mu", "epsilon"});
    const json& qpair = need(e, where, "queues");
    const json& servers = need(e, where, "servers");
    const json& mu = need(e, where, "mu");
    if (!qpair.is_array() || qpair.size() != 2 || !servers.is_array() || servers.size() != 2 ||
        !mu.is_array() || mu.size() != 2)
      fail(where, "jsw needs two queues, two server counts and two rates");
    std::optional<Rational> eps;
    if (e.contains("epsilon")) eps = rational_of(e["epsilon"], where + ".epsilon");
    events.push_back(
        {label_of(e, where), rate_of(e),
         jsw_event(space, queue_index(qpair[0], where, d, false),
                   queue_index(qpair[1], where, d, false),
                   static_cast<int>(integer_of(servers[0], where)),
                   static_cast<int>(integer_of(servers[1], where)), rational_of(mu[0], where),
                   rational_of(mu[1], where), eps)});
  } else if (kind == "comparison") {
    check_keys(e, where, {"kind", "lambda", "mu1", "mu2", "epsilon"});
    if (d != 4) fail(where, "a comparison model needs four capacities");
    for (int i = 1; i < 4; ++i)
      if (space.capacity(i) != space.capacity(0))
        fail(where, "a comparison model needs equal capacities");
    std::optional<Rational> eps;
    if (e.contains("epsilon")) eps = rational_of(e["epsilon"], where + ".epsilon");
    const EventTable sub = build_comparison_network(
        rational_of(need(e, where, "mu1"), where), rational_of(need(e, where, "mu2"), where),
        rational_of(need(e, where, "lambda"), where), space.capacity(0), eps);
    for (int i = 0; i < sub.size(); ++i) events.push_back(sub.event(i));
    if (!observable) observable = Observable{{2, 3}, {0, 1}};
  } else {
    fail(where, "unknown event kind '" + kind + "'");
  }
}

}  // namespace config_detail

inline Model parse_model(const json& root) {
  using namespace config_detail;
  if (!root.is_object()) throw ConfigError("model file must hold a JSON object");
  check_keys(root, "model",
             {"schema", "capacities", "events", "sampler", "observable", "sweep", "comment"});
  if (integer_of(need(root, "model", "schema"), "schema") != 1)
    throw ConfigError("unsupported schema version (expected 1)");

  StateSpace space(coord_vector(need(root, "model", "capacities"), "capacities"));
  const json& evs = need(root, "model", "events");
  if (!evs.is_array() || evs.empty()) throw ConfigError("events: expected a nonempty array");
  std::vector<Event> events;
  std::optional<Observable> observable;
  int index = 0;
  for (const auto& e : evs) expand_event(e, space, events, observable, index++);

  Algorithm algo = Algorithm::epsa;
  SamplerOptions opts;
  if (root.contains("sampler")) {
    const json& s = root["sampler"];
    check_keys(s, "sampler",
               {"algorithm", "mode", "horizon_cap", "split_threshold", "state_cap",
                "oracle_limit", "refine_horizon"});
    if (s.contains("algorithm")) {
      const std::string a = s["algorithm"].get<std::string>();
      if (a == "psa")
        algo = Algorithm::psa;
      else if (a == "epsa")
        algo = Algorithm::epsa;
      else if (a == "split")
        algo = Algorithm::split;
      else
        fail("sampler.algorithm", "expected psa, epsa or split");
    }
    if (s.contains("mode")) {
      const std::string m = s["mode"].get<std::string>();
      if (m == "lp")
        opts.mode = EnvelopeMode::lp_exact;
      else if (m == "fast")
        opts.mode = EnvelopeMode::minkowski_fast;
      else
        fail("sampler.mode", "expected lp or fast");
    }
    if (s.contains("horizon_cap"))
      opts.horizon_cap = static_cast<std::uint64_t>(integer_of(s["horizon_cap"], "sampler"));
    if (s.contains("split_threshold"))
      opts.split_threshold = integer_of(s["split_threshold"], "sampler");
    if (s.contains("state_cap"))
      opts.state_cap = static_cast<std::uint64_t>(integer_of(s["state_cap"], "sampler"));
    if (s.contains("oracle_limit"))
      opts.oracle_limit = static_cast<std::uint64_t>(integer_of(s["oracle_limit"], "sampler"));
    if (s.contains("refine_horizon")) {
      if (!s["refine_horizon"].is_boolean()) fail("sampler.refine_horizon", "expected a boolean");
      opts.refine_minimal_horizon = s["refine_horizon"].get<bool>();
    }
  }

  if (root.contains("observable")) {
    const json& o = root["observable"];
    check_keys(o, "observable", {"plus", "minus"});
    Observable ob;
    for (const auto& i : need(o, "observable", "plus"))
      ob.plus.push_back(queue_index(i, "observable.plus", space.dim(), false));
    for (const auto& i : need(o, "observable", "minus"))
      ob.minus.push_back(queue_index(i, "observable.minus", space.dim(), false));
    observable = std::move(ob);
  }

  std::optional<SweepSpec> sweep;
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    check_keys(s, "sweep", {"pointer", "values"});
    SweepSpec spec;
    spec.pointer = need(s, "sweep", "pointer").get<std::string>();
    for (const auto& v : need(s, "sweep", "values")) {
      spec.values.push_back(v);
      spec.labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    if (spec.values.empty()) fail("sweep.values", "expected at least one value");
    try {
      (void)root.at(json::json_pointer(spec.pointer));
    } catch (const json::exception&) {
      fail("sweep.pointer", "'" + spec.pointer + "' does not name a config field");
    }
    sweep = std::move(spec);
  }

  return Model{EventTable(std::move(space), std::move(events)), algo, opts,
               std::move(observable), std::move(sweep)};
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return root;
}

inline Model load_model(const std::string& path) { return parse_model(load_json(path)); }

// One patched copy of the raw config per sweep grid point.
inline std::vector<json> expand_sweep(const json& root) {
  const Model base = parse_model(root);
  if (!base.sweep) throw ConfigError("model has no sweep section");
  std::vector<json> points;
  for (const auto& v : base.sweep->values) {
    json patched = root;
    patched[json::json_pointer(base.sweep->pointer)] = v;
    patched.erase("sweep");
    points.push_back(std::move(patched));
  }
  return points;
}

}  // namespace cftp
