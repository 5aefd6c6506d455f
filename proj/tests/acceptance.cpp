// Acceptance suite: one check per numbered criterion, each printing a single
// PASS/FAIL line. Run with no arguments for the whole battery or with an
// index to run one criterion:
//
//   acceptance_tests [N] [path-to-cli-binary] [path-to-configs-dir]
//
// The CLI binary and configs directory are only needed by criterion 10.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cftp/cftp.hpp"
#include "cftp/experiment.hpp"
#include "cftp/model_config.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"

using namespace cftp;

namespace {

std::string g_cli_path;
std::string g_configs_dir = "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- shared model builders ------------------------------------------------

EventTable mm1(Coord capacity, const Rational& lambda, const Rational& mu) {
  StateSpace space({capacity});
  std::vector<Event> events;
  events.push_back({"arr", lambda, Ashe({1}, {})});
  events.push_back({"dep", mu, Ashe({-1}, {})});
  return EventTable(std::move(space), std::move(events));
}

EventTable tandem2() {
  std::vector<QueueSpec> qs(2);
  qs[0] = {2, Rational(1), Rational(1), 1};
  qs[1] = {2, Rational(1), Rational(0), 1};
  RoutingSpec routing;
  routing.prob = {{Rational(0), Rational(1)}, {Rational(0), Rational(0)}};
  return build_jackson(qs, routing);
}

EventTable negative_pair() {
  StateSpace space({4, 4});
  std::vector<Event> events;
  events.push_back({"arr_1", Rational(1), Ashe({1, 0}, {})});
  events.push_back({"arr_2", Rational(1), Ashe({0, 1}, {})});
  events.push_back({"kill", Rational(1), negative_customer(2, 0, 1)});
  events.push_back({"dep_2", Rational(1), Ashe({0, -1}, {})});
  return EventTable(std::move(space), std::move(events));
}

EventTable batch_queue(Coord capacity, const Rational& rate2, const Rational& rate3) {
  StateSpace space({capacity});
  std::vector<Event> events;
  if (rate2 > 0)
    events.push_back(
        {"arr_2", rate2, batch_event(1, kExterior, 0, 1, 2, Policy::restart_service)});
  if (rate3 > 0)
    events.push_back(
        {"arr_3", rate3, batch_event(1, kExterior, 0, 1, 3, Policy::restart_service)});
  events.push_back({"dep", Rational(1), Ashe({-1}, {})});
  return EventTable(std::move(space), std::move(events));
}

// Negative-customer network with 15 states per queue; the second arrival
// rate is the sweep parameter.
EventTable neg_network(const Rational& lambda2) {
  StateSpace space({14, 14});
  std::vector<Event> events;
  events.push_back({"arr_1", Rational(1), Ashe({1, 0}, {})});
  events.push_back({"arr_2", lambda2, Ashe({0, 1}, {})});
  events.push_back({"kill", Rational(1), negative_customer(2, 0, 1)});
  events.push_back({"dep_2", Rational(1), Ashe({0, -1}, {})});
  return EventTable(std::move(space), std::move(events));
}

double tv_against_stationary(const EventTable& table, Algorithm algo, std::uint64_t n,
                             std::uint64_t seed, const SamplerOptions& opts = {}) {
  const auto pi = stationary_solve(table);
  const auto results = run_replications(table, algo, n, seed, opts, 0);
  std::map<std::uint64_t, std::uint64_t> hist;
  for (const auto& r : results) {
    if (!r.coupled) throw std::runtime_error("replication failed to couple");
    ++hist[table.space().rank(r.sample)];
  }
  return oracle::tv_distance(hist, pi, n);
}

// ---- criteria -------------------------------------------------------------

// Exact envelopes: the one-step interval envelope equals the brute-force
// hull of the pointwise images on a large random corpus.
Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(10101);
  std::uint64_t mismatches = 0;
  const int cases = 100'000;
  for (int t = 0; t < cases; ++t) {
    const StateSpace space = fuzz::draw_space(rng);
    const Ashe a = fuzz::draw_ashe(rng, space);
    const Interval iv = fuzz::draw_interval(rng, space);
    if (ashe_envelope(a, iv, space) != oracle::envelope_by_enumeration(a, iv, space))
      ++mismatches;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << cases << " cases, " << mismatches << " mismatches, " << secs << " s";
  return {mismatches == 0 && secs <= 60.0, d.str()};
}

// Perfect samples match the exact stationary law in total variation.
Outcome criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    std::string name;
    EventTable table;
  };
  std::vector<Case> cases;
  cases.push_back({"mm1 rho=1/2", mm1(3, Rational(1, 2), 1)});
  cases.push_back({"mm1 rho=1", mm1(3, 1, 1)});
  cases.push_back({"mm1 rho=2", mm1(3, 2, 1)});
  cases.push_back({"tandem", tandem2()});
  cases.push_back({"negative", negative_pair()});
  cases.push_back({"batch", batch_queue(10, Rational(49, 500), Rational(51, 500))});
  const std::uint64_t n = 100'000;
  std::ostringstream d;
  bool pass = true;
  std::uint64_t seed = 90'000;
  for (const auto& c : cases) {
    for (const Algorithm algo : {Algorithm::psa, Algorithm::epsa, Algorithm::split}) {
      const double tv = tv_against_stationary(c.table, algo, n, seed += 17);
      pass = pass && tv <= 0.02;
      d << c.name << "/" << name(algo) << " tv=" << tv << " ";
    }
  }
  const double secs = seconds_since(t0);
  d << "(" << secs << " s)";
  return {pass && secs <= 600.0, d.str()};
}

// On a monotone network the envelope run and the full backward simulation
// couple at exactly the same horizon, replication by replication.
Outcome criterion_3() {
  const EventTable net = tandem2();
  const std::uint64_t n = 10'000;
  std::uint64_t agree = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t seed = mix_seed(333, i);
    BackwardEventStore sp(net, seed), se(net, seed);
    const auto a = psa(net, sp);
    const auto b = epsa(net, se);
    if (a.coupled && b.coupled && a.coupling_time == b.coupling_time &&
        a.sample == b.sample)
      ++agree;
  }
  std::ostringstream d;
  d << agree << "/" << n << " replications agree";
  return {agree == n, d.str()};
}

// Width-growth bounds hold everywhere, and the straddling batch case
// achieves its bound exactly.
Outcome criterion_4() {
  Rng rng(444);
  std::uint64_t violations = 0, tight_hits = 0;
  const int cases = 100'000;
  for (int t = 0; t < cases; ++t) {
    const StateSpace space = fuzz::draw_space(rng);
    const Ashe a = fuzz::draw_ashe(rng, space);
    const Interval iv = fuzz::draw_interval(rng, space);
    const auto rep = expansion_bound_check(a, iv, space);
    if (!rep.all_held()) ++violations;
    if (rep.self_only_applicable && rep.straddling && rep.width_after == rep.self_only_bound &&
        rep.width_after > rep.width_before)
      ++tight_hits;
  }
  // the canonical tight case: a straddling singleton-width interval grows to
  // the batch size minus one
  StateSpace line({9});
  const auto tight =
      expansion_bound_check(Ashe({-3}, {{0, 0}}), Interval{State{{2}}, State{{3}}}, line);
  const bool canonical = tight.all_held() && tight.width_after == 2 && tight.self_only_bound == 2;
  std::ostringstream d;
  d << cases << " cases, " << violations << " violations, " << tight_hits
    << " exactly tight, canonical " << (canonical ? "ok" : "broken");
  return {violations == 0 && tight_hits > 0 && canonical, d.str()};
}

// Piecewise envelopes with exact zone intersections are exact for the
// shortest-wait arrival and for a one-dimensional threshold event.
Outcome criterion_5() {
  std::uint64_t checked = 0, mismatches = 0;
  {
    StateSpace space({6, 6});
    const auto jsw = jsw_event(space, 0, 1, 2, 1, Rational(1), Rational(1), Rational(1, 4));
    std::vector<std::uint64_t> marks;
    std::uint64_t epoch = 0;
    for_each_state(space, [&](const State& lo) {
      for_each_state(Interval{lo, space.top()}, [&](const State& hi) {
        if (!leq(lo, hi)) return;
        const Interval iv{lo, hi};
        ++checked;
        std::vector<State> images;
        for_each_state(iv, [&](const State& x) { images.push_back(jsw.apply(x, space)); });
        if (jsw.envelope(iv, EnvelopeMode::lp_exact, space, marks, epoch) !=
            oracle::hull_of(images))
          ++mismatches;
      });
    });
  }
  std::uint64_t checked1 = 0, mismatches1 = 0;
  {
    StateSpace line({9});
    const auto events = multiserver_events(line, 0, kExterior, 3, Rational(1), "svc");
    const auto& pw = std::get<PiecewiseEvent>(events[2].semantics);
    std::vector<std::uint64_t> marks;
    std::uint64_t epoch = 0;
    for (Coord lo = 0; lo <= 9; ++lo)
      for (Coord hi = lo; hi <= 9; ++hi) {
        const Interval iv{State{{lo}}, State{{hi}}};
        ++checked1;
        std::vector<State> images;
        for_each_state(iv, [&](const State& x) { images.push_back(pw.apply(x, line)); });
        if (pw.envelope(iv, EnvelopeMode::lp_exact, line, marks, epoch) !=
            oracle::hull_of(images))
          ++mismatches1;
      }
  }
  std::ostringstream d;
  d << "shortest-wait: " << checked << " intervals, " << mismatches
    << " mismatches; threshold: " << checked1 << " intervals, " << mismatches1 << " mismatches";
  return {mismatches == 0 && mismatches1 == 0, d.str()};
}

// The constant-time emptiness test agrees with exact rational feasibility.
Outcome criterion_6() {
  Rng rng(666);
  std::uint64_t cases = 0, disagreements = 0;
  std::string first;
  while (cases < 10'000) {
    const StateSpace space = fuzz::draw_space(rng);
    const int d = space.dim();
    Polytope p;
    const int h = static_cast<int>(rng.below(5));
    for (int r = 0; r < h; ++r) {
      std::vector<Rational> row(static_cast<std::size_t>(d));
      bool zero = true;
      for (auto& a : row) {
        a = Rational(fuzz::draw_coord(rng, -3, 3));
        zero = zero && a == 0;
      }
      if (zero) row[rng.below(static_cast<std::uint64_t>(d))] = 1;
      p.A.push_back(std::move(row));
      p.b.push_back(Rational(fuzz::draw_coord(rng, -24, 48), 4));
    }
    if (!lp_feasible(p, BoxQ::from(space))) continue;  // dropped at model build
    const CoordBounds cb = precompute_coord_bounds(p, space);
    const Interval iv = fuzz::draw_interval(rng, space);
    ++cases;
    const bool fast = minkowski_intersects(p, cb, iv);
    const bool exact = lp_feasible(p, BoxQ::from(iv));
    if (fast != exact && first.empty()) {
      std::ostringstream ex;
      ex << " first: dim " << d << " rows " << h << " iv " << to_string(iv) << " fast " << fast;
      first = ex.str();
    }
    disagreements += fast != exact;
  }
  std::ostringstream d;
  d << cases << " cases, " << disagreements << " disagreements" << first;
  return {disagreements == 0, d.str()};
}

// Envelope versus full backward simulation on the negative-customer
// network: bounded coupling-time ratio and a tenfold work advantage.
Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t n = 2'000;
  std::ostringstream d;
  bool pass = true;
  int point = 0;
  for (const Rational& lambda2 :
       {Rational(1, 5), Rational(3, 5), Rational(1), Rational(7, 5), Rational(9, 5)}) {
    const EventTable net = neg_network(lambda2);
    const std::uint64_t seed = 7'000 + static_cast<std::uint64_t>(point);
    const auto ep = run_replications(net, Algorithm::epsa, n, seed, {}, 0);
    const auto ps = run_replications(net, Algorithm::psa, n, seed, {}, 0);
    double tau_e = 0, tau = 0, work_e = 0, work_p = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!ep[i].coupled || !ps[i].coupled) {
        pass = false;
        continue;
      }
      tau_e += static_cast<double>(ep[i].coupling_time);
      tau += static_cast<double>(ps[i].coupling_time);
      work_e += static_cast<double>(ep[i].work);
      work_p += static_cast<double>(ps[i].work);
    }
    const double ratio = tau_e / tau;
    const double work_ratio = work_e / work_p;
    d << "l2=" << to_string(lambda2) << " tau_ratio=" << ratio << " work_ratio=" << work_ratio
      << "; ";
    pass = pass && ratio >= 1.0 && ratio <= 6.0 && work_ratio <= 0.1;
    ++point;
  }
  const double secs = seconds_since(t0);
  d << "(" << secs << " s)";
  return {pass && secs <= 900.0, d.str()};
}

// Batch queues: envelope coupling explodes past saturation, and interval
// splitting restores fast coupling; censored runs count at the cap.
Outcome criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  SamplerOptions opts;
  opts.horizon_cap = 1ULL << 18;
  const std::uint64_t n = 500;
  auto capped_mean = [&](const std::vector<SampleResult>& rs) {
    double sum = 0;
    for (const auto& r : rs) sum += static_cast<double>(r.coupling_time);
    return sum / static_cast<double>(rs.size());
  };
  // (+2,-1): mean envelope coupling time across saturation
  const double sub = capped_mean(
      run_replications(batch_queue(20, Rational(1, 2), 0), Algorithm::epsa, n, 88, opts, 0));
  const double super = capped_mean(
      run_replications(batch_queue(20, Rational(6, 5), 0), Algorithm::epsa, n, 88, opts, 0));
  // (+2,+3,-1) past saturation: splitting versus envelopes
  const EventTable mixed = batch_queue(20, Rational(147, 250), Rational(153, 250));
  const double epsa_mean =
      capped_mean(run_replications(mixed, Algorithm::epsa, n, 99, opts, 0));
  const double split_mean =
      capped_mean(run_replications(mixed, Algorithm::split, n, 99, opts, 0));
  std::ostringstream d;
  d << "envelope mean " << sub << " @load1 vs " << super << " @load2.4 (ratio "
    << super / sub << "); mixed-batch epsa " << epsa_mean << " vs split " << split_mean
    << " (" << seconds_since(t0) << " s)";
  const bool pass = super > 5.0 * sub && split_mean <= epsa_mean / 10.0;
  return {pass && seconds_since(t0) <= 900.0, d.str()};
}

// The shortest-wait policy beats random square-root routing at every mix of
// service rates, with confidence intervals clear of zero at the extremes.
Outcome criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t n = 2'000;
  std::ostringstream d;
  bool pass = true;
  for (const Rational& rho : {Rational(3, 5), Rational(1)}) {
    for (int ai = 1; ai <= 9; ++ai) {
      const Rational a(ai, 10);
      const Rational mu = Rational(1) / rho;  // lambda = 1
      const Rational mu1 = a * mu, mu2 = (1 - a) * mu;
      const EventTable net = build_comparison_network(mu1, mu2, Rational(1), 10);
      Model model{net, Algorithm::epsa, SamplerOptions{}, Observable{{2, 3}, {0, 1}},
                  std::nullopt};
      model.options.mode = EnvelopeMode::minkowski_fast;
      model.options.horizon_cap = 1ULL << 22;
      model.options.refine_minimal_horizon = false;  // only the samples matter here
      const auto res =
          run_experiment(model, Algorithm::epsa, n, 9'000 + static_cast<std::uint64_t>(ai), 0);
      double sum = 0, count = 0;
      for (const auto& r : res.records) {
        if (!r.observable) {
          pass = false;
          continue;
        }
        sum += static_cast<double>(*r.observable);
        count += 1;
      }
      const double mean = sum / count;
      double ss = 0;
      for (const auto& r : res.records)
        if (r.observable) ss += (static_cast<double>(*r.observable) - mean) *
                                (static_cast<double>(*r.observable) - mean);
      const double ci = 1.96 * std::sqrt(ss / (count - 1) / count);
      pass = pass && mean >= 0.0;
      if (ai == 1 || ai == 9) pass = pass && mean - ci > 0.0;
      d << "rho=" << to_string(rho) << ",a=0." << ai << ": " << mean << "+-" << ci << "; ";
    }
  }
  const double secs = seconds_since(t0);
  d << "(" << secs << " s)";
  return {pass && secs <= 1200.0, d.str()};
}

// The command-line driver writes byte-identical CSV for identical inputs.
Outcome criterion_10() {
  if (g_cli_path.empty()) return {false, "no CLI binary path given"};
  const std::string model = g_configs_dir + "/mm1_3.json";
  const std::string out1 = "acceptance_run1.csv", out2 = "acceptance_run2.csv";
  auto run_once = [&](const std::string& out) {
    const std::string cmd = g_cli_path + " run --model " + model +
                            " --algo epsa --samples 500 --seed 42 --jobs 2 --out " + out +
                            " 2>/dev/null";
    return std::system(cmd.c_str());
  };
  if (run_once(out1) != 0 || run_once(out2) != 0) return {false, "cli runs failed"};
  std::ifstream f1(out1, std::ios::binary), f2(out2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  std::remove(out1.c_str());
  std::remove(out2.c_str());
  if (b1.str().empty()) return {false, "empty CSV"};
  const bool same = b1.str() == b2.str();
  std::ostringstream d;
  d << b1.str().size() << " bytes, " << (same ? "identical" : "different");
  return {same, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  if (argc > 2) g_cli_path = argv[2];
  if (argc > 3) g_configs_dir = argv[3];

  const std::vector<std::function<Outcome()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

  int failures = 0;
  for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
    if (which != 0 && which != i) continue;
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d: %s — %s\n", i, out.pass ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
