#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cftp/common.hpp"
#include "cftp/event.hpp"
#include "cftp/store.hpp"

namespace cftp {

enum class Algorithm { psa, epsa, split };

inline const char* name(Algorithm a) {
  switch (a) {
    case Algorithm::psa: return "psa";
    case Algorithm::epsa: return "epsa";
    case Algorithm::split: return "split";
  }
  return "?";
}

struct SamplerOptions {
  std::uint64_t horizon_cap = 1ULL << 22;
  EnvelopeMode mode = EnvelopeMode::lp_exact;
  Coord split_threshold = 0;        // 0 = largest |v_i| over the table's events
  std::uint64_t state_cap = 100'000;  // most states the split phase may track
  std::uint64_t oracle_limit = kDefaultOracleLimit;
  // When false, report the first certifying horizon of the doubling search
  // instead of binary-searching the minimal one. The sample itself is
  // identical either way; turn this off when only samples matter.
  bool refine_minimal_horizon = true;
};

struct SampleResult {
  State sample;                    // meaningful only when coupled
  bool coupled = false;
  std::uint64_t coupling_time = 0;  // minimal certifying horizon; cap value when censored
  std::uint64_t work = 0;           // transition/envelope applications spent sampling
  std::uint64_t refine_work = 0;    // extra applications spent pinning the minimal horizon
  Algorithm algorithm = Algorithm::psa;
};

// The interval-splitting phase was asked to track more states than allowed.
class SplitCapError : public std::runtime_error {
 public:
  explicit SplitCapError(const std::string& msg) : std::runtime_error(msg) {}
};

// Backward simulation from every start state at once. One composition step
// per past event; stops at the first horizon whose image is a single state,
// which is then exactly stationary.
inline SampleResult psa(const EventTable& table, BackwardEventStore& store,
                        const SamplerOptions& opts = {}) {
  const StateSpace& space = table.space();
  const auto card = space.cardinality(opts.oracle_limit);
  if (!card)
    throw OracleLimitError("state space too large to track one trajectory per state");
  const std::uint32_t n = static_cast<std::uint32_t>(*card);

  std::vector<std::uint32_t> now(n), next(n);
  for (std::uint32_t i = 0; i < n; ++i) now[i] = i;
  std::vector<std::uint32_t> step_map(n);

  SampleResult res;
  res.algorithm = Algorithm::psa;
  State x;
  for (std::uint64_t t = 0; t < opts.horizon_cap; ++t) {
    const int ev = store.at(t);
    for (std::uint32_t i = 0; i < n; ++i) {
      x = space.unrank(i);
      step_map[i] = static_cast<std::uint32_t>(space.rank(table.apply(x, ev)));
    }
    res.work += n;
    for (std::uint32_t i = 0; i < n; ++i) next[i] = now[step_map[i]];
    now.swap(next);
    bool single = true;
    for (std::uint32_t i = 1; i < n && single; ++i) single = now[i] == now[0];
    if (single) {
      res.coupled = true;
      res.coupling_time = t + 1;
      res.sample = space.unrank(now[0]);
      return res;
    }
  }
  res.coupling_time = opts.horizon_cap;
  return res;
}

namespace detail {

// Envelope sweep from the full box at the given horizon: applies the stored
// events from time -(h-1) through 0 and reports the final interval.
inline Interval envelope_sweep(const EventTable& table, BackwardEventStore& store,
                               std::uint64_t horizon, EnvelopeMode mode, SweepScratch& scratch,
                               std::uint64_t& work) {
  Interval iv{table.space().bottom(), table.space().top()};
  Interval next = iv;
  for (std::uint64_t i = horizon; i-- > 0;) {
    table.envelope_into(iv, store.at(i), mode, scratch, next);
    std::swap(iv, next);
    ++work;
  }
  return iv;
}

// Hybrid sweep: envelopes until the interval is at most `threshold` wide,
// then tracks every state of the interval exactly. Returns the surviving
// set's single state when it certifies coalescence.
struct HybridOutcome {
  bool coupled = false;
  State sample;
};

inline HybridOutcome hybrid_sweep(const EventTable& table, BackwardEventStore& store,
                                  std::uint64_t horizon, Coord threshold,
                                  const SamplerOptions& opts, SweepScratch& scratch,
                                  std::uint64_t& work) {
  const StateSpace& space = table.space();
  Interval iv{space.bottom(), space.top()};
  bool tracking = false;
  std::vector<State> traj;
  auto maybe_split = [&]() {
    if (tracking || iv.width() > threshold) return;
    const auto count = iv.count(opts.state_cap);
    if (!count)
      throw SplitCapError("interval at the splitting threshold holds more than " +
                          std::to_string(opts.state_cap) +
                          " states; raise the cap or tighten the envelopes");
    traj.clear();
    for_each_state(iv, [&](const State& x) { traj.push_back(x); });
    tracking = true;
  };
  maybe_split();
  Interval next = iv;
  for (std::uint64_t i = horizon; i-- > 0;) {
    const int ev = store.at(i);
    if (tracking) {
      for (auto& x : traj) x = table.apply(x, ev);
      work += traj.size();
      std::sort(traj.begin(), traj.end());
      traj.erase(std::unique(traj.begin(), traj.end()), traj.end());
    } else {
      table.envelope_into(iv, ev, opts.mode, scratch, next);
      std::swap(iv, next);
      ++work;
      maybe_split();
    }
  }
  HybridOutcome out;
  if (tracking ? traj.size() == 1 : iv.singleton()) {
    out.coupled = true;
    out.sample = tracking ? traj.front() : iv.lo;
  }
  return out;
}

// Doubling search plus binary refinement shared by the two envelope-driven
// samplers. `certify(horizon, work)` must be monotone in the horizon.
template <typename Certify>
SampleResult backward_search(Certify&& certify, const SamplerOptions& opts, Algorithm tag) {
  SampleResult res;
  res.algorithm = tag;
  std::uint64_t found = 0;
  for (std::uint64_t h = 1; h <= opts.horizon_cap; h *= 2) {
    auto outcome = certify(h, res.work);
    if (outcome.coupled) {
      found = h;
      res.sample = outcome.sample;
      res.coupled = true;
      break;
    }
  }
  if (!res.coupled) {
    res.coupling_time = opts.horizon_cap;
    return res;
  }
  if (!opts.refine_minimal_horizon) {
    res.coupling_time = found;
    return res;
  }
  std::uint64_t lo = found / 2 + 1, hi = found;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (certify(mid, res.refine_work).coupled)
      hi = mid;
    else
      lo = mid + 1;
  }
  res.coupling_time = lo;
  return res;
}

}  // namespace detail

// Backward envelope simulation: two bounds instead of one trajectory per
// state. Couples when the interval collapses to a point, whose law is then
// exactly stationary. The reported coupling time is the minimal horizon
// whose sweep collapses, located by a binary search after the doubling
// phase; `work` counts only the doubling-phase envelope applications.
inline SampleResult epsa(const EventTable& table, BackwardEventStore& store,
                         const SamplerOptions& opts = {}) {
  SweepScratch scratch;
  auto certify = [&](std::uint64_t h, std::uint64_t& work) {
    detail::HybridOutcome out;
    const Interval iv = detail::envelope_sweep(table, store, h, opts.mode, scratch, work);
    if (iv.singleton()) {
      out.coupled = true;
      out.sample = iv.lo;
    }
    return out;
  };
  return detail::backward_search(certify, opts, Algorithm::epsa);
}

// Envelope simulation that switches to exact per-state tracking once the
// interval is small. Certifies exactly like a restricted-start backward
// simulation, so it couples whenever plain backward simulation does.
inline SampleResult split_sample(const EventTable& table, BackwardEventStore& store,
                                 const SamplerOptions& opts = {}) {
  SweepScratch scratch;
  const Coord threshold =
      opts.split_threshold > 0 ? opts.split_threshold : std::max<Coord>(1, table.max_shift_abs());
  auto certify = [&](std::uint64_t h, std::uint64_t& work) {
    return detail::hybrid_sweep(table, store, h, threshold, opts, scratch, work);
  };
  return detail::backward_search(certify, opts, Algorithm::split);
}

inline SampleResult run_sampler(const EventTable& table, Algorithm algo, BackwardEventStore& store,
                                const SamplerOptions& opts = {}) {
  switch (algo) {
    case Algorithm::psa: return psa(table, store, opts);
    case Algorithm::epsa: return epsa(table, store, opts);
    case Algorithm::split: return split_sample(table, store, opts);
  }
  throw ConfigError("unknown algorithm");
}

// Independent replications with per-run seeds derived from the master seed.
// Workers each own their store and scratch; results land in run order.
inline std::vector<SampleResult> run_replications(const EventTable& table, Algorithm algo,
                                                  std::uint64_t n_runs, std::uint64_t master_seed,
                                                  const SamplerOptions& opts = {}, int jobs = 1) {
  std::vector<SampleResult> results(n_runs);
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::uint64_t>(n_runs, 256))));
  std::atomic<std::uint64_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t i = cursor.fetch_add(1);
      if (i >= n_runs || failed.load()) return;
      try {
        BackwardEventStore store(table, mix_seed(master_seed, i));
        results[i] = run_sampler(table, algo, store, opts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) std::rethrow_exception(error);
  return results;
}

// Replication summary for one algorithm on one model: mean, variance and a
// normal-approximation confidence interval over the coupled runs, plus an
// exact-value histogram. Runs that hit the cap are counted as censored and
// stay out of the moments.
struct CouplingStats {
  std::uint64_t runs = 0;
  std::uint64_t censored = 0;
  double mean = 0;
  double variance = 0;
  double ci95_half = 0;
  double mean_work = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> histogram;
};

inline CouplingStats summarize_coupling(const std::vector<SampleResult>& results) {
  CouplingStats st;
  st.runs = results.size();
  std::map<std::uint64_t, std::uint64_t> hist;
  double sum = 0, sum_work = 0;
  std::uint64_t coupled = 0;
  for (const auto& r : results) {
    sum_work += static_cast<double>(r.work);
    if (!r.coupled) {
      ++st.censored;
      continue;
    }
    ++coupled;
    sum += static_cast<double>(r.coupling_time);
    ++hist[r.coupling_time];
  }
  st.mean_work = st.runs ? sum_work / static_cast<double>(st.runs) : 0.0;
  if (coupled > 0) {
    st.mean = sum / static_cast<double>(coupled);
    double ss = 0;
    for (const auto& r : results)
      if (r.coupled) {
        const double d = static_cast<double>(r.coupling_time) - st.mean;
        ss += d * d;
      }
    st.variance = coupled > 1 ? ss / static_cast<double>(coupled - 1) : 0.0;
    st.ci95_half = coupled > 1 ? 1.96 * std::sqrt(st.variance / static_cast<double>(coupled)) : 0.0;
  }
  st.histogram.assign(hist.begin(), hist.end());
  return st;
}

inline CouplingStats coupling_time_stats(const EventTable& table, Algorithm algo,
                                         std::uint64_t n_runs, std::uint64_t seed,
                                         const SamplerOptions& opts = {}, int jobs = 1) {
  if (n_runs < 2) throw ConfigError("coupling-time statistics need at least two replications");
  return summarize_coupling(run_replications(table, algo, n_runs, seed, opts, jobs));
}

}  // namespace cftp
