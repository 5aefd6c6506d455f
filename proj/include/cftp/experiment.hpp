#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "cftp/model_config.hpp"
#include "cftp/sampler.hpp"

namespace cftp {

struct RunRecord {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  SampleResult result;
  std::optional<Coord> observable;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  CouplingStats stats;
  std::uint64_t censored() const { return stats.censored; }
};

inline ExperimentResult run_experiment(const Model& model, Algorithm algo, std::uint64_t n_runs,
                                       std::uint64_t master_seed, int jobs = 0) {
  ExperimentResult out;
  const auto results = run_replications(model.table, algo, n_runs, master_seed, model.options,
                                        jobs);
  out.records.reserve(results.size());
  for (std::uint64_t i = 0; i < results.size(); ++i) {
    RunRecord rec;
    rec.run_id = i;
    rec.seed = mix_seed(master_seed, i);
    rec.result = results[i];
    if (model.observable && results[i].coupled)
      rec.observable = model.observable->evaluate(results[i].sample);
    out.records.push_back(std::move(rec));
  }
  out.stats = summarize_coupling(results);
  return out;
}

namespace csv_detail {

// Locale-independent shortest-roundtrip formatting.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

struct MeanCi {
  double mean = 0, ci = 0;
  std::uint64_t n = 0;
};

template <typename Get>
MeanCi moments(const std::vector<RunRecord>& records, Get&& get) {
  MeanCi m;
  double sum = 0;
  for (const auto& r : records) {
    if (const auto v = get(r)) {
      sum += *v;
      ++m.n;
    }
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0;
  for (const auto& r : records)
    if (const auto v = get(r)) ss += (*v - m.mean) * (*v - m.mean);
  if (m.n > 1)
    m.ci = 1.96 * std::sqrt(ss / static_cast<double>(m.n - 1) / static_cast<double>(m.n));
  return m;
}

}  // namespace csv_detail

// Per-run rows followed by a mean row and a 95% confidence half-width row.
// Censored runs keep their cap-valued coupling time but contribute neither
// to the means nor to the sample columns.
inline void write_run_csv(std::ostream& os, const Model& model, const ExperimentResult& res) {
  using csv_detail::fmt;
  const int d = model.table.space().dim();
  os << "run_id,seed,coupling_time,work,censored";
  for (int i = 0; i < d; ++i) os << ",x_" << (i + 1);
  if (model.observable) os << ",observable";
  os << "\n";
  for (const auto& r : res.records) {
    os << r.run_id << "," << r.seed << "," << r.result.coupling_time << "," << r.result.work
       << "," << (r.result.coupled ? 0 : 1);
    for (int i = 0; i < d; ++i) {
      os << ",";
      if (r.result.coupled) os << r.result.sample.c[static_cast<std::size_t>(i)];
    }
    if (model.observable) {
      os << ",";
      if (r.observable) os << *r.observable;
    }
    os << "\n";
  }

  auto tau = csv_detail::moments(res.records, [](const RunRecord& r) -> std::optional<double> {
    if (!r.result.coupled) return std::nullopt;
    return static_cast<double>(r.result.coupling_time);
  });
  auto work = csv_detail::moments(res.records, [](const RunRecord& r) -> std::optional<double> {
    return static_cast<double>(r.result.work);
  });
  std::vector<csv_detail::MeanCi> comps;
  for (int i = 0; i < d; ++i)
    comps.push_back(
        csv_detail::moments(res.records, [i](const RunRecord& r) -> std::optional<double> {
          if (!r.result.coupled) return std::nullopt;
          return static_cast<double>(r.result.sample.c[static_cast<std::size_t>(i)]);
        }));
  auto obs = csv_detail::moments(res.records, [](const RunRecord& r) -> std::optional<double> {
    if (!r.observable) return std::nullopt;
    return static_cast<double>(*r.observable);
  });

  os << "mean,," << fmt(tau.mean) << "," << fmt(work.mean) << "," << res.censored();
  for (const auto& c : comps) os << "," << fmt(c.mean);
  if (model.observable) os << "," << fmt(obs.mean);
  os << "\n";
  os << "ci95_half,," << fmt(tau.ci) << "," << fmt(work.ci) << ",";
  for (const auto& c : comps) os << "," << fmt(c.ci);
  if (model.observable) os << "," << fmt(obs.ci);
  os << "\n";
}

// Aggregate statistics plus the exact coupling-time histogram.
inline void write_stats_csv(std::ostream& os, const std::string& algo,
                            const CouplingStats& st) {
  using csv_detail::fmt;
  os << "algo,runs,censored,mean,variance,ci95_half,mean_work\n";
  os << algo << "," << st.runs << "," << st.censored << "," << fmt(st.mean) << ","
     << fmt(st.variance) << "," << fmt(st.ci95_half) << "," << fmt(st.mean_work) << "\n";
  os << "coupling_time,count\n";
  for (const auto& [value, count] : st.histogram) os << value << "," << count << "\n";
}

}  // namespace cftp
