// Experiment driver: draws exact stationary samples from lattice Markov
// chain models, measures coupling times, sweeps model parameters and
// validates model files. CSV output is byte-stable for a fixed
// (model, seed, replication count).

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cftp/experiment.hpp"
#include "cftp/model_config.hpp"
#include "cftp/sampler.hpp"

namespace {

using namespace cftp;

struct CommonFlags {
  std::string model_path;
  std::string algo;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  std::string mode;
  std::int64_t threshold = -1;
  std::int64_t state_cap = -1;
  std::int64_t horizon_cap = -1;
  int jobs = 0;
  std::string out;
  bool allow_censored = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_out) {
  cmd->add_option("--model", f.model_path, "model file (JSON)")->required();
  cmd->add_option("--algo", f.algo, "psa, epsa or split (default: the model's choice)");
  cmd->add_option("--samples", f.samples, "number of independent replications");
  cmd->add_option("--seed", f.seed, "master seed; per-run seeds derive from it");
  cmd->add_option("--mode", f.mode, "envelope mode: lp (exact) or fast");
  cmd->add_option("--threshold", f.threshold, "interval width that triggers splitting");
  cmd->add_option("--state-cap", f.state_cap, "most states the split phase may track");
  cmd->add_option("--horizon-cap", f.horizon_cap, "largest backward horizon before censoring");
  cmd->add_option("--jobs", f.jobs, "worker threads (default: hardware parallelism)");
  auto* out = cmd->add_option("--out", f.out, needs_out ? "output prefix" : "output CSV path");
  if (needs_out) out->required();
  cmd->add_flag("--allow-censored", f.allow_censored,
                "exit 0 even when some replications hit the horizon cap");
}

Algorithm algo_of(const std::string& name) {
  if (name == "psa") return Algorithm::psa;
  if (name == "epsa") return Algorithm::epsa;
  if (name == "split") return Algorithm::split;
  throw ConfigError("unknown algorithm '" + name + "' (want psa, epsa or split)");
}

void apply_overrides(Model& model, const CommonFlags& f) {
  if (!f.algo.empty()) model.algorithm = algo_of(f.algo);
  if (!f.mode.empty()) {
    if (f.mode == "lp")
      model.options.mode = EnvelopeMode::lp_exact;
    else if (f.mode == "fast")
      model.options.mode = EnvelopeMode::minkowski_fast;
    else
      throw ConfigError("unknown mode '" + f.mode + "' (want lp or fast)");
  }
  if (f.threshold >= 0) model.options.split_threshold = f.threshold;
  if (f.state_cap >= 0) model.options.state_cap = static_cast<std::uint64_t>(f.state_cap);
  if (f.horizon_cap >= 0) model.options.horizon_cap = static_cast<std::uint64_t>(f.horizon_cap);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << bytes;
}

int finish(const CommonFlags& f, const ExperimentResult& res) {
  if (res.censored() > 0 && !f.allow_censored) {
    std::cerr << res.censored() << " of " << res.records.size()
              << " replications hit the horizon cap; envelopes may never couple on this model — "
                 "try --algo split, a larger --horizon-cap, or --allow-censored\n";
    return 2;
  }
  return 0;
}

int cmd_run(const CommonFlags& f) {
  Model model = load_model(f.model_path);
  apply_overrides(model, f);
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_experiment(model, model.algorithm, f.samples, f.seed, f.jobs);
  const double wall_us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream csv;
  write_run_csv(csv, model, res);
  if (f.out.empty())
    std::cout << csv.str();
  else
    write_file(f.out, csv.str());
  std::cerr << name(model.algorithm) << ": " << f.samples << " samples, mean coupling time "
            << res.stats.mean << " (censored " << res.censored() << "), " << wall_us / 1000.0
            << " ms total\n";
  return finish(f, res);
}

int cmd_coupling_time(const CommonFlags& f) {
  Model model = load_model(f.model_path);
  apply_overrides(model, f);
  const ExperimentResult res = run_experiment(model, model.algorithm, f.samples, f.seed, f.jobs);
  std::ostringstream csv;
  write_stats_csv(csv, name(model.algorithm), res.stats);
  if (f.out.empty())
    std::cout << csv.str();
  else
    write_file(f.out, csv.str());
  return finish(f, res);
}

int cmd_sweep(const CommonFlags& f) {
  const json root = load_json(f.model_path);
  const Model base = parse_model(root);
  if (!base.sweep) throw ConfigError("model file has no sweep section");
  std::vector<std::string> algos;
  {
    std::stringstream ss(f.algo.empty() ? std::string(name(base.algorithm)) : f.algo);
    std::string item;
    while (std::getline(ss, item, ',')) algos.push_back(item);
  }
  const auto points = expand_sweep(root);
  CommonFlags overrides = f;
  overrides.algo.clear();  // the per-algorithm loop below sets it
  std::ostringstream summary;
  summary << "point,value,algo,runs,censored,mean_coupling_time,ci95_half,mean_work\n";
  int worst = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Model model = parse_model(points[i]);
    apply_overrides(model, overrides);
    for (const auto& algo_name : algos) {
      model.algorithm = algo_of(algo_name);
      const ExperimentResult res =
          run_experiment(model, model.algorithm, f.samples, f.seed, f.jobs);
      std::ostringstream csv;
      write_run_csv(csv, model, res);
      write_file(f.out + ".point" + std::to_string(i) + "." + algo_name + ".csv", csv.str());
      summary << i << "," << base.sweep->labels[i] << "," << algo_name << ","
              << res.records.size() << "," << res.censored() << ","
              << csv_detail::fmt(res.stats.mean) << "," << csv_detail::fmt(res.stats.ci95_half)
              << "," << csv_detail::fmt(res.stats.mean_work) << "\n";
      worst = std::max(worst, finish(f, res));
      std::cerr << "point " << i << " (" << base.sweep->labels[i] << ") " << algo_name
                << ": mean coupling time " << res.stats.mean << " (censored " << res.censored()
                << ")\n";
    }
  }
  write_file(f.out + ".summary.csv", summary.str());
  return worst;
}

int cmd_validate(const std::string& path) {
  const Model model = load_model(path);
  const auto& table = model.table;
  const auto& space = table.space();
  std::cout << "model ok: dimension " << space.dim() << ", capacities (";
  for (int i = 0; i < space.dim(); ++i) std::cout << (i ? "," : "") << space.capacity(i);
  std::cout << ")";
  if (const auto n = space.cardinality()) std::cout << ", " << *n << " states";
  std::cout << "\n";
  std::cout << "events: " << table.size() << ", total rate " << to_string(table.total_rate())
            << "\n";
  for (int i = 0; i < table.size(); ++i) {
    const auto& e = table.event(i);
    std::cout << "  " << e.label << ": rate " << to_string(e.rate);
    if (std::holds_alternative<PiecewiseEvent>(e.semantics)) {
      const auto& pw = std::get<PiecewiseEvent>(e.semantics);
      std::cout << ", piecewise: H=" << pw.hyperplane_count() << " K=" << pw.zone_count()
                << " graph nodes=" << pw.internal_node_count();
      if (pw.dropped_zone_count() > 0)
        std::cout << " (dropped " << pw.dropped_zone_count() << " empty)";
    } else {
      const auto& a = std::get<Ashe>(e.semantics);
      std::cout << ", shift (";
      for (int j = 0; j < a.dim(); ++j)
        std::cout << (j ? "," : "") << a.shift()[static_cast<std::size_t>(j)];
      std::cout << "), " << a.blocking().size() << " blocking pairs";
    }
    std::cout << "\n";
  }
  std::cout << "sampler: " << name(model.algorithm)
            << (model.options.mode == EnvelopeMode::lp_exact ? ", lp envelopes"
                                                             : ", fast envelopes")
            << ", horizon cap " << model.options.horizon_cap << "\n";
  if (model.observable) std::cout << "observable: attached\n";
  if (model.sweep)
    std::cout << "sweep: " << model.sweep->pointer << " over " << model.sweep->values.size()
              << " values\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perfect sampler for finite lattice Markov chains"};
  app.require_subcommand(1);

  CommonFlags run_flags, stat_flags, sweep_flags;
  std::string validate_path;

  CLI::App* run = app.add_subcommand("run", "draw samples and write one CSV row per run");
  add_common(run, run_flags, false);
  CLI::App* sample = app.add_subcommand("sample", "alias of run");
  add_common(sample, run_flags, false);
  CLI::App* stats =
      app.add_subcommand("coupling-time", "aggregate coupling-time statistics and histogram");
  add_common(stats, stat_flags, false);
  CLI::App* sweep = app.add_subcommand("sweep", "rerun the model over its sweep grid");
  add_common(sweep, sweep_flags, true);
  CLI::App* validate = app.add_subcommand("validate", "build the model and report its shape");
  validate->add_option("--model", validate_path, "model file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || sample->parsed()) return cmd_run(run_flags);
    if (stats->parsed()) return cmd_coupling_time(stat_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (validate->parsed()) return cmd_validate(validate_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const OracleLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SplitCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
