// Command-line front end: simulate, fit, summarize, diag.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epibda/config.hpp"
#include "epibda/diagnostics.hpp"
#include "epibda/engine.hpp"
#include "epibda/io.hpp"
#include "epibda/simulate.hpp"

namespace fs = std::filesystem;
using namespace epibda;

namespace {

const std::vector<std::string> kParamColumns = {"beta", "gamma", "mu", "rho", "phi", "p_S", "p_E", "p_I", "p_R"};
const std::vector<double> kLevels = {0.025, 0.5, 0.975};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<std::string> data;
  std::string out_dir = ".";
};

RunConfig load_run_config(const CommonOptions& opts) {
  if (opts.config_path.empty()) throw std::invalid_argument("--config is required");
  Config config = Config::load(opts.config_path);
  if (opts.seed) config.set("seed", std::to_string(*opts.seed));
  if (opts.chains) config.set("chains", std::to_string(*opts.chains));
  if (opts.data) config.set("data", fs::absolute(*opts.data).string());
  return parse_run_config(config);
}

std::vector<double> observation_grid(double start, double end, double interval) {
  std::vector<double> grid;
  const long steps = std::lround(std::floor((end - start) / interval + 1e-9));
  for (long k = 0; k <= steps; ++k) grid.push_back(start + static_cast<double>(k) * interval);
  return grid;
}

int cmd_simulate(const CommonOptions& opts) {
  const RunConfig run = load_run_config(opts);
  const ModelSpec model = run.model_spec();
  const SimulationConfig& sim = run.sim;
  if (!(sim.end > sim.start)) throw std::invalid_argument("simulation needs sim.beta, ... and sim.end > sim.start");
  if (run.population <= 0) throw std::invalid_argument("simulation needs a positive 'population'");
  validate(sim.truth, model, run.emission);

  Rng rng = make_rng(run.seed, 0);
  std::vector<int> counts = sim.initial_counts;
  if (counts.empty()) counts = multinomial(rng, run.population, sim.truth.p_init);
  int total = 0;
  for (int c : counts) total += c;
  if (static_cast<int>(counts.size()) != model.num_states() || total != run.population) {
    throw std::invalid_argument("sim.initial_counts must have one entry per state and sum to the population");
  }

  EpochSchedule schedule = EpochSchedule::constant(sim.truth, sim.start, sim.end);
  if (!sim.epoch_boundaries.empty()) schedule = EpochSchedule{sim.epoch_boundaries, sim.epoch_parameters};
  const LumpedPath path = gillespie_simulate(model, schedule, counts, rng);
  const PopulationHistory history = disaggregate(model, path, rng);
  const auto grid = observation_grid(schedule.start(), schedule.end(), sim.obs_interval);
  const Dataset data = sample_observations(history, model, grid, sim.truth, run.emission, rng);

  fs::create_directories(opts.out_dir);
  write_dataset_csv((fs::path(opts.out_dir) / "dataset.csv").string(), data);
  write_trajectory_csv((fs::path(opts.out_dir) / "trajectory.csv").string(), path, model);
  std::cout << "simulated " << path.events.size() << " events; wrote " << data.size() << " observations to "
            << opts.out_dir << "\n";
  return 0;
}

int cmd_fit(const CommonOptions& opts) {
  const RunConfig run = load_run_config(opts);
  const ModelSpec model = run.model_spec();
  if (run.data_path.empty()) throw std::invalid_argument("fit needs a 'data' key");
  if (run.population <= 0) throw std::invalid_argument("fit needs a positive 'population'");
  const Dataset data = read_dataset_csv(run.data_path, run.population);

  const auto chains = run_chains(run, data);
  fs::create_directories(opts.out_dir);
  std::vector<PopulationHistory> pooled;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    const auto& c = chains[k];
    const std::string suffix = std::to_string(k) + ".csv";
    write_chain_csv((fs::path(opts.out_dir) / ("chain_" + suffix)).string(), c, model);
    if (!c.snapshots.empty()) {
      write_snapshot_csv((fs::path(opts.out_dir) / ("snapshots_" + suffix)).string(), c, model, data.times);
      pooled.insert(pooled.end(), c.snapshots.begin(), c.snapshots.end());
    }
    std::cout << "chain " << k << ": " << c.draws.size() << " draws, " << std::fixed << std::setprecision(1)
              << c.seconds << " s";
    if (c.proposals > 0) {
      std::cout << ", acceptance " << std::setprecision(3)
                << static_cast<double>(c.accepted) / static_cast<double>(c.proposals);
    }
    if (c.hmm_failures > 0) std::cout << ", " << c.hmm_failures << " proposals without a data-compatible state";
    if (c.filter_runs > 0) std::cout << ", " << c.degenerate_runs << "/" << c.filter_runs << " degenerate filter runs";
    std::cout << std::defaultfloat << "\n";
  }
  if (!pooled.empty()) {
    const auto rows = summarize_latent(pooled, data.times, kLevels);
    write_latent_summary_csv((fs::path(opts.out_dir) / "latent_summary.csv").string(), rows, model, kLevels);
  }
  return 0;
}

std::vector<fs::path> matching_files(const std::string& dir, const std::string& prefix) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw std::runtime_error("no " + prefix + "*.csv files in '" + dir + "'");
  return out;
}

bool usable(const std::vector<double>& column) {
  return std::any_of(column.begin(), column.end(), [](double v) { return !std::isnan(v); });
}

int cmd_summarize(const CommonOptions& opts, std::optional<int> population) {
  std::map<std::string, std::vector<double>> pooled;
  for (const auto& file : matching_files(opts.out_dir, "chain_")) {
    const CsvTable table = read_csv_table(file.string());
    for (const auto& name : kParamColumns) {
      if (!table.has(name) || !usable(table.column(name))) continue;
      auto& dst = pooled[name];
      dst.insert(dst.end(), table.column(name).begin(), table.column(name).end());
    }
  }
  if (population && pooled.count("beta") && pooled.count("mu")) {
    auto& r0 = pooled["R0"];
    for (std::size_t i = 0; i < pooled["beta"].size(); ++i) r0.push_back(pooled["beta"][i] * *population / pooled["mu"][i]);
  }
  if (pooled.count("mu")) {
    auto& period = pooled["infectious_period"];
    for (double m : pooled["mu"]) period.push_back(1.0 / m);
  }

  const fs::path summary_path = fs::path(opts.out_dir) / "posterior_summary.csv";
  std::ofstream out(summary_path);
  out << std::setprecision(17) << "parameter,q025,q50,q975,mean,sd\n";
  std::cout << std::left << std::setw(18) << "parameter" << std::setw(14) << "median" << "95% interval\n";
  for (const auto& [name, values] : pooled) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    const double lo = empirical_quantile(values, 0.025);
    const double med = empirical_quantile(values, 0.5);
    const double hi = empirical_quantile(values, 0.975);
    out << name << ',' << lo << ',' << med << ',' << hi << ',' << mean << ',' << sd << '\n';
    std::cout << std::setw(18) << name << std::setw(14) << std::setprecision(6) << med << "(" << lo << ", " << hi
              << ")\n";
  }

  std::vector<fs::path> snapshot_files;
  for (const auto& entry : fs::directory_iterator(opts.out_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snapshots_", 0) == 0) snapshot_files.push_back(entry.path());
  }
  std::sort(snapshot_files.begin(), snapshot_files.end());
  if (!snapshot_files.empty()) {
    std::vector<std::string> states;
    std::vector<double> grid;
    std::vector<std::vector<std::vector<int>>> counts;
    for (const auto& file : snapshot_files) {
      const CsvTable table = read_csv_table(file.string());
      states.assign(table.header.begin() + 2, table.header.end());
      const auto& iteration = table.column("iteration");
      const auto& time = table.column("time");
      for (std::size_t r = 0; r < table.rows(); ++r) {
        if (r == 0 || iteration[r] != iteration[r - 1]) counts.emplace_back();
        std::vector<int> row;
        for (std::size_t k = 2; k < table.header.size(); ++k) row.push_back(static_cast<int>(table.columns[k][r]));
        counts.back().push_back(std::move(row));
        if (counts.size() == 1) grid.push_back(time[r]);
      }
    }
    const auto rows = summarize_counts(counts, grid, kLevels);
    std::ofstream latent(fs::path(opts.out_dir) / "latent_summary.csv");
    latent << std::setprecision(17) << "time,state,q025,q50,q975\n";
    for (const auto& row : rows) {
      latent << row.time << ',' << states[static_cast<std::size_t>(row.state)];
      for (double q : row.quantiles) latent << ',' << q;
      latent << '\n';
    }
  }
  return 0;
}

int cmd_diag(const CommonOptions& opts) {
  const fs::path diag_path = fs::path(opts.out_dir) / "diagnostics.csv";
  std::ofstream out(diag_path);
  out << std::setprecision(17) << "chain,parameter,draws,ess,constant\n";
  std::cout << std::left << std::setw(24) << "chain" << std::setw(12) << "parameter" << std::setw(10) << "draws"
            << "ESS\n";
  for (const auto& file : matching_files(opts.out_dir, "chain_")) {
    const CsvTable table = read_csv_table(file.string());
    std::vector<std::string> columns = {"logpost"};
    columns.insert(columns.end(), kParamColumns.begin(), kParamColumns.end());
    for (const auto& name : columns) {
      if (!table.has(name) || !usable(table.column(name)) || table.rows() < 10) continue;
      const EssResult result = ess(table.column(name));
      out << file.filename().string() << ',' << name << ',' << table.rows() << ',' << result.ess << ','
          << (result.constant ? 1 : 0) << '\n';
      std::cout << std::setw(24) << file.filename().string() << std::setw(12) << name << std::setw(10) << table.rows()
                << std::setprecision(1) << std::fixed << result.ess << std::defaultfloat
                << (result.constant ? "  (constant trace)" : "") << "\n";
    }
    if (table.has("accept_rate") && table.rows() > 0) {
      std::cout << std::setw(24) << file.filename().string() << "final path acceptance rate "
                << table.column("accept_rate").back() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian data augmentation for stochastic epidemic models"};
  app.require_subcommand(1);
  CommonOptions opts;
  std::optional<int> population;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", opts.config_path, "Run configuration file");
    if (needs_config) cfg->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Override the configured seed");
    sub->add_option("--chains", opts.chains, "Override the configured number of chains");
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate an epidemic and a prevalence dataset");
  add_common(simulate, true);
  auto* fit = app.add_subcommand("fit", "Fit a model to prevalence data");
  add_common(fit, true);
  fit->add_option("--data", opts.data, "Dataset CSV overriding the configured 'data' key")->check(CLI::ExistingFile);
  auto* summarize = app.add_subcommand("summarize", "Posterior and latent summaries of a finished fit");
  add_common(summarize, false);
  summarize->add_option("--population", population, "Population size for R0 = beta * N / mu");
  auto* diag = app.add_subcommand("diag", "Effective sample sizes of a finished fit");
  add_common(diag, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (simulate->parsed()) return cmd_simulate(opts);
    if (fit->parsed()) return cmd_fit(opts);
    if (summarize->parsed()) {
      if (!population && !opts.config_path.empty()) {
        const auto run = parse_run_config(Config::load(opts.config_path));
        if (run.population > 0) population = run.population;
      }
      return cmd_summarize(opts, population);
    }
    if (diag->parsed()) return cmd_diag(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
